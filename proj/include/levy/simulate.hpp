#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "levy/linalg.hpp"
#include "levy/measure.hpp"
#include "levy/psi.hpp"
#include "levy/rng.hpp"
#include "levy/triplet.hpp"
#include "levy/weight.hpp"

namespace levy {

/// How the sub-delta jump spectrum is approximated:
///   discard          - drop it entirely (biased drift; kept for error studies),
///   compensate_drift - keep only its compensator, i.e. simulate the exact
///                      law of the delta-truncated triplet,
///   gaussian_approx  - additionally add a Brownian motion matching the
///                      second moment int_{|y|<delta} y y^T nu(dy).
enum class SmallJumpMode { discard, compensate_drift, gaussian_approx };

inline std::string to_string(SmallJumpMode m) {
    switch (m) {
        case SmallJumpMode::discard: return "discard";
        case SmallJumpMode::compensate_drift: return "compensate_drift";
        case SmallJumpMode::gaussian_approx: return "gaussian_approx";
    }
    return "?";
}

struct SimConfig {
    double horizon = 1.0;
    double dt = 0.0;          // <= 0 selects the default 2^-10 * horizon
    long paths = 10000;
    double delta = 0.1;       // small-jump cutoff, in (0, 1]
    SmallJumpMode mode = SmallJumpMode::gaussian_approx;
    std::uint64_t seed = 1;
    int threads = 1;

    /// Grid cells, rounded up to a power of two so that halving dt refines
    /// the same dyadic skeleton (the Brownian bridge draws are keyed by
    /// dyadic position and survive refinement unchanged).
    int steps() const {
        const double want = dt > 0.0 ? horizon / dt : 1024.0;
        int s = 1;
        while (s < want && s < (1 << 22)) s <<= 1;
        return s;
    }
    double dt_eff() const { return horizon / steps(); }

    void validate() const {
        if (!(horizon > 0.0)) throw std::invalid_argument("sim: horizon must be > 0");
        if (!(delta > 0.0 && delta <= 1.0))
            throw std::invalid_argument("sim: delta must be in (0, 1]");
        if (paths < 1) throw std::invalid_argument("sim: need at least one path");
    }
};

struct JumpRecord {
    double time;
    Vec size;
};

/// Seeded collection of path skeletons: states on the dyadic grid plus exact
/// jump records for all simulated jumps (|y| >= delta). Immutable once built.
struct PathEnsemble {
    int dim = 1;
    SimConfig config;
    std::vector<double> times;                    // grid, size K+1
    std::vector<double> states;                   // [path][k][i] flattened
    std::vector<std::vector<JumpRecord>> jumps;   // per path, time-sorted
    std::vector<double> running_max_abs;          // per path, over [0, T]

    long paths() const { return config.paths; }
    int grid_size() const { return static_cast<int>(times.size()); }

    const double* state_ptr(long p, int k) const {
        return &states[(static_cast<std::size_t>(p) * grid_size() + k) * dim];
    }
    Vec state(long p, int k) const {
        const double* s = state_ptr(p, k);
        return Vec(s, s + dim);
    }
    double state1(long p, int k) const { return *state_ptr(p, k); }
};

namespace detail {

/// Piecewise-linear inverse CDF for the radial mass of one density component
/// (one side in d=1), truncated at the cutoff.
struct RadialTable {
    std::vector<double> r;
    std::vector<double> cum;
    double total = 0.0;

    double sample(double u) const {
        const double target = u * total;
        auto it = std::lower_bound(cum.begin(), cum.end(), target);
        const std::size_t i = it == cum.begin() ? 1 : (it - cum.begin());
        const std::size_t hi = std::min(i, cum.size() - 1);
        const double c0 = cum[hi - 1], c1 = cum[hi];
        const double w = c1 > c0 ? (target - c0) / (c1 - c0) : 0.5;
        return r[hi - 1] + w * (r[hi] - r[hi - 1]);
    }
};

template <class RadialMass>
RadialTable build_radial_table(RadialMass&& mass_density, double lo, double hi) {
    RadialTable tab;
    tab.r.push_back(lo);
    tab.cum.push_back(0.0);
    double a = lo;
    double prev_inc = -1.0;
    for (int oct = 0; oct < 80 && a < hi; ++oct) {
        const double b = std::min(2.0 * a, hi);
        double oct_mass = 0.0;
        const int sub = 32;
        for (int i = 0; i < sub; ++i) {
            const double ra = a + (b - a) * i / sub;
            const double rb = a + (b - a) * (i + 1) / sub;
            const double m = quad::integrate(mass_density, ra, rb, 8);
            oct_mass += m;
            tab.r.push_back(rb);
            tab.cum.push_back(tab.cum.back() + m);
        }
        a = b;
        if (std::isfinite(hi) && a >= hi) break;
        if (prev_inc >= 0.0 && oct_mass < 1e-12 * tab.cum.back() &&
            oct_mass <= prev_inc)
            break;
        prev_inc = oct_mass;
    }
    tab.total = tab.cum.back();
    return tab;
}

/// Precomputed sampling plan for jumps with |y| >= delta plus the drift and
/// covariance corrections of the chosen small-jump mode.
struct SamplerPlan {
    struct Component {
        bool is_atom = false;
        Vec atom_position;
        double side = 1.0;        // d=1: +-1
        int density_index = -1;
        RadialTable table;
        double rate = 0.0;
    };
    std::vector<Component> components;
    std::vector<double> cum_rates;
    double total_rate = 0.0;
    Vec drift_eff;            // b minus the [delta,1) compensator when active
    Mat diffusion_sqrt;       // sqrt(Q [+ small-jump covariance])
    Vec small_var_diag;       // diagonal of int_{|y|<delta} y y^T nu(dy)

    Vec sample_jump(const LevyMeasure& nu, int dim, rng::Stream& s) const {
        const double u = s.next_u01() * total_rate;
        const std::size_t idx =
            std::upper_bound(cum_rates.begin(), cum_rates.end(), u) - cum_rates.begin();
        const Component& c = components[std::min(idx, components.size() - 1)];
        if (c.is_atom) return c.atom_position;
        const double radius = c.table.sample(s.next_u01());
        Vec y(static_cast<std::size_t>(dim), 0.0);
        if (dim == 1) {
            y[0] = c.side * radius;
        } else if (dim == 2) {
            const double th = 2.0 * std::numbers::pi * s.next_u01();
            y[0] = radius * std::cos(th);
            y[1] = radius * std::sin(th);
        } else {
            const double z = 2.0 * s.next_u01() - 1.0;
            const double th = 2.0 * std::numbers::pi * s.next_u01();
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            y[0] = radius * rho * std::cos(th);
            y[1] = radius * rho * std::sin(th);
            y[2] = radius * z;
        }
        return y;
    }
};

inline SamplerPlan build_sampler_plan(const LevyTriplet& t, const SimConfig& cfg) {
    SamplerPlan plan;
    const int dim = t.dim;
    const double delta = cfg.delta;

    for (const Atom& a : t.nu.atoms) {
        if (norm2(a.position) >= delta) {
            SamplerPlan::Component c;
            c.is_atom = true;
            c.atom_position = a.position;
            c.rate = a.mass;
            plan.components.push_back(std::move(c));
        }
    }
    for (std::size_t di = 0; di < t.nu.densities.size(); ++di) {
        const ParametricDensity& d = t.nu.densities[di];
        const double lo = std::max(delta, d.r_inner);
        const double hi = d.r_outer;
        if (lo >= hi) continue;
        if (dim == 1) {
            for (double side : {1.0, -1.0}) {
                SamplerPlan::Component c;
                c.side = side;
                c.density_index = static_cast<int>(di);
                c.table = build_radial_table(
                    [&d, side](double r) { return d(Vec{side * r}); }, lo, hi);
                c.rate = c.table.total;
                if (c.rate > 0.0) plan.components.push_back(std::move(c));
            }
        } else {
            if (d.family == DensityFamily::gaussian && norm2(d.mean) > 0.0)
                throw std::invalid_argument(
                    "simulate: non-centered gaussian jumps need d=1");
            if (d.family == DensityFamily::tabulated)
                throw std::invalid_argument(
                    "simulate: tabulated densities are sampled in d=1 only");
            const double surface =
                dim == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi;
            SamplerPlan::Component c;
            c.density_index = static_cast<int>(di);
            c.table = build_radial_table(
                [&d, dim, surface](double r) {
                    Vec y(static_cast<std::size_t>(dim), 0.0);
                    y[0] = r;
                    return d(y) * surface * std::pow(r, dim - 1);
                },
                lo, hi);
            c.rate = c.table.total;
            if (c.rate > 0.0) plan.components.push_back(std::move(c));
        }
    }

    plan.total_rate = 0.0;
    for (const auto& c : plan.components) {
        plan.total_rate += c.rate;
        plan.cum_rates.push_back(plan.total_rate);
    }

    // Drift correction: jumps in [delta, 1) are simulated raw but appear
    // compensated in the exponent's cut-off convention.
    plan.drift_eff = t.b;
    if (cfg.mode != SmallJumpMode::discard && delta < 1.0) {
        for (int i = 0; i < dim; ++i) {
            auto comp = nu_integrate(t.nu, [i](const Vec& y) { return y[i]; }, delta, 1.0);
            plan.drift_eff[i] -= comp.value;
        }
    }

    Mat cov = t.Q;
    plan.small_var_diag.assign(static_cast<std::size_t>(dim), 0.0);
    if (cfg.mode == SmallJumpMode::gaussian_approx) {
        for (int i = 0; i < dim; ++i)
            for (int k = i; k < dim; ++k) {
                auto m = nu_integrate(
                    t.nu, [i, k](const Vec& y) { return y[i] * y[k]; }, 0.0, delta);
                cov(i, k) += m.value;
                if (k != i) cov(k, i) += m.value;
                if (k == i) plan.small_var_diag[i] = m.value;
            }
    } else {
        for (int i = 0; i < dim; ++i) {
            auto m = nu_integrate(t.nu, [i](const Vec& y) { return y[i] * y[i]; }, 0.0,
                                  delta);
            plan.small_var_diag[i] = m.value;
        }
    }
    plan.diffusion_sqrt = sym_sqrt(cov);
    return plan;
}

constexpr std::uint64_t kStreamJumps = 1;
constexpr std::uint64_t kStreamBridgeBase = 16;

/// Standard Brownian bridge on the dyadic grid: W[j] at level L for K = 2^L
/// cells. Draws are keyed by (component, level, position), so refining the
/// grid leaves the coarse skeleton bit-identical.
inline void brownian_bridge(std::uint64_t seed, std::uint64_t path, int component,
                            double horizon, int K, std::vector<double>& w) {
    w.assign(static_cast<std::size_t>(K) + 1, 0.0);
    const std::uint64_t stream = kStreamBridgeBase + static_cast<std::uint64_t>(component);
    auto draw = [&](int level, std::uint64_t j) {
        const std::uint64_t ctr = (static_cast<std::uint64_t>(level) << 32) | j;
        return rng::keyed_normal(seed, path, stream, ctr);
    };
    w[K] = std::sqrt(horizon) * draw(0, 0);
    int level = 1;
    for (int span = K; span > 1; span >>= 1, ++level) {
        const double sd = std::sqrt(horizon / std::pow(2.0, level + 1));
        std::uint64_t j = 0;
        for (int m = span / 2; m < K; m += span, ++j)
            w[m] = 0.5 * (w[m - span / 2] + w[m + span / 2]) + sd * draw(level, j);
    }
}

}  // namespace detail

/// Simulates N independent paths of the process on the dyadic grid: exact
/// drift and Gaussian parts, compound-Poisson jumps with |y| >= delta, and
/// the configured small-jump approximation. Identical seeds give
/// bit-identical ensembles for any thread count.
inline PathEnsemble sample_paths(const LevyTriplet& t, const SimConfig& cfg) {
    cfg.validate();
    detail::SamplerPlan plan = detail::build_sampler_plan(t, cfg);

    const int K = cfg.steps();
    const double dt = cfg.dt_eff();
    const double T = cfg.horizon;
    if (plan.total_rate * dt > 1e3)
        throw std::invalid_argument(
            "simulate: more than 1e3 expected jumps per grid step; raise delta or "
            "shrink dt");

    PathEnsemble ens;
    ens.dim = t.dim;
    ens.config = cfg;
    ens.times.resize(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) ens.times[k] = T * k / K;
    ens.states.assign(static_cast<std::size_t>(cfg.paths) * (K + 1) * t.dim, 0.0);
    ens.jumps.resize(static_cast<std::size_t>(cfg.paths));
    ens.running_max_abs.assign(static_cast<std::size_t>(cfg.paths), 0.0);

    auto run_block = [&](long p_begin, long p_end) {
        std::vector<std::vector<double>> w(static_cast<std::size_t>(t.dim));
        for (long p = p_begin; p < p_end; ++p) {
            // Jumps: count, times, sizes from one sequential per-path stream.
            rng::Stream js{cfg.seed, static_cast<std::uint64_t>(p), detail::kStreamJumps};
            std::vector<JumpRecord>& jrec = ens.jumps[static_cast<std::size_t>(p)];
            const long njump = js.next_poisson(plan.total_rate * T);
            jrec.reserve(static_cast<std::size_t>(njump));
            for (long j = 0; j < njump; ++j) {
                const double time = T * js.next_u01();
                jrec.push_back({time, plan.sample_jump(t.nu, t.dim, js)});
            }
            std::sort(jrec.begin(), jrec.end(),
                      [](const JumpRecord& a, const JumpRecord& b) {
                          return a.time < b.time;
                      });

            for (int c = 0; c < t.dim; ++c)
                detail::brownian_bridge(cfg.seed, static_cast<std::uint64_t>(p), c, T, K,
                                        w[static_cast<std::size_t>(c)]);

            double* out = &ens.states[(static_cast<std::size_t>(p) * (K + 1)) * t.dim];
            Vec jump_sum(static_cast<std::size_t>(t.dim), 0.0);
            std::size_t jnext = 0;
            double max_abs = 0.0;
            Vec xc_prev(static_cast<std::size_t>(t.dim), 0.0);
            for (int k = 0; k <= K; ++k) {
                const double time = ens.times[static_cast<std::size_t>(k)];
                Vec xc(static_cast<std::size_t>(t.dim));
                for (int i = 0; i < t.dim; ++i) {
                    double gauss = 0.0;
                    for (int c = 0; c < t.dim; ++c)
                        gauss += plan.diffusion_sqrt(i, c) *
                                 w[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
                    xc[i] = plan.drift_eff[i] * time + gauss;
                }
                // Jumps in (t_{k-1}, t_k]: record running max at pre/post states
                // (continuous part linearly interpolated within the cell).
                while (jnext < jrec.size() && jrec[jnext].time <= time) {
                    const JumpRecord& jr = jrec[jnext];
                    const double frac = k == 0 ? 0.0 : (jr.time - (time - dt)) / dt;
                    Vec pre(static_cast<std::size_t>(t.dim));
                    for (int i = 0; i < t.dim; ++i)
                        pre[i] = xc_prev[i] + frac * (xc[i] - xc_prev[i]) + jump_sum[i];
                    max_abs = std::max(max_abs, norm2(pre));
                    for (int i = 0; i < t.dim; ++i) {
                        jump_sum[i] += jr.size[i];
                        pre[i] += jr.size[i];
                    }
                    max_abs = std::max(max_abs, norm2(pre));
                    ++jnext;
                }
                double* slot = out + static_cast<std::size_t>(k) * t.dim;
                double norm_sq = 0.0;
                for (int i = 0; i < t.dim; ++i) {
                    slot[i] = xc[i] + jump_sum[i];
                    norm_sq += slot[i] * slot[i];
                }
                max_abs = std::max(max_abs, std::sqrt(norm_sq));
                xc_prev = xc;
            }
            ens.running_max_abs[static_cast<std::size_t>(p)] = max_abs;
        }
    };

    const int nthreads = std::max(1, cfg.threads);
    if (nthreads == 1) {
        run_block(0, cfg.paths);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (cfg.paths + nthreads - 1) / nthreads;
        for (int i = 0; i < nthreads; ++i) {
            const long a = i * chunk, b = std::min<long>(cfg.paths, a + chunk);
            if (a >= b) break;
            pool.emplace_back(run_block, a, b);
        }
        for (auto& th : pool) th.join();
    }
    return ens;
}

/// Exponent of the simulated (delta-truncated, mode-adjusted) process;
/// the marginal law of the ensemble matches e^{-t psi_delta(xi)}.
inline Complex truncated_exponent(const LevyTriplet& t, const SimConfig& cfg,
                                  const Vec& xi) {
    const Complex I(0.0, 1.0);
    Complex drift{};
    for (int i = 0; i < t.dim; ++i) drift += xi[i] * t.b[i];
    Complex diff{};
    for (int i = 0; i < t.dim; ++i)
        for (int k = 0; k < t.dim; ++k) diff += xi[i] * t.Q(i, k) * xi[k];

    if (cfg.mode == SmallJumpMode::gaussian_approx) {
        for (int i = 0; i < t.dim; ++i)
            for (int k = 0; k < t.dim; ++k) {
                auto m = nu_integrate(
                    t.nu, [i, k](const Vec& y) { return y[i] * y[k]; }, 0.0, cfg.delta);
                diff += xi[i] * m.value * xi[k];
            }
    }

    const bool compensate = cfg.mode != SmallJumpMode::discard;
    auto mid_integrand = [&](const Vec& y) -> Complex {
        Complex xy{};
        for (int i = 0; i < t.dim; ++i) xy += xi[i] * y[i];
        if (compensate) return detail::one_minus_exp_plus_z(I * xy);
        return 1.0 - std::exp(I * xy);
    };
    auto mid = nu_integrate(t.nu, mid_integrand, cfg.delta, 1.0);
    const Complex local = -I * drift + 0.5 * diff;
    const Complex tail = detail::tail_exponent_real(
        t.nu, xi, 1.0, 1e-6, std::abs(local) + std::abs(mid.value) + 1.0);
    return local + mid.value + tail;
}

/// Hash of the complete ensemble (states, jump records, running maxima);
/// used by the determinism checks.
inline std::uint64_t ensemble_hash(const PathEnsemble& e) {
    std::uint64_t h = fnv1a(e.states.data(), e.states.size() * sizeof(double));
    for (const auto& path : e.jumps)
        for (const JumpRecord& j : path) {
            h = fnv1a(&j.time, sizeof(double), h);
            h = fnv1a(j.size.data(), j.size.size() * sizeof(double), h);
        }
    h = fnv1a(e.running_max_abs.data(), e.running_max_abs.size() * sizeof(double), h);
    return h;
}

/// Walks one path's jump-augmented skeleton in time order. The callback
/// receives (time, state just before the event, state at the event,
/// grid_index): grid nodes carry their index k and equal before/after
/// states, jump events carry grid_index = -1 and differ by the jump.
template <class F>
void walk_augmented(const PathEnsemble& e, long p, F&& f) {
    const int K = e.grid_size() - 1;
    const double dt = e.times[1] - e.times[0];
    const auto& jrec = e.jumps[static_cast<std::size_t>(p)];
    const int d = e.dim;

    Vec jump_sum(static_cast<std::size_t>(d), 0.0);
    std::size_t jnext = 0;
    Vec xc_prev(static_cast<std::size_t>(d), 0.0), xc(static_cast<std::size_t>(d));
    Vec pre(static_cast<std::size_t>(d)), post(static_cast<std::size_t>(d));
    Vec jump_to_node(static_cast<std::size_t>(d));
    for (int k = 0; k <= K; ++k) {
        const double time = e.times[static_cast<std::size_t>(k)];
        const double* s = e.state_ptr(p, k);
        // reconstruct the continuous component at this node
        jump_to_node = jump_sum;
        {
            std::size_t jn = jnext;
            while (jn < jrec.size() && jrec[jn].time <= time) {
                for (int i = 0; i < d; ++i) jump_to_node[i] += jrec[jn].size[i];
                ++jn;
            }
        }
        for (int i = 0; i < d; ++i) xc[i] = s[i] - jump_to_node[i];

        while (jnext < jrec.size() && jrec[jnext].time <= time) {
            const JumpRecord& jr = jrec[jnext];
            const double frac = k == 0 ? 0.0 : (jr.time - (time - dt)) / dt;
            for (int i = 0; i < d; ++i)
                pre[i] = xc_prev[i] + frac * (xc[i] - xc_prev[i]) + jump_sum[i];
            for (int i = 0; i < d; ++i) {
                jump_sum[i] += jr.size[i];
                post[i] = pre[i] + jr.size[i];
            }
            f(jr.time, pre, post, -1);
            ++jnext;
        }
        for (int i = 0; i < d; ++i) pre[i] = s[i];
        f(time, pre, pre, k);
        xc_prev = xc;
    }
}

/// State at an arbitrary time (continuous part linearly interpolated between
/// grid nodes, jumps applied at their exact times).
inline Vec state_at(const PathEnsemble& e, long p, double time) {
    const int K = e.grid_size() - 1;
    const double dt = e.times[1] - e.times[0];
    const double clamped = std::min(std::max(time, 0.0), e.times.back());
    const int k = std::min(static_cast<int>(clamped / dt), K - 1 >= 0 ? K - 1 : 0);
    const int d = e.dim;
    const auto& jrec = e.jumps[static_cast<std::size_t>(p)];

    Vec jump_before_k(static_cast<std::size_t>(d), 0.0),
        jump_before_k1(static_cast<std::size_t>(d), 0.0),
        jump_to_t(static_cast<std::size_t>(d), 0.0);
    for (const JumpRecord& j : jrec) {
        for (int i = 0; i < d; ++i) {
            if (j.time <= e.times[static_cast<std::size_t>(k)]) jump_before_k[i] += j.size[i];
            if (j.time <= e.times[static_cast<std::size_t>(k) + 1])
                jump_before_k1[i] += j.size[i];
            if (j.time <= clamped) jump_to_t[i] += j.size[i];
        }
    }
    const double* s0 = e.state_ptr(p, k);
    const double* s1 = e.state_ptr(p, k + 1);
    const double frac = (clamped - e.times[static_cast<std::size_t>(k)]) / dt;
    Vec out(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        const double xc0 = s0[i] - jump_before_k[i];
        const double xc1 = s1[i] - jump_before_k1[i];
        out[i] = xc0 + frac * (xc1 - xc0) + jump_to_t[i];
    }
    return out;
}

/// Stopping rules evaluable from the path's past only; every rule is capped.
struct StoppingRule {
    enum class Kind { deterministic, exit_ball, level_g, composition };
    Kind kind = Kind::deterministic;
    double cap = 1.0;
    double time = 1.0;        // deterministic
    double radius = 1.0;      // exit_ball
    double threshold = 0.0;   // level_g
    std::function<double(const Vec&)> level_fn;
    std::vector<StoppingRule> parts;

    static StoppingRule at_time(double t, double cap) {
        StoppingRule r;
        r.kind = Kind::deterministic;
        r.time = t;
        r.cap = cap;
        return r;
    }
    static StoppingRule exit_ball(double R, double cap) {
        StoppingRule r;
        r.kind = Kind::exit_ball;
        r.radius = R;
        r.cap = cap;
        return r;
    }
    static StoppingRule level(const WeightFunction& g, double threshold, double cap) {
        StoppingRule r;
        r.kind = Kind::level_g;
        r.level_fn = g.eval;
        r.threshold = threshold;
        r.cap = cap;
        return r;
    }
    static StoppingRule min_of(std::vector<StoppingRule> parts, double cap) {
        StoppingRule r;
        r.kind = Kind::composition;
        r.parts = std::move(parts);
        r.cap = cap;
        return r;
    }

    bool triggered(const Vec& state) const {
        switch (kind) {
            case Kind::exit_ball: return norm2(state) >= radius;
            case Kind::level_g: return level_fn(state) > threshold;
            default: return false;
        }
    }
};

struct StoppedSample {
    double sigma;
    Vec state;  // X_{sigma ^ cap}
};

/// Per-path stopping times and stopped states on the jump-augmented
/// skeleton: first-exit by jump is detected at the exact jump time, not at
/// the next grid node.
inline std::vector<StoppedSample> evaluate_stopping(const PathEnsemble& e,
                                                    const StoppingRule& rule) {
    if (rule.cap > e.times.back() * (1.0 + 1e-12))
        throw std::invalid_argument("stopping rule cap exceeds the ensemble horizon");

    std::vector<StoppedSample> out(static_cast<std::size_t>(e.paths()));
    for (long p = 0; p < e.paths(); ++p) {
        double sigma = rule.cap;
        Vec state;
        bool stopped = false;

        auto probe_primitive = [&](const StoppingRule& r, double t, const Vec& pre,
                                   const Vec& post, double& sig, bool& hit) {
            if (hit) return;
            if (r.kind == StoppingRule::Kind::deterministic) {
                if (t >= r.time) {
                    sig = r.time;
                    hit = true;
                }
                return;
            }
            if (r.triggered(pre) || r.triggered(post)) {
                sig = t;
                hit = true;
            }
        };

        if (rule.kind == StoppingRule::Kind::deterministic) {
            sigma = std::min(rule.time, rule.cap);
        } else if (rule.kind == StoppingRule::Kind::composition) {
            std::vector<double> sig(rule.parts.size(), kInf);
            std::vector<bool> hit(rule.parts.size(), false);
            walk_augmented(e, p, [&](double t, const Vec& pre, const Vec& post, int) {
                if (t > rule.cap) return;
                for (std::size_t i = 0; i < rule.parts.size(); ++i) {
                    double s = sig[i];
                    bool h = hit[i];
                    probe_primitive(rule.parts[i], t, pre, post, s, h);
                    sig[i] = s;
                    hit[i] = h;
                }
            });
            sigma = rule.cap;
            for (std::size_t i = 0; i < rule.parts.size(); ++i) {
                const double cap_i = std::min(rule.parts[i].cap, rule.cap);
                const double s = hit[i] ? std::min(sig[i], cap_i) : cap_i;
                sigma = std::min(sigma, s);
            }
        } else {
            walk_augmented(e, p, [&](double t, const Vec& pre, const Vec& post, int) {
                if (stopped || t > rule.cap) return;
                probe_primitive(rule, t, pre, post, sigma, stopped);
            });
            if (!stopped) sigma = rule.cap;
        }
        state = state_at(e, p, sigma);
        out[static_cast<std::size_t>(p)] = {sigma, std::move(state)};
    }
    return out;
}

/// Both running-supremum tracks per grid time: sup_{s<=t} g(X_s) and
/// g(sup_{s<=t} |X_s|); they coincide for increasing radial g.
struct SupTracks {
    long paths = 0;
    int grid = 0;
    std::vector<double> sup_g;      // [path][k]
    std::vector<double> g_sup_abs;  // [path][k]

    double at_sup_g(long p, int k) const {
        return sup_g[static_cast<std::size_t>(p) * grid + k];
    }
    double at_g_sup(long p, int k) const {
        return g_sup_abs[static_cast<std::size_t>(p) * grid + k];
    }
};

inline SupTracks running_sup_g(const PathEnsemble& e, const WeightFunction& g) {
    SupTracks tr;
    tr.paths = e.paths();
    tr.grid = e.grid_size();
    tr.sup_g.assign(static_cast<std::size_t>(tr.paths) * tr.grid, 0.0);
    tr.g_sup_abs.assign(static_cast<std::size_t>(tr.paths) * tr.grid, 0.0);
    Vec radial(static_cast<std::size_t>(e.dim), 0.0);
    for (long p = 0; p < e.paths(); ++p) {
        double sup_g = 0.0, sup_abs = 0.0;
        walk_augmented(e, p, [&](double, const Vec& pre, const Vec& post, int k) {
            sup_g = std::max({sup_g, g.eval(pre), g.eval(post)});
            sup_abs = std::max({sup_abs, norm2(pre), norm2(post)});
            if (k >= 0) {
                radial[0] = sup_abs;
                tr.sup_g[static_cast<std::size_t>(p) * tr.grid + k] = sup_g;
                tr.g_sup_abs[static_cast<std::size_t>(p) * tr.grid + k] = g.eval(radial);
            }
        });
    }
    return tr;
}

/// Columnar dump (path id, time, state components, jump flag) with a
/// commented header recording seed and configuration.
inline void dump_ensemble(const PathEnsemble& e, std::ostream& os) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "# seed=%llu paths=%ld horizon=%.17g dt=%.17g delta=%.17g mode=%s\n",
                  static_cast<unsigned long long>(e.config.seed), e.paths(),
                  e.config.horizon, e.times[1] - e.times[0], e.config.delta,
                  to_string(e.config.mode).c_str());
    os << buf;
    os << "path,time";
    for (int i = 0; i < e.dim; ++i) os << ",x" << i;
    os << ",jump\n";
    for (long p = 0; p < e.paths(); ++p) {
        std::size_t jnext = 0;
        const auto& jrec = e.jumps[static_cast<std::size_t>(p)];
        for (int k = 0; k < e.grid_size(); ++k) {
            const double t = e.times[static_cast<std::size_t>(k)];
            while (jnext < jrec.size() && jrec[jnext].time <= t) {
                const Vec s = state_at(e, p, jrec[jnext].time);
                std::snprintf(buf, sizeof buf, "%ld,%.17g", p, jrec[jnext].time);
                os << buf;
                for (int i = 0; i < e.dim; ++i) {
                    std::snprintf(buf, sizeof buf, ",%.17g", s[static_cast<std::size_t>(i)]);
                    os << buf;
                }
                os << ",1\n";
                ++jnext;
            }
            std::snprintf(buf, sizeof buf, "%ld,%.17g", p, t);
            os << buf;
            for (int i = 0; i < e.dim; ++i) {
                std::snprintf(buf, sizeof buf, ",%.17g", *(e.state_ptr(p, k) + i));
                os << buf;
            }
            os << ",0\n";
        }
    }
}

}  // namespace levy
