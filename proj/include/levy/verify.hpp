#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "levy/c2.hpp"
#include "levy/estimate.hpp"
#include "levy/generator.hpp"
#include "levy/mollify.hpp"
#include "levy/psi.hpp"
#include "levy/simulate.hpp"
#include "levy/triplet.hpp"
#include "levy/weight.hpp"

namespace levy {

namespace detail {

inline int grid_index(const PathEnsemble& e, double t) {
    const double dt = e.times[1] - e.times[0];
    const int k = static_cast<int>(std::llround(t / dt));
    if (k < 0 || k >= e.grid_size() ||
        std::abs(e.times[static_cast<std::size_t>(k)] - t) > 1e-9 * std::max(1.0, t))
        throw std::invalid_argument("requested time is not on the ensemble grid");
    return k;
}

/// Trapezoid of s -> f(X_s) over [0, sigma] on the jump-augmented skeleton.
/// f is evaluated at left limits before a jump and at the post-jump state
/// after it; max_abs tracks sup |f| for discretization budgets.
template <class F>
double time_integral(const PathEnsemble& e, long p, double sigma, F&& f,
                     double* max_abs = nullptr) {
    double integral = 0.0, t_prev = 0.0, v_prev = 0.0;
    bool first = true, done = false;
    walk_augmented(e, p, [&](double t, const Vec& pre, const Vec& post, int) {
        if (done) return;
        if (first) {
            v_prev = f(post);
            if (max_abs) *max_abs = std::max(*max_abs, std::abs(v_prev));
            t_prev = t;
            first = false;
            return;
        }
        if (t >= sigma) {
            const double v_end = f(state_at(e, p, sigma));
            integral += 0.5 * (v_prev + v_end) * (sigma - t_prev);
            if (max_abs) *max_abs = std::max(*max_abs, std::abs(v_end));
            done = true;
            return;
        }
        const double v_pre = f(pre);
        integral += 0.5 * (v_prev + v_pre) * (t - t_prev);
        v_prev = f(post);
        if (max_abs) *max_abs = std::max(*max_abs, std::max(std::abs(v_pre), std::abs(v_prev)));
        t_prev = t;
    });
    return integral;
}

/// Memoizes the last evaluation; pure-jump paths are constant between jumps,
/// which makes the skeleton sweep nearly free for them.
template <class F>
auto memo1d(F&& f) {
    return [f = std::forward<F>(f), last_x = kInf, last_v = 0.0](const Vec& x) mutable {
        if (x.size() == 1) {
            if (x[0] == last_x) return last_v;
            last_x = x[0];
            last_v = f(x);
            return last_v;
        }
        return f(x);
    };
}

}  // namespace detail

/// Condition (a): capped-mean ladder for E[g(X_t)] with the Fatou-style
/// stabilization verdict.
inline Estimate mc_moment(const PathEnsemble& e, const WeightFunction& g, double t) {
    const int k = detail::grid_index(e, t);
    std::vector<double> v(static_cast<std::size_t>(e.paths()));
    for (long p = 0; p < e.paths(); ++p) v[static_cast<std::size_t>(p)] = g.eval(e.state(p, k));
    return capped_ladder(v);
}

/// Condition (b): same ladder applied to sup_{s<=t} g(X_s).
inline Estimate mc_sup_moment(const PathEnsemble& e, const WeightFunction& g, double t) {
    const int k = detail::grid_index(e, t);
    SupTracks tr = running_sup_g(e, g);
    std::vector<double> v(static_cast<std::size_t>(e.paths()));
    for (long p = 0; p < e.paths(); ++p) v[static_cast<std::size_t>(p)] = tr.at_sup_g(p, k);
    return capped_ladder(v);
}

/// The documented adversarial stopping family for the uniform-integrability
/// probe: exit balls across radii, g-level crossings, and a composition. A
/// finite family only bounds the supremum over all stopping times from
/// below; reports carry that caveat.
inline std::vector<StoppingRule> adversarial_rules(const WeightFunction& g, double t) {
    std::vector<StoppingRule> rules;
    for (double R : {0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0})
        rules.push_back(StoppingRule::exit_ball(R, t));
    Vec origin(static_cast<std::size_t>(g.dim), 0.0);
    const double g0 = g.eval(origin);
    for (double mult : {3.0, 30.0, 300.0})
        rules.push_back(StoppingRule::level(g, mult * g0, t));
    rules.push_back(StoppingRule::min_of(
        {StoppingRule::exit_ball(2.0, t), StoppingRule::level(g, 30.0 * g0, t)}, t));
    rules.push_back(StoppingRule::at_time(t, t));
    return rules;
}

struct UiProfile {
    std::vector<std::pair<double, Estimate>> curve;  // R -> sup_rule tail mean
    Estimate stopped_mean;                           // sup_rule E[g(X_{sigma^t})] (capped)
    Estimate sup_mean;                               // E[sup g] (capped), domination bound
    bool dominated_ok = false;
    std::string verdict = "inconclusive";
};

/// Uniform-integrability tail curve R -> sup_rules E[g(X_{sigma^t}) 1{g >= R}].
/// Pass means the curve is statistically zero at the top of the R ladder;
/// fail means it stays bounded away from zero (the class-DL contrapositive).
inline UiProfile ui_profile(const PathEnsemble& e, const WeightFunction& g, double t,
                            const std::vector<StoppingRule>& rules,
                            double eta_rel = 1e-3) {
    UiProfile out;
    std::vector<std::vector<double>> stopped_values;
    for (const StoppingRule& r : rules) {
        StoppingRule capped = r;
        capped.cap = std::min(r.cap, t);
        auto st = evaluate_stopping(e, capped);
        std::vector<double> v(st.size());
        for (std::size_t i = 0; i < st.size(); ++i) {
            // Values ride the same 1e8 cap as the moment ladder: the reported
            // curve is then a lower bound of the DL tail whose divergence
            // verdict is statistically sharp even for explosive weights.
            v[i] = std::min(g.eval(st[i].state), 1e8);
        }
        stopped_values.push_back(std::move(v));
    }

    Estimate worst_mean;
    for (auto& v : stopped_values) {
        Estimate m = capped_ladder(v);
        if (m.value > worst_mean.value || m.diverging) {
            if (!worst_mean.diverging) worst_mean = m;
            if (m.diverging) worst_mean.diverging = true;
        }
    }
    out.stopped_mean = worst_mean;

    for (double R : {1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8}) {
        Estimate worst;
        bool set = false;
        for (auto& v : stopped_values) {
            std::vector<double> tail(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) tail[i] = v[i] >= R ? v[i] : 0.0;
            Estimate m = mean_se(tail);
            if (!set || m.value > worst.value) {
                worst = m;
                set = true;
            }
        }
        out.curve.emplace_back(R, worst);
    }

    // Domination: every stopped value is bounded by the running supremum.
    out.sup_mean = mc_sup_moment(e, g, t);
    out.dominated_ok =
        out.stopped_mean.value <=
        out.sup_mean.value + 3.0 * (out.stopped_mean.std_error + out.sup_mean.std_error) +
            1e-9 * out.sup_mean.value;

    // Scale for the tolerance: a capped typical magnitude of g(X_{sigma^t}),
    // so the verdict is not distorted by astronomically large tail values.
    double scale = 1.0;
    {
        std::vector<double> capped(stopped_values.front().size());
        for (auto& v : stopped_values) {
            for (std::size_t i = 0; i < v.size(); ++i) capped[i] = std::min(v[i], 1e2);
            scale = std::max(scale, mean_se(capped).value);
        }
    }
    const Estimate& top = out.curve.back().second;
    if (top.value <= eta_rel * scale) {
        // the curve reached (statistical) zero at the top of the ladder
        out.verdict = "pass";
    } else {
        // bounded away from zero; call it a fail once any rung clears its own
        // noise, otherwise stay inconclusive
        bool significant = false;
        for (auto& [R, est] : out.curve)
            if (est.value > eta_rel * scale && est.value > 3.0 * est.std_error)
                significant = true;
        out.verdict = significant ? "fail" : "inconclusive";
    }
    return out;
}

struct DynkinResult {
    Estimate residual;      // E[u(X_{sigma^t})] - u(0) - E[int Au ds]
    double budget = 0.0;    // dt * sup |Au| (empirical discretization budget)
    Estimate value_term;
    Estimate integral_term;
    bool pass = false;
};

/// Dynkin residual for compactly supported C2 u and a capped stopping rule;
/// the time integral is a trapezoid on the jump-augmented skeleton. Passes
/// when |residual| <= 4 SE + budget.
inline DynkinResult dynkin_residual(const LevyTriplet& t, const PathEnsemble& e,
                                    const C2Function& u, const StoppingRule& rule,
                                    double horizon) {
    GeneratorEvaluator ev(t, u, nullptr, 3e-4);
    StoppingRule capped = rule;
    capped.cap = std::min(rule.cap, horizon);
    auto stopped = evaluate_stopping(e, capped);

    const double dt = e.times[1] - e.times[0];
    Vec origin(static_cast<std::size_t>(e.dim), 0.0);
    const double u0 = u.eval(origin);

    std::vector<double> residuals(static_cast<std::size_t>(e.paths()));
    std::vector<double> vals(static_cast<std::size_t>(e.paths()));
    std::vector<double> ints(static_cast<std::size_t>(e.paths()));
    double max_au = 0.0;
    for (long p = 0; p < e.paths(); ++p) {
        auto au = detail::memo1d([&ev](const Vec& x) { return ev.parts(x).total(); });
        const double sig = stopped[static_cast<std::size_t>(p)].sigma;
        const double integral = detail::time_integral(e, p, sig, au, &max_au);
        const double val = u.eval(stopped[static_cast<std::size_t>(p)].state);
        vals[static_cast<std::size_t>(p)] = val;
        ints[static_cast<std::size_t>(p)] = integral;
        residuals[static_cast<std::size_t>(p)] = val - u0 - integral;
    }
    DynkinResult out;
    out.residual = mean_se(residuals);
    out.value_term = mean_se(vals);
    out.integral_term = mean_se(ints);
    out.budget = dt * max_au;
    out.pass = std::abs(out.residual.value) <= 4.0 * out.residual.std_error + out.budget;
    return out;
}

/// Pathwise check of the stopped-expectation inequality
/// E[g(X_{t^sigma})] <= g(0) + E[int_0^{t^sigma} |A g(X_s)| ds]
/// for a mollified weight with derivative evaluators.
inline VerificationReport dynkin_inequality_check(const LevyTriplet& t,
                                                  const WeightFunction& g_eps,
                                                  const StoppingRule& rule,
                                                  double horizon,
                                                  const PathEnsemble& e) {
    if (!g_eps.smooth || !g_eps.hessian)
        throw std::invalid_argument(
            "dynkin_inequality_check: weight needs derivative evaluators");
    VerificationReport rep;
    rep.check_id = "dynkin_inequality";
    rep.seed = e.config.seed;

    GeneratorEvaluator ev(
        t, C2Function::from_weight(g_eps),
        [ge = g_eps.eval](const Vec& y) { return ge(y) + ge(negate(y)); }, 3e-4);

    StoppingRule capped = rule;
    capped.cap = std::min(rule.cap, horizon);
    auto stopped = evaluate_stopping(e, capped);

    Vec origin(static_cast<std::size_t>(e.dim), 0.0);
    const double g0 = g_eps.eval(origin);
    std::vector<double> slack(static_cast<std::size_t>(e.paths()));
    double max_au = 0.0;
    for (long p = 0; p < e.paths(); ++p) {
        auto au = detail::memo1d(
            [&ev](const Vec& x) { return std::abs(ev.parts(x).total()); });
        const double sig = stopped[static_cast<std::size_t>(p)].sigma;
        const double integral = detail::time_integral(e, p, sig, au, &max_au);
        slack[static_cast<std::size_t>(p)] =
            g0 + integral - g_eps.eval(stopped[static_cast<std::size_t>(p)].state);
    }
    Estimate s = mean_se(slack);
    rep.add("rhs_minus_lhs", s);
    const double dt = e.times[1] - e.times[0];
    rep.threshold("margin", 3.0 * s.std_error + dt * max_au);
    rep.verdict = s.value >= -(3.0 * s.std_error + dt * max_au) ? "pass" : "fail";
    return rep;
}

struct GrowthFit {
    double c1_fit = 1.0, c2_fit = 0.0;
    double log_c1_cert = 0.0, c2_cert = 0.0;  // Gronwall certificate constants
    bool certificate_ok = false;
    bool doubling_ok = false;                 // kappa_{2T} <= kappa_T (1 + c kappa_T)
    double kappa_T = 0.0, kappa_2T = 0.0;
    std::vector<std::pair<double, Estimate>> curve;  // t -> E[g(X_t)]
};

/// Fits log E[g(X_t)] <= log c1 + c2 t over the late half of the horizon (the
/// early transient is not informative about the exponential rate), checks the
/// moment-propagation doubling inequality statistically, and certifies that
/// the explicit generator-bound constants dominate every estimate.
inline GrowthFit gronwall_growth(const LevyTriplet& t, const WeightFunction& g,
                                 double T, SimConfig cfg) {
    auto crit = jump_moment_criterion(t.nu, g);
    if (crit.infinite)
        throw std::domain_error("gronwall_growth: jump moment criterion is infinite");

    cfg.horizon = 2.0 * T;  // one ensemble serves both T and 2T
    PathEnsemble e = sample_paths(t, cfg);

    GrowthFit out;
    const int K = e.grid_size() - 1;
    std::vector<double> xs, ys, ws;
    for (int j = 1; j <= 8; ++j) {
        const double tj = T * j / 8.0;
        const int k = static_cast<int>(std::llround(tj / (e.times[1] - e.times[0])));
        std::vector<double> v(static_cast<std::size_t>(e.paths()));
        for (long p = 0; p < e.paths(); ++p)
            v[static_cast<std::size_t>(p)] = g.eval(e.state(p, std::min(k, K)));
        Estimate m = capped_ladder(v);
        out.curve.emplace_back(tj, m);
        if (tj >= 0.5 * T - 1e-12) {
            xs.push_back(tj);
            ys.push_back(std::log(m.value));
            const double rel = m.std_error / m.value;
            ws.push_back(1.0 / std::max(rel * rel, 1e-8));
        }
    }
    // weighted least squares for log E = log c1 + c2 t
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sw += ws[i];
        swx += ws[i] * xs[i];
        swy += ws[i] * ys[i];
        swxx += ws[i] * xs[i] * xs[i];
        swxy += ws[i] * xs[i] * ys[i];
    }
    const double denom = sw * swxx - swx * swx;
    out.c2_fit = (sw * swxy - swx * swy) / denom;
    out.c1_fit = std::exp((swy * swxx - swx * swxy) / denom);

    // Certificate from the mollified generator bound: E[g(X_t)] <= c_eps^2 g(0) e^{C t}.
    {
        Mollifier m = Mollifier::standard_bump(0.1, t.dim);
        WeightFunction ge = mollify(g, m);
        GeneratorBoundContext ctx(t, ge);
        Vec origin(static_cast<std::size_t>(t.dim), 0.0);
        const GeneratorBound b0 = ctx.at(origin);
        const double c_eps = ge.mollified->c_eps;
        out.c2_cert = b0.C_eps * b0.bracket;
        out.log_c1_cert = 2.0 * std::log(c_eps) + std::log(g.eval(origin));
        out.certificate_ok = true;
        for (auto& [tj, m_est] : out.curve) {
            const double lhs = std::log(std::max(m_est.value - 3.0 * m_est.std_error, 1e-300));
            if (lhs > out.log_c1_cert + out.c2_cert * tj) out.certificate_ok = false;
        }
    }

    // Moment propagation: kappa_{2T} <= kappa_T (1 + c kappa_T), statistically.
    {
        SupTracks tr = running_sup_g(e, g);
        const int kT = detail::grid_index(e, T);
        std::vector<double> vT(static_cast<std::size_t>(e.paths())),
            v2T(static_cast<std::size_t>(e.paths()));
        for (long p = 0; p < e.paths(); ++p) {
            vT[static_cast<std::size_t>(p)] = tr.at_sup_g(p, kT);
            v2T[static_cast<std::size_t>(p)] = tr.at_sup_g(p, K);
        }
        Estimate eT = mean_se(vT), e2T = mean_se(v2T);
        out.kappa_T = eT.value;
        out.kappa_2T = e2T.value;
        const double bound = eT.value * (1.0 + g.c * eT.value);
        const double se = e2T.std_error + (1.0 + 2.0 * g.c * eT.value) * eT.std_error;
        out.doubling_ok = e2T.value <= bound + 3.0 * se;
    }
    return out;
}

struct SemigroupResult {
    std::vector<std::pair<double, double>> curve;  // t -> ||P*_t phi - phi||_{L1(g)}
    double phi_norm = 0.0;                         // ||phi||_{L1(g)}
    bool operator_bound_ok = false;
    bool diverging = false;
    std::string verdict = "inconclusive";
};

namespace detail {

/// Empirical ||P*_t phi - phi||_{L1(g)} in d=1 from the marginal sample:
/// panels cover the support of phi and neighborhoods of the sampled
/// positions; outside them the empirical integrand vanishes identically.
inline double empirical_shift_norm(std::vector<double> positions, const C2Function& phi,
                                   const WeightFunction& g) {
    const double R = phi.support_radius;
    std::sort(positions.begin(), positions.end());
    const long n = static_cast<long>(positions.size());

    std::vector<std::pair<double, double>> intervals;
    intervals.emplace_back(-R - 0.1, R + 0.1);
    for (double x : positions) intervals.emplace_back(x - R - 0.1, x + R + 0.1);
    std::sort(intervals.begin(), intervals.end());
    std::vector<std::pair<double, double>> merged;
    for (auto& iv : intervals) {
        if (!merged.empty() && iv.first <= merged.back().second)
            merged.back().second = std::max(merged.back().second, iv.second);
        else
            merged.push_back(iv);
    }

    auto mean_phi_shift = [&](double x) {
        auto lo = std::lower_bound(positions.begin(), positions.end(), x - R);
        auto hi = std::upper_bound(positions.begin(), positions.end(), x + R);
        double s = 0.0;
        for (auto it = lo; it != hi; ++it) s += phi.eval({x - *it});
        return s / static_cast<double>(n);
    };

    double norm = 0.0;
    for (auto& iv : merged) {
        const int panels = std::max(1, static_cast<int>((iv.second - iv.first) / 0.125));
        for (int p = 0; p < panels; ++p) {
            const double a = iv.first + (iv.second - iv.first) * p / panels;
            const double b = iv.first + (iv.second - iv.first) * (p + 1) / panels;
            norm += quad::integrate(
                [&](double x) {
                    return std::abs(mean_phi_shift(x) - phi.eval({x})) * g.eval({x});
                },
                a, b, 8);
        }
    }
    return norm;
}

}  // namespace detail

/// Condition (f): strong continuity of the adjoint semigroup on L^1(g),
/// measured as the curve t -> ||P*_t phi - phi||_{L1(g)} on a dedicated
/// short-horizon ensemble, plus the operator bound
/// ||P*_t phi||_{L1(g)} <= c E[g(X_t)] ||phi||_{L1(g)} checked by Monte Carlo
/// on the main ensemble (for phi >= 0 the norm equals E[h(X_t)] with
/// h = phi * g by Tonelli, so divergence detection rides the same ladder).
inline SemigroupResult semigroup_continuity(const LevyTriplet& t, const C2Function& phi,
                                            const WeightFunction& g,
                                            const PathEnsemble& main_ens, double t_main,
                                            const std::vector<double>& t_list,
                                            SimConfig cfg_small, double eta = 0.1) {
    if (t.dim != 1)
        throw std::invalid_argument("semigroup_continuity: implemented for d=1");
    SemigroupResult out;
    const double R = phi.support_radius;
    if (!std::isfinite(R))
        throw std::invalid_argument("semigroup_continuity: phi must be compactly supported");

    out.phi_norm = quad::integrate(
        [&](double z) { return std::abs(phi.eval({z})) * g.eval({z}); }, -R, R, 128);

    auto h = [&](double w) {
        return quad::integrate(
            [&](double z) { return std::abs(phi.eval({z})) * g.eval({z + w}); }, -R, R,
            64);
    };

    // Operator bound and divergence detection at t_main.
    {
        const int k = detail::grid_index(main_ens, t_main);
        std::vector<double> hv(static_cast<std::size_t>(main_ens.paths()));
        std::vector<double> gv(static_cast<std::size_t>(main_ens.paths()));
        for (long p = 0; p < main_ens.paths(); ++p) {
            const double x = main_ens.state1(p, k);
            hv[static_cast<std::size_t>(p)] = h(x);
            gv[static_cast<std::size_t>(p)] = g.eval({x});
        }
        Estimate eh = capped_ladder(hv);
        Estimate eg = capped_ladder(gv);
        out.diverging = eh.diverging || eg.diverging;
        out.operator_bound_ok =
            !out.diverging &&
            eh.value <= g.c * eg.value * out.phi_norm + 3.0 * eh.std_error +
                            3.0 * g.c * out.phi_norm * eg.std_error;
    }
    if (out.diverging) {
        out.verdict = "fail";
        return out;
    }

    // Continuity curve on the short-horizon ensemble.
    cfg_small.horizon = t_list.back();
    PathEnsemble es = sample_paths(t, cfg_small);
    for (double tt : t_list) {
        const int k = detail::grid_index(es, tt);
        std::vector<double> pos(static_cast<std::size_t>(es.paths()));
        for (long p = 0; p < es.paths(); ++p)
            pos[static_cast<std::size_t>(p)] = es.state1(p, k);
        out.curve.emplace_back(tt, detail::empirical_shift_norm(pos, phi, g));
    }

    const double first = out.curve.front().second;
    bool monotone_ok = true;
    for (std::size_t i = 1; i < out.curve.size(); ++i)
        if (out.curve[i].second < out.curve[i - 1].second * 0.8 - 1e-12) monotone_ok = false;
    // curve should grow from ~0 as t grows away from 0; the smallest t is first
    out.verdict = (out.operator_bound_ok && monotone_ok && first < eta * out.phi_norm)
                      ? "pass"
                      : "fail";
    return out;
}

struct LatticeResult {
    bool is_lattice = false;
    double alpha = 0.0;  // psi(beta) = i alpha
    double span = 0.0;   // 2 pi / beta
    bool structural_ok = false;   // Q = 0, atoms on lattice, drift identity
    double empirical_off_mass = -1.0;
    std::string evidence;
};

/// Lattice detection for d=1: psi(beta) purely imaginary iff X_t + alpha t /
/// beta lives on the lattice 2 pi Z / beta. On success the structural
/// conditions (no diffusion, atoms on the lattice, the drift identity) are
/// cross-checked and the lattice membership is verified empirically on a
/// simulated ensemble.
inline LatticeResult lattice_detect(const LevyTriplet& t, double beta,
                                    std::optional<SimConfig> sim = std::nullopt) {
    if (t.dim != 1) throw std::invalid_argument("lattice_detect: d=1 only");
    if (beta == 0.0) throw std::invalid_argument("lattice_detect: beta must be nonzero");
    LatticeResult out;
    const Complex psi = eval_psi(t, Vec{beta});

    double mass_scale = 1.0;
    for (const Atom& a : t.nu.atoms) mass_scale += a.mass;
    if (std::abs(psi.real()) > 1e-9 * mass_scale) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "Re psi(beta) = %.6g > 0", psi.real());
        out.evidence = buf;
        return out;
    }

    out.is_lattice = true;
    out.alpha = psi.imag();
    out.span = 2.0 * std::numbers::pi / beta;

    // Structural condition: Q = 0, supp nu in the lattice (atoms only), and
    // b = -alpha/beta + (2 pi / beta) sum_{|k| < beta/(2 pi)} k nu({2 pi k / beta}).
    bool ok = std::abs(t.Q(0, 0)) <= 1e-12;
    for (const ParametricDensity& d : t.nu.densities) {
        auto mass = nu_integrate(LevyMeasure{1, {}, {d}},
                                 [](const Vec&) { return 1.0; }, 0.0, kInf);
        if (mass.infinite || mass.value > 1e-12) ok = false;
    }
    double correction = 0.0;
    for (const Atom& a : t.nu.atoms) {
        const double k = a.position[0] / out.span;
        if (std::abs(k - std::llround(k)) > 1e-9 * std::max(1.0, std::abs(k))) ok = false;
        if (std::abs(k) < std::abs(beta) / (2.0 * std::numbers::pi))
            correction += static_cast<double>(std::llround(k)) * a.mass;
    }
    const double b_expected = -out.alpha / beta + out.span * correction;
    if (std::abs(t.b[0] - b_expected) > 1e-9 * std::max(1.0, std::abs(b_expected)))
        ok = false;
    out.structural_ok = ok;

    if (sim) {
        PathEnsemble e = sample_paths(t, *sim);
        long off = 0, total = 0;
        for (long p = 0; p < e.paths(); ++p) {
            for (int k : {e.grid_size() / 2, e.grid_size() - 1}) {
                const double time = e.times[static_cast<std::size_t>(k)];
                const double z = e.state1(p, k) + out.alpha / beta * time;
                const double frac = z / out.span - std::llround(z / out.span);
                if (std::abs(frac) > 1e-7) ++off;
                ++total;
            }
        }
        out.empirical_off_mass = static_cast<double>(off) / static_cast<double>(total);
    }
    return out;
}

/// Product-martingale probe of lattice support for an arbitrary sampled
/// distribution: simulates Y_n = prod_{k<=n} (1 + cos(beta X_k - theta))/2
/// over iid rows; under the precondition |E e^{i beta X}| = 1 each Y_n has
/// unit mean and concentrates at 1, and the sampled support lies on the
/// lattice (2 pi Z + theta)/beta.
inline VerificationReport lattice_support_martingale(
    const std::function<double(rng::Stream&)>& sampler, double beta, double theta,
    int n_max, long rows = 20000, std::uint64_t seed = 99) {
    VerificationReport rep;
    rep.check_id = "lattice_support_martingale";
    rep.seed = seed;

    // Precondition |E e^{i beta X}| = 1 (within MC resolution).
    {
        rng::Stream s{seed, 0, 7};
        Complex acc{};
        const long m = 20000;
        for (long i = 0; i < m; ++i) {
            const double x = sampler(s);
            acc += std::exp(Complex(0.0, beta * x));
        }
        acc /= static_cast<double>(m);
        const double mod = std::abs(acc);
        Estimate pre;
        pre.value = mod;
        pre.std_error = 1.0 / std::sqrt(static_cast<double>(m));
        pre.n = m;
        rep.add("char_fn_modulus", pre);
        if (mod < 1.0 - 0.01 - 3.0 * pre.std_error)
            throw std::domain_error(
                "lattice_support_martingale: |E e^{i beta X}| < 1, precondition fails");
    }

    std::vector<std::vector<double>> yn(static_cast<std::size_t>(n_max));
    long off_support = 0, draws = 0;
    for (long r = 0; r < rows; ++r) {
        rng::Stream s{seed, static_cast<std::uint64_t>(r) + 1, 8};
        double prod = 1.0;
        for (int n = 0; n < n_max; ++n) {
            const double x = sampler(s);
            prod *= 0.5 * (1.0 + std::cos(beta * x - theta));
            yn[static_cast<std::size_t>(n)].push_back(prod);
            const double frac = (beta * x - theta) / (2.0 * std::numbers::pi);
            if (std::abs(frac - std::llround(frac)) > 1e-6) ++off_support;
            ++draws;
        }
    }
    bool pass = true;
    for (int n = 0; n < n_max; ++n) {
        Estimate m = mean_se(yn[static_cast<std::size_t>(n)]);
        char name[32];
        std::snprintf(name, sizeof name, "mean_Y_%d", n + 1);
        rep.add(name, m);
        if (std::abs(m.value - 1.0) > 3.0 * m.std_error + 1e-9) pass = false;
    }
    {
        long conc = 0;
        for (double v : yn.back())
            if (v > 1.0 - 1e-6) ++conc;
        Estimate c;
        c.value = static_cast<double>(conc) / static_cast<double>(rows);
        c.n = rows;
        rep.add("Y_nmax_concentration_at_1", c);
        if (c.value < 0.999) pass = false;

        Estimate off;
        off.value = static_cast<double>(off_support) / static_cast<double>(draws);
        off.n = draws;
        rep.add("off_lattice_mass", off);
    }
    rep.verdict = pass ? "pass" : "fail";
    return rep;
}

struct TransienceResult {
    bool transient = false;
    double beta_root = 0.0;
    bool martingale_ok = false;
    bool drift_down_ok = false;
    std::string note;
};

/// Finds a nonzero root of the cumulant by bisection on [lo, hi]; on success
/// e^{beta X_t} is verified to be a unit-mean martingale statistically and
/// the negative drift of beta X_T is confirmed over a horizon ladder. No
/// sign change means the probe stays inconclusive (it must not claim
/// transience for, e.g., driftless Brownian motion).
inline TransienceResult transience_probe(const LevyTriplet& t, double lo, double hi,
                                         SimConfig cfg) {
    if (t.dim != 1) throw std::invalid_argument("transience_probe: d=1 only");
    TransienceResult out;

    const double beta_max = std::max(std::abs(lo), std::abs(hi));
    auto crit = jump_moment_criterion(t.nu, WeightFunction::exp_abs(beta_max));
    if (crit.infinite)
        throw std::domain_error(
            "transience_probe: exponential moments missing on the search interval");

    auto k = [&](double b) { return eval_cumulant(t, b); };
    double flo = k(lo), fhi = k(hi);
    if (flo == 0.0 && lo != 0.0) {
        out.beta_root = lo;
    } else if (fhi == 0.0 && hi != 0.0) {
        out.beta_root = hi;
    } else if (flo * fhi > 0.0) {
        out.note = "no sign change of the cumulant on the search interval";
        return out;
    } else {
        double a = lo, b = hi, fa = flo;
        for (int it = 0; it < 200 && (b - a) > 1e-9 * std::max(1.0, std::abs(b)); ++it) {
            const double mid = 0.5 * (a + b), fm = k(mid);
            if (fm == 0.0) {
                a = b = mid;
                break;
            }
            if (fa * fm < 0.0) {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
        }
        out.beta_root = 0.5 * (lo < hi ? (a + b) : (a + b));
    }

    // Martingale check: E[e^{beta* X_t}] = 1 within 3 SE at several t.
    {
        PathEnsemble e = sample_paths(t, cfg);
        out.martingale_ok = true;
        for (int j : {e.grid_size() / 4, e.grid_size() / 2, e.grid_size() - 1}) {
            std::vector<double> v(static_cast<std::size_t>(e.paths()));
            for (long p = 0; p < e.paths(); ++p)
                v[static_cast<std::size_t>(p)] = std::exp(out.beta_root * e.state1(p, j));
            Estimate m = mean_se(v);
            if (std::abs(m.value - 1.0) > 3.0 * m.std_error) out.martingale_ok = false;
        }
    }

    // beta* X_T must drift to -infinity: medians decrease along a horizon ladder.
    {
        SimConfig cd = cfg;
        cd.paths = std::min<long>(cfg.paths, 2000);
        std::vector<double> medians;
        for (double T : {4.0, 8.0, 16.0}) {
            cd.horizon = T;
            cd.dt = T / 256.0;
            PathEnsemble e = sample_paths(t, cd);
            std::vector<double> v(static_cast<std::size_t>(e.paths()));
            for (long p = 0; p < e.paths(); ++p)
                v[static_cast<std::size_t>(p)] =
                    out.beta_root * e.state1(p, e.grid_size() - 1);
            std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
            medians.push_back(v[v.size() / 2]);
        }
        out.drift_down_ok = medians[1] < medians[0] && medians[2] < medians[1];
    }

    // Domination route: e^{beta* x} <= e^{|beta*| |x|} with finite g-moment,
    // so the local martingale is a true martingale; recorded alongside the
    // statistical evidence.
    out.transient = out.martingale_ok && out.drift_down_ok;
    if (!out.transient) out.note = "statistical corroboration failed";
    return out;
}

/// All implemented sides of the equivalence chain for one (process, weight)
/// pair; coherent() says the finite/infinite verdicts agree.
struct ChainVerdicts {
    bool criterion_finite = false;  // (e)
    bool moment_finite = false;     // (a)
    bool sup_finite = false;        // (b)
    bool ui_pass = false;           // (c)/(d)
    bool adjoint_finite = false;    // (g)/(h)
    bool semigroup_pass = false;    // (f)
    bool coherent() const {
        return criterion_finite == moment_finite && moment_finite == sup_finite &&
               sup_finite == ui_pass && ui_pass == adjoint_finite &&
               adjoint_finite == semigroup_pass;
    }
    bool all_finite() const { return criterion_finite && coherent(); }
};

inline ChainVerdicts equivalence_chain(const LevyTriplet& t, const WeightFunction& g,
                                       const PathEnsemble& ens, double t_check,
                                       SimConfig cfg_small) {
    ChainVerdicts v;
    v.criterion_finite = !jump_moment_criterion(t.nu, g).infinite;
    v.moment_finite = !mc_moment(ens, g, t_check).diverging;
    v.sup_finite = !mc_sup_moment(ens, g, t_check).diverging;
    v.ui_pass = ui_profile(ens, g, t_check, adversarial_rules(g, t_check)).verdict == "pass";

    C2Function phi = C2Function::compact_bump({0.0}, 2.0);
    v.adjoint_finite = !adjoint_weighted_norm(t, phi, g).lhs.infinite;

    cfg_small.paths = std::min<long>(cfg_small.paths, 4000);
    v.semigroup_pass = semigroup_continuity(t, phi, g, ens, t_check,
                                            {0.001, 0.004, 0.016, 0.064}, cfg_small)
                           .verdict == "pass";
    return v;
}

}  // namespace levy
