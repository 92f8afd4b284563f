#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "levy/linalg.hpp"
#include "levy/quadrature.hpp"
#include "levy/weight.hpp"

namespace levy {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Partial sums above this are classified as divergent; the toolkit only
/// needs a finite/infinite verdict, not the value of huge integrals.
constexpr double kDivergenceCap = 1e12;

enum class DensityFamily { power_law, exp_tilt, gaussian, tabulated };

struct QuadratureSpec {
    int radial_nodes = 16;
    int angular_nodes = 16;
    std::string scheme = "gauss_legendre";
};

/// One absolutely-continuous component of a Levy measure, supported on the
/// annulus r_inner < |y| < r_outer (r_outer may be infinite).
struct ParametricDensity {
    DensityFamily family = DensityFamily::tabulated;
    double alpha = 0.0;   // power-law index, 0 < alpha < 2
    double tilt = 0.0;    // exponential tempering rate
    double scale = 1.0;   // multiplicative constant for power families
    double rate = 0.0;    // total mass of the gaussian family
    double sigma = 1.0;   // gaussian jump std deviation
    Vec mean;             // gaussian jump mean
    std::function<double(const Vec&)> table;
    double r_inner = 0.0;
    double r_outer = kInf;
    QuadratureSpec quad;

    double operator()(const Vec& y) const {
        const double r = norm2(y);
        if (r <= r_inner || r >= r_outer || r == 0.0) return 0.0;
        switch (family) {
            case DensityFamily::power_law:
                return scale * std::pow(r, -1.0 - alpha);
            case DensityFamily::exp_tilt:
                return scale * std::exp(-tilt * r) * std::pow(r, -1.0 - alpha);
            case DensityFamily::gaussian: {
                const int d = static_cast<int>(y.size());
                double q = 0.0;
                for (int i = 0; i < d; ++i) {
                    const double dy = y[i] - (mean.empty() ? 0.0 : mean[i]);
                    q += dy * dy;
                }
                const double norm =
                    std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.5 * d);
                return rate * norm * std::exp(-0.5 * q / (sigma * sigma));
            }
            case DensityFamily::tabulated:
                return table(y);
        }
        return 0.0;
    }

    static ParametricDensity power_law(double alpha, double r_inner = 0.0,
                                       double r_outer = kInf, double scale = 1.0) {
        ParametricDensity d;
        d.family = DensityFamily::power_law;
        d.alpha = alpha;
        d.scale = scale;
        d.r_inner = r_inner;
        d.r_outer = r_outer;
        return d;
    }
    static ParametricDensity exp_tilt(double alpha, double tilt, double r_inner = 0.0,
                                      double r_outer = kInf, double scale = 1.0) {
        ParametricDensity d;
        d.family = DensityFamily::exp_tilt;
        d.alpha = alpha;
        d.tilt = tilt;
        d.scale = scale;
        d.r_inner = r_inner;
        d.r_outer = r_outer;
        return d;
    }
    static ParametricDensity gaussian_jumps(double rate, Vec mean, double sigma) {
        ParametricDensity d;
        d.family = DensityFamily::gaussian;
        d.rate = rate;
        d.mean = std::move(mean);
        d.sigma = sigma;
        return d;
    }
    static ParametricDensity tabulated(std::function<double(const Vec&)> fn,
                                       double r_inner, double r_outer) {
        ParametricDensity d;
        d.family = DensityFamily::tabulated;
        d.table = std::move(fn);
        d.r_inner = r_inner;
        d.r_outer = r_outer;
        return d;
    }
};

struct Atom {
    Vec position;
    double mass = 0.0;
};

struct LevyMeasure {
    int dim = 1;
    std::vector<Atom> atoms;
    std::vector<ParametricDensity> densities;

    static LevyMeasure zero(int dim = 1) {
        LevyMeasure m;
        m.dim = dim;
        return m;
    }
    static LevyMeasure single_atom(double position, double mass) {
        LevyMeasure m;
        m.dim = 1;
        m.atoms.push_back({{position}, mass});
        return m;
    }
    bool empty() const { return atoms.empty() && densities.empty(); }
};

/// Spatial reflection y -> -y of the measure (the jump measure of -X).
inline LevyMeasure reflect(const LevyMeasure& nu) {
    LevyMeasure r = nu;
    for (auto& a : r.atoms) a.position = negate(a.position);
    for (auto& d : r.densities) {
        if (d.family == DensityFamily::gaussian) {
            d.mean = negate(d.mean);
        } else if (d.family == DensityFamily::tabulated) {
            auto base = d.table;
            d.table = [base](const Vec& y) { return base(negate(y)); };
        }
        // power_law / exp_tilt are radial, hence reflection-invariant
    }
    return r;
}

template <class R>
struct NuIntegral {
    R value{};
    bool infinite = false;
};

/// Finite value or a +infinity flag; the return shape of every nu-integral.
using ExtendedReal = NuIntegral<double>;

inline ExtendedReal finite_value(double v) { return {v, false}; }
inline ExtendedReal infinite_value() { return {kInf, true}; }

namespace detail {

template <class R>
double magnitude(const R& v) {
    return std::abs(v);
}

/// Integral of f * density over the annulus [ra, rb] with an nr-point radial
/// Gauss rule per direction.
template <class F>
auto annulus_value(const ParametricDensity& dens, int dim, F& f, double ra, double rb,
                   int nr, int nang) {
    using R = std::decay_t<decltype(f(std::declval<const Vec&>()))>;
    const quad::DirectionSet ds = quad::sphere_directions(dim, nang);
    const quad::GaussRule& rule = quad::gauss_legendre(nr);
    const double mid = 0.5 * (ra + rb), half = 0.5 * (rb - ra);
    R total{};
    Vec y(static_cast<std::size_t>(dim));
    for (std::size_t j = 0; j < ds.dirs.size(); ++j) {
        R dir_sum{};
        for (int i = 0; i < nr; ++i) {
            const double r = mid + half * rule.nodes[i];
            for (int k = 0; k < dim; ++k) y[k] = r * ds.dirs[j][k];
            const double w = dens(y);
            if (w == 0.0) continue;
            R term = f(y) * (w * std::pow(r, dim - 1) * rule.weights[i] * half);
            if (std::isnan(magnitude(term)))
                throw QuadratureError("integrand not finite at a quadrature node");
            dir_sum += term;
        }
        total += dir_sum * ds.weights[j];
    }
    return total;
}

/// |f| dnu over the annulus at base resolution; a cheap a-priori magnitude
/// bound used to skip refinement of negligible annuli (e.g. fast-oscillating
/// exponent integrands far out in the tail).
template <class F>
double annulus_abs_mass(const ParametricDensity& dens, int dim, F& f, double ra,
                        double rb) {
    auto abs_f = [&f](const Vec& y) { return std::abs(f(y)); };
    return annulus_value(dens, dim, abs_f, ra, rb, dens.quad.radial_nodes,
                         dens.quad.angular_nodes);
}

/// Refines one annulus by doubling radial and angular node counts until the
/// value is stable to rel_tol.
template <class F>
auto annulus_adaptive(const ParametricDensity& dens, int dim, F& f, double ra,
                      double rb, double rel_tol) {
    int nr = dens.quad.radial_nodes, nang = dens.quad.angular_nodes;
    auto prev = annulus_value(dens, dim, f, ra, rb, nr, nang);
    for (int k = 0; k < 6; ++k) {
        nr *= 2;
        if (dim > 1) nang *= 2;
        auto next = annulus_value(dens, dim, f, ra, rb, nr, nang);
        if (magnitude(next - prev) <= rel_tol * magnitude(next) + 1e-14) return next;
        prev = next;
    }
    throw QuadratureError("annulus quadrature did not stabilize under refinement");
}

struct LadderState {
    double partial_mag = 0.0;
    double prev_inc = -1.0;
    int no_decay_streak = 0;

    /// Returns true when the increments betray divergence: either the partial
    /// sums passed the cap or they stopped decaying rung after rung.
    bool diverging(double inc_mag) {
        partial_mag += inc_mag;
        if (partial_mag > kDivergenceCap || std::isinf(inc_mag)) return true;
        if (prev_inc >= 0.0 && inc_mag >= 0.999 * prev_inc && inc_mag > 0.0)
            ++no_decay_streak;
        else
            no_decay_streak = 0;
        prev_inc = inc_mag;
        return no_decay_streak >= 10 && partial_mag > 0.0;
    }
};

/// Integral of f against one density component over rmin < |y| < rmax via a
/// geometric ladder of annuli (the exponential radial substitution). Each
/// rung is refined adaptively; the rung increments drive convergence,
/// divergence detection, and a geometric tail estimate.
template <class F>
auto density_integrate(const ParametricDensity& dens, int dim, F& f, double rmin,
                       double rmax, double rel_tol) {
    using R = std::decay_t<decltype(f(std::declval<const Vec&>()))>;
    NuIntegral<R> out;
    const double lo = std::max(rmin, dens.r_inner);
    const double hi = std::min(rmax, dens.r_outer);
    if (lo >= hi) return out;

    const double anchor = (lo > 0.0) ? lo : std::min(1.0, hi);
    R sum{};

    // An annulus whose absolute mass cannot move the total past the
    // tolerance is taken at base resolution; everything else refines.
    auto rung_value = [&](double a, double b, double current_mag) {
        const double abs_mass = annulus_abs_mass(dens, dim, f, a, b);
        if (abs_mass <= 0.01 * rel_tol * current_mag)
            return std::pair<R, double>(
                annulus_value(dens, dim, f, a, b, dens.quad.radial_nodes,
                              dens.quad.angular_nodes),
                abs_mass);
        return std::pair<R, double>(annulus_adaptive(dens, dim, f, a, b, rel_tol * 0.1),
                                    abs_mass);
    };

    // Downward rungs [anchor/2^{k+1}, anchor/2^k] toward the origin.
    if (lo == 0.0) {
        LadderState state;
        double b = anchor;
        double prev_mag = -1.0;
        bool settled = false;
        for (int k = 0; k < 120; ++k) {
            const double a = 0.5 * b;
            auto [inc, abs_mass] = rung_value(a, b, magnitude(sum));
            const double m = std::max(magnitude(inc), abs_mass);
            if (state.diverging(m)) {
                out.infinite = true;
                return out;
            }
            sum += inc;
            const double q = (prev_mag > 0.0) ? std::min(m / prev_mag, 0.95) : 0.5;
            const double tail = m * q / (1.0 - q);
            if (m + tail <= 0.3 * rel_tol * magnitude(sum) + 1e-300) {
                settled = true;
                break;
            }
            prev_mag = m;
            b = a;
        }
        if (!settled && magnitude(sum) > 0.0)
            throw QuadratureError("inner-annulus ladder did not settle");
    }

    // Upward rungs [anchor 2^k, anchor 2^{k+1}] toward rmax.
    {
        LadderState state;
        double a = anchor;
        double prev_mag = -1.0;
        bool settled = std::isfinite(hi);
        for (int k = 0; k < 90 && a < hi; ++k) {
            const double b = std::min(2.0 * a, hi);
            auto [inc, abs_mass] = rung_value(a, b, magnitude(sum));
            const double m = std::max(magnitude(inc), abs_mass);
            if (state.diverging(m)) {
                out.infinite = true;
                return out;
            }
            sum += inc;
            a = b;
            if (!std::isfinite(hi)) {
                const double q = (prev_mag > 0.0) ? std::min(m / prev_mag, 0.95) : 0.5;
                const double tail = m * q / (1.0 - q);
                if (m + tail <= 0.3 * rel_tol * magnitude(sum) + 1e-300) {
                    settled = true;
                    break;
                }
                prev_mag = m;
            }
        }
        if (!settled)
            throw QuadratureError("outer-annulus ladder did not settle");
    }

    out.value = sum;
    return out;
}

}  // namespace detail

/// Integral of f against the measure over rmin <= |y| < rmax: atom
/// contributions are exact sums, density contributions run the annulus
/// ladder. Divergence is reported through the infinite flag, not an
/// exception.
template <class F>
auto nu_integrate(const LevyMeasure& nu, F&& f, double rmin, double rmax,
                  double rel_tol = 1e-6) {
    using R = std::decay_t<decltype(f(std::declval<const Vec&>()))>;
    NuIntegral<R> out;
    for (const Atom& a : nu.atoms) {
        const double r = norm2(a.position);
        if (r >= rmin && r < rmax) {
            R term = f(a.position) * a.mass;
            if (std::isnan(detail::magnitude(term)))
                throw QuadratureError("integrand not finite at an atom");
            if (std::isinf(detail::magnitude(term))) {
                out.infinite = true;
                return out;
            }
            out.value += term;
        }
    }
    for (const ParametricDensity& d : nu.densities) {
        auto part = detail::density_integrate(d, nu.dim, f, rmin, rmax, rel_tol);
        if (part.infinite) {
            out.infinite = true;
            return out;
        }
        out.value += part.value;
    }
    return out;
}

enum class JumpRegion { small_jumps, large_jumps, all };

/// Shared quadrature engine behind every nu-integral. small_jumps is the
/// open region 0 < |y| < 1, large_jumps is |y| >= 1.
template <class F>
auto levy_integral(const LevyMeasure& nu, F&& f, JumpRegion region,
                   double rel_tol = 1e-6) {
    switch (region) {
        case JumpRegion::small_jumps:
            return nu_integrate(nu, std::forward<F>(f), 0.0, 1.0, rel_tol);
        case JumpRegion::large_jumps:
            return nu_integrate(nu, std::forward<F>(f), 1.0, kInf, rel_tol);
        case JumpRegion::all:
            return nu_integrate(nu, std::forward<F>(f), 0.0, kInf, rel_tol);
    }
    throw std::invalid_argument("levy_integral: unknown region");
}

/// The pivot condition: is int_{|y|>=1} g(y) nu(dy) finite? Everything in
/// the equivalence chain hangs off this classification.
inline ExtendedReal jump_moment_criterion(const LevyMeasure& nu,
                                          const WeightFunction& g) {
    return levy_integral(nu, [&g](const Vec& y) { return g.eval(y); },
                         JumpRegion::large_jumps);
}

/// Quadrature nodes frozen after calibrating the ladder against a reference
/// integrand; used to sweep generator applications along simulated paths
/// without re-running the adaptive machinery at every state.
struct FrozenNodes {
    std::vector<Vec> points;
    std::vector<double> weights;  // includes the density value
    bool infinite = false;
};

template <class F>
FrozenNodes freeze_density_nodes(const LevyMeasure& nu, F&& calibration, double rmin,
                                 double rmax, double rel_tol = 1e-6) {
    FrozenNodes out;
    for (const ParametricDensity& dens : nu.densities) {
        // First run the adaptive ladder to find the extent and level that the
        // calibration integrand needs, then record nodes one refinement up.
        auto probe = detail::density_integrate(dens, nu.dim, calibration, rmin, rmax,
                                               rel_tol);
        if (probe.infinite) {
            out.infinite = true;
            return out;
        }
        const double lo = std::max(rmin, dens.r_inner);
        const double hi = std::min(rmax, dens.r_outer);
        if (lo >= hi) continue;
        const double anchor = (lo > 0.0) ? lo : std::min(1.0, hi);

        auto record = [&](double ra, double rb) {
            const int nr = dens.quad.radial_nodes;
            const int nang = dens.quad.angular_nodes;
            const quad::DirectionSet ds = quad::sphere_directions(nu.dim, nang);
            const quad::GaussRule& rule = quad::gauss_legendre(nr);
            const double mid = 0.5 * (ra + rb), half = 0.5 * (rb - ra);
            for (std::size_t j = 0; j < ds.dirs.size(); ++j)
                for (int i = 0; i < nr; ++i) {
                    const double r = mid + half * rule.nodes[i];
                    Vec y(static_cast<std::size_t>(nu.dim));
                    for (int k = 0; k < nu.dim; ++k) y[k] = r * ds.dirs[j][k];
                    const double w = dens(y);
                    if (w == 0.0) continue;
                    out.points.push_back(y);
                    out.weights.push_back(w * std::pow(r, nu.dim - 1) *
                                          rule.weights[i] * half * ds.weights[j]);
                }
        };

        // Replay the ladder geometry, stopping where the calibration integrand
        // stopped mattering.
        if (lo == 0.0) {
            double b = anchor;
            double total = 0.0, prev = -1.0;
            for (int k = 0; k < 120; ++k) {
                const double a = 0.5 * b;
                auto inc = detail::annulus_adaptive(dens, nu.dim, calibration, a, b,
                                                    rel_tol * 0.1);
                const double m = detail::magnitude(inc);
                record(a, b);
                total += m;
                const double q = (prev > 0.0) ? std::min(m / prev, 0.95) : 0.5;
                if (m * (1.0 + q / (1.0 - q)) <= 0.3 * rel_tol * total + 1e-300) break;
                prev = m;
                b = a;
            }
        }
        {
            double a = anchor;
            double total = 0.0, prev = -1.0;
            for (int k = 0; k < 90 && a < hi; ++k) {
                const double b = std::min(2.0 * a, hi);
                auto inc = detail::annulus_adaptive(dens, nu.dim, calibration, a, b,
                                                    rel_tol * 0.1);
                const double m = detail::magnitude(inc);
                record(a, b);
                total += m;
                a = b;
                if (!std::isfinite(hi)) {
                    const double q = (prev > 0.0) ? std::min(m / prev, 0.95) : 0.5;
                    if (m * (1.0 + q / (1.0 - q)) <= 0.3 * rel_tol * total + 1e-300)
                        break;
                    prev = m;
                }
            }
        }
    }
    return out;
}

/// Measure invariants: positive masses, power-law index in (0,2), no mass at
/// the origin, and a convergent small-jump second moment.
inline void validate_measure(const LevyMeasure& nu) {
    for (const Atom& a : nu.atoms) {
        if (static_cast<int>(a.position.size()) != nu.dim)
            throw std::invalid_argument("measure invariant violated: atom dimension");
        if (!(a.mass > 0.0))
            throw std::invalid_argument("measure invariant violated: atom mass must be > 0");
        if (norm2(a.position) == 0.0)
            throw std::invalid_argument(
                "measure invariant violated: no mass at the origin allowed");
    }
    for (const ParametricDensity& d : nu.densities) {
        if (d.family == DensityFamily::power_law || d.family == DensityFamily::exp_tilt) {
            if (!(d.alpha > 0.0 && d.alpha < 2.0))
                throw std::invalid_argument(
                    "measure invariant violated: power-law index must be in (0,2)");
            if (!(d.scale > 0.0))
                throw std::invalid_argument(
                    "measure invariant violated: density scale must be > 0");
        }
        if (d.family == DensityFamily::gaussian && !(d.rate > 0.0))
            throw std::invalid_argument(
                "measure invariant violated: gaussian jump rate must be > 0");
        if (d.r_inner < 0.0 || d.r_outer <= d.r_inner)
            throw std::invalid_argument(
                "measure invariant violated: support annulus is empty");
    }
    auto second = nu_integrate(nu, [](const Vec& y) { return dot(y, y); }, 0.0, 1.0);
    if (second.infinite)
        throw std::invalid_argument(
            "measure invariant violated: small-jump second moment diverges");
}

}  // namespace levy
