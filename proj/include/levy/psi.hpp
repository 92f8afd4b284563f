#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "levy/measure.hpp"
#include "levy/triplet.hpp"

namespace levy {

using Complex = std::complex<double>;
using CVec = std::vector<Complex>;

namespace detail {

/// 1 - e^z + z = -(e^z - 1 - z), evaluated without cancellation: the direct
/// form loses all precision for |z| << 1, and infinite-activity measures
/// amplify that roundoff without bound near the origin.
inline Complex one_minus_exp_plus_z(const Complex& z) {
    if (std::abs(z) < 0.25) {
        Complex s = 1.0 / 181440.0;
        s = 1.0 / 20160.0 + z * s;
        s = 1.0 / 2520.0 + z * s;
        s = 1.0 / 360.0 + z * s;
        s = 1.0 / 60.0 + z * s;
        s = 1.0 / 12.0 + z * s;
        s = 1.0 / 3.0 + z * s;
        s = 1.0 + z * s;
        return -0.5 * z * z * s;
    }
    return 1.0 - std::exp(z) + z;
}

/// int_{rmin <= |y|} (1 - e^{i xi . y}) nu(dy) for real xi, written as the
/// (smooth) mass part minus the oscillatory transform. The transform is
/// integrated annulus by annulus with phase-matched panel counts and cut off
/// once the remaining nu-mass is provably below tolerance (|1 - e^{i.}| <= 2
/// bounds the dropped remainder). Direct ladders cannot do this: far annuli
/// oscillate too fast to refine yet carry too much raw mass to skip.
inline Complex tail_exponent_real(const LevyMeasure& nu, const Vec& xi, double rmin,
                                  double rel_tol, double scale_base) {
    const Complex I(0.0, 1.0);
    Complex total{};
    for (const Atom& a : nu.atoms) {
        if (norm2(a.position) >= rmin) {
            double xy = 0.0;
            for (std::size_t i = 0; i < xi.size(); ++i) xy += xi[i] * a.position[i];
            total += a.mass * (1.0 - std::exp(I * xy));
        }
    }
    const double xi_mag = norm2(xi);
    for (const ParametricDensity& dens : nu.densities) {
        const double lo = std::max(rmin, dens.r_inner);
        const double hi = dens.r_outer;
        if (lo >= hi) continue;

        auto one = [](const Vec&) { return 1.0; };
        Complex acc{};
        double a = lo, prev_mass = -1.0, acc_mass = 0.0;
        for (int k = 0; k < 90 && a < hi; ++k) {
            const double b = std::min(2.0 * a, hi);
            const double mass = detail::annulus_adaptive(dens, nu.dim, one, a, b,
                                                         rel_tol * 0.1);
            acc_mass += mass;
            // oscillatory transform of this annulus
            Complex osc{};
            if (nu.dim == 1) {
                const int panels = std::max(
                    2, static_cast<int>(std::ceil(xi_mag * (b - a) / (2.0 * std::numbers::pi))));
                for (double side : {1.0, -1.0}) {
                    for (int p = 0; p < panels; ++p) {
                        const double pa = a + (b - a) * p / panels;
                        const double pb = a + (b - a) * (p + 1) / panels;
                        osc += quad::integrate(
                            [&](double r) {
                                return std::exp(I * (xi[0] * side * r)) *
                                       dens(Vec{side * r});
                            },
                            pa, pb, 16);
                    }
                }
            } else {
                auto f = [&](const Vec& y) {
                    Complex xy{};
                    for (std::size_t i = 0; i < xi.size(); ++i) xy += xi[i] * y[i];
                    return std::exp(I * xy);
                };
                osc = detail::annulus_adaptive(dens, nu.dim, f, a, b, rel_tol * 0.1);
            }
            acc += mass - osc;
            a = b;
            if (std::isfinite(hi) && a >= hi) break;
            const double q = (prev_mass > 0.0) ? std::min(mass / prev_mass, 0.95) : 0.5;
            const double tail_mass = mass * q / (1.0 - q);
            const double tol_abs =
                rel_tol * std::max({scale_base, acc_mass, 1e-12});
            if (2.0 * tail_mass <= tol_abs) {
                acc += tail_mass;  // the constant half of the dropped remainder
                break;
            }
            prev_mass = mass;
        }
        total += acc;
    }
    return total;
}

/// Characteristic exponent for complex frequencies (needed for the analytic
/// continuation to xi = -i beta). The jump integrand is written so that the
/// compensated small-jump part stays numerically benign near the origin.
inline Complex psi_at(const LevyTriplet& t, const CVec& xi, double rel_tol) {
    if (static_cast<int>(xi.size()) != t.dim)
        throw std::invalid_argument("eval_psi: frequency dimension mismatch");

    const Complex I(0.0, 1.0);
    Complex drift{};
    for (int i = 0; i < t.dim; ++i) drift += xi[i] * t.b[i];
    Complex diffusion{};
    for (int i = 0; i < t.dim; ++i)
        for (int k = 0; k < t.dim; ++k) diffusion += xi[i] * t.Q(i, k) * xi[k];
    const Complex local = -I * drift + 0.5 * diffusion;

    bool real_xi = true;
    Vec xi_re(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) {
        xi_re[i] = xi[i].real();
        if (xi[i].imag() != 0.0) real_xi = false;
    }

    auto small_integrand = [&](const Vec& y) -> Complex {
        Complex xy{};
        for (int i = 0; i < t.dim; ++i) xy += xi[i] * y[i];
        return one_minus_exp_plus_z(I * xy);
    };
    auto small = nu_integrate(t.nu, small_integrand, 0.0, 1.0, rel_tol);
    if (small.infinite)
        throw QuadratureError("eval_psi: compensated small-jump integral diverged");

    if (real_xi) {
        const double scale = std::abs(local) + std::abs(small.value) + 1.0;
        const Complex large = tail_exponent_real(t.nu, xi_re, 1.0, rel_tol, scale);
        return local + small.value + large;
    }

    auto large_integrand = [&](const Vec& y) -> Complex {
        Complex xy{};
        for (int i = 0; i < t.dim; ++i) xy += xi[i] * y[i];
        return 1.0 - std::exp(I * xy);
    };
    auto large = nu_integrate(t.nu, large_integrand, 1.0, kInf, rel_tol);
    if (large.infinite)
        throw QuadratureError("eval_psi: jump integral diverged");
    return local + small.value + large.value;
}

}  // namespace detail

/// psi(xi) per the exponent formula: -i b.xi + (1/2) Q xi.xi plus the
/// compensated jump integral with the fixed cut-off 1_(0,1)(|y|).
/// psi(0) = 0 exactly; real xi give Re psi >= 0 and Hermitian symmetry.
inline Complex eval_psi(const LevyTriplet& t, const Vec& xi, double rel_tol = 1e-6) {
    CVec z(xi.size());
    bool zero = true;
    for (std::size_t i = 0; i < xi.size(); ++i) {
        z[i] = Complex(xi[i], 0.0);
        if (xi[i] != 0.0) zero = false;
    }
    if (static_cast<int>(xi.size()) != t.dim)
        throw std::invalid_argument("eval_psi: frequency dimension mismatch");
    if (zero) return Complex(0.0, 0.0);
    return detail::psi_at(t, z, rel_tol);
}

/// Continuation of psi along complex frequencies (used by tests sampling the
/// segment xi = -i theta beta).
inline Complex eval_psi(const LevyTriplet& t, const CVec& xi, double rel_tol = 1e-6) {
    return detail::psi_at(t, xi, rel_tol);
}

/// psi(-i beta), the real cumulant with E[e^{beta . X_t}] = e^{-t psi(-i beta)}.
/// Requires the exponential moment criterion for g(x) = e^{beta . x}; the
/// imaginary part of the continuation is a consistency check.
inline double eval_cumulant(const LevyTriplet& t, const Vec& beta) {
    if (static_cast<int>(beta.size()) != t.dim)
        throw std::invalid_argument("eval_cumulant: dimension mismatch");
    bool zero = true;
    for (double v : beta)
        if (v != 0.0) zero = false;
    if (zero) return 0.0;

    auto criterion = jump_moment_criterion(t.nu, WeightFunction::exp_linear(beta));
    if (criterion.infinite)
        throw std::domain_error(
            "eval_cumulant: exponential moment criterion fails for this beta");

    CVec xi(beta.size());
    for (std::size_t i = 0; i < beta.size(); ++i) xi[i] = Complex(0.0, -beta[i]);
    const Complex val = detail::psi_at(t, xi, 1e-8);
    const double scale = std::max(1.0, std::abs(val.real()));
    if (std::abs(val.imag()) > 1e-10 * scale)
        throw std::runtime_error(
            "eval_cumulant: continuation produced a non-negligible imaginary part");
    return val.real();
}

inline double eval_cumulant(const LevyTriplet& t, double beta) {
    return eval_cumulant(t, Vec{beta});
}

}  // namespace levy
