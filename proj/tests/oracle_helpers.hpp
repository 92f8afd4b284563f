#pragma once

// Independent numerical oracles for the test suite. Deliberately implemented
// with different methods than the library (adaptive Simpson instead of
// Gauss-Legendre ladders, plain bisection) so expected values never share a
// code path with the implementation under test.

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracle {

inline double simpson_panel(const std::function<double(double)>& f, double a, double b) {
    return (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
}

inline double simpson_rec(const std::function<double(double)>& f, double a, double b,
                          double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double left = simpson_panel(f, a, m), right = simpson_panel(f, m, b);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, right, 0.5 * tol, depth - 1);
}

/// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10) {
    return simpson_rec(f, a, b, simpson_panel(f, a, b), tol, 40);
}

/// Plain bisection; requires a sign change.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double tol = 1e-12) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw std::invalid_argument("bisect: no sign change");
    for (int i = 0; i < 200 && (hi - lo) > tol; ++i) {
        const double mid = 0.5 * (lo + hi), fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

/// E[f(N)] for N ~ Poisson(mean), truncated far beyond the needed mass.
inline double poisson_sum(const std::function<double(double)>& f, double mean,
                          int kmax = 60) {
    double pk = std::exp(-mean), total = 0.0;
    for (int k = 0; k <= kmax; ++k) {
        total += f(static_cast<double>(k)) * pk;
        pk *= mean / (k + 1);
    }
    return total;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// E[f(Z sigma)] for Z standard normal, by quadrature over +-12 sigma.
inline double gaussian_expectation(const std::function<double(double)>& f, double sigma,
                                   double tol = 1e-10) {
    return integrate(
        [&](double x) {
            return f(x) * std::exp(-0.5 * x * x / (sigma * sigma)) /
                   (sigma * std::sqrt(2.0 * 3.14159265358979323846));
        },
        -12.0 * sigma, 12.0 * sigma, tol);
}

}  // namespace oracle
