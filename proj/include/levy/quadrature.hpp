#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace levy {

/// Quadrature refinement gave up before reaching the requested relative
/// tolerance, or an integrand evaluated to a non-finite value.
struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace quad {

/// Gauss-Legendre nodes/weights on [-1,1], computed by Newton iteration on
/// the Legendre recurrence and cached per order.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

/// \int_a^b f(x) dx with an n-point Gauss-Legendre rule.
template <class F>
auto integrate(F&& f, double a, double b, int n) {
    const GaussRule& rule = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    using R = decltype(f(0.0));
    R sum{};
    for (int i = 0; i < n; ++i) sum += f(mid + half * rule.nodes[i]) * rule.weights[i];
    return sum * half;
}

/// Node doubling until the value moves by less than rel_tol (or abs_floor for
/// integrals that are essentially zero). Throws on non-convergence.
template <class F>
auto integrate_adaptive(F&& f, double a, double b, int n0, double rel_tol,
                        int max_doublings = 6, double abs_floor = 1e-14) {
    auto prev = integrate(f, a, b, n0);
    int n = n0;
    for (int k = 0; k < max_doublings; ++k) {
        n *= 2;
        auto next = integrate(f, a, b, n);
        const double change = std::abs(next - prev);
        if (change <= rel_tol * std::abs(next) + abs_floor) return next;
        prev = next;
    }
    throw QuadratureError("quadrature did not converge to relative tolerance");
}

/// Directions and weights for the angular factor of an annulus integral.
/// Weights sum to the surface measure of the unit sphere. d=1 uses the two
/// half-lines, d=2 uniform angles (spectrally accurate for periodic
/// integrands), d=3 a Gauss-Legendre x uniform-azimuth product rule.
struct DirectionSet {
    std::vector<std::vector<double>> dirs;
    std::vector<double> weights;
};

inline DirectionSet sphere_directions(int dim, int n_angular) {
    DirectionSet ds;
    if (dim == 1) {
        ds.dirs = {{1.0}, {-1.0}};
        ds.weights = {1.0, 1.0};
    } else if (dim == 2) {
        for (int j = 0; j < n_angular; ++j) {
            const double th = 2.0 * std::numbers::pi * j / n_angular;
            ds.dirs.push_back({std::cos(th), std::sin(th)});
            ds.weights.push_back(2.0 * std::numbers::pi / n_angular);
        }
    } else if (dim == 3) {
        const int np = std::max(2, n_angular / 2);
        const GaussRule& rule = gauss_legendre(np);
        for (int i = 0; i < np; ++i) {
            const double mu = rule.nodes[i];          // cos(polar)
            const double s = std::sqrt(1.0 - mu * mu);
            for (int j = 0; j < n_angular; ++j) {
                const double th = 2.0 * std::numbers::pi * j / n_angular;
                ds.dirs.push_back({s * std::cos(th), s * std::sin(th), mu});
                ds.weights.push_back(rule.weights[i] * 2.0 * std::numbers::pi / n_angular);
            }
        }
    } else {
        throw std::invalid_argument("sphere_directions: only dimensions 1..3 supported");
    }
    return ds;
}

}  // namespace quad
}  // namespace levy
