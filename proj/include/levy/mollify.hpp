#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "levy/linalg.hpp"
#include "levy/quadrature.hpp"
#include "levy/weight.hpp"

namespace levy {

/// Friedrichs mollifier: the normalized rotationally symmetric bump
/// j_eps(x) = eps^{-d} j(x/eps), j(x) proportional to exp(-1/(1-|x|^2)) on
/// |x| < 1. Kernel derivatives are analytic (no finite differences).
struct Mollifier {
    double epsilon = 0.1;
    int dim = 1;
    double normalizer = 1.0;  // integral of the un-normalized profile

    static Mollifier standard_bump(double eps, int dim = 1) {
        if (eps <= 0.0) throw std::invalid_argument("mollifier: epsilon must be > 0");
        if (dim < 1 || dim > 3)
            throw std::invalid_argument("mollifier: only dimensions 1..3 supported");
        Mollifier m;
        m.epsilon = eps;
        m.dim = dim;
        const double surface = dim == 1 ? 2.0
                             : dim == 2 ? 2.0 * std::numbers::pi
                                        : 4.0 * std::numbers::pi;
        m.normalizer = surface * quad::integrate(
            [dim](double r) {
                return std::exp(-1.0 / (1.0 - r * r)) * std::pow(r, dim - 1);
            },
            0.0, 1.0 - 1e-12, 128);
        return m;
    }

    /// Profile of the unit kernel at u with |u| < 1 and its log-derivative
    /// pieces; x-space values rescale by powers of epsilon.
    double eval(const Vec& x) const {
        const double s = dot(x, x) / (epsilon * epsilon);
        if (s >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - s)) /
               (normalizer * std::pow(epsilon, dim));
    }

    Vec grad(const Vec& x) const {
        Vec g(x.size(), 0.0);
        const double e2 = epsilon * epsilon;
        const double s = dot(x, x) / e2;
        if (s >= 1.0) return g;
        const double j = eval(x);
        const double d1 = 1.0 - s;
        for (std::size_t i = 0; i < x.size(); ++i)
            g[i] = j * (-2.0 * x[i] / (e2 * d1 * d1));
        return g;
    }

    Mat hess(const Vec& x) const {
        const int d = static_cast<int>(x.size());
        Mat h(d);
        const double e2 = epsilon * epsilon;
        const double s = dot(x, x) / e2;
        if (s >= 1.0) return h;
        const double j = eval(x);
        const double d1 = 1.0 - s;
        for (int i = 0; i < d; ++i) {
            const double fi = -2.0 * x[i] / (e2 * d1 * d1);
            for (int k = 0; k < d; ++k) {
                const double fk = -2.0 * x[k] / (e2 * d1 * d1);
                double fik = -8.0 * x[i] * x[k] / (e2 * e2 * d1 * d1 * d1);
                if (i == k) fik += -2.0 / (e2 * d1 * d1);
                h(i, k) = j * (fi * fk + fik);
            }
        }
        return h;
    }

    /// Unit-mass check by independent radial quadrature (invariant: within 1e-8).
    double mass(int nodes = 256) const {
        const double surface = dim == 1 ? 2.0
                             : dim == 2 ? 2.0 * std::numbers::pi
                                        : 4.0 * std::numbers::pi;
        return surface * quad::integrate(
            [this](double r) {
                Vec x(static_cast<std::size_t>(dim), 0.0);
                x[0] = r;
                return eval(x) * std::pow(r, dim - 1);
            },
            0.0, epsilon * (1.0 - 1e-12), nodes);
    }
};

namespace detail {

/// Dense samples on a uniform grid with local quadratic interpolation.
/// Used to make the near-kink region of mollified catalog weights O(1) per
/// evaluation (path sweeps hit it millions of times).
struct DenseTable {
    double lo = 0.0, step = 1.0;
    std::vector<double> v;

    template <class F>
    static DenseTable build(F&& f, double lo, double hi, int n = 512) {
        DenseTable t;
        t.lo = lo;
        t.step = (hi - lo) / n;
        t.v.resize(static_cast<std::size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) t.v[static_cast<std::size_t>(i)] = f(lo + i * t.step);
        return t;
    }

    double operator()(double x) const {
        const double u = (x - lo) / step;
        const int n = static_cast<int>(v.size()) - 1;
        int i = static_cast<int>(std::lround(u));
        if (i < 1) i = 1;
        if (i > n - 1) i = n - 1;
        const double d = u - i;
        const double a = v[static_cast<std::size_t>(i) - 1],
                     b = v[static_cast<std::size_t>(i)],
                     c = v[static_cast<std::size_t>(i) + 1];
        return b + 0.5 * d * (c - a) + 0.5 * d * d * (c - 2.0 * b + a);
    }
};

/// Convolution (k * g)(x) over the epsilon ball for a kernel slice k (the
/// mollifier or one of its derivatives). In d=1 an optional split point
/// handles the kink of |.|-type weights exactly.
template <class K>
double ball_convolution_1d(K&& kernel, const std::function<double(const Vec&)>& g,
                           double x, double eps, bool split_at_x, int nodes) {
    auto f = [&](double y) { return kernel(Vec{y}) * g(Vec{x - y}); };
    if (split_at_x && std::abs(x) < eps) {
        return quad::integrate(f, -eps, x, nodes) + quad::integrate(f, x, eps, nodes);
    }
    return quad::integrate(f, -eps, eps, 2 * nodes);
}

template <class K>
double ball_convolution(K&& kernel, const std::function<double(const Vec&)>& g,
                        const Vec& x, double eps, int dim, int nodes) {
    const quad::DirectionSet ds = quad::sphere_directions(dim, 2 * nodes);
    const quad::GaussRule& rule = quad::gauss_legendre(nodes);
    const double half = 0.5 * eps, mid = 0.5 * eps;
    double total = 0.0;
    Vec y(static_cast<std::size_t>(dim)), z(static_cast<std::size_t>(dim));
    for (std::size_t j = 0; j < ds.dirs.size(); ++j) {
        for (int i = 0; i < nodes; ++i) {
            const double r = mid + half * rule.nodes[i];
            for (int k = 0; k < dim; ++k) {
                y[k] = r * ds.dirs[j][k];
                z[k] = x[k] - y[k];
            }
            total += kernel(y) * g(z) * std::pow(r, dim - 1) * rule.weights[i] * half *
                     ds.weights[j];
        }
    }
    return total;
}

inline double sampled_sup_ball(const std::function<double(const Vec&)>& f, double radius,
                               int dim, int samples = 64) {
    double sup = 0.0;
    const quad::DirectionSet ds = quad::sphere_directions(dim, 16);
    for (std::size_t j = 0; j < ds.dirs.size(); ++j)
        for (int i = 0; i <= samples; ++i) {
            const double r = radius * i / samples;
            Vec x(static_cast<std::size_t>(dim));
            for (int k = 0; k < dim; ++k) x[k] = r * ds.dirs[j][k];
            sup = std::max(sup, std::abs(f(x)));
        }
    return sup;
}

}  // namespace detail

/// Friedrichs regularization g^eps = j_eps * g, smooth, with derivative
/// evaluators (d^a j_eps) * g and the two-sided comparison constant
/// c_eps = c sup_{|y|<=eps} g(y) recorded, so that
/// g/c_eps <= g^eps <= c_eps g holds everywhere.
///
/// The exponential and integer-power catalog families in d=1 get closed-form
/// evaluators away from the kink at the origin (the convolution separates
/// there); other weights fall back to ball quadrature.
inline WeightFunction mollify(const WeightFunction& g, const Mollifier& m) {
    if (g.dim != m.dim)
        throw std::invalid_argument("mollify: weight/mollifier dimension mismatch");
    const double eps = m.epsilon;
    const int dim = m.dim;

    WeightFunction out;
    out.family = g.family;
    out.dim = dim;
    out.param = g.param;
    out.direction = g.direction;
    out.smooth = true;

    MollifiedInfo info;
    info.epsilon = eps;
    info.base_c = g.c;
    info.base_eval = g.eval;
    const double sup_g_ball = detail::sampled_sup_ball(g.eval, eps, dim, 128);
    info.c_eps = g.c * sup_g_ball;

    // Sampled sups of the kernel derivatives; conservative constants for the
    // derivative bounds |d^a g^eps| <= c_{a,eps} g.
    const double ball_vol = dim == 1 ? 2.0 * eps
                         : dim == 2 ? std::numbers::pi * eps * eps
                                    : 4.0 / 3.0 * std::numbers::pi * eps * eps * eps;
    double sup_j1 = 0.0, sup_j2 = 0.0;
    {
        const quad::DirectionSet ds = quad::sphere_directions(dim, 16);
        for (std::size_t j = 0; j < ds.dirs.size(); ++j)
            for (int i = 0; i <= 256; ++i) {
                Vec x(static_cast<std::size_t>(dim));
                for (int k = 0; k < dim; ++k)
                    x[k] = eps * (i / 256.0) * ds.dirs[j][k];
                Vec gr = m.grad(x);
                Mat he = m.hess(x);
                for (int k = 0; k < dim; ++k) sup_j1 = std::max(sup_j1, std::abs(gr[k]));
                for (double v : he.a) sup_j2 = std::max(sup_j2, std::abs(v));
            }
    }
    info.c1_eps = 1.05 * g.c * sup_g_ball * sup_j1 * ball_vol;
    info.c2_eps = 1.05 * g.c * sup_g_ball * sup_j2 * ball_vol;
    out.mollified = info;
    // g^eps(x+y) <= c_eps g(x+y) <= c_eps c g(x) g(y) <= c_eps^3 c g^eps g^eps
    out.c = info.c_eps * info.c_eps * info.c_eps * g.c;

    const bool radial_kink =
        g.family == WeightFamily::exp_abs || g.family == WeightFamily::poly;

    if (dim == 1 && g.family == WeightFamily::exp_abs) {
        // For |x| >= eps the kernel never crosses the kink and the convolution
        // separates: g^eps(x) = M e^{beta |x|} with M = int j_eps cosh(beta y) dy.
        // Inside the kink region the convolution is tabulated once.
        const double beta = g.param;
        const double M = quad::integrate(
            [&](double y) { return m.eval(Vec{y}) * std::cosh(beta * y); }, -eps, eps,
            128);
        auto base = g.eval;
        auto tab_v = detail::DenseTable::build(
            [&](double x) {
                return detail::ball_convolution_1d(
                    [&m](const Vec& y) { return m.eval(y); }, base, x, eps, true, 64);
            },
            -eps, eps);
        auto tab_d = detail::DenseTable::build(
            [&](double x) {
                return detail::ball_convolution_1d(
                    [&m](const Vec& y) { return m.grad(y)[0]; }, base, x, eps, true, 64);
            },
            -eps, eps);
        auto tab_h = detail::DenseTable::build(
            [&](double x) {
                return detail::ball_convolution_1d(
                    [&m](const Vec& y) { return m.hess(y)(0, 0); }, base, x, eps, true,
                    64);
            },
            -eps, eps);
        out.eval = [=](const Vec& x) {
            if (std::abs(x[0]) >= eps) return M * std::exp(beta * std::abs(x[0]));
            return tab_v(x[0]);
        };
        out.gradient = [=](const Vec& x) -> Vec {
            if (std::abs(x[0]) >= eps) {
                const double sgn = x[0] > 0 ? 1.0 : -1.0;
                return {sgn * beta * M * std::exp(beta * std::abs(x[0]))};
            }
            return {tab_d(x[0])};
        };
        out.hessian = [=](const Vec& x) -> Mat {
            if (std::abs(x[0]) >= eps)
                return Mat(1, {beta * beta * M * std::exp(beta * std::abs(x[0]))});
            return Mat(1, {tab_h(x[0])});
        };
        return out;
    }

    if (dim == 1 && g.family == WeightFamily::poly &&
        g.param == std::floor(g.param) && g.param <= 8.0) {
        // Integer p: binomial expansion with cached kernel moments
        // mu_k = int (-y)^k j_eps(y) dy (odd moments vanish by symmetry).
        const int p = static_cast<int>(g.param);
        std::vector<double> mu(static_cast<std::size_t>(p) + 1, 0.0);
        for (int k = 0; k <= p; k += 2)
            mu[k] = quad::integrate(
                [&](double y) { return m.eval(Vec{y}) * std::pow(-y, k); }, -eps, eps,
                128);
        std::vector<double> binom(static_cast<std::size_t>(p) + 1, 1.0);
        for (int k = 1; k <= p; ++k) binom[k] = binom[k - 1] * (p - k + 1) / k;
        auto series = [=](double u, int deriv) {  // u = 1+|x|, one-sided
            double s = 0.0;
            for (int k = 0; k + deriv <= p; k += 2) {
                double coef = binom[k] * mu[k];
                for (int j = 0; j < deriv; ++j) coef *= (p - k - j);
                s += coef * std::pow(u, p - k - deriv);
            }
            return s;
        };
        auto base = g.eval;
        auto tab_v = detail::DenseTable::build(
            [&](double x) {
                return detail::ball_convolution_1d(
                    [&m](const Vec& y) { return m.eval(y); }, base, x, eps, true, 64);
            },
            -eps, eps);
        auto tab_d = detail::DenseTable::build(
            [&](double x) {
                return detail::ball_convolution_1d(
                    [&m](const Vec& y) { return m.grad(y)[0]; }, base, x, eps, true, 64);
            },
            -eps, eps);
        auto tab_h = detail::DenseTable::build(
            [&](double x) {
                return detail::ball_convolution_1d(
                    [&m](const Vec& y) { return m.hess(y)(0, 0); }, base, x, eps, true,
                    64);
            },
            -eps, eps);
        out.eval = [=](const Vec& x) {
            if (std::abs(x[0]) >= eps) return series(1.0 + std::abs(x[0]), 0);
            return tab_v(x[0]);
        };
        out.gradient = [=](const Vec& x) -> Vec {
            if (std::abs(x[0]) >= eps) {
                const double sgn = x[0] > 0 ? 1.0 : -1.0;
                return {sgn * series(1.0 + std::abs(x[0]), 1)};
            }
            return {tab_d(x[0])};
        };
        out.hessian = [=](const Vec& x) -> Mat {
            if (std::abs(x[0]) >= eps)
                return Mat(1, {series(1.0 + std::abs(x[0]), 2)});
            return Mat(1, {tab_h(x[0])});
        };
        return out;
    }

    // Generic quadrature convolution.
    auto base = g.eval;
    if (dim == 1) {
        out.eval = [=](const Vec& x) {
            return detail::ball_convolution_1d([&m](const Vec& y) { return m.eval(y); },
                                               base, x[0], eps, radial_kink, 64);
        };
        out.gradient = [=](const Vec& x) -> Vec {
            return {detail::ball_convolution_1d(
                [&m](const Vec& y) { return m.grad(y)[0]; }, base, x[0], eps,
                radial_kink, 64)};
        };
        out.hessian = [=](const Vec& x) -> Mat {
            return Mat(1, {detail::ball_convolution_1d(
                              [&m](const Vec& y) { return m.hess(y)(0, 0); }, base,
                              x[0], eps, radial_kink, 64)});
        };
    } else {
        out.eval = [=](const Vec& x) {
            return detail::ball_convolution([&m](const Vec& y) { return m.eval(y); },
                                            base, x, eps, dim, 32);
        };
        out.gradient = [=, d = dim](const Vec& x) {
            Vec r(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i)
                r[i] = detail::ball_convolution(
                    [&m, i](const Vec& y) { return m.grad(y)[i]; }, base, x, eps, d, 32);
            return r;
        };
        out.hessian = [=, d = dim](const Vec& x) {
            Mat h(d);
            for (int i = 0; i < d; ++i)
                for (int k = i; k < d; ++k) {
                    h(i, k) = detail::ball_convolution(
                        [&m, i, k](const Vec& y) { return m.hess(y)(i, k); }, base, x,
                        eps, d, 32);
                    h(k, i) = h(i, k);
                }
            return h;
        };
    }
    return out;
}

}  // namespace levy
