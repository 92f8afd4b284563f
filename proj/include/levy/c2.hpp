#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

#include "levy/linalg.hpp"
#include "levy/measure.hpp"
#include "levy/weight.hpp"

namespace levy {

/// A twice continuously differentiable function with explicit gradient and
/// hessian evaluators. Everything the generator touches comes through here.
struct C2Function {
    int dim = 1;
    std::function<double(const Vec&)> eval;
    std::function<Vec(const Vec&)> gradient;
    std::function<Mat(const Vec&)> hessian;
    double support_radius = kInf;  // eval vanishes for |x| beyond this
    bool smooth = true;

    double operator()(const Vec& x) const { return eval(x); }

    /// exp(-|x-c|^2 / (2 w^2)); rapidly decaying but not compactly supported.
    static C2Function gaussian_bump(Vec center, double width, int dim = 1) {
        C2Function u;
        u.dim = dim;
        const double w2 = width * width;
        auto c = std::move(center);
        u.eval = [c, w2](const Vec& x) {
            return std::exp(-0.5 * dot(sub(x, c), sub(x, c)) / w2);
        };
        u.gradient = [c, w2, ev = u.eval](const Vec& x) {
            return scale(sub(x, c), -ev(x) / w2);
        };
        u.hessian = [c, w2, ev = u.eval, dim](const Vec& x) {
            const Vec a = sub(x, c);
            const double v = ev(x);
            Mat h(dim);
            for (int i = 0; i < dim; ++i)
                for (int k = 0; k < dim; ++k) {
                    h(i, k) = v * a[i] * a[k] / (w2 * w2);
                    if (i == k) h(i, k) -= v / w2;
                }
            return h;
        };
        return u;
    }

    /// Smooth bump supported in the closed ball of the given radius around
    /// center, normalized to 1 at the center.
    static C2Function compact_bump(Vec center, double radius, int dim = 1) {
        C2Function u;
        u.dim = dim;
        u.support_radius = norm2(center) + radius;
        const double R2 = radius * radius;
        auto c = std::move(center);
        u.eval = [c, R2](const Vec& x) {
            const double s = dot(sub(x, c), sub(x, c)) / R2;
            if (s >= 1.0) return 0.0;
            return std::exp(1.0 - 1.0 / (1.0 - s));
        };
        u.gradient = [c, R2, ev = u.eval, dim](const Vec& x) {
            Vec g(static_cast<std::size_t>(dim), 0.0);
            const Vec a = sub(x, c);
            const double s = dot(a, a) / R2;
            if (s >= 1.0) return g;
            const double v = ev(x), d1 = 1.0 - s;
            for (int i = 0; i < dim; ++i) g[i] = v * (-2.0 * a[i] / (R2 * d1 * d1));
            return g;
        };
        u.hessian = [c, R2, ev = u.eval, dim](const Vec& x) {
            Mat h(dim);
            const Vec a = sub(x, c);
            const double s = dot(a, a) / R2;
            if (s >= 1.0) return h;
            const double v = ev(x), d1 = 1.0 - s;
            for (int i = 0; i < dim; ++i) {
                const double fi = -2.0 * a[i] / (R2 * d1 * d1);
                for (int k = 0; k < dim; ++k) {
                    const double fk = -2.0 * a[k] / (R2 * d1 * d1);
                    double fik = -8.0 * a[i] * a[k] / (R2 * R2 * d1 * d1 * d1);
                    if (i == k) fik += -2.0 / (R2 * d1 * d1);
                    h(i, k) = v * (fi * fk + fik);
                }
            }
            return h;
        };
        return u;
    }

    /// sin(x) in d=1; bounded with bounded derivatives.
    static C2Function sine() {
        C2Function u;
        u.dim = 1;
        u.eval = [](const Vec& x) { return std::sin(x[0]); };
        u.gradient = [](const Vec& x) -> Vec { return {std::cos(x[0])}; };
        u.hessian = [](const Vec& x) { return Mat(1, {-std::sin(x[0])}); };
        return u;
    }

    /// |x|^2 with exact derivatives (for purely local generators).
    static C2Function quadratic(int dim = 1) {
        C2Function u;
        u.dim = dim;
        u.eval = [](const Vec& x) { return dot(x, x); };
        u.gradient = [](const Vec& x) { return scale(x, 2.0); };
        u.hessian = [dim](const Vec&) { return Mat::scalar(dim, 2.0); };
        return u;
    }

    /// View of a smooth weight (e.g. a mollified one) as a C2 function.
    static C2Function from_weight(const WeightFunction& g) {
        if (!g.smooth || !g.gradient || !g.hessian)
            throw std::invalid_argument(
                "from_weight: weight lacks derivative evaluators (mollify first)");
        C2Function u;
        u.dim = g.dim;
        u.eval = g.eval;
        u.gradient = g.gradient;
        u.hessian = g.hessian;
        return u;
    }

    C2Function reflected() const {
        C2Function r = *this;
        r.eval = [e = eval](const Vec& x) { return e(negate(x)); };
        r.gradient = [gr = gradient](const Vec& x) { return negate(gr(negate(x))); };
        r.hessian = [he = hessian](const Vec& x) { return he(negate(x)); };
        return r;
    }
};

/// Smooth cutoff chi_R with 1 on the closed ball of radius R+1 and 0 outside
/// radius R+2, built from the exp(-1/t) transition with analytic radial
/// derivatives.
struct Cutoff {
    double R = 1.0;
    int dim = 1;

    static Cutoff make(double R, int dim = 1) {
        if (R <= 0.0) throw std::invalid_argument("cutoff: R must be > 0");
        return Cutoff{R, dim};
    }

    // phi(t) = exp(-1/t) for t > 0, else 0, with first two derivatives.
    static double phi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
    static double phi1(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }
    static double phi2(double t) {
        return t > 0.0 ? std::exp(-1.0 / t) * (1.0 / (t * t * t * t) - 2.0 / (t * t * t))
                       : 0.0;
    }

    double profile(double r) const {
        if (r <= R + 1.0) return 1.0;
        if (r >= R + 2.0) return 0.0;
        const double a = phi(R + 2.0 - r), b = phi(r - R - 1.0);
        return a / (a + b);
    }

    double profile1(double r) const {
        if (r <= R + 1.0 || r >= R + 2.0) return 0.0;
        const double a = phi(R + 2.0 - r), b = phi(r - R - 1.0);
        const double ap = -phi1(R + 2.0 - r), bp = phi1(r - R - 1.0);
        const double den = a + b;
        return (ap * b - a * bp) / (den * den);
    }

    double profile2(double r) const {
        if (r <= R + 1.0 || r >= R + 2.0) return 0.0;
        const double a = phi(R + 2.0 - r), b = phi(r - R - 1.0);
        const double ap = -phi1(R + 2.0 - r), bp = phi1(r - R - 1.0);
        const double app = phi2(R + 2.0 - r), bpp = phi2(r - R - 1.0);
        const double den = a + b;
        return ((app * b - a * bpp) * den - 2.0 * (ap * b - a * bp) * (ap + bp)) /
               (den * den * den);
    }

    C2Function as_c2() const {
        C2Function u;
        u.dim = dim;
        u.support_radius = R + 2.0;
        const Cutoff self = *this;
        u.eval = [self](const Vec& x) { return self.profile(norm2(x)); };
        u.gradient = [self, d = dim](const Vec& x) {
            Vec g(static_cast<std::size_t>(d), 0.0);
            const double r = norm2(x);
            if (r <= self.R + 1.0 || r >= self.R + 2.0) return g;
            const double h1 = self.profile1(r);
            for (int i = 0; i < d; ++i) g[i] = h1 * x[i] / r;
            return g;
        };
        u.hessian = [self, d = dim](const Vec& x) {
            Mat h(d);
            const double r = norm2(x);
            if (r <= self.R + 1.0 || r >= self.R + 2.0) return h;
            const double h1 = self.profile1(r), h2 = self.profile2(r);
            for (int i = 0; i < d; ++i)
                for (int k = 0; k < d; ++k) {
                    h(i, k) = h2 * x[i] * x[k] / (r * r) -
                              h1 * x[i] * x[k] / (r * r * r);
                    if (i == k) h(i, k) += h1 / r;
                }
            return h;
        };
        return u;
    }
};

/// Product u * chi with product-rule derivatives; compactly supported.
inline C2Function multiply(const C2Function& u, const C2Function& chi) {
    if (u.dim != chi.dim) throw std::invalid_argument("multiply: dimension mismatch");
    C2Function p;
    p.dim = u.dim;
    p.support_radius = std::min(u.support_radius, chi.support_radius);
    p.eval = [ue = u.eval, ce = chi.eval](const Vec& x) { return ue(x) * ce(x); };
    p.gradient = [u, chi](const Vec& x) {
        const double uv = u.eval(x), cv = chi.eval(x);
        return add(scale(u.gradient(x), cv), scale(chi.gradient(x), uv));
    };
    p.hessian = [u, chi, d = u.dim](const Vec& x) {
        const double uv = u.eval(x), cv = chi.eval(x);
        const Vec ug = u.gradient(x), cg = chi.gradient(x);
        Mat uh = u.hessian(x), ch = chi.hessian(x);
        Mat h(d);
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k)
                h(i, k) = uh(i, k) * cv + ug[i] * cg[k] + cg[i] * ug[k] +
                          uv * ch(i, k);
        return h;
    };
    return p;
}

}  // namespace levy
