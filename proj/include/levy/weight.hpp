#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "levy/linalg.hpp"
#include "levy/rng.hpp"

namespace levy {

enum class WeightFamily { exp_abs, poly, capped, exp_linear, custom };

/// Constants attached to a mollified weight: the comparison constant of the
/// two-sided sandwich and the derivative constants used by the generator
/// bound. Populated by mollify().
struct MollifiedInfo {
    double epsilon = 0.0;
    double c_eps = 1.0;    // c * sup_{|y|<=eps} g(y)
    double c1_eps = 0.0;   // max over first-order multi-indices
    double c2_eps = 0.0;   // max over second-order multi-indices
    double base_c = 1.0;   // submultiplicativity constant of the raw weight
    std::function<double(const Vec&)> base_eval;  // the un-mollified g
};

/// A submultiplicative weight g >= 1 together with its constant c, i.e.
/// g(x+y) <= c g(x) g(y). Smooth instances carry derivative evaluators.
struct WeightFunction {
    WeightFamily family = WeightFamily::custom;
    int dim = 1;
    double c = 1.0;
    bool smooth = false;
    double param = 0.0;                      // beta for exp_abs, p for poly
    Vec direction;                           // beta vector for exp_linear
    std::optional<double> cap_level;
    std::optional<MollifiedInfo> mollified;

    std::function<double(const Vec&)> eval;
    std::function<Vec(const Vec&)> gradient;  // set iff smooth
    std::function<Mat(const Vec&)> hessian;   // set iff smooth

    double operator()(const Vec& x) const { return eval(x); }

    /// g(x) = exp(beta |x|); submultiplicative with c=1 by the triangle
    /// inequality. Not differentiable at 0 (mollify before generator use).
    static WeightFunction exp_abs(double beta, int dim = 1) {
        if (beta <= 0.0) throw std::invalid_argument("exp_abs: beta must be > 0");
        WeightFunction g;
        g.family = WeightFamily::exp_abs;
        g.dim = dim;
        g.c = 1.0;
        g.param = beta;
        g.eval = [beta](const Vec& x) { return std::exp(beta * norm2(x)); };
        return g;
    }

    /// g(x) = (1 + |x|)^p; c=1 since 1+|x+y| <= (1+|x|)(1+|y|).
    static WeightFunction poly(double p, int dim = 1) {
        if (p <= 0.0) throw std::invalid_argument("poly: p must be > 0");
        WeightFunction g;
        g.family = WeightFamily::poly;
        g.dim = dim;
        g.c = 1.0;
        g.param = p;
        g.eval = [p](const Vec& x) { return std::pow(1.0 + norm2(x), p); };
        return g;
    }

    /// g(x) = exp(beta . x), the directional weight used to certify
    /// one-sided exponential moments; c=1.
    static WeightFunction exp_linear(Vec beta) {
        WeightFunction g;
        g.family = WeightFamily::exp_linear;
        g.dim = static_cast<int>(beta.size());
        g.c = 1.0;
        g.direction = beta;
        g.eval = [b = std::move(beta)](const Vec& x) { return std::exp(dot(b, x)); };
        return g;
    }

    /// User-supplied weight. The floor g >= 1 is enforced by construction:
    /// if the function dips below 1 on a coarse probe, g+1 is stored instead
    /// (this preserves submultiplicativity with the same constant).
    static WeightFunction custom(std::function<double(const Vec&)> fn, double c,
                                 int dim = 1) {
        if (c < 1.0) throw std::invalid_argument("custom: constant c must be >= 1");
        WeightFunction g;
        g.family = WeightFamily::custom;
        g.dim = dim;
        g.c = c;
        bool below_one = false;
        for (int i = -8; i <= 8 && !below_one; ++i) {
            Vec x(static_cast<std::size_t>(dim), 0.0);
            x[0] = 2.5 * i;
            if (fn(x) < 1.0) below_one = true;
        }
        if (below_one)
            g.eval = [fn = std::move(fn)](const Vec& x) { return fn(x) + 1.0; };
        else
            g.eval = std::move(fn);
        return g;
    }
};

/// min{g, n}, submultiplicative with the same constant. Levels at or below 1
/// would collapse the g >= 1 floor and are rejected.
inline WeightFunction cap(const WeightFunction& g, double n) {
    if (n <= 1.0) throw std::invalid_argument("cap: level must exceed 1 to keep g >= 1");
    WeightFunction r = g;  // keeps the base family tag; cap_level marks the cap
    r.cap_level = n;
    r.smooth = false;  // the kink at the cap loses C^2
    r.gradient = nullptr;
    r.hessian = nullptr;
    r.eval = [base = g.eval, n](const Vec& x) { return std::min(base(x), n); };
    return r;
}

/// Outcome of the randomized submultiplicativity probe.
struct SubmultReport {
    bool ok = true;
    double c_est = 1.0;   // smallest constant consistent with all sampled pairs
    Vec violation_x, violation_y;
};

/// Samples pairs uniformly from [-box, box]^dim and estimates the smallest
/// constant c with g(x+y) <= c g(x) g(y). If the claimed c_max is exceeded,
/// the first violating pair is reported. Ratios are formed in log space so
/// overflowing weights (e.g. e^{x^2}) still compare correctly.
inline SubmultReport check_submultiplicative(
    const std::function<double(const Vec&)>& g, int dim, int samples, double box,
    double c_max, std::uint64_t seed = 0x5eedULL) {
    SubmultReport rep;
    double max_log_ratio = 0.0;
    const double log_cap = std::log(c_max);
    rng::Stream stream{seed, 0, 0};
    for (int s = 0; s < samples; ++s) {
        Vec x(static_cast<std::size_t>(dim)), y(static_cast<std::size_t>(dim)),
            xy(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) {
            x[i] = box * (2.0 * stream.next_u01() - 1.0);
            y[i] = box * (2.0 * stream.next_u01() - 1.0);
            xy[i] = x[i] + y[i];
        }
        const double log_ratio = std::log(g(xy)) - std::log(g(x)) - std::log(g(y));
        if (log_ratio > max_log_ratio) max_log_ratio = log_ratio;
        if (log_ratio > log_cap) {
            rep.ok = false;
            rep.violation_x = x;
            rep.violation_y = y;
            rep.c_est = std::exp(max_log_ratio);
            return rep;
        }
    }
    rep.c_est = std::exp(max_log_ratio);
    return rep;
}

}  // namespace levy
