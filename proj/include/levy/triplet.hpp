#pragma once

#include <cmath>
#include <stdexcept>

#include "levy/linalg.hpp"
#include "levy/measure.hpp"

namespace levy {

/// The triplet (b, Q, nu): drift vector, diffusion matrix and jump measure.
/// Immutable after construction; create() validates all invariants.
struct LevyTriplet {
    int dim = 1;
    Vec b;
    Mat Q;
    LevyMeasure nu;

    static LevyTriplet create(Vec b, Mat Q, LevyMeasure nu) {
        LevyTriplet t;
        t.dim = static_cast<int>(b.size());
        if (Q.n != t.dim)
            throw std::invalid_argument("triplet invariant violated: Q dimension");
        if (nu.dim != t.dim)
            throw std::invalid_argument("triplet invariant violated: nu dimension");
        double scale = 1.0;
        for (double v : Q.a) scale = std::max(scale, std::abs(v));
        for (int i = 0; i < Q.n; ++i)
            for (int k = i + 1; k < Q.n; ++k)
                if (std::abs(Q(i, k) - Q(k, i)) > 1e-12 * scale)
                    throw std::invalid_argument(
                        "triplet invariant violated: Q must be symmetric");
        for (double lam : sym_eigen(Q))
            if (lam < -1e-12 * scale)
                throw std::invalid_argument(
                    "triplet invariant violated: Q must be positive semidefinite");
        validate_measure(nu);
        t.b = std::move(b);
        t.Q = std::move(Q);
        t.nu = std::move(nu);
        return t;
    }

    /// d=1 convenience.
    static LevyTriplet create1d(double b, double q, LevyMeasure nu = LevyMeasure::zero(1)) {
        return create({b}, Mat(1, {q}), std::move(nu));
    }
};

/// Triplet of the reflected process -X.
inline LevyTriplet reflect(const LevyTriplet& t) {
    LevyTriplet r = t;
    r.b = negate(t.b);
    r.nu = reflect(t.nu);
    return r;
}

}  // namespace levy
