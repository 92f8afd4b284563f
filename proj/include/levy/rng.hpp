#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace levy {

// Counter-based random numbers: every draw is a pure function of
// (seed, path, stream, counter). Ensembles are therefore reproducible
// bit-for-bit no matter how paths are scheduled across threads, and draws
// keyed by dyadic position survive grid refinement unchanged.
namespace rng {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t keyed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                           std::uint64_t c) {
    std::uint64_t h = mix64(seed ^ 0x6c62272e07bb0142ULL);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

/// Uniform in (0,1), never returning an exact endpoint.
inline double to_u01(std::uint64_t r) {
    return static_cast<double>(r >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

inline double keyed_u01(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                        std::uint64_t c) {
    return to_u01(keyed(seed, a, b, c));
}

/// Standard normal from a keyed pair of uniforms (Box-Muller, cosine branch).
inline double keyed_normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                           std::uint64_t c) {
    const double u1 = to_u01(keyed(seed, a, b, 2 * c));
    const double u2 = to_u01(keyed(seed, a, b, 2 * c + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Sequential stream of draws for one (seed, path, stream) triple.
struct Stream {
    std::uint64_t seed;
    std::uint64_t path;
    std::uint64_t stream;
    std::uint64_t counter = 0;

    std::uint64_t next_raw() { return keyed(seed, path, stream, counter++); }
    double next_u01() { return to_u01(next_raw()); }
    double next_normal() {
        const double u1 = next_u01();
        const double u2 = next_u01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Poisson count by inversion of exponential spacings; large means are
    /// split into additive chunks so the product of uniforms cannot
    /// underflow.
    long next_poisson(double mean) {
        if (mean < 0.0) throw std::invalid_argument("poisson mean must be >= 0");
        long total = 0;
        while (mean > 0.0) {
            const double chunk = mean > 500.0 ? 500.0 : mean;
            mean -= chunk;
            const double limit = std::exp(-chunk);
            double prod = next_u01();
            long k = 0;
            while (prod > limit) {
                prod *= next_u01();
                ++k;
            }
            total += k;
        }
        return total;
    }
};

}  // namespace rng

/// FNV-1a over raw bytes; used for ensemble hashes and input digests.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace levy
