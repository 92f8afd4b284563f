#pragma once

#include <string>
#include <utility>
#include <vector>

#include "levy/triplet.hpp"
#include "levy/weight.hpp"

namespace levy {

/// The reference processes exercised throughout the test harness (all d=1).
namespace catalog {

inline LevyTriplet brownian() { return LevyTriplet::create1d(0.0, 1.0); }

inline LevyTriplet drifted_brownian() { return LevyTriplet::create1d(-1.0, 1.0); }

inline LevyTriplet poisson(double rate = 1.0) {
    return LevyTriplet::create1d(0.0, 0.0, LevyMeasure::single_atom(1.0, rate));
}

/// Compound Poisson with centered Gaussian jump sizes.
inline LevyTriplet compound_poisson_gauss(double rate = 1.0, double sigma = 0.5) {
    LevyMeasure nu;
    nu.dim = 1;
    nu.densities.push_back(ParametricDensity::gaussian_jumps(rate, {0.0}, sigma));
    return LevyTriplet::create1d(0.0, 0.0, nu);
}

/// Infinite-activity power-law measure, exponentially tempered: all three
/// catalog weights have finite moments (tilt exceeds both exponents).
inline LevyTriplet tempered_power_law(double alpha = 1.5, double tilt = 3.0) {
    LevyMeasure nu;
    nu.dim = 1;
    nu.densities.push_back(ParametricDensity::exp_tilt(alpha, tilt));
    return LevyTriplet::create1d(0.0, 0.0, nu);
}

/// Untempered power-law tail: the negative control; every catalog weight has
/// an infinite jump moment.
inline LevyTriplet power_law(double alpha = 1.5) {
    LevyMeasure nu;
    nu.dim = 1;
    nu.densities.push_back(ParametricDensity::power_law(alpha));
    return LevyTriplet::create1d(0.0, 0.0, nu);
}

struct Entry {
    std::string name;
    LevyTriplet triplet;
};

inline std::vector<Entry> processes() {
    return {{"brownian", brownian()},
            {"drifted_brownian", drifted_brownian()},
            {"poisson", poisson()},
            {"compound_poisson_gauss", compound_poisson_gauss()},
            {"tempered_power_law", tempered_power_law()},
            {"power_law", power_law()}};
}

struct WeightEntry {
    std::string name;
    WeightFunction g;
};

inline std::vector<WeightEntry> weights() {
    return {{"exp1", WeightFunction::exp_abs(1.0)},
            {"poly3", WeightFunction::poly(3.0)},
            {"exp2", WeightFunction::exp_abs(2.0)}};
}

}  // namespace catalog
}  // namespace levy
