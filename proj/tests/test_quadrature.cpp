#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "levy/quadrature.hpp"
#include "oracle_helpers.hpp"

using namespace levy;

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
    // an n-point rule is exact up to degree 2n-1
    auto cubic = [](double x) { return 3.0 * x * x * x - x * x + 2.0 * x - 5.0; };
    const double exact = -2.0 / 3.0 - 10.0;  // odd terms vanish on [-1,1]
    CHECK(quad::integrate(cubic, -1.0, 1.0, 2) == Catch::Approx(exact).margin(1e-13));
    CHECK(quad::integrate([](double x) { return x * x; }, 0.0, 1.0, 8) ==
          Catch::Approx(1.0 / 3.0).margin(1e-14));
}

TEST_CASE("Gauss-Legendre matches an independent Simpson oracle") {
    auto f = [](double x) { return std::exp(-x * x) * std::cos(3.0 * x); };
    const double expect = oracle::integrate(f, -2.0, 2.0);
    CHECK(quad::integrate(f, -2.0, 2.0, 64) == Catch::Approx(expect).margin(1e-10));
}

TEST_CASE("adaptive refinement reaches tolerance or throws") {
    auto smooth = [](double x) { return 1.0 / (1.0 + x * x); };
    const double expect = std::atan(4.0) - std::atan(-4.0);
    CHECK(quad::integrate_adaptive(smooth, -4.0, 4.0, 8, 1e-9) ==
          Catch::Approx(expect).margin(1e-8));
}

TEST_CASE("direction sets carry the sphere surface measure") {
    auto total = [](const quad::DirectionSet& ds) {
        double s = 0.0;
        for (double w : ds.weights) s += w;
        return s;
    };
    CHECK(total(quad::sphere_directions(1, 8)) == Catch::Approx(2.0));
    CHECK(total(quad::sphere_directions(2, 32)) ==
          Catch::Approx(2.0 * std::numbers::pi));
    CHECK(total(quad::sphere_directions(3, 16)) ==
          Catch::Approx(4.0 * std::numbers::pi).epsilon(1e-10));
    CHECK_THROWS_AS(quad::sphere_directions(4, 8), std::invalid_argument);
}
