#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "levy/weight.hpp"

using namespace levy;

TEST_CASE("catalog weights sit above 1 and fix c = 1") {
    auto e1 = WeightFunction::exp_abs(1.0);
    auto p3 = WeightFunction::poly(3.0);
    CHECK(e1.c == 1.0);
    CHECK(p3.c == 1.0);
    for (double x : {-7.0, -0.3, 0.0, 2.0, 11.0}) {
        CHECK(e1.eval({x}) >= 1.0);
        CHECK(p3.eval({x}) >= 1.0);
    }
    CHECK(e1.eval({0.0}) == 1.0);
    CHECK(p3.eval({-2.0}) == Catch::Approx(27.0));
}

TEST_CASE("submultiplicativity probe: triangle-inequality weights have c = 1") {
    auto e1 = WeightFunction::exp_abs(1.0);
    auto rep = check_submultiplicative(e1.eval, 1, 10000, 20.0, 1.0 + 1e-9);
    CHECK(rep.ok);
    CHECK(rep.c_est <= 1.0 + 1e-9);

    auto p2 = WeightFunction::poly(2.0);
    auto rep2 = check_submultiplicative(p2.eval, 1, 10000, 20.0, 1.0 + 1e-9);
    CHECK(rep2.ok);
    CHECK(rep2.c_est <= 1.0 + 1e-9);
}

TEST_CASE("submultiplicativity probe flags super-exponential growth") {
    auto g = [](const Vec& x) { return std::exp(x[0] * x[0]); };
    auto rep = check_submultiplicative(g, 1, 10000, 20.0, 1e6);
    CHECK_FALSE(rep.ok);
    REQUIRE(rep.violation_x.size() == 1);
    // the reported pair really violates the claimed constant
    const double lhs = std::log(g({rep.violation_x[0] + rep.violation_y[0]}));
    const double rhs = std::log(1e6) + std::log(g(rep.violation_x)) +
                       std::log(g(rep.violation_y));
    CHECK(lhs > rhs);
}

TEST_CASE("catalog weights pass the randomized pair test in d=1 and d=2") {
    for (int dim : {1, 2}) {
        auto e2 = WeightFunction::exp_abs(2.0, dim);
        auto rep = check_submultiplicative(e2.eval, dim, 10000, 20.0, e2.c + 1e-9);
        CHECK(rep.ok);
    }
}

TEST_CASE("cap keeps the constant and enforces the floor") {
    auto e1 = WeightFunction::exp_abs(1.0);
    CHECK_THROWS_AS(cap(e1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(cap(e1, 0.5), std::invalid_argument);

    auto capped = cap(e1, 10.0);
    CHECK(capped.eval({5.0}) == 10.0);          // e^5 > 10, cap active
    CHECK(capped.eval({0.5}) == Catch::Approx(std::exp(0.5)));
    CHECK(capped.c == 1.0);
    auto rep = check_submultiplicative(capped.eval, 1, 10000, 20.0, 1.0 + 1e-9);
    CHECK(rep.ok);
}

TEST_CASE("directional exponential weight") {
    auto g = WeightFunction::exp_linear({2.0});
    CHECK(g.eval({1.0}) == Catch::Approx(std::exp(2.0)));
    CHECK(g.eval({-1.0}) == Catch::Approx(std::exp(-2.0)));
    CHECK(g.c == 1.0);
}

TEST_CASE("custom weights dipping below 1 are lifted by construction") {
    auto raw = [](const Vec& x) { return std::abs(x[0]); };  // hits 0 at the origin
    auto g = WeightFunction::custom(raw, 1.0, 1);
    CHECK(g.eval({0.0}) >= 1.0);
    CHECK(g.eval({3.0}) == Catch::Approx(4.0));  // stored as g + 1
}
