#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "levy/mollify.hpp"
#include "oracle_helpers.hpp"

using namespace levy;

TEST_CASE("mollifier kernel: unit mass, exact support, nonnegative") {
    for (double eps : {0.5, 0.1, 0.01}) {
        auto m = Mollifier::standard_bump(eps, 1);
        // independent Simpson oracle for the mass
        const double mass = oracle::integrate(
            [&](double y) { return m.eval({y}); }, -eps, eps, 1e-12);
        CHECK(mass == Catch::Approx(1.0).margin(1e-8));
        CHECK(m.eval({eps}) == 0.0);
        CHECK(m.eval({eps * 1.000001}) == 0.0);
        CHECK(m.eval({0.0}) > 0.0);
        for (int i = 0; i <= 32; ++i) CHECK(m.eval({-eps + 2 * eps * i / 32.0}) >= 0.0);
    }
    auto m2 = Mollifier::standard_bump(0.3, 2);
    const double mass2 = 2.0 * std::numbers::pi *
                         oracle::integrate([&](double r) { return m2.eval({r, 0.0}) * r; },
                                           0.0, 0.3, 1e-12);
    CHECK(mass2 == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("mollifying the constant weight is the identity") {
    auto one = WeightFunction::custom([](const Vec&) { return 1.0; }, 1.0, 1);
    auto ge = mollify(one, Mollifier::standard_bump(0.25, 1));
    for (double x : {0.0, 0.1, -0.2, 1.0}) {
        CHECK(ge.eval({x}) == Catch::Approx(1.0).margin(1e-7));
    }
    CHECK(ge.smooth);
}

TEST_CASE("exponential weight: comparison constant and sandwich at spec points") {
    auto g = WeightFunction::exp_abs(1.0);
    auto m = Mollifier::standard_bump(0.1, 1);
    auto ge = mollify(g, m);
    REQUIRE(ge.mollified.has_value());
    // c = 1 for e^{|x|}, so c_eps = sup_{|y|<=0.1} e^{|y|} = e^{0.1}
    CHECK(ge.mollified->c_eps == Catch::Approx(std::exp(0.1)).epsilon(1e-9));
    const double c_eps = ge.mollified->c_eps;
    for (double x : {0.0, 1.0, -1.0, 5.0, -5.0}) {
        const double gv = g.eval({x}), gev = ge.eval({x});
        CHECK(gev <= c_eps * gv * (1.0 + 1e-9));
        CHECK(gev >= gv / c_eps * (1.0 - 1e-9));
    }
}

TEST_CASE("poly weight mollified at the origin matches direct quadrature") {
    auto g = WeightFunction::poly(1.0);
    auto m = Mollifier::standard_bump(0.5, 1);
    auto ge = mollify(g, m);
    // g^eps(0) = int (1+|y|) j_eps(y) dy = 1 + int |y| j_eps(y) dy
    const double expect = 1.0 + oracle::integrate(
        [&](double y) { return std::abs(y) * m.eval({y}); }, -0.5, 0.5, 1e-12);
    CHECK(ge.eval({0.0}) == Catch::Approx(expect).margin(1e-7));
}

TEST_CASE("two-sided sandwich on a 1000-point grid for the full catalog") {
    for (double eps : {0.5, 0.1, 0.01}) {
        auto m = Mollifier::standard_bump(eps, 1);
        for (auto g : {WeightFunction::exp_abs(1.0), WeightFunction::poly(3.0),
                       WeightFunction::exp_abs(2.0)}) {
            auto ge = mollify(g, m);
            const double c_eps = ge.mollified->c_eps;
            int violations = 0;
            for (int i = 0; i <= 1000; ++i) {
                const double x = -8.0 + 16.0 * i / 1000.0;
                const double gv = g.eval({x}), gev = ge.eval({x});
                if (gev > c_eps * gv * (1.0 + 1e-9)) ++violations;
                if (gev < gv / c_eps * (1.0 - 1e-9)) ++violations;
            }
            CHECK(violations == 0);
        }
    }
}

TEST_CASE("derivative bounds |d^a g^eps| <= c_{a,eps} g on a grid") {
    auto m = Mollifier::standard_bump(0.1, 1);
    for (auto g : {WeightFunction::exp_abs(1.0), WeightFunction::poly(3.0)}) {
        auto ge = mollify(g, m);
        const double c1 = ge.mollified->c1_eps, c2 = ge.mollified->c2_eps;
        for (int i = 0; i <= 500; ++i) {
            const double x = -5.0 + 10.0 * i / 500.0;
            const double gv = g.eval({x});
            CHECK(std::abs(ge.gradient({x})[0]) <= c1 * gv * (1.0 + 1e-9));
            CHECK(std::abs(ge.hessian({x})(0, 0)) <= c2 * gv * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("catalog weights grow at most exponentially (fitted ceiling)") {
    for (auto g : {WeightFunction::exp_abs(1.0), WeightFunction::poly(3.0),
                   WeightFunction::exp_abs(2.0)}) {
        // fit b as the max log-increment over unit steps, then a as the max
        // of g(x) e^{-b|x|}; the fitted pair must dominate on a fine grid
        double b = 0.0;
        for (int i = 0; i < 20; ++i) {
            const double x = i;
            b = std::max(b, std::log(g.eval({x + 1.0})) - std::log(g.eval({x})));
        }
        double a = 0.0;
        for (int i = 0; i <= 4000; ++i) {
            const double x = -20.0 + 40.0 * i / 4000.0;
            a = std::max(a, g.eval({x}) * std::exp(-b * std::abs(x)));
        }
        REQUIRE(std::isfinite(a));
        REQUIRE(std::isfinite(b));
        for (int i = 0; i <= 4000; ++i) {
            const double x = -20.0 + 40.0 * i / 4000.0;
            CHECK(g.eval({x}) <= a * std::exp(b * std::abs(x)) * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("mollified weights stay submultiplicative with the recorded constant") {
    auto m = Mollifier::standard_bump(0.1, 1);
    auto ge = mollify(WeightFunction::exp_abs(1.0), m);
    auto rep = check_submultiplicative(ge.eval, 1, 10000, 20.0, ge.c * (1.0 + 1e-9));
    CHECK(rep.ok);
}

TEST_CASE("mollification keeps the base evaluator for the generator bound") {
    auto g = WeightFunction::poly(3.0);
    auto ge = mollify(g, Mollifier::standard_bump(0.1, 1));
    REQUIRE(ge.mollified.has_value());
    CHECK(ge.mollified->base_eval({2.0}) == Catch::Approx(27.0));
    CHECK(ge.mollified->base_c == 1.0);
}
