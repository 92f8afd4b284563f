#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "levy/measure.hpp"
#include "oracle_helpers.hpp"

using namespace levy;

namespace {

LevyMeasure exp_tail_measure() {
    // density e^{-2|y|} on |y| >= 1
    LevyMeasure nu;
    nu.dim = 1;
    nu.densities.push_back(ParametricDensity::tabulated(
        [](const Vec& y) { return std::exp(-2.0 * std::abs(y[0])); }, 1.0, kInf));
    return nu;
}

}  // namespace

TEST_CASE("levy_integral: zero measure integrates to zero") {
    auto r = levy_integral(LevyMeasure::zero(1), [](const Vec&) { return 42.0; },
                           JumpRegion::all);
    CHECK_FALSE(r.infinite);
    CHECK(r.value == 0.0);
}

TEST_CASE("levy_integral: atom sums are exact") {
    auto nu = LevyMeasure::single_atom(2.0, 1.0);
    auto r = levy_integral(nu, [](const Vec& y) { return std::exp(std::abs(y[0])); },
                           JumpRegion::large_jumps);
    CHECK_FALSE(r.infinite);
    CHECK(r.value == Catch::Approx(std::exp(2.0)).epsilon(1e-14));
}

TEST_CASE("levy_integral: exponential blow-up is flagged infinite") {
    // integrand e^{3|y|} against e^{-2|y|} dy grows like e^{|y|}; the symbolic
    // antiderivative diverges, so the ladder must flag +infinity
    auto nu = exp_tail_measure();
    auto r = levy_integral(nu, [](const Vec& y) { return std::exp(3.0 * std::abs(y[0])); },
                           JumpRegion::large_jumps);
    CHECK(r.infinite);
}

TEST_CASE("levy_integral matches an independent Simpson oracle on a tempered tail") {
    auto nu = exp_tail_measure();
    auto r = levy_integral(nu, [](const Vec& y) { return std::exp(std::abs(y[0])); },
                           JumpRegion::large_jumps);
    // two-sided: 2 int_1^inf e^{y} e^{-2y} dy = 2 e^{-1}
    const double expect = 2.0 * oracle::integrate(
        [](double y) { return std::exp(-y); }, 1.0, 60.0);
    REQUIRE_FALSE(r.infinite);
    CHECK(r.value == Catch::Approx(expect).epsilon(1e-7));
    CHECK(r.value == Catch::Approx(2.0 * std::exp(-1.0)).epsilon(1e-7));
}

TEST_CASE("jump moment criterion classifies the catalog cases") {
    auto g = WeightFunction::exp_abs(1.0);

    auto atom = jump_moment_criterion(LevyMeasure::single_atom(2.0, 1.0), g);
    CHECK_FALSE(atom.infinite);
    CHECK(atom.value == Catch::Approx(std::exp(2.0)));

    // compactly supported jumps: always finite, any weight
    LevyMeasure bounded;
    bounded.dim = 1;
    bounded.densities.push_back(ParametricDensity::power_law(1.5, 0.5, 3.0));
    bounded.atoms.push_back({{2.5}, 0.7});
    auto b = jump_moment_criterion(bounded, WeightFunction::exp_abs(2.0));
    CHECK_FALSE(b.infinite);

    // exponential weight against a polynomial tail diverges; the oracle is the
    // growth of the partial sums int_1^R e^y y^{-2.5} dy in R
    LevyMeasure heavy;
    heavy.dim = 1;
    heavy.densities.push_back(ParametricDensity::power_law(1.5, 1.0));
    double prev = 0.0;
    bool grows = true;
    for (double R : {10.0, 20.0, 40.0}) {
        const double part = oracle::integrate(
            [](double y) { return std::exp(y) * std::pow(y, -2.5); }, 1.0, R, 1e-6);
        if (part < 2.0 * prev) grows = false;
        prev = part;
    }
    REQUIRE(grows);  // oracle confirms divergence
    auto h = jump_moment_criterion(heavy, g);
    CHECK(h.infinite);
}

TEST_CASE("polynomial weights against power-law tails: both verdicts") {
    LevyMeasure heavy;
    heavy.dim = 1;
    heavy.densities.push_back(ParametricDensity::power_law(1.5, 1.0));
    // (1+|y|)^3 beats the y^{-2.5} decay: infinite
    CHECK(jump_moment_criterion(heavy, WeightFunction::poly(3.0)).infinite);
    // (1+|y|)^{1.2}: integrand ~ y^{-1.3}, finite; oracle by Simpson plus the
    // analytic power tail beyond the truncation radius
    auto fin = jump_moment_criterion(heavy, WeightFunction::poly(1.2));
    REQUIRE_FALSE(fin.infinite);
    const double R = 1e7;
    const double tail = 2.0 * (std::pow(R, -0.3) / 0.3 + 1.2 * std::pow(R, -1.3) / 1.3);
    const double expect = 2.0 * oracle::integrate(
        [](double y) { return std::pow(1.0 + y, 1.2) * std::pow(y, -2.5); }, 1.0, R,
        1e-8) + tail;
    CHECK(fin.value == Catch::Approx(expect).epsilon(1e-4));
}

TEST_CASE("gaussian jump density carries its rate as total mass") {
    LevyMeasure nu;
    nu.dim = 1;
    nu.densities.push_back(ParametricDensity::gaussian_jumps(2.5, {0.0}, 0.5));
    auto total = levy_integral(nu, [](const Vec&) { return 1.0; }, JumpRegion::all);
    REQUIRE_FALSE(total.infinite);
    CHECK(total.value == Catch::Approx(2.5).epsilon(1e-6));
}

TEST_CASE("complex integrands ride the same engine") {
    auto nu = LevyMeasure::single_atom(1.0, 2.0);
    auto r = nu_integrate(
        nu,
        [](const Vec& y) {
            return std::complex<double>(std::cos(y[0]), std::sin(y[0]));
        },
        0.0, kInf);
    CHECK(r.value.real() == Catch::Approx(2.0 * std::cos(1.0)));
    CHECK(r.value.imag() == Catch::Approx(2.0 * std::sin(1.0)));
}

TEST_CASE("measure invariants reject malformed inputs") {
    LevyMeasure at_origin;
    at_origin.dim = 1;
    at_origin.atoms.push_back({{0.0}, 1.0});
    CHECK_THROWS_WITH(validate_measure(at_origin),
                      Catch::Matchers::ContainsSubstring("origin"));

    LevyMeasure bad_mass;
    bad_mass.dim = 1;
    bad_mass.atoms.push_back({{1.0}, -2.0});
    CHECK_THROWS_WITH(validate_measure(bad_mass),
                      Catch::Matchers::ContainsSubstring("mass"));

    LevyMeasure bad_alpha;
    bad_alpha.dim = 1;
    bad_alpha.densities.push_back(ParametricDensity::power_law(2.0, 0.0));
    CHECK_THROWS_WITH(validate_measure(bad_alpha),
                      Catch::Matchers::ContainsSubstring("index"));

    LevyMeasure empty_annulus;
    empty_annulus.dim = 1;
    empty_annulus.densities.push_back(ParametricDensity::power_law(1.0, 2.0, 1.0));
    CHECK_THROWS_WITH(validate_measure(empty_annulus),
                      Catch::Matchers::ContainsSubstring("annulus"));

    // a tabulated density too singular at the origin: second moment diverges
    LevyMeasure singular;
    singular.dim = 1;
    singular.densities.push_back(ParametricDensity::tabulated(
        [](const Vec& y) { return std::pow(std::abs(y[0]), -3.5); }, 0.0, 1.0));
    CHECK_THROWS_WITH(validate_measure(singular),
                      Catch::Matchers::ContainsSubstring("second moment"));

    LevyMeasure good;
    good.dim = 1;
    good.densities.push_back(ParametricDensity::power_law(1.5, 0.0));
    good.atoms.push_back({{1.0}, 1.0});
    CHECK_NOTHROW(validate_measure(good));
}

TEST_CASE("small-jump second moment is stable under node doubling") {
    LevyMeasure coarse;
    coarse.dim = 1;
    coarse.densities.push_back(ParametricDensity::power_law(1.5, 0.0));
    coarse.densities[0].quad.radial_nodes = 8;
    LevyMeasure fine = coarse;
    fine.densities[0].quad.radial_nodes = 16;

    auto f = [](const Vec& y) { return y[0] * y[0]; };
    const double a = nu_integrate(coarse, f, 0.0, 1.0).value;
    const double b = nu_integrate(fine, f, 0.0, 1.0).value;
    CHECK(std::abs(a - b) <= 1e-6 * std::abs(b));
    // analytic value: 2 int_0^1 y^2 y^{-2.5} dy = 2/(0.5) * 1 = 4
    CHECK(b == Catch::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("non-finite integrand values raise a quadrature error") {
    auto nu = LevyMeasure::single_atom(2.0, 1.0);
    CHECK_THROWS_AS(levy_integral(
                        nu, [](const Vec&) { return std::nan(""); }, JumpRegion::all),
                    QuadratureError);
}

TEST_CASE("reflection flips atoms and gaussian means") {
    LevyMeasure nu;
    nu.dim = 1;
    nu.atoms.push_back({{1.5}, 2.0});
    nu.densities.push_back(ParametricDensity::gaussian_jumps(1.0, {0.7}, 0.5));
    LevyMeasure r = reflect(nu);
    CHECK(r.atoms[0].position[0] == -1.5);
    CHECK(r.densities[0].mean[0] == -0.7);
    CHECK(r.densities[0](Vec{-0.7}) == Catch::Approx(nu.densities[0](Vec{0.7})));
}
