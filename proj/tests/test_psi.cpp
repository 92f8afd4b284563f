#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "levy/catalog.hpp"
#include "levy/psi.hpp"
#include "levy/rng.hpp"

using namespace levy;

TEST_CASE("pure Gaussian exponent: psi(xi) = Q xi^2 / 2") {
    auto t = LevyTriplet::create1d(0.0, 1.0);
    const Complex p = eval_psi(t, Vec{2.0});
    CHECK(p.real() == Catch::Approx(2.0).margin(1e-14));
    CHECK(p.imag() == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("psi(0) = 0 exactly for any triplet") {
    for (auto& entry : catalog::processes()) {
        const Complex p = eval_psi(entry.triplet, Vec{0.0});
        CHECK(p == Complex(0.0, 0.0));
    }
}

TEST_CASE("single atom at 1: the compensator indicator excludes the boundary") {
    auto t = LevyTriplet::create1d(0.0, 0.0, LevyMeasure::single_atom(1.0, 1.0));
    const Complex p = eval_psi(t, Vec{std::numbers::pi});
    CHECK(p.real() == Catch::Approx(2.0).margin(1e-12));  // 1 - e^{i pi} = 2
    CHECK(p.imag() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("cumulant: drifted Brownian motion has a root at beta = 2") {
    auto t = LevyTriplet::create1d(-1.0, 1.0);
    CHECK(eval_cumulant(t, 2.0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(eval_cumulant(t, 0.0) == 0.0);
}

TEST_CASE("cumulant: jump atom by analytic continuation") {
    auto t = LevyTriplet::create1d(0.0, 0.0, LevyMeasure::single_atom(1.0, 1.0));
    CHECK(eval_cumulant(t, 1.0) == Catch::Approx(1.0 - std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("cumulant refuses weights whose jump moment diverges") {
    CHECK_THROWS_AS(eval_cumulant(catalog::power_law(), 1.0), std::domain_error);
}

TEST_CASE("dimension mismatch is rejected") {
    auto t = LevyTriplet::create1d(0.0, 1.0);
    CHECK_THROWS_AS(eval_psi(t, Vec{1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(eval_cumulant(t, Vec{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("Hermitian symmetry and nonnegative real part across the catalog") {
    for (auto& entry : catalog::processes()) {
        rng::Stream s{0xABCDEF, 0, 0};
        for (int i = 0; i < 100; ++i) {
            const double xi = 16.0 * (s.next_u01() - 0.5);
            const Complex p = eval_psi(entry.triplet, Vec{xi});
            const Complex pm = eval_psi(entry.triplet, Vec{-xi});
            CHECK(std::abs(pm - std::conj(p)) <= 1e-10 * (1.0 + std::abs(p)));
            CHECK(p.real() >= -1e-9);
        }
    }
}

TEST_CASE("quadrature stability: node doubling moves psi by < 1e-6 relative") {
    using Maker = LevyTriplet (*)();
    for (Maker make : {static_cast<Maker>([] { return catalog::tempered_power_law(); }),
                       static_cast<Maker>([] { return catalog::power_law(); })}) {
        LevyTriplet coarse = make();
        LevyTriplet fine = make();
        for (auto& d : fine.nu.densities) d.quad.radial_nodes *= 2;
        for (double xi : {0.5, 2.0, 7.0}) {
            const Complex a = eval_psi(coarse, Vec{xi});
            const Complex b = eval_psi(fine, Vec{xi});
            CHECK(std::abs(a - b) <= 1e-6 * std::abs(b) + 1e-12);
        }
    }
}

TEST_CASE("continuation along the imaginary segment reaches the cumulant") {
    auto t = catalog::tempered_power_law();
    const double beta = 0.8;
    // moving along xi = -i theta beta keeps the exponent finite and continuous
    double prev_im = 0.0;
    for (double theta : {0.25, 0.5, 0.75, 1.0}) {
        const Complex p = eval_psi(t, CVec{Complex(0.0, -theta * beta)});
        CHECK(std::isfinite(p.real()));
        CHECK(std::abs(p.imag()) < 1e-9);
        prev_im = p.imag();
    }
    (void)prev_im;
    const Complex at_one = eval_psi(t, CVec{Complex(0.0, -beta)});
    CHECK(eval_cumulant(t, beta) == Catch::Approx(at_one.real()).margin(1e-9));
}

TEST_CASE("triplet invariants: asymmetric or indefinite Q is rejected") {
    CHECK_THROWS_WITH(LevyTriplet::create({0.0, 0.0}, Mat(2, {1.0, 0.5, 0.2, 1.0}),
                                          LevyMeasure::zero(2)),
                      Catch::Matchers::ContainsSubstring("symmetric"));
    CHECK_THROWS_WITH(LevyTriplet::create({0.0}, Mat(1, {-0.5}), LevyMeasure::zero(1)),
                      Catch::Matchers::ContainsSubstring("semidefinite"));
}

TEST_CASE("two-dimensional exponent with diffusion and an atom") {
    LevyMeasure nu;
    nu.dim = 2;
    nu.atoms.push_back({{1.0, 1.0}, 0.5});
    auto t = LevyTriplet::create({0.1, -0.2}, Mat(2, {1.0, 0.2, 0.2, 0.8}), nu);
    const Vec xi{0.3, -0.7};
    const Complex p = eval_psi(t, xi);
    // drift and diffusion parts are closed-form; the atom lies on |y| >= 1
    const double quad_part = 0.5 * (1.0 * 0.09 + 2.0 * 0.2 * 0.3 * -0.7 + 0.8 * 0.49);
    const double dot_bx = 0.1 * 0.3 + -0.2 * -0.7;
    const double dot_xy = 0.3 + -0.7;
    const Complex expect(quad_part + 0.5 * (1.0 - std::cos(dot_xy)),
                         -dot_bx - 0.5 * std::sin(dot_xy));
    CHECK(p.real() == Catch::Approx(expect.real()).margin(1e-12));
    CHECK(p.imag() == Catch::Approx(expect.imag()).margin(1e-12));
}
