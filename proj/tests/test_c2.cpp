#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "levy/c2.hpp"
#include "levy/mollify.hpp"
#include "levy/rng.hpp"

using namespace levy;

namespace {

// the spec invariant: analytic derivatives agree with central differences
// (relative error < 1e-4 at random points, step 1e-5)
void check_fd_consistency(const C2Function& u, double box, std::uint64_t seed,
                          int points = 100) {
    rng::Stream s{seed, 0, 0};
    const double h = 1e-5;
    for (int i = 0; i < points; ++i) {
        Vec x(static_cast<std::size_t>(u.dim));
        for (int k = 0; k < u.dim; ++k) x[k] = box * (2.0 * s.next_u01() - 1.0);
        const Vec grad = u.gradient(x);
        const Mat hess = u.hessian(x);
        for (int k = 0; k < u.dim; ++k) {
            Vec xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            const double fd = (u.eval(xp) - u.eval(xm)) / (2.0 * h);
            const double scale = std::max({1e-6, std::abs(fd), std::abs(grad[k])});
            INFO("gradient component " << k << " at x[0]=" << x[0]);
            CHECK(std::abs(grad[k] - fd) <= 1e-4 * scale);
            const double fd2 =
                (u.eval(xp) - 2.0 * u.eval(x) + u.eval(xm)) / (h * h);
            const double scale2 =
                std::max({1e-4, std::abs(fd2), std::abs(hess(k, k))});
            CHECK(std::abs(hess(k, k) - fd2) <= 1e-3 * scale2);
        }
    }
}

}  // namespace

TEST_CASE("gaussian bump derivatives agree with finite differences") {
    check_fd_consistency(C2Function::gaussian_bump({0.3}, 1.0), 3.0, 11);
    check_fd_consistency(C2Function::gaussian_bump({0.0, -0.5}, 0.8, 2), 2.0, 12);
}

TEST_CASE("compact bump derivatives agree with finite differences") {
    check_fd_consistency(C2Function::compact_bump({0.0}, 1.0), 0.95, 13);
    CHECK(C2Function::compact_bump({0.0}, 1.0).eval({1.0}) == 0.0);
    CHECK(C2Function::compact_bump({0.0}, 1.0).eval({0.0}) == Catch::Approx(1.0));
}

TEST_CASE("sine and quadratic helpers") {
    check_fd_consistency(C2Function::sine(), 3.0, 14);
    auto q = C2Function::quadratic();
    CHECK(q.hessian({0.7})(0, 0) == 2.0);
    CHECK(q.gradient({0.7})[0] == Catch::Approx(1.4));
}

TEST_CASE("cutoff sandwich: one inside R+1, zero outside R+2, smooth between") {
    auto chi = Cutoff::make(2.0, 1);
    auto u = chi.as_c2();
    CHECK(u.eval({3.0}) == 1.0);          // |x| <= R+1
    CHECK(u.eval({-2.5}) == 1.0);
    CHECK(u.eval({4.0}) == 0.0);          // |x| >= R+2
    CHECK(u.eval({-4.5}) == 0.0);
    for (int i = 0; i <= 100; ++i) {
        const double x = 3.0 + i / 100.0;
        const double v = u.eval({x});
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    check_fd_consistency(u, 4.2, 15);
}

TEST_CASE("product with the cutoff obeys the product rule") {
    auto g = mollify(WeightFunction::exp_abs(1.0), Mollifier::standard_bump(0.1, 1));
    auto prod = multiply(C2Function::from_weight(g), Cutoff::make(2.0, 1).as_c2());
    check_fd_consistency(prod, 4.2, 16, 60);
    CHECK(prod.support_radius == 4.0);
    CHECK(prod.eval({5.0}) == 0.0);
    CHECK(prod.eval({1.0}) == Catch::Approx(g.eval({1.0})));
}

TEST_CASE("reflection flips the argument and the gradient sign") {
    auto u = C2Function::gaussian_bump({0.5}, 1.0);
    auto r = u.reflected();
    CHECK(r.eval({-0.5}) == Catch::Approx(u.eval({0.5})));
    CHECK(r.gradient({0.2})[0] == Catch::Approx(-u.gradient({-0.2})[0]));
}
