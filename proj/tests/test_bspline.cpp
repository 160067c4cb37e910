#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fosr/bspline.hpp"

using namespace fosr;

TEST_CASE("clamped knot vector with equally spaced interior knots") {
    const auto basis = build_bspline_basis(10, 4, {0.0, 2.0});
    REQUIRE(basis.knots.size() == 14);
    for (int i = 0; i < 4; ++i) {
        CHECK(basis.knots[i] == 0.0);
        CHECK(basis.knots[13 - i] == 2.0);
    }
    // 6 interior knots at 2k/7
    for (int k = 1; k <= 6; ++k)
        CHECK(basis.knots[3 + k] == Catch::Approx(2.0 * k / 7.0).margin(1e-15));
}

TEST_CASE("K equal to order gives Bernstein polynomials") {
    const auto basis = build_bspline_basis(4, 4, {0.0, 1.0});
    REQUIRE(basis.knots.size() == 8);

    const auto at0 = eval_basis_point(basis, 0.0);
    CHECK(at0[0] == 1.0);
    CHECK(at0.tail(3).cwiseAbs().maxCoeff() == 0.0);

    const auto at1 = eval_basis_point(basis, 1.0);
    CHECK(at1[3] == 1.0);
    CHECK(at1.head(3).cwiseAbs().maxCoeff() == 0.0);

    const auto mid = eval_basis_point(basis, 0.5);
    CHECK(mid[0] == Catch::Approx(0.125).epsilon(1e-14));
    CHECK(mid[1] == Catch::Approx(0.375).epsilon(1e-14));
    CHECK(mid[2] == Catch::Approx(0.375).epsilon(1e-14));
    CHECK(mid[3] == Catch::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("partition of unity, nonnegativity and local support on random points") {
    const auto basis = build_bspline_basis(12, 4, {-1.0, 3.0});
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(-1.0, 3.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double t = unif(rng);
        const auto row = eval_basis_point(basis, t);
        CHECK(row.sum() == Catch::Approx(1.0).margin(1e-12));
        CHECK(row.minCoeff() >= 0.0);
        CHECK((row.array() != 0.0).count() <= 4);
    }
}

TEST_CASE("basis matrix rows sum to one including the right endpoint") {
    const auto basis = build_bspline_basis(10, 4, {0.0, 2.0});
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(25, 0.0, 2.0);
    const auto B = eval_basis(basis, grid);
    REQUIRE(B.rows() == 25);
    REQUIRE(B.cols() == 10);
    for (Eigen::Index j = 0; j < B.rows(); ++j)
        CHECK(B.row(j).sum() == Catch::Approx(1.0).margin(1e-12));
    // clamped endpoints
    CHECK(B(0, 0) == 1.0);
    CHECK(B(24, 9) == 1.0);
}

TEST_CASE("basis construction and evaluation errors") {
    CHECK_THROWS_AS(build_bspline_basis(3, 4, {0.0, 1.0}), InsufficientBasisCount);
    CHECK_THROWS_AS(build_bspline_basis(4, 4, {1.0, 1.0}), DomainViolation);
    const auto basis = build_bspline_basis(5, 4, {0.0, 1.0});
    CHECK_THROWS_AS(eval_basis_point(basis, -0.01), DomainViolation);
    CHECK_THROWS_AS(eval_basis_point(basis, 1.01), DomainViolation);
}

TEST_CASE("linear basis order 1 and 2 degenerate cases") {
    // order 1: piecewise constants
    const auto constant = build_bspline_basis(3, 1, {0.0, 3.0});
    const auto row = eval_basis_point(constant, 0.5);
    CHECK(row[0] == 1.0);
    CHECK(row.sum() == 1.0);
    // order 2: hat functions interpolate at knots
    const auto linear = build_bspline_basis(4, 2, {0.0, 3.0});
    const auto at_knot = eval_basis_point(linear, 1.0);
    CHECK(at_knot[1] == Catch::Approx(1.0).margin(1e-14));
}
