#include <catch2/catch_amalgamated.hpp>

#include "fosr/dataset.hpp"

using namespace fosr;
using Eigen::VectorXd;

namespace {

FunctionalDataset two_curve_dataset() {
    FunctionalDataset data;
    data.domain = {0.0, 1.0};
    VectorXd grid(2);
    grid << 0.0, 1.0;
    VectorXd y1(2), y2(2);
    y1 << 0.0, 2.0;
    y2 << 2.0, 4.0;
    data.grids = {grid, grid};
    data.curves = {y1, y2};
    data.covariates.resize(1, 2);
    data.covariates << 1.0, 3.0;
    return data;
}

}  // namespace

TEST_CASE("standardize centers and scales covariates") {
    FunctionalDataset data = two_curve_dataset();
    data.covariates.resize(1, 3);
    data.covariates << 1.0, 2.0, 3.0;
    VectorXd grid(2);
    grid << 0.0, 1.0;
    data.grids = {grid, grid, grid};
    VectorXd y(2);
    y << 1.0, 1.0;
    data.curves = {y, y, y};

    const auto std_data = standardize(data);
    CHECK(std_data.covariate_means[0] == 2.0);
    CHECK(std_data.covariate_sds[0] == 1.0);
    CHECK(std_data.base.covariates(0, 0) == Catch::Approx(-1.0).margin(1e-10));
    CHECK(std_data.base.covariates(0, 1) == Catch::Approx(0.0).margin(1e-10));
    CHECK(std_data.base.covariates(0, 2) == Catch::Approx(1.0).margin(1e-10));
    CHECK(std_data.base.covariates.row(0).mean() == Catch::Approx(0.0).margin(1e-10));

    // identical curves: intercept equals every curve, residuals vanish
    for (const auto& c : std_data.centered_curves)
        CHECK(c.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pointwise functional mean on a shared grid") {
    const auto std_data = standardize(two_curve_dataset());
    CHECK(std_data.intercept_estimate[0] == 1.0);
    CHECK(std_data.intercept_estimate[1] == 3.0);
    CHECK(std_data.centered_curves[0][0] == -1.0);
    CHECK(std_data.centered_curves[0][1] == -1.0);
    CHECK(std_data.centered_curves[1][0] == 1.0);
    CHECK(std_data.centered_curves[1][1] == 1.0);
}

TEST_CASE("standardize-then-reconstruct round-trips the responses") {
    const auto data = two_curve_dataset();
    const auto std_data = standardize(data);
    for (std::size_t i = 0; i < data.n_curves(); ++i) {
        const VectorXd rebuilt = std_data.centered_curves[i] + std_data.intercept_estimate;
        CHECK((rebuilt - data.curves[i]).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("constant covariate row is rejected with its index") {
    auto data = two_curve_dataset();
    data.covariates.resize(2, 2);
    data.covariates << 1.0, 3.0, 5.0, 5.0;
    try {
        standardize(data);
        FAIL("expected ConstantCovariate");
    } catch (const ConstantCovariate& e) {
        CHECK(e.index == 1);
    }
}

TEST_CASE("unequal grids reject the pointwise-mean intercept") {
    auto data = two_curve_dataset();
    VectorXd other(2);
    other << 0.0, 0.5;
    data.grids[1] = other;
    CHECK_THROWS_AS(standardize(data), GridMismatch);
}

TEST_CASE("dataset validation catches malformed inputs") {
    auto data = two_curve_dataset();
    data.grids[0][1] = 2.0;  // outside declared domain
    CHECK_THROWS_AS(data.validate(), DomainViolation);

    data = two_curve_dataset();
    data.grids[0][1] = 0.0;  // not strictly increasing
    CHECK_THROWS_AS(data.validate(), NumericalInput);

    data = two_curve_dataset();
    data.covariates(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(data.validate(), NumericalInput);
}
