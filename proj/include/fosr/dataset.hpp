#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fosr/errors.hpp"

namespace fosr {

/// m discretised response curves on their evaluation grids plus the p x m
/// scalar covariate matrix.
struct FunctionalDataset {
    std::vector<Eigen::VectorXd> curves;  // y_i, length n_i each
    std::vector<Eigen::VectorXd> grids;   // t_i, strictly increasing
    Eigen::MatrixXd covariates;           // p x m, column i belongs to curve i
    std::pair<double, double> domain{0.0, 0.0};
    std::vector<std::string> curve_labels;
    std::vector<std::string> covariate_labels;

    std::size_t n_curves() const { return curves.size(); }
    std::size_t n_covariates() const { return static_cast<std::size_t>(covariates.rows()); }

    std::size_t total_points() const {
        std::size_t n = 0;
        for (const auto& c : curves) n += static_cast<std::size_t>(c.size());
        return n;
    }

    bool shared_grid() const {
        for (std::size_t i = 1; i < grids.size(); ++i) {
            if (grids[i].size() != grids[0].size() || grids[i] != grids[0]) return false;
        }
        return true;
    }

    void validate() const {
        if (curves.empty()) throw NumericalInput("dataset has no curves");
        if (curves.size() != grids.size())
            throw NumericalInput("curve/grid count mismatch");
        if (static_cast<std::size_t>(covariates.cols()) != curves.size())
            throw NumericalInput("covariate matrix must have one column per curve");
        if (!covariates.allFinite())
            throw NumericalInput("covariate matrix contains nonfinite entries");
        for (std::size_t i = 0; i < curves.size(); ++i) {
            if (curves[i].size() != grids[i].size())
                throw NumericalInput("curve " + std::to_string(i + 1) +
                                     ": response/grid length mismatch");
            if (curves[i].size() == 0)
                throw NumericalInput("curve " + std::to_string(i + 1) + " is empty");
            for (Eigen::Index j = 0; j < grids[i].size(); ++j) {
                const double t = grids[i][j];
                if (t < domain.first || t > domain.second)
                    throw DomainViolation("curve " + std::to_string(i + 1) +
                                          ": point outside declared domain");
                if (j > 0 && grids[i][j - 1] >= t)
                    throw NumericalInput("curve " + std::to_string(i + 1) +
                                         ": grid not strictly increasing");
            }
        }
    }
};

/// Dataset after covariate standardisation and removal of the functional
/// mean intercept.
struct StandardizedDataset {
    FunctionalDataset base;                        // covariates standardised
    Eigen::VectorXd covariate_means;               // length p
    Eigen::VectorXd covariate_sds;                 // length p
    Eigen::VectorXd intercept_estimate;            // beta0~ on the shared grid
    std::vector<Eigen::VectorXd> centered_curves;  // y~_i = y_i - beta0~

    const Eigen::VectorXd& shared_grid_points() const { return base.grids[0]; }
};

/// Standardise covariates to mean 0 / sd 1 per row, estimate the functional
/// intercept as the pointwise mean across curves (shared grid required) and
/// centre the responses.
inline StandardizedDataset standardize(const FunctionalDataset& data) {
    data.validate();
    const auto p = data.n_covariates();
    const auto m = data.n_curves();
    if (p < 1) throw NumericalInput("at least one covariate required");
    if (m < 2) throw NumericalInput("standardisation needs at least two curves");
    if (!data.shared_grid())
        throw GridMismatch("pointwise functional mean requires a shared grid");

    StandardizedDataset out;
    out.base = data;
    out.covariate_means.resize(static_cast<Eigen::Index>(p));
    out.covariate_sds.resize(static_cast<Eigen::Index>(p));
    for (std::size_t l = 0; l < p; ++l) {
        const auto row = data.covariates.row(static_cast<Eigen::Index>(l));
        const double mean = row.mean();
        // sample sd, n-1 denominator
        const double var =
            (row.array() - mean).square().sum() / static_cast<double>(m - 1);
        const double sd = std::sqrt(var);
        if (!(sd > 0.0)) throw ConstantCovariate(l);
        out.covariate_means[static_cast<Eigen::Index>(l)] = mean;
        out.covariate_sds[static_cast<Eigen::Index>(l)] = sd;
        out.base.covariates.row(static_cast<Eigen::Index>(l)) =
            (row.array() - mean) / sd;
    }

    const Eigen::Index n = data.curves[0].size();
    out.intercept_estimate = Eigen::VectorXd::Zero(n);
    for (const auto& c : data.curves) out.intercept_estimate += c;
    out.intercept_estimate /= static_cast<double>(m);

    out.centered_curves.reserve(m);
    for (const auto& c : data.curves)
        out.centered_curves.push_back(c - out.intercept_estimate);
    return out;
}

}  // namespace fosr
