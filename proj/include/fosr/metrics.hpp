#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <vector>

#include "fosr/dataset.hpp"
#include "fosr/design.hpp"
#include "fosr/errors.hpp"
#include "fosr/inference.hpp"

namespace fosr {

struct MetricReport {
    double r2_adj = 0.0;
    double mse = -1.0;  // negative when truth is unknown
    double gcv = -1.0;
    std::size_t K_used = 0;
    std::size_t selected_count = 0;
};

/// Adjusted-R2-like functional fit metric:
/// 1 - [(N-1) sum (y-y^)^2] / [(N - K sum I{Z^_l>0}) sum (y-beta0~)^2].
inline double r2_adjusted(const FunctionalDataset& data,
                          const Eigen::VectorXd& intercept,
                          const std::vector<Eigen::VectorXd>& predictions,
                          const std::vector<int>& Z_hat, std::size_t K) {
    const double N = static_cast<double>(data.total_points());
    std::size_t selected = 0;
    for (int z : Z_hat) selected += z > 0;
    const double df = N - static_cast<double>(selected * K);
    if (df <= 0.0)
        throw DegreesOfFreedom("no residual degrees of freedom: N <= K * selected");

    double rss = 0.0, tss = 0.0;
    for (std::size_t i = 0; i < data.n_curves(); ++i) {
        rss += (data.curves[i] - predictions[i]).squaredNorm();
        tss += (data.curves[i] - intercept).squaredNorm();
    }
    if (tss == 0.0) throw NullVariation("responses have no variation around the mean");
    return 1.0 - (N - 1.0) * rss / (df * tss);
}

/// Mean squared distance between the true and estimated mean curves,
/// averaged over all evaluation points.
inline double mse_truth(const std::vector<Eigen::VectorXd>& true_mean,
                        const std::vector<Eigen::VectorXd>& estimated_mean) {
    if (true_mean.size() != estimated_mean.size())
        throw GridMismatch("curve count mismatch between truth and estimate");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < true_mean.size(); ++i) {
        if (true_mean[i].size() != estimated_mean[i].size())
            throw GridMismatch("grid mismatch between truth and estimate");
        sum += (true_mean[i] - estimated_mean[i]).squaredNorm();
        n += static_cast<std::size_t>(true_mean[i].size());
    }
    return sum / static_cast<double>(n);
}

/// GCV(K) = (1/N) ||ytilde - O^ b^||^2 / [1 - tr(S_K)/N]^2 with
/// b^ = Q^-1 O^' ytilde and tr(S_K) = tr(Q^-1 O^'O^), never materialising S_K.
/// Q^ is built from the MAP eta2 and Z^ estimates.
inline double gcv(const StandardizedDataset& std_data, const FitSummary& fit,
                  const BasisSystem& basis) {
    const DesignStructures design =
        assemble_design(std_data, basis, fit.Z_hat, fit.eta2_hat);
    const double N = static_cast<double>(std_data.base.total_points());

    Eigen::VectorXd ytilde(static_cast<Eigen::Index>(std_data.base.total_points()));
    Eigen::Index row = 0;
    for (const auto& c : std_data.centered_curves) {
        ytilde.segment(row, c.size()) = c;
        row += c.size();
    }

    const Eigen::MatrixXd OtO = design.O_full.transpose() * design.O_full;
    Eigen::LLT<Eigen::MatrixXd> llt(design.Q);
    if (llt.info() != Eigen::Success)
        throw IllConditionedPrecision("GCV precision matrix not positive definite", 0.0);

    const double trace = llt.solve(OtO).trace();
    if (trace >= N) throw SaturatedFit("projection trace equals the observation count");

    const Eigen::VectorXd b_hat = llt.solve(design.O_full.transpose() * ytilde);
    const double rss = (ytilde - design.O_full * b_hat).squaredNorm();
    const double denom = 1.0 - trace / N;
    return rss / N / (denom * denom);
}

inline MetricReport metric_report(const StandardizedDataset& std_data,
                                  const FitSummary& fit, const BasisSystem& basis) {
    MetricReport report;
    report.K_used = basis.K;
    for (int z : fit.Z_hat) report.selected_count += z > 0;
    report.r2_adj = r2_adjusted(std_data.base, std_data.intercept_estimate,
                                predict(fit, std_data), fit.Z_hat, basis.K);
    report.gcv = gcv(std_data, fit, basis);
    return report;
}

}  // namespace fosr
