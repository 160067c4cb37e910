#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fosr/bspline.hpp"
#include "fosr/dataset.hpp"
#include "fosr/errors.hpp"
#include "fosr/sampler.hpp"

namespace fosr {

// ---------------------------------------------------------------------------
// Gelman-Rubin potential scale reduction

/// Classic R-hat: sqrt(((n-1)/n * W + B/n) / W), W the mean within-chain
/// variance and B the between-chain variance of chain means times n.
inline double psrf(const std::vector<std::vector<double>>& chains) {
    if (chains.size() < 2) throw NumericalInput("R-hat needs at least 2 chains");
    const std::size_t n = chains[0].size();
    if (n < 2) throw NumericalInput("R-hat needs at least 2 draws per chain");
    const double M = static_cast<double>(chains.size());
    const double nd = static_cast<double>(n);

    double W = 0.0;
    std::vector<double> means;
    for (const auto& chain : chains) {
        if (chain.size() != n) throw NumericalInput("chains of unequal length");
        double mean = 0.0;
        for (double v : chain) mean += v;
        mean /= nd;
        double var = 0.0;
        for (double v : chain) var += (v - mean) * (v - mean);
        W += var / (nd - 1.0);
        means.push_back(mean);
    }
    W /= M;

    double grand = 0.0;
    for (double mu : means) grand += mu;
    grand /= M;
    double B = 0.0;
    for (double mu : means) B += (mu - grand) * (mu - grand);
    B *= nd / (M - 1.0);

    if (W == 0.0) {
        if (B == 0.0) return 1.0;  // all draws identical across chains
        throw StuckChains("zero within-chain variance but chains disagree");
    }
    return std::sqrt(((nd - 1.0) / nd * W + B / nd) / W);
}

namespace detail {

inline std::vector<std::vector<double>> extract_series(
    const PosteriorDraws& draws, const std::string& parameter) {
    std::vector<std::vector<double>> out;
    for (const auto& chain : draws.chains) {
        std::vector<double> series;
        series.reserve(chain.sigma2.size());
        if (parameter == "sigma2") {
            series = chain.sigma2;
        } else {
            const auto open = parameter.find('[');
            if (open == std::string::npos || parameter.back() != ']')
                throw NumericalInput("unknown parameter name: " + parameter);
            const std::string head = parameter.substr(0, open);
            const std::size_t idx =
                static_cast<std::size_t>(
                    std::stoul(parameter.substr(open + 1, parameter.size() - open - 2))) -
                1;  // names are 1-based: b[1]..b[Kp], Z[1]..Z[p]
            for (std::size_t d = 0; d < chain.sigma2.size(); ++d) {
                double v = 0.0;
                if (head == "b")
                    v = chain.b[d][static_cast<Eigen::Index>(idx)];
                else if (head == "theta")
                    v = chain.theta[d][static_cast<Eigen::Index>(idx)];
                else if (head == "tau2")
                    v = chain.tau2[d][static_cast<Eigen::Index>(idx)];
                else if (head == "mu")
                    v = chain.mu[d][static_cast<Eigen::Index>(idx)];
                else if (head == "Z")
                    v = chain.Z[d][idx];
                else
                    throw NumericalInput("unknown parameter name: " + parameter);
                series.push_back(v);
            }
        }
        out.push_back(std::move(series));
    }
    return out;
}

}  // namespace detail

inline double gelman_rubin(const PosteriorDraws& draws, const std::string& parameter) {
    return psrf(detail::extract_series(draws, parameter));
}

struct ConvergenceReport {
    std::vector<std::string> parameters_checked;
    std::vector<double> psrf;
    std::vector<bool> pass;
    double threshold = 1.1;

    bool all_pass() const {
        return std::all_of(pass.begin(), pass.end(), [](bool b) { return b; });
    }
};

/// R-hat for sigma2 and every b component.
inline ConvergenceReport convergence_report(const PosteriorDraws& draws,
                                            double threshold = 1.1) {
    ConvergenceReport report;
    report.threshold = threshold;
    auto add = [&](const std::string& name) {
        const double r = gelman_rubin(draws, name);
        report.parameters_checked.push_back(name);
        report.psrf.push_back(r);
        report.pass.push_back(r < threshold);
    };
    add("sigma2");
    for (std::size_t j = 1; j <= draws.p * draws.K; ++j) add("b[" + std::to_string(j) + "]");
    return report;
}

// ---------------------------------------------------------------------------
// Posterior summaries

/// Posterior mode of binary draws; a tie at exactly 50% reports 1.
inline int map_estimate_binary(const std::vector<int>& samples) {
    if (samples.empty()) throw NumericalInput("empty sample");
    std::size_t ones = 0;
    for (int s : samples) ones += s != 0;
    return 2 * ones >= samples.size() ? 1 : 0;
}

/// Mode of a Gaussian KDE (Silverman bandwidth, 512-point grid over the
/// sample range).
inline double map_estimate_continuous(const std::vector<double>& samples) {
    if (samples.empty()) throw NumericalInput("empty sample");
    const std::size_t n = samples.size();
    const double nd = static_cast<double>(n);

    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= nd;
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    var = n > 1 ? var / (nd - 1.0) : 0.0;
    const double sd = std::sqrt(var);

    std::vector<double> sorted(samples);
    std::sort(sorted.begin(), sorted.end());
    const double iqr = sorted[static_cast<std::size_t>(0.75 * (nd - 1.0))] -
                       sorted[static_cast<std::size_t>(0.25 * (nd - 1.0))];
    double spread = std::min(sd, iqr / 1.34);
    if (spread <= 0.0) spread = sd;
    const double h = 0.9 * spread * std::pow(nd, -0.2);
    if (!(h > 0.0)) return sorted[n / 2];  // (near-)degenerate sample

    const double lo = sorted.front(), hi = sorted.back();
    double best_x = lo, best_density = -1.0;
    for (int g = 0; g < 512; ++g) {
        const double x = lo + (hi - lo) * static_cast<double>(g) / 511.0;
        double density = 0.0;
        for (double v : samples) {
            const double u = (x - v) / h;
            density += std::exp(-0.5 * u * u);
        }
        if (density > best_density) {
            best_density = density;
            best_x = x;
        }
    }
    return best_x;
}

/// Type-7 (linear interpolation) empirical quantile.
inline double quantile(std::vector<double> values, double prob) {
    if (values.empty()) throw NumericalInput("quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * prob;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

struct CredibleBand {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

/// Pointwise 2.5%/97.5% envelopes of the gated coefficient curves
/// Z_l * sum_k b_kl B_k(t) across all retained draws.
inline std::vector<CredibleBand> credible_bands(const PosteriorDraws& draws,
                                                const BasisSystem& basis,
                                                const Eigen::VectorXd& grid,
                                                double lower_prob = 0.025,
                                                double upper_prob = 0.975) {
    const Eigen::MatrixXd B = eval_basis(basis, grid);
    const Eigen::Index K = static_cast<Eigen::Index>(draws.K);
    std::vector<CredibleBand> bands(draws.p);
    for (std::size_t l = 0; l < draws.p; ++l) {
        Eigen::MatrixXd curves(grid.size(),
                               static_cast<Eigen::Index>(draws.total_retained()));
        Eigen::Index col = 0;
        for (const auto& chain : draws.chains) {
            for (std::size_t d = 0; d < chain.b.size(); ++d) {
                if (chain.Z[d][l]) {
                    curves.col(col) =
                        B * chain.b[d].segment(static_cast<Eigen::Index>(l) * K, K);
                } else {
                    curves.col(col).setZero();
                }
                ++col;
            }
        }
        bands[l].lower.resize(grid.size());
        bands[l].upper.resize(grid.size());
        for (Eigen::Index j = 0; j < grid.size(); ++j) {
            std::vector<double> point(curves.row(j).begin(), curves.row(j).end());
            bands[l].lower[j] = quantile(point, lower_prob);
            bands[l].upper[j] = quantile(point, upper_prob);
        }
    }
    return bands;
}

/// MAP estimates, selection indicators, coefficient curves and bands.
struct FitSummary {
    std::vector<int> Z_hat;           // length p
    Eigen::VectorXd b_hat;            // Kp, MAP per component
    double sigma2_hat = 0.0;
    Eigen::VectorXd eta2_hat;         // Kp, MAP of 1/tau2 (used by GCV)
    Eigen::VectorXd reporting_grid;
    std::vector<Eigen::VectorXd> partial_curves;      // beta_l(t), ungated
    std::vector<Eigen::VectorXd> coefficient_curves;  // nu_l(t) = Z_hat_l beta_l(t)
    Eigen::VectorXd intercept_curve;                  // beta0~ on the reporting grid
    std::vector<CredibleBand> bands;
};

inline FitSummary summarize_fit(const PosteriorDraws& draws, const BasisSystem& basis,
                                const StandardizedDataset& std_data) {
    FitSummary fit;
    const std::size_t p = draws.p;
    const Eigen::Index K = static_cast<Eigen::Index>(draws.K);
    const Eigen::Index Kp = K * static_cast<Eigen::Index>(p);

    fit.Z_hat.resize(p);
    for (std::size_t l = 0; l < p; ++l) {
        std::vector<int> z;
        for (const auto& chain : draws.chains)
            for (const auto& draw : chain.Z) z.push_back(draw[l]);
        fit.Z_hat[l] = map_estimate_binary(z);
    }

    fit.b_hat.resize(Kp);
    fit.eta2_hat.resize(Kp);
    for (Eigen::Index j = 0; j < Kp; ++j) {
        std::vector<double> bj, ej;
        for (const auto& chain : draws.chains) {
            for (const auto& draw : chain.b) bj.push_back(draw[j]);
            for (const auto& draw : chain.tau2) ej.push_back(1.0 / draw[j]);
        }
        fit.b_hat[j] = map_estimate_continuous(bj);
        fit.eta2_hat[j] = map_estimate_continuous(ej);
    }

    std::vector<double> s2;
    for (const auto& chain : draws.chains)
        for (double v : chain.sigma2) s2.push_back(v);
    fit.sigma2_hat = map_estimate_continuous(s2);

    fit.reporting_grid = std_data.shared_grid_points();
    fit.intercept_curve = std_data.intercept_estimate;
    const Eigen::MatrixXd B = eval_basis(basis, fit.reporting_grid);
    for (std::size_t l = 0; l < p; ++l) {
        fit.partial_curves.push_back(B *
                                     fit.b_hat.segment(static_cast<Eigen::Index>(l) * K, K));
        fit.coefficient_curves.push_back(fit.Z_hat[l] ? fit.partial_curves.back()
                                                      : Eigen::VectorXd::Zero(B.rows()));
    }
    fit.bands = credible_bands(draws, basis, fit.reporting_grid);
    return fit;
}

/// Fitted mean curves: y^_ij = beta0~(t_ij) + sum_l x_li Z^_l beta^_l(t_ij).
/// The intercept estimate lives on the shared data grid, so predictions are
/// made there.
inline std::vector<Eigen::VectorXd> predict(const FitSummary& fit,
                                            const StandardizedDataset& std_data) {
    const auto& grid = std_data.shared_grid_points();
    if (grid.size() != fit.reporting_grid.size() || grid != fit.reporting_grid)
        throw GridMismatch("prediction grid differs from the fitted reporting grid");
    std::vector<Eigen::VectorXd> out;
    out.reserve(std_data.base.n_curves());
    for (std::size_t i = 0; i < std_data.base.n_curves(); ++i) {
        Eigen::VectorXd yhat = std_data.intercept_estimate;
        for (std::size_t l = 0; l < fit.coefficient_curves.size(); ++l)
            yhat += std_data.base.covariates(static_cast<Eigen::Index>(l),
                                             static_cast<Eigen::Index>(i)) *
                    fit.coefficient_curves[l];
        out.push_back(std::move(yhat));
    }
    return out;
}

}  // namespace fosr
