#pragma once

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fosr/dataset.hpp"
#include "fosr/errors.hpp"
#include "fosr/inference.hpp"
#include "fosr/metrics.hpp"
#include "fosr/rng.hpp"
#include "fosr/sampler.hpp"

namespace fosr {

/// Synthetic-study generator: six normal covariates, equispaced grid on
/// [0,2], true selectors (0,0,1,0,1,0) with beta0 = exp(t^2),
/// beta3 = cos(2t), beta5 = t^3.
struct SyntheticSpec {
    std::size_t m = 10;
    std::size_t n = 25;
    double sigma = 0.2;
    std::pair<double, double> domain{0.0, 2.0};
    std::uint64_t seed = 1;

    static constexpr std::size_t p = 6;
    static const std::vector<int>& true_selectors() {
        static const std::vector<int> z{0, 0, 1, 0, 1, 0};
        return z;
    }
    static double beta0(double t) { return std::exp(t * t); }
    static double beta3(double t) { return std::cos(2.0 * t); }
    static double beta5(double t) { return t * t * t; }

    void validate() const {
        if (m < 2 || n < 2) throw NumericalInput("synthetic spec needs m >= 2, n >= 2");
        if (!(sigma > 0.0)) throw NumericalInput("sigma must be positive");
    }
};

struct SyntheticDataset {
    FunctionalDataset data;
    std::vector<Eigen::VectorXd> true_mean;  // beta0 + g_i, for the MSE metric
};

inline SyntheticDataset generate_dataset(const SyntheticSpec& spec, Rng& rng) {
    spec.validate();
    SyntheticDataset out;
    out.data.domain = spec.domain;

    Eigen::VectorXd grid(static_cast<Eigen::Index>(spec.n));
    for (std::size_t j = 0; j < spec.n; ++j)
        grid[static_cast<Eigen::Index>(j)] =
            spec.domain.first + (spec.domain.second - spec.domain.first) *
                                    static_cast<double>(j) /
                                    static_cast<double>(spec.n - 1);

    const double means[SyntheticSpec::p] = {200.0, 100.0, 20.0, 50.0, 2.0, 25.0};
    const double sds[SyntheticSpec::p] = {100.0, 100.0, 50.0, 50.0, 5.0, 50.0};
    std::normal_distribution<double> normal;
    out.data.covariates.resize(SyntheticSpec::p, static_cast<Eigen::Index>(spec.m));
    for (std::size_t l = 0; l < SyntheticSpec::p; ++l)
        for (std::size_t i = 0; i < spec.m; ++i)
            out.data.covariates(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i)) =
                means[l] + sds[l] * normal(rng);

    for (std::size_t i = 0; i < spec.m; ++i) {
        Eigen::VectorXd mean(grid.size());
        for (Eigen::Index j = 0; j < grid.size(); ++j) {
            const double t = grid[j];
            mean[j] = SyntheticSpec::beta0(t) +
                      SyntheticSpec::beta3(t) * out.data.covariates(2, static_cast<Eigen::Index>(i)) +
                      SyntheticSpec::beta5(t) * out.data.covariates(4, static_cast<Eigen::Index>(i));
        }
        Eigen::VectorXd y = mean;
        for (Eigen::Index j = 0; j < y.size(); ++j) y[j] += spec.sigma * normal(rng);
        out.data.grids.push_back(grid);
        out.data.curves.push_back(std::move(y));
        out.true_mean.push_back(std::move(mean));
    }
    out.data.validate();
    return out;
}

// ---------------------------------------------------------------------------
// Replication harness

/// One model configuration: mu fixed at a value, or mu as a parameter.
struct ModelConfig {
    Hyperparameters hp;
    std::string label;

    static ModelConfig fixed(double mu) {
        return {Hyperparameters::fixed_mu(mu), "mu=" + format(mu)};
    }
    static ModelConfig parameter(double psi = 0.6) {
        return {Hyperparameters::parameter_mu(psi), "mu=parameter"};
    }

  private:
    static std::string format(double v) {
        std::string s = std::to_string(v);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }
};

/// The nine-value hyperparameter grid 0.1..0.9 plus the parameter-mode model.
inline std::vector<ModelConfig> paper_config_grid(bool include_parameter_mode = true) {
    std::vector<ModelConfig> configs;
    for (int g = 1; g <= 9; ++g) configs.push_back(ModelConfig::fixed(0.1 * g));
    if (include_parameter_mode) configs.push_back(ModelConfig::parameter());
    return configs;
}

struct ReplicationRecord {
    std::size_t replication = 0;
    std::string configuration;
    double r2_adj = 0.0;
    double mse = 0.0;
    std::vector<int> Z_hat;
    double runtime_seconds = 0.0;
    bool failed = false;
    std::string error;
};

struct ReplicationResult {
    std::vector<ReplicationRecord> records;
    // selection_proportion[config][l]: share of replications with Z^_l = 1
    std::vector<std::string> configurations;
    std::vector<std::vector<double>> selection_proportion;
    std::vector<double> mean_r2;
    std::vector<double> mean_mse;
    std::size_t replications = 0;
    std::size_t failures = 0;
};

/// Fit one dataset with one configuration and return metrics + selection.
inline ReplicationRecord fit_once(const SyntheticDataset& synth, const BasisSystem& basis,
                                  const ModelConfig& config, const GibbsConfig& cfg,
                                  std::uint64_t stream_id = 0) {
    ReplicationRecord rec;
    rec.configuration = config.label;
    const auto start = std::chrono::steady_clock::now();
    const StandardizedDataset std_data = standardize(synth.data);
    const PosteriorDraws draws = run_chains(std_data, basis, config.hp, cfg, stream_id);
    const FitSummary fit = summarize_fit(draws, basis, std_data);
    rec.Z_hat = fit.Z_hat;
    const std::vector<Eigen::VectorXd> yhat = predict(fit, std_data);
    rec.r2_adj = r2_adjusted(std_data.base, std_data.intercept_estimate, yhat,
                             fit.Z_hat, basis.K);
    rec.mse = mse_truth(synth.true_mean, yhat);
    rec.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

/// R replications: fresh dataset per replication (stream (seed, r)), every
/// configuration fitted on it, Table-2-style nonzero proportions aggregated.
inline ReplicationResult run_replications(const SyntheticSpec& spec,
                                          const std::vector<ModelConfig>& configs,
                                          std::size_t R, const GibbsConfig& cfg,
                                          std::size_t K = 10, std::size_t order = 4) {
    if (R < 1) throw NumericalInput("need at least one replication");
    const BasisSystem basis = build_bspline_basis(K, order, spec.domain);
    ReplicationResult result;
    result.replications = R;
    for (const auto& c : configs) result.configurations.push_back(c.label);
    result.selection_proportion.assign(configs.size(),
                                       std::vector<double>(SyntheticSpec::p, 0.0));
    result.mean_r2.assign(configs.size(), 0.0);
    result.mean_mse.assign(configs.size(), 0.0);
    std::vector<std::size_t> ok_count(configs.size(), 0);

    for (std::size_t r = 0; r < R; ++r) {
        Rng data_rng = make_stream(spec.seed, r + 1, /*tag=*/0x64617461);
        const SyntheticDataset synth = generate_dataset(spec, data_rng);
        for (std::size_t c = 0; c < configs.size(); ++c) {
            ReplicationRecord rec;
            try {
                GibbsConfig chain_cfg = cfg;
                chain_cfg.seed = spec.seed;
                rec = fit_once(synth, basis, configs[c], chain_cfg, r + 1);
                rec.replication = r + 1;
                for (std::size_t l = 0; l < SyntheticSpec::p; ++l)
                    result.selection_proportion[c][l] += rec.Z_hat[l];
                result.mean_r2[c] += rec.r2_adj;
                result.mean_mse[c] += rec.mse;
                ++ok_count[c];
            } catch (const Error& e) {
                rec.replication = r + 1;
                rec.configuration = configs[c].label;
                rec.failed = true;
                rec.error = e.what();
                ++result.failures;
            }
            result.records.push_back(std::move(rec));
        }
    }

    for (std::size_t c = 0; c < configs.size(); ++c) {
        const double denom = ok_count[c] > 0 ? static_cast<double>(ok_count[c]) : 1.0;
        for (auto& prop : result.selection_proportion[c]) prop /= denom;
        result.mean_r2[c] /= denom;
        result.mean_mse[c] /= denom;
    }
    return result;
}

}  // namespace fosr
