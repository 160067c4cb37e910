#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fosr/dataset.hpp"
#include "fosr/errors.hpp"
#include "fosr/inference.hpp"
#include "fosr/metrics.hpp"
#include "fosr/sampler.hpp"
#include "fosr/synth.hpp"

namespace fosr {

namespace csv {

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

inline double parse_double(const std::string& s, const std::string& file,
                           std::size_t row, const std::string& column) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(file, row, "column '" + column + "': cannot parse '" + s +
                                        "' as a number");
    }
}

}  // namespace csv

/// Long-format response file: header curve_id,t,y. Covariate file: header
/// curve_id,x_1..x_p. Curves keep their file order of first appearance.
inline FunctionalDataset read_dataset_csv(const std::string& response_path,
                                          const std::string& covariate_path) {
    std::ifstream resp(response_path);
    if (!resp) throw Error("cannot open response file: " + response_path);

    std::string line;
    std::size_t row = 0;
    if (!std::getline(resp, line))
        throw ParseError(response_path, 1, "empty file, expected header curve_id,t,y");
    ++row;
    auto header = csv::split(line);
    if (header.size() != 3 || header[0] != "curve_id" || header[1] != "t" || header[2] != "y")
        throw ParseError(response_path, 1, "expected header curve_id,t,y");

    std::vector<std::string> curve_order;
    std::map<std::string, std::vector<std::pair<double, double>>> points;
    while (std::getline(resp, line)) {
        ++row;
        if (line.empty()) continue;
        auto fields = csv::split(line);
        if (fields.size() != 3)
            throw ParseError(response_path, row, "expected 3 columns, got " +
                                                     std::to_string(fields.size()));
        if (!points.count(fields[0])) curve_order.push_back(fields[0]);
        points[fields[0]].emplace_back(
            csv::parse_double(fields[1], response_path, row, "t"),
            csv::parse_double(fields[2], response_path, row, "y"));
    }
    if (curve_order.empty()) throw ParseError(response_path, row, "no data rows");

    std::ifstream cov(covariate_path);
    if (!cov) throw Error("cannot open covariate file: " + covariate_path);
    row = 0;
    if (!std::getline(cov, line))
        throw ParseError(covariate_path, 1, "empty file, expected header curve_id,x_1,..");
    ++row;
    header = csv::split(line);
    if (header.size() < 2 || header[0] != "curve_id")
        throw ParseError(covariate_path, 1, "expected header curve_id,x_1,..,x_p");
    const std::size_t p = header.size() - 1;

    std::map<std::string, std::vector<double>> cov_rows;
    while (std::getline(cov, line)) {
        ++row;
        if (line.empty()) continue;
        auto fields = csv::split(line);
        if (fields.size() != p + 1)
            throw ParseError(covariate_path, row,
                             "expected " + std::to_string(p + 1) + " columns, got " +
                                 std::to_string(fields.size()));
        std::vector<double> values;
        for (std::size_t l = 0; l < p; ++l)
            values.push_back(csv::parse_double(fields[l + 1], covariate_path, row,
                                               header[l + 1]));
        cov_rows[fields[0]] = std::move(values);
    }

    FunctionalDataset data;
    data.curve_labels = curve_order;
    data.covariate_labels.assign(header.begin() + 1, header.end());
    data.covariates.resize(static_cast<Eigen::Index>(p),
                           static_cast<Eigen::Index>(curve_order.size()));
    double t_lo = 0.0, t_hi = 0.0;
    bool first_point = true;
    for (std::size_t i = 0; i < curve_order.size(); ++i) {
        auto& pts = points[curve_order[i]];
        std::sort(pts.begin(), pts.end());
        Eigen::VectorXd t(static_cast<Eigen::Index>(pts.size()));
        Eigen::VectorXd y(static_cast<Eigen::Index>(pts.size()));
        for (std::size_t j = 0; j < pts.size(); ++j) {
            t[static_cast<Eigen::Index>(j)] = pts[j].first;
            y[static_cast<Eigen::Index>(j)] = pts[j].second;
            if (first_point || pts[j].first < t_lo) t_lo = pts[j].first;
            if (first_point || pts[j].first > t_hi) t_hi = pts[j].first;
            first_point = false;
        }
        data.grids.push_back(std::move(t));
        data.curves.push_back(std::move(y));
        const auto it = cov_rows.find(curve_order[i]);
        if (it == cov_rows.end())
            throw Error("covariate file has no row for curve '" + curve_order[i] + "'");
        for (std::size_t l = 0; l < p; ++l)
            data.covariates(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i)) =
                it->second[l];
    }
    data.domain = {t_lo, t_hi};
    data.validate();
    return data;
}

inline void write_dataset_csv(const FunctionalDataset& data,
                              const std::string& response_path,
                              const std::string& covariate_path) {
    std::ofstream resp(response_path);
    resp << "curve_id,t,y\n" << std::setprecision(17);
    for (std::size_t i = 0; i < data.n_curves(); ++i) {
        const std::string id = i < data.curve_labels.size() ? data.curve_labels[i]
                                                            : std::to_string(i + 1);
        for (Eigen::Index j = 0; j < data.curves[i].size(); ++j)
            resp << id << ',' << data.grids[i][j] << ',' << data.curves[i][j] << '\n';
    }

    std::ofstream cov(covariate_path);
    cov << "curve_id";
    for (std::size_t l = 0; l < data.n_covariates(); ++l)
        cov << ','
            << (l < data.covariate_labels.size() ? data.covariate_labels[l]
                                                 : "x_" + std::to_string(l + 1));
    cov << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < data.n_curves(); ++i) {
        cov << (i < data.curve_labels.size() ? data.curve_labels[i] : std::to_string(i + 1));
        for (std::size_t l = 0; l < data.n_covariates(); ++l)
            cov << ','
                << data.covariates(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i));
        cov << '\n';
    }
}

/// One CSV per chain with columns (iteration, parameter_name, value).
inline void write_draws_csv(const PosteriorDraws& draws, const std::string& directory) {
    for (std::size_t c = 0; c < draws.chains.size(); ++c) {
        std::ofstream out(directory + "/chain_" + std::to_string(c + 1) + ".csv");
        out << "iteration,parameter_name,value\n" << std::setprecision(17);
        const auto& chain = draws.chains[c];
        for (std::size_t d = 0; d < chain.sigma2.size(); ++d) {
            const std::size_t iter = chain.iterations[d];
            out << iter << ",sigma2," << chain.sigma2[d] << '\n';
            for (Eigen::Index j = 0; j < chain.b[d].size(); ++j) {
                out << iter << ",b[" << j + 1 << "]," << chain.b[d][j] << '\n';
                out << iter << ",tau2[" << j + 1 << "]," << chain.tau2[d][j] << '\n';
            }
            for (std::size_t l = 0; l < chain.Z[d].size(); ++l) {
                out << iter << ",Z[" << l + 1 << "]," << chain.Z[d][l] << '\n';
                out << iter << ",theta[" << l + 1 << "],"
                    << chain.theta[d][static_cast<Eigen::Index>(l)] << '\n';
                out << iter << ",mu[" << l + 1 << "],"
                    << chain.mu[d][static_cast<Eigen::Index>(l)] << '\n';
            }
        }
    }
}

inline nlohmann::json config_to_json(const GibbsConfig& cfg, const Hyperparameters& hp) {
    nlohmann::json j;
    j["n_iterations"] = cfg.n_iterations;
    j["burn_in_fraction"] = cfg.burn_in_fraction;
    j["thinning"] = cfg.thinning;
    j["n_chains"] = cfg.n_chains;
    j["seed"] = cfg.seed;
    j["lambda"] = hp.lambda;
    j["delta1"] = hp.delta1;
    j["delta2"] = hp.delta2;
    if (hp.mu_mode == Hyperparameters::MuMode::Fixed) {
        j["mu"] = hp.mu;
    } else {
        j["mu"] = "parameter";
        j["psi"] = hp.psi;
    }
    return j;
}

inline nlohmann::json fit_to_json(const FitSummary& fit) {
    nlohmann::json j;
    j["Z_hat"] = fit.Z_hat;
    j["sigma2_hat"] = fit.sigma2_hat;
    j["b_hat"] = std::vector<double>(fit.b_hat.begin(), fit.b_hat.end());
    j["grid"] = std::vector<double>(fit.reporting_grid.begin(), fit.reporting_grid.end());
    j["intercept_curve"] =
        std::vector<double>(fit.intercept_curve.begin(), fit.intercept_curve.end());
    for (std::size_t l = 0; l < fit.coefficient_curves.size(); ++l) {
        nlohmann::json coef;
        coef["coefficient"] = std::vector<double>(fit.coefficient_curves[l].begin(),
                                                  fit.coefficient_curves[l].end());
        coef["partial"] = std::vector<double>(fit.partial_curves[l].begin(),
                                              fit.partial_curves[l].end());
        coef["lower"] =
            std::vector<double>(fit.bands[l].lower.begin(), fit.bands[l].lower.end());
        coef["upper"] =
            std::vector<double>(fit.bands[l].upper.begin(), fit.bands[l].upper.end());
        j["coefficients"].push_back(coef);
    }
    return j;
}

/// Long format: l, t, estimate, lower, upper.
inline void write_curves_csv(const FitSummary& fit, const std::string& path) {
    std::ofstream out(path);
    out << "l,t,estimate,lower,upper\n" << std::setprecision(17);
    for (std::size_t l = 0; l < fit.coefficient_curves.size(); ++l)
        for (Eigen::Index j = 0; j < fit.reporting_grid.size(); ++j)
            out << l + 1 << ',' << fit.reporting_grid[j] << ','
                << fit.coefficient_curves[l][j] << ',' << fit.bands[l].lower[j] << ','
                << fit.bands[l].upper[j] << '\n';
}

inline nlohmann::json metrics_to_json(const MetricReport& report) {
    nlohmann::json j;
    j["r2_adj"] = report.r2_adj;
    j["gcv"] = report.gcv;
    if (report.mse >= 0.0) j["mse"] = report.mse;
    j["K"] = report.K_used;
    j["selected_count"] = report.selected_count;
    return j;
}

inline void write_metrics_csv(const MetricReport& report, const std::string& path) {
    std::ofstream out(path);
    out << "r2_adj,mse,gcv,K,selected_count\n" << std::setprecision(17);
    out << report.r2_adj << ',';
    if (report.mse >= 0.0) out << report.mse;
    out << ',' << report.gcv << ',' << report.K_used << ',' << report.selected_count
        << '\n';
}

/// Tidy CSV (replication, configuration, metric, value).
inline void write_replication_csv(const ReplicationResult& result,
                                  const std::string& path) {
    std::ofstream out(path);
    out << "replication,configuration,metric,value\n" << std::setprecision(17);
    for (const auto& rec : result.records) {
        if (rec.failed) {
            out << rec.replication << ',' << rec.configuration << ",failed,1\n";
            continue;
        }
        out << rec.replication << ',' << rec.configuration << ",r2_adj," << rec.r2_adj
            << '\n';
        out << rec.replication << ',' << rec.configuration << ",mse," << rec.mse << '\n';
        for (std::size_t l = 0; l < rec.Z_hat.size(); ++l)
            out << rec.replication << ',' << rec.configuration << ",Z_hat[" << l + 1
                << "]," << rec.Z_hat[l] << '\n';
    }
}

/// Proportions table, one row per coefficient, one column per configuration.
inline void write_proportions_csv(const ReplicationResult& result,
                                  const std::string& path) {
    std::ofstream out(path);
    out << "coefficient";
    for (const auto& c : result.configurations) out << ',' << c;
    out << '\n' << std::setprecision(17);
    if (result.selection_proportion.empty()) return;
    const std::size_t p = result.selection_proportion[0].size();
    for (std::size_t l = 0; l < p; ++l) {
        out << l + 1;
        for (std::size_t c = 0; c < result.configurations.size(); ++c)
            out << ',' << result.selection_proportion[c][l];
        out << '\n';
    }
}

}  // namespace fosr
