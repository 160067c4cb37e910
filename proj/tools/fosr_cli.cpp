// Command-line front end: fit, simulate, replicate, gcv-scan, diagnose.
// Every run writes a config echo (config.json) next to its artifacts so the
// run can be reproduced from the output directory alone.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fosr/fosr.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOptions {
    std::string response_path;
    std::string covariate_path;
    std::size_t k = 10;
    std::size_t order = 4;
    double lambda = std::sqrt(2.0);
    std::string mu = "0.5";  // a value in (0,1) or "parameter"
    double psi = 0.6;
    double delta1 = 0.0;
    double delta2 = 0.0;
    std::size_t iters = 10000;
    double burn_in = 0.5;
    std::size_t thin = 50;
    std::size_t chains = 2;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::string out = "fosr_out";
    double rhat_threshold = 1.1;
    bool warn_only = false;

    // synthetic-data knobs (simulate, replicate, gcv-scan without files)
    std::size_t m = 10;
    std::size_t n = 25;
    double sigma = 0.2;
};

void add_sampler_flags(CLI::App* cmd, CommonOptions& opt, bool with_k = true) {
    if (with_k) cmd->add_option("--k", opt.k, "number of basis functions");
    cmd->add_option("--order", opt.order, "B-spline order (degree + 1)");
    cmd->add_option("--lambda", opt.lambda, "shrinkage prior rate parameter");
    cmd->add_option("--mu", opt.mu, "prior inclusion weight in (0,1), or 'parameter'");
    cmd->add_option("--psi", opt.psi, "upper truncation of mu when mu=parameter");
    cmd->add_option("--delta1", opt.delta1, "noise-variance prior shape");
    cmd->add_option("--delta2", opt.delta2, "noise-variance prior rate");
    cmd->add_option("--iters", opt.iters, "Gibbs iterations per chain");
    cmd->add_option("--burn-in", opt.burn_in, "burn-in fraction in [0,1)");
    cmd->add_option("--thin", opt.thin, "thinning interval");
    cmd->add_option("--chains", opt.chains, "number of chains");
    cmd->add_option("--seed", opt.seed, "master seed");
    cmd->add_option("--threads", opt.threads, "worker threads for parallel chains");
    cmd->add_option("--out", opt.out, "output directory");
    cmd->add_option("--rhat-threshold", opt.rhat_threshold, "convergence cutoff");
    cmd->add_flag("--warn-only", opt.warn_only,
                  "do not fail the run on a convergence warning");
}

void add_data_flags(CLI::App* cmd, CommonOptions& opt, bool required) {
    auto* resp = cmd->add_option("--response", opt.response_path,
                                 "long-format response CSV (curve_id,t,y)")
                     ->check(CLI::ExistingFile);
    auto* cov = cmd->add_option("--covariates", opt.covariate_path,
                                "covariate CSV (curve_id,x_1..x_p)")
                    ->check(CLI::ExistingFile);
    if (required) {
        resp->required();
        cov->required();
    }
    cov->needs(resp);
    resp->needs(cov);
}

void add_synth_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--m", opt.m, "synthetic curve count");
    cmd->add_option("--n", opt.n, "points per synthetic curve");
    cmd->add_option("--sigma", opt.sigma, "synthetic noise standard deviation");
}

// flat JSON config file; command-line flags win over file values
void add_config_file(CLI::App* cmd, CommonOptions& opt, std::string& config_path) {
    cmd->add_option("--config", config_path, "flat JSON file with option defaults")
        ->check(CLI::ExistingFile);
    cmd->parse_complete_callback([cmd, &opt, &config_path] {
        if (config_path.empty()) return;
        std::ifstream in(config_path);
        json j;
        in >> j;
        auto set_if_unset = [cmd, &j](const std::string& flag, auto& target) {
            const std::string key = flag.substr(2);
            auto* o = cmd->get_option_no_throw(flag);
            if (o != nullptr && o->count() == 0 && j.contains(key))
                j.at(key).get_to(target);
        };
        set_if_unset("--response", opt.response_path);
        set_if_unset("--covariates", opt.covariate_path);
        set_if_unset("--k", opt.k);
        set_if_unset("--order", opt.order);
        set_if_unset("--lambda", opt.lambda);
        set_if_unset("--mu", opt.mu);
        set_if_unset("--psi", opt.psi);
        set_if_unset("--delta1", opt.delta1);
        set_if_unset("--delta2", opt.delta2);
        set_if_unset("--iters", opt.iters);
        set_if_unset("--burn-in", opt.burn_in);
        set_if_unset("--thin", opt.thin);
        set_if_unset("--chains", opt.chains);
        set_if_unset("--seed", opt.seed);
        set_if_unset("--threads", opt.threads);
        set_if_unset("--out", opt.out);
        set_if_unset("--m", opt.m);
        set_if_unset("--n", opt.n);
        set_if_unset("--sigma", opt.sigma);
    });
}

fosr::Hyperparameters make_hyper(const CommonOptions& opt) {
    fosr::Hyperparameters hp;
    if (opt.mu == "parameter") {
        hp = fosr::Hyperparameters::parameter_mu(opt.psi);
    } else {
        std::size_t pos = 0;
        double value = 0.0;
        try {
            value = std::stod(opt.mu, &pos);
        } catch (const std::exception&) {
            pos = std::string::npos;
        }
        if (pos != opt.mu.size())
            throw fosr::NumericalInput("--mu expects a number in (0,1) or 'parameter'");
        hp = fosr::Hyperparameters::fixed_mu(value);
    }
    hp.lambda = opt.lambda;
    hp.delta1 = opt.delta1;
    hp.delta2 = opt.delta2;
    hp.validate();
    return hp;
}

fosr::GibbsConfig make_gibbs(const CommonOptions& opt) {
    fosr::GibbsConfig cfg;
    cfg.n_iterations = opt.iters;
    cfg.burn_in_fraction = opt.burn_in;
    cfg.thinning = opt.thin;
    cfg.n_chains = opt.chains;
    cfg.seed = opt.seed;
    cfg.n_threads = opt.threads;
    cfg.validate();
    return cfg;
}

fs::path prepare_out(const CommonOptions& opt) {
    fs::path dir(opt.out);
    fs::create_directories(dir);
    return dir;
}

void write_config_echo(const fs::path& dir, const std::string& command,
                       const CommonOptions& opt, const json& extra = {}) {
    json j = fosr::config_to_json(make_gibbs(opt), make_hyper(opt));
    j["command"] = command;
    j["k"] = opt.k;
    j["order"] = opt.order;
    j["threads"] = opt.threads;
    if (!opt.response_path.empty()) {
        j["response"] = opt.response_path;
        j["covariates"] = opt.covariate_path;
    }
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    std::ofstream out(dir / "config.json");
    out << j.dump(2) << '\n';
}

void write_convergence_csv(const fosr::ConvergenceReport& report, const fs::path& path) {
    std::ofstream out(path);
    out << "parameter,psrf,pass\n" << std::setprecision(17);
    for (std::size_t i = 0; i < report.parameters_checked.size(); ++i)
        out << report.parameters_checked[i] << ',' << report.psrf[i] << ','
            << (report.pass[i] ? 1 : 0) << '\n';
}

void print_selection(const std::vector<int>& Z_hat) {
    std::cout << "selected: (";
    for (std::size_t l = 0; l < Z_hat.size(); ++l)
        std::cout << Z_hat[l] << (l + 1 < Z_hat.size() ? "," : ")");
    std::cout << '\n';
}

// shared fit path once a standardized dataset exists
int fit_and_report(const fosr::StandardizedDataset& std_data, const CommonOptions& opt,
                   const fs::path& dir, const std::vector<Eigen::VectorXd>* true_mean) {
    const auto basis = fosr::build_bspline_basis(opt.k, opt.order, std_data.base.domain);
    const auto hp = make_hyper(opt);
    const auto cfg = make_gibbs(opt);

    const auto draws = fosr::run_chains(std_data, basis, hp, cfg);
    fosr::write_draws_csv(draws, dir.string());

    const auto convergence = fosr::convergence_report(draws, opt.rhat_threshold);
    write_convergence_csv(convergence, dir / "convergence.csv");

    const auto fit = fosr::summarize_fit(draws, basis, std_data);
    fosr::write_curves_csv(fit, (dir / "curves.csv").string());
    {
        std::ofstream out(dir / "fit.json");
        out << fosr::fit_to_json(fit).dump(2) << '\n';
    }

    auto report = fosr::metric_report(std_data, fit, basis);
    if (true_mean != nullptr)
        report.mse = fosr::mse_truth(*true_mean, fosr::predict(fit, std_data));
    fosr::write_metrics_csv(report, (dir / "metrics.csv").string());
    {
        std::ofstream out(dir / "metrics.json");
        out << fosr::metrics_to_json(report).dump(2) << '\n';
    }

    print_selection(fit.Z_hat);
    std::cout << "sigma2_hat: " << fit.sigma2_hat << '\n';
    std::cout << "r2_adj: " << report.r2_adj << "  gcv: " << report.gcv;
    if (report.mse >= 0.0) std::cout << "  mse: " << report.mse;
    std::cout << '\n';
    const double worst =
        *std::max_element(convergence.psrf.begin(), convergence.psrf.end());
    std::cout << "max R-hat: " << worst << (convergence.all_pass() ? " (ok)" : " (FAIL)")
              << '\n';
    std::cout << "artifacts: " << dir.string() << '\n';

    if (!convergence.all_pass() && !opt.warn_only) {
        std::cerr << "convergence check failed (R-hat >= " << opt.rhat_threshold
                  << "); rerun with --warn-only to keep the artifacts anyway\n";
        return 2;
    }
    return 0;
}

int cmd_fit(const CommonOptions& opt) {
    const auto dir = prepare_out(opt);
    write_config_echo(dir, "fit", opt);
    const auto data = fosr::read_dataset_csv(opt.response_path, opt.covariate_path);
    const auto std_data = fosr::standardize(data);
    return fit_and_report(std_data, opt, dir, nullptr);
}

int cmd_simulate(const CommonOptions& opt) {
    const auto dir = prepare_out(opt);
    write_config_echo(dir, "simulate", opt,
                      {{"m", opt.m}, {"n", opt.n}, {"sigma", opt.sigma}});

    fosr::SyntheticSpec spec;
    spec.m = opt.m;
    spec.n = opt.n;
    spec.sigma = opt.sigma;
    spec.seed = opt.seed;
    fosr::Rng data_rng = fosr::make_stream(spec.seed, 1, /*tag=*/0x64617461);
    const auto synth = fosr::generate_dataset(spec, data_rng);
    fosr::write_dataset_csv(synth.data, (dir / "response.csv").string(),
                            (dir / "covariates.csv").string());

    const auto std_data = fosr::standardize(synth.data);
    return fit_and_report(std_data, opt, dir, &synth.true_mean);
}

std::vector<fosr::ModelConfig> parse_configs(const std::string& mu_list, double psi) {
    if (mu_list == "grid") return fosr::paper_config_grid();
    std::vector<fosr::ModelConfig> configs;
    std::stringstream ss(mu_list);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token == "parameter") {
            configs.push_back(fosr::ModelConfig::parameter(psi));
        } else {
            configs.push_back(fosr::ModelConfig::fixed(std::stod(token)));
        }
    }
    if (configs.empty()) throw fosr::NumericalInput("--mu produced no configurations");
    return configs;
}

int cmd_replicate(const CommonOptions& opt, std::size_t R, const std::string& mu_list) {
    const auto dir = prepare_out(opt);
    write_config_echo(
        dir, "replicate", opt,
        {{"replications", R}, {"m", opt.m}, {"n", opt.n}, {"sigma", opt.sigma},
         {"mu_list", mu_list}});

    fosr::SyntheticSpec spec;
    spec.m = opt.m;
    spec.n = opt.n;
    spec.sigma = opt.sigma;
    spec.seed = opt.seed;

    fosr::GibbsConfig cfg = make_gibbs(opt);
    cfg.n_threads = opt.threads;
    const auto configs = parse_configs(mu_list, opt.psi);
    const auto result =
        fosr::run_replications(spec, configs, R, cfg, opt.k, opt.order);

    fosr::write_replication_csv(result, (dir / "replications.csv").string());
    fosr::write_proportions_csv(result, (dir / "proportions.csv").string());

    std::cout << "replications: " << result.replications
              << "  failures: " << result.failures << '\n';
    for (std::size_t c = 0; c < result.configurations.size(); ++c) {
        std::cout << result.configurations[c] << "  proportions (";
        for (std::size_t l = 0; l < result.selection_proportion[c].size(); ++l)
            std::cout << result.selection_proportion[c][l]
                      << (l + 1 < result.selection_proportion[c].size() ? "," : ")");
        std::cout << "  mean r2_adj " << result.mean_r2[c] << "  mean mse "
                  << result.mean_mse[c] << '\n';
    }
    std::cout << "artifacts: " << dir.string() << '\n';
    return result.failures == 0 ? 0 : 2;
}

int cmd_gcv_scan(const CommonOptions& opt, const std::vector<std::size_t>& k_list) {
    if (k_list.empty()) throw fosr::NumericalInput("gcv-scan needs at least one --k value");
    const auto dir = prepare_out(opt);
    write_config_echo(dir, "gcv-scan", opt, {{"k_list", k_list}});

    fosr::StandardizedDataset std_data;
    if (!opt.response_path.empty()) {
        std_data = fosr::standardize(
            fosr::read_dataset_csv(opt.response_path, opt.covariate_path));
    } else {
        fosr::SyntheticSpec spec;
        spec.m = opt.m;
        spec.n = opt.n;
        spec.sigma = opt.sigma;
        spec.seed = opt.seed;
        fosr::Rng data_rng = fosr::make_stream(spec.seed, 1, /*tag=*/0x64617461);
        std_data = fosr::standardize(fosr::generate_dataset(spec, data_rng).data);
    }

    const auto hp = make_hyper(opt);
    const auto cfg = make_gibbs(opt);
    std::ofstream table(dir / "gcv_scan.csv");
    table << "K,r2_adj,gcv\n" << std::setprecision(17);
    std::cout << "K\tr2_adj\tgcv\n";
    for (std::size_t K : k_list) {
        const auto basis = fosr::build_bspline_basis(K, opt.order, std_data.base.domain);
        const auto draws = fosr::run_chains(std_data, basis, hp, cfg, /*stream_id=*/K);
        const auto fit = fosr::summarize_fit(draws, basis, std_data);
        const auto report = fosr::metric_report(std_data, fit, basis);
        table << K << ',' << report.r2_adj << ',' << report.gcv << '\n';
        std::cout << K << '\t' << report.r2_adj << '\t' << report.gcv << '\n';
    }
    std::cout << "artifacts: " << dir.string() << '\n';
    return 0;
}

int cmd_diagnose(const CommonOptions& opt) {
    const auto dir = prepare_out(opt);
    write_config_echo(dir, "diagnose", opt);
    const auto data = fosr::read_dataset_csv(opt.response_path, opt.covariate_path);
    const auto std_data = fosr::standardize(data);
    const auto basis = fosr::build_bspline_basis(opt.k, opt.order, std_data.base.domain);

    const auto draws = fosr::run_chains(std_data, basis, make_hyper(opt), make_gibbs(opt));
    fosr::write_draws_csv(draws, dir.string());
    const auto report = fosr::convergence_report(draws, opt.rhat_threshold);
    write_convergence_csv(report, dir / "convergence.csv");

    std::cout << "parameter\tR-hat\tpass\n";
    for (std::size_t i = 0; i < report.parameters_checked.size(); ++i)
        std::cout << report.parameters_checked[i] << '\t' << report.psrf[i] << '\t'
                  << (report.pass[i] ? "yes" : "no") << '\n';
    std::cout << "artifacts: " << dir.string() << '\n';
    return report.all_pass() || opt.warn_only ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian variable selection for function-on-scalar regression"};
    app.require_subcommand(1);

    CommonOptions opt;
    std::string config_path;
    std::size_t replications = 20;
    std::string mu_list = "grid";
    std::vector<std::size_t> k_list;

    auto* fit = app.add_subcommand("fit", "fit a model to CSV data");
    add_data_flags(fit, opt, true);
    add_sampler_flags(fit, opt);
    add_config_file(fit, opt, config_path);

    auto* simulate =
        app.add_subcommand("simulate", "generate one synthetic dataset and fit it");
    add_synth_flags(simulate, opt);
    add_sampler_flags(simulate, opt);

    auto* replicate =
        app.add_subcommand("replicate", "replication study over model configurations");
    add_synth_flags(replicate, opt);
    add_sampler_flags(replicate, opt);
    replicate->add_option("-R,--replications", replications, "replication count");
    replicate->add_option("--mu-list", mu_list,
                          "'grid' or comma list of mu values / 'parameter'");

    auto* scan = app.add_subcommand("gcv-scan", "score a list of basis sizes by GCV");
    add_data_flags(scan, opt, false);
    add_synth_flags(scan, opt);
    add_sampler_flags(scan, opt, /*with_k=*/false);
    scan->add_option("--k", k_list, "basis sizes to scan")->required();

    auto* diagnose = app.add_subcommand("diagnose", "run chains and report R-hat only");
    add_data_flags(diagnose, opt, true);
    add_sampler_flags(diagnose, opt);

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed()) return cmd_fit(opt);
        if (simulate->parsed()) return cmd_simulate(opt);
        if (replicate->parsed()) return cmd_replicate(opt, replications, mu_list);
        if (scan->parsed()) return cmd_gcv_scan(opt, k_list);
        if (diagnose->parsed()) return cmd_diagnose(opt);
    } catch (const fosr::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
