#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "fosr/bspline.hpp"
#include "fosr/dataset.hpp"
#include "fosr/distributions.hpp"
#include "fosr/errors.hpp"
#include "fosr/rng.hpp"

namespace fosr {

struct Hyperparameters {
    enum class MuMode { Fixed, Parameter };

    double lambda = std::sqrt(2.0);  // prior rate of tau^2 is lambda^2 / 2
    double delta1 = 0.0;             // IG prior shape on sigma^2
    double delta2 = 0.0;             // IG prior rate on sigma^2
    MuMode mu_mode = MuMode::Fixed;
    double mu = 0.5;   // shared mu_l in Fixed mode
    double psi = 0.6;  // upper truncation of mu_l in Parameter mode

    static Hyperparameters fixed_mu(double mu_value) {
        Hyperparameters hp;
        hp.mu_mode = MuMode::Fixed;
        hp.mu = mu_value;
        return hp;
    }

    static Hyperparameters parameter_mu(double psi_value = 0.6) {
        Hyperparameters hp;
        hp.mu_mode = MuMode::Parameter;
        hp.psi = psi_value;
        return hp;
    }

    /// mu_l = C / p with C a prior guess on the selected-variable count.
    static Hyperparameters prior_count(double C, std::size_t p) {
        return fixed_mu(C / static_cast<double>(p));
    }

    void validate() const {
        if (!(lambda > 0.0)) throw NumericalInput("lambda must be positive");
        if (delta1 < 0.0 || delta2 < 0.0) throw NumericalInput("delta1/delta2 must be >= 0");
        if (mu_mode == MuMode::Fixed && !(mu > 0.0 && mu < 1.0))
            throw NumericalInput("fixed mu must lie in (0,1)");
        if (mu_mode == MuMode::Parameter && !(psi > 0.0 && psi < 1.0))
            throw NumericalInput("psi must lie in (0,1)");
    }
};

/// One Gibbs chain's current values.
struct ChainState {
    Eigen::VectorXd b;     // Kp, blocks b_.l
    std::vector<int> Z;    // p, binary
    Eigen::VectorXd theta; // p, in (0,1)
    Eigen::VectorXd mu;    // p; updated only in Parameter mode
    double sigma2 = 1.0;
    Eigen::VectorXd tau2;  // Kp, positive

    Eigen::VectorXd eta2() const { return tau2.cwiseInverse(); }

    bool valid() const {
        if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) return false;
        if (!b.allFinite()) return false;
        if ((tau2.array() <= 0.0).any() || !tau2.allFinite()) return false;
        if ((theta.array() <= 0.0).any() || (theta.array() >= 1.0).any()) return false;
        for (int z : Z)
            if (z != 0 && z != 1) return false;
        return true;
    }
};

struct GibbsConfig {
    std::size_t n_iterations = 10000;
    double burn_in_fraction = 0.5;
    std::size_t thinning = 50;
    std::size_t n_chains = 2;
    std::uint64_t seed = 1;
    std::size_t n_threads = 1;
    std::vector<ChainState> init;  // empty -> paper-style preset

    std::size_t burn_in() const {
        return static_cast<std::size_t>(static_cast<double>(n_iterations) * burn_in_fraction);
    }

    std::size_t retained_per_chain() const {
        return (n_iterations - burn_in()) / thinning;
    }

    void validate() const {
        if (n_chains < 1) throw NumericalInput("need at least one chain");
        if (thinning < 1) throw NumericalInput("thinning must be >= 1");
        if (burn_in_fraction < 0.0 || burn_in_fraction >= 1.0)
            throw NumericalInput("burn-in fraction must lie in [0,1)");
        if (retained_per_chain() < 2)
            throw NumericalInput("config retains fewer than 2 draws per chain");
    }
};

struct ChainDraws {
    std::vector<Eigen::VectorXd> b;
    std::vector<std::vector<int>> Z;
    std::vector<Eigen::VectorXd> theta;
    std::vector<Eigen::VectorXd> mu;
    std::vector<double> sigma2;
    std::vector<Eigen::VectorXd> tau2;
    std::vector<std::size_t> iterations;
};

/// Thinned post-burn-in samples across chains.
struct PosteriorDraws {
    std::vector<ChainDraws> chains;
    GibbsConfig config;
    std::size_t p = 0;
    std::size_t K = 0;

    std::size_t total_retained() const {
        std::size_t n = 0;
        for (const auto& c : chains) n += c.sigma2.size();
        return n;
    }
};

/// Centered responses, per-curve basis evaluations, covariates and the
/// cross products the full conditionals need. Independent of how the data
/// were centered, which keeps the sampler reusable for joint-correctness
/// simulations.
struct ModelData {
    std::vector<Eigen::VectorXd> ytilde;
    std::vector<Eigen::MatrixXd> basis_rows;  // B_i, n_i x K
    Eigen::MatrixXd X;                        // p x m

    std::size_t m = 0, p = 0, K = 0, N = 0;
    std::vector<Eigen::MatrixXd> cross_gram;  // T_{lq} = sum_i x_li x_qi B_i'B_i, row-major l*p+q
    std::vector<Eigen::VectorXd> proj;        // V_l = sum_i x_li B_i' ytilde_i

    ModelData() = default;

    ModelData(std::vector<Eigen::VectorXd> ytilde_in,
              std::vector<Eigen::MatrixXd> basis_in, Eigen::MatrixXd X_in)
        : ytilde(std::move(ytilde_in)), basis_rows(std::move(basis_in)), X(std::move(X_in)) {
        m = ytilde.size();
        p = static_cast<std::size_t>(X.rows());
        K = static_cast<std::size_t>(basis_rows.at(0).cols());
        for (const auto& y : ytilde) N += static_cast<std::size_t>(y.size());
        precompute();
    }

    ModelData(const StandardizedDataset& std_data, const BasisSystem& basis) {
        m = std_data.base.n_curves();
        p = std_data.base.n_covariates();
        K = basis.K;
        X = std_data.base.covariates;
        ytilde = std_data.centered_curves;
        const bool shared = std_data.base.shared_grid();
        Eigen::MatrixXd shared_B;
        if (shared) shared_B = eval_basis(basis, std_data.base.grids[0]);
        basis_rows.reserve(m);
        for (std::size_t i = 0; i < m; ++i) {
            basis_rows.push_back(shared ? shared_B : eval_basis(basis, std_data.base.grids[i]));
            N += static_cast<std::size_t>(ytilde[i].size());
        }
        precompute();
    }

    const Eigen::MatrixXd& gram(std::size_t l, std::size_t q) const {
        return cross_gram[l * p + q];
    }

  private:
    void precompute() {
        cross_gram.assign(p * p, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K),
                                                       static_cast<Eigen::Index>(K)));
        proj.assign(p, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K)));
        for (std::size_t i = 0; i < m; ++i) {
            const Eigen::MatrixXd G = basis_rows[i].transpose() * basis_rows[i];
            const Eigen::VectorXd By = basis_rows[i].transpose() * ytilde[i];
            for (std::size_t l = 0; l < p; ++l) {
                const double xl = X(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i));
                proj[l] += xl * By;
                for (std::size_t q = l; q < p; ++q) {
                    const double xq =
                        X(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(i));
                    cross_gram[l * p + q] += xl * xq * G;
                }
            }
        }
        for (std::size_t l = 0; l < p; ++l)
            for (std::size_t q = 0; q < l; ++q) cross_gram[l * p + q] = cross_gram[q * p + l];
    }
};

// ---------------------------------------------------------------------------
// Full conditional draws (section-by-section building blocks)

struct InverseGammaParams {
    double shape;
    double rate;
};

inline InverseGammaParams sigma2_conditional_params(double residual_ss,
                                                    const Eigen::VectorXd& b,
                                                    const Eigen::VectorXd& tau2,
                                                    std::size_t total_points, std::size_t p,
                                                    std::size_t K,
                                                    const Hyperparameters& hp) {
    const double shape = static_cast<double>(total_points) / 2.0 +
                         static_cast<double>(p * K) / 2.0 + hp.delta1;
    const double rate =
        (residual_ss + (b.array().square() / tau2.array()).sum() + 2.0 * hp.delta2) / 2.0;
    return {shape, rate};
}

inline double sample_sigma2(double residual_ss, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& tau2, std::size_t total_points,
                            std::size_t p, std::size_t K, const Hyperparameters& hp,
                            Rng& rng) {
    const auto params =
        sigma2_conditional_params(residual_ss, b, tau2, total_points, p, K, hp);
    return sample_inverse_gamma(params.shape, params.rate, rng);
}

/// eta^2 ~ InverseGaussian(mu' = sqrt(lambda^2 sigma^2 / b^2), lambda' = lambda^2);
/// the caller inverts the draw to recover tau^2. |b| is floored at 1e-10 to
/// keep mu' finite.
inline double sample_eta2(double b_kl, double sigma2, double lambda, Rng& rng) {
    const double b_abs = std::max(std::abs(b_kl), 1e-10);
    const double mean = lambda * std::sqrt(sigma2) / b_abs;
    return sample_inverse_gaussian(mean, lambda * lambda, rng);
}

/// P(Z_l = 1) = theta / ((1-theta) exp(d) + theta), d = (SSR1 - SSR0)/(2 sigma^2),
/// computed in log space with d clamped to +-700.
inline double z_inclusion_probability(double theta, double ssr1, double ssr0,
                                      double sigma2) {
    if (theta >= 1.0) return 1.0;
    if (theta <= 0.0) return 0.0;
    const double d = std::clamp((ssr1 - ssr0) / (2.0 * sigma2), -700.0, 700.0);
    const double a = d + std::log1p(-theta) - std::log(theta);
    if (a > 700.0) return 0.0;
    return 1.0 / (1.0 + std::exp(a));
}

inline double sample_theta(double mu_l, int Z_l, Rng& rng) {
    return sample_beta(mu_l + Z_l, 2.0 - Z_l - mu_l, rng);
}

inline double sample_mu(double theta_l, double psi, Rng& rng) {
    return sample_truncated_continuous_bernoulli(theta_l, psi, rng);
}

// ---------------------------------------------------------------------------

/// Gibbs sampler over one ModelData instance. step() performs one full sweep
/// in the panel order: sigma^2, all eta^2 -> tau^2, per-l (mu, Z, theta),
/// then the joint b draw.
class GibbsSampler {
  public:
    GibbsSampler(const ModelData& data, const Hyperparameters& hp)
        : data_(&data), hp_(hp) {
        hp_.validate();
    }

    const ModelData& data() const { return *data_; }
    const Hyperparameters& hyper() const { return hp_; }

    ChainState initial_state_preset(std::size_t chain_index,
                                    const std::vector<int>& Z_first_chain) const {
        const Eigen::Index Kp = static_cast<Eigen::Index>(data_->K * data_->p);
        const Eigen::Index p = static_cast<Eigen::Index>(data_->p);
        const bool first = chain_index % 2 == 0;
        ChainState s;
        s.b = Eigen::VectorXd::Constant(Kp, first ? -1.0 : 1.0);
        s.theta = Eigen::VectorXd::Constant(p, first ? 0.2 : 0.8);
        s.sigma2 = first ? 1.0 : 5.0;
        s.tau2 = Eigen::VectorXd::Constant(Kp, first ? 1.0 : 5.0);
        s.mu = Eigen::VectorXd::Constant(
            p, hp_.mu_mode == Hyperparameters::MuMode::Parameter ? (first ? 0.2 : 0.8)
                                                                 : hp_.mu);
        s.Z.resize(data_->p);
        for (std::size_t l = 0; l < data_->p; ++l)
            s.Z[l] = first ? Z_first_chain[l] : 1 - Z_first_chain[l];
        return s;
    }

    void step(ChainState& state, Rng& rng) const {
        const std::size_t p = data_->p;
        const std::size_t K = data_->K;
        const std::size_t m = data_->m;

        // per-covariate fitted contributions c_{l,i} = x_li * B_i b_.l
        std::vector<std::vector<Eigen::VectorXd>> contrib(p);
        std::vector<Eigen::VectorXd> fitted(m);
        for (std::size_t i = 0; i < m; ++i)
            fitted[i] = Eigen::VectorXd::Zero(data_->ytilde[i].size());
        for (std::size_t l = 0; l < p; ++l) {
            contrib[l].resize(m);
            const auto b_l = state.b.segment(static_cast<Eigen::Index>(l * K),
                                             static_cast<Eigen::Index>(K));
            for (std::size_t i = 0; i < m; ++i) {
                contrib[l][i] = data_->X(static_cast<Eigen::Index>(l),
                                         static_cast<Eigen::Index>(i)) *
                                (data_->basis_rows[i] * b_l);
                if (state.Z[l]) fitted[i] += contrib[l][i];
            }
        }

        // 3.1 sigma^2
        double ssr = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            ssr += (data_->ytilde[i] - fitted[i]).squaredNorm();
        state.sigma2 = sample_sigma2(ssr, state.b, state.tau2, data_->N, p, K, hp_, rng);

        // 3.2 eta^2 -> tau^2
        for (Eigen::Index j = 0; j < state.tau2.size(); ++j)
            state.tau2[j] = 1.0 / sample_eta2(state.b[j], state.sigma2, hp_.lambda, rng);

        // 3.3 per-covariate mu, Z (mixed selector vector), theta
        std::uniform_real_distribution<double> unif;
        for (std::size_t l = 0; l < p; ++l) {
            if (hp_.mu_mode == Hyperparameters::MuMode::Parameter)
                state.mu[static_cast<Eigen::Index>(l)] =
                    sample_mu(state.theta[static_cast<Eigen::Index>(l)], hp_.psi, rng);

            double ssr0 = 0.0, ssr1 = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                Eigen::VectorXd base = data_->ytilde[i] - fitted[i];
                if (state.Z[l]) base += contrib[l][i];
                ssr0 += base.squaredNorm();
                ssr1 += (base - contrib[l][i]).squaredNorm();
            }
            const double prob = z_inclusion_probability(
                state.theta[static_cast<Eigen::Index>(l)], ssr1, ssr0, state.sigma2);
            const int z_new = unif(rng) < prob ? 1 : 0;
            if (z_new != state.Z[l]) {
                for (std::size_t i = 0; i < m; ++i) {
                    if (z_new)
                        fitted[i] += contrib[l][i];
                    else
                        fitted[i] -= contrib[l][i];
                }
                state.Z[l] = z_new;
            }

            state.theta[static_cast<Eigen::Index>(l)] =
                sample_theta(state.mu[static_cast<Eigen::Index>(l)], state.Z[l], rng);
        }

        // 3.4 joint b draw from N(Q^-1 O' ytilde, sigma^2 Q^-1)
        draw_b(state, rng);
    }

    /// Exact multivariate normal draw via the Cholesky factor of Q.
    void draw_b(ChainState& state, Rng& rng) const {
        const Eigen::Index K = static_cast<Eigen::Index>(data_->K);
        const std::size_t p = data_->p;
        const Eigen::Index Kp = K * static_cast<Eigen::Index>(p);

        Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(Kp, Kp);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(Kp);
        for (std::size_t l = 0; l < p; ++l) {
            if (!state.Z[l]) continue;
            rhs.segment(static_cast<Eigen::Index>(l) * K, K) = data_->proj[l];
            for (std::size_t q = 0; q < p; ++q) {
                if (!state.Z[q]) continue;
                Q.block(static_cast<Eigen::Index>(l) * K, static_cast<Eigen::Index>(q) * K,
                        K, K) = data_->gram(l, q);
            }
        }
        Q.diagonal() += state.tau2.cwiseInverse();

        Eigen::LLT<Eigen::MatrixXd> llt(Q);
        if (llt.info() != Eigen::Success) {
            const double scale = Q.diagonal().mean();
            double jitter = 1e-10;
            while (llt.info() != Eigen::Success && jitter <= 1e-4) {
                Eigen::MatrixXd Qj = Q;
                Qj.diagonal().array() += jitter * scale;
                llt.compute(Qj);
                jitter *= 10.0;
            }
            if (llt.info() != Eigen::Success)
                throw IllConditionedPrecision(
                    "Cholesky of Q failed after jitter escalation",
                    llt.matrixLLT().diagonal().minCoeff());
        }

        std::normal_distribution<double> normal;
        Eigen::VectorXd z(Kp);
        for (Eigen::Index j = 0; j < Kp; ++j) z[j] = normal(rng);
        const Eigen::VectorXd mean = llt.solve(rhs);
        state.b = mean + std::sqrt(state.sigma2) *
                             llt.matrixU().solve(z);  // (L')^-1 z has covariance Q^-1
    }

  private:
    const ModelData* data_;
    Hyperparameters hp_;
};

inline ChainDraws run_single_chain(const GibbsSampler& sampler, ChainState state,
                                   const GibbsConfig& cfg, Rng& rng) {
    const std::size_t burn = cfg.burn_in();
    ChainDraws draws;
    const std::size_t keep = cfg.retained_per_chain();
    draws.b.reserve(keep);
    for (std::size_t iter = 1; iter <= cfg.n_iterations; ++iter) {
        sampler.step(state, rng);
        if (iter > burn && (iter - burn) % cfg.thinning == 0) {
            draws.b.push_back(state.b);
            draws.Z.push_back(state.Z);
            draws.theta.push_back(state.theta);
            draws.mu.push_back(state.mu);
            draws.sigma2.push_back(state.sigma2);
            draws.tau2.push_back(state.tau2);
            draws.iterations.push_back(iter);
        }
    }
    return draws;
}

/// Run cfg.n_chains independent chains with streams derived from
/// (seed, stream_id, chain). Chains may run concurrently; results do not
/// depend on the thread count.
inline PosteriorDraws run_chains(const ModelData& data, const Hyperparameters& hp,
                                 const GibbsConfig& cfg, std::uint64_t stream_id = 0) {
    cfg.validate();
    GibbsSampler sampler(data, hp);

    std::vector<ChainState> inits = cfg.init;
    if (inits.empty()) {
        Rng init_rng = make_stream(cfg.seed, stream_id, /*tag=*/0x696e6974);
        std::vector<int> Z0(data.p);
        std::uniform_int_distribution<int> coin(0, 1);
        for (auto& z : Z0) z = coin(init_rng);
        for (std::size_t c = 0; c < cfg.n_chains; ++c)
            inits.push_back(sampler.initial_state_preset(c, Z0));
    } else if (inits.size() != cfg.n_chains) {
        throw NumericalInput("init states must match n_chains");
    }

    PosteriorDraws out;
    out.config = cfg;
    out.p = data.p;
    out.K = data.K;
    out.chains.resize(cfg.n_chains);

    auto run_one = [&](std::size_t c) {
        Rng rng = make_stream(cfg.seed, stream_id, /*tag=*/0x636861696e, c);
        out.chains[c] = run_single_chain(sampler, inits[c], cfg, rng);
    };

    if (cfg.n_threads > 1 && cfg.n_chains > 1) {
        std::vector<std::thread> workers;
        for (std::size_t c = 0; c < cfg.n_chains; ++c) workers.emplace_back(run_one, c);
        for (auto& w : workers) w.join();
    } else {
        for (std::size_t c = 0; c < cfg.n_chains; ++c) run_one(c);
    }
    return out;
}

inline PosteriorDraws run_chains(const StandardizedDataset& std_data,
                                 const BasisSystem& basis, const Hyperparameters& hp,
                                 const GibbsConfig& cfg, std::uint64_t stream_id = 0) {
    ModelData data(std_data, basis);
    return run_chains(data, hp, cfg, stream_id);
}

}  // namespace fosr
