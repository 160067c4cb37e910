#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "fosr/sampler.hpp"
#include "fosr/synth.hpp"

using namespace fosr;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ModelData tiny_model(std::size_t m, std::size_t n, std::size_t p, std::size_t K,
                     std::uint64_t seed) {
    Rng rng = make_stream(seed, 0);
    std::normal_distribution<double> normal;
    const auto basis = build_bspline_basis(K, std::min<std::size_t>(K, 4), {0.0, 1.0});
    VectorXd grid = VectorXd::LinSpaced(static_cast<Eigen::Index>(n), 0.0, 1.0);
    const MatrixXd B = eval_basis(basis, grid);

    std::vector<VectorXd> ytilde;
    std::vector<MatrixXd> rows;
    for (std::size_t i = 0; i < m; ++i) {
        VectorXd y(grid.size());
        for (Eigen::Index j = 0; j < y.size(); ++j) y[j] = normal(rng);
        ytilde.push_back(y);
        rows.push_back(B);
    }
    MatrixXd X(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(m));
    for (Eigen::Index l = 0; l < X.rows(); ++l)
        for (Eigen::Index i = 0; i < X.cols(); ++i) X(l, i) = normal(rng);
    return ModelData(std::move(ytilde), std::move(rows), std::move(X));
}

bool draws_equal(const ChainDraws& a, const ChainDraws& b) {
    if (a.sigma2 != b.sigma2) return false;
    if (a.Z != b.Z) return false;
    for (std::size_t d = 0; d < a.b.size(); ++d)
        if (a.b[d] != b.b[d] || a.tau2[d] != b.tau2[d] || a.theta[d] != b.theta[d])
            return false;
    return true;
}

}  // namespace

TEST_CASE("sigma2 conditional parameters: worked examples") {
    Hyperparameters hp;
    VectorXd b(1), tau2(1);
    b << 1.0;
    tau2 << 2.0;
    // N=2, p=1, K=1, delta=0: shape = 1 + 0.5, rate = (1 + 1/2)/2
    auto params = sigma2_conditional_params(1.0, b, tau2, 2, 1, 1, hp);
    CHECK(params.shape == Catch::Approx(1.5));
    CHECK(params.rate == Catch::Approx(0.75));

    hp.delta1 = 3.0;
    hp.delta2 = 2.0;
    VectorXd b2(4), tau22(4);
    b2 << 1, 2, 3, 4;
    tau22 << 1, 1, 1, 1;
    // N=10, p=2, K=2: shape = 5 + 2 + 3, rate = (6 + 30 + 4)/2
    params = sigma2_conditional_params(6.0, b2, tau22, 10, 2, 2, hp);
    CHECK(params.shape == Catch::Approx(10.0));
    CHECK(params.rate == Catch::Approx(20.0));
}

TEST_CASE("sigma2 draws match the conditional mean") {
    Hyperparameters hp;
    hp.delta1 = 3.0;
    hp.delta2 = 2.0;
    VectorXd b(2), tau2(2);
    b << 1.0, -1.0;
    tau2 << 1.0, 1.0;
    Rng rng = make_stream(5, 0);
    const auto params = sigma2_conditional_params(4.0, b, tau2, 6, 1, 2, hp);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i)
        sum += sample_sigma2(4.0, b, tau2, 6, 1, 2, hp, rng);
    const double mean = params.rate / (params.shape - 1.0);
    const double var = mean * mean / (params.shape - 2.0);
    CHECK(sum / n == Catch::Approx(mean).margin(4.0 * std::sqrt(var / n)));
}

TEST_CASE("eta2 draws have mean lambda sqrt(sigma2)/|b|") {
    Rng rng = make_stream(5, 1);
    const double b = -0.5, sigma2 = 2.0, lambda = std::sqrt(2.0);
    const double mean = lambda * std::sqrt(sigma2) / 0.5;
    const double var = mean * mean * mean / (lambda * lambda);
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_eta2(b, sigma2, lambda, rng);
    CHECK(sum / n == Catch::Approx(mean).margin(4.0 * std::sqrt(var / n)));
}

TEST_CASE("eta2 stays finite when b is exactly zero") {
    Rng rng = make_stream(5, 2);
    for (int i = 0; i < 1000; ++i) {
        const double e = sample_eta2(0.0, 1.0, std::sqrt(2.0), rng);
        CHECK(std::isfinite(e));
        CHECK(e > 0.0);
    }
}

TEST_CASE("selector inclusion probability: worked examples") {
    // equal residual sums leave the prior untouched
    CHECK(z_inclusion_probability(0.3, 5.0, 5.0, 1.0) == Catch::Approx(0.3));
    // ssr1 - ssr0 = 2 sigma2 log 3 at theta = 0.5 gives 1/(1+3)
    const double sigma2 = 2.0;
    CHECK(z_inclusion_probability(0.5, 4.0 + 2.0 * sigma2 * std::log(3.0), 4.0, sigma2) ==
          Catch::Approx(0.25).margin(1e-14));
    // selection strongly favoured when inclusion shrinks the residual
    CHECK(z_inclusion_probability(0.5, 0.0, 1e6, 1.0) == Catch::Approx(1.0));
    CHECK(z_inclusion_probability(0.5, 1e6, 0.0, 1.0) == Catch::Approx(0.0).margin(1e-200));
}

TEST_CASE("log-space inclusion probability matches the direct ratio") {
    for (double theta : {0.1, 0.5, 0.9}) {
        for (double diff : {-30.0, -1.0, 0.0, 1.0, 30.0}) {
            const double sigma2 = 1.3;
            const double direct =
                theta / ((1.0 - theta) * std::exp(diff / (2.0 * sigma2)) + theta);
            CHECK(z_inclusion_probability(theta, 5.0 + diff, 5.0, sigma2) ==
                  Catch::Approx(direct).margin(1e-12));
        }
    }
}

TEST_CASE("extreme residual differences do not overflow") {
    CHECK(std::isfinite(z_inclusion_probability(0.5, 1e308, 0.0, 1e-8)));
    CHECK(std::isfinite(z_inclusion_probability(0.5, 0.0, 1e308, 1e-8)));
    CHECK(z_inclusion_probability(0.5, 0.0, 1e308, 1e-8) == 1.0);
}

TEST_CASE("theta-Z sub-chain recovers the arcsine stationary law at mu = 0.5") {
    // theta | Z ~ Beta(0.5 + Z, 1.5 - Z) composed with Z | theta ~ Bern(theta)
    // is a Gibbs chain whose theta-marginal is Beta(0.5, 0.5)
    Rng rng = make_stream(9, 0);
    std::uniform_real_distribution<double> unif;
    double theta = 0.3;
    int Z = 0;
    std::vector<double> kept;
    for (int iter = 0; iter < 400000; ++iter) {
        theta = sample_theta(0.5, Z, rng);
        Z = unif(rng) < z_inclusion_probability(theta, 1.0, 1.0, 1.0) ? 1 : 0;
        if (iter % 4 == 3) kept.push_back(theta);
    }
    std::sort(kept.begin(), kept.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const double cdf = 2.0 / std::numbers::pi * std::asin(std::sqrt(kept[i]));
        const double emp = static_cast<double>(i + 1) / static_cast<double>(kept.size());
        ks = std::max(ks, std::abs(emp - cdf));
    }
    CHECK(ks < 0.02);
}

TEST_CASE("cross products match their naive double sums") {
    const ModelData data = tiny_model(4, 6, 3, 5, 21);
    for (std::size_t l = 0; l < data.p; ++l) {
        VectorXd proj = VectorXd::Zero(static_cast<Eigen::Index>(data.K));
        for (std::size_t i = 0; i < data.m; ++i)
            proj += data.X(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i)) *
                    data.basis_rows[i].transpose() * data.ytilde[i];
        CHECK((proj - data.proj[l]).cwiseAbs().maxCoeff() < 1e-12);
        for (std::size_t q = 0; q < data.p; ++q) {
            MatrixXd T = MatrixXd::Zero(static_cast<Eigen::Index>(data.K),
                                        static_cast<Eigen::Index>(data.K));
            for (std::size_t i = 0; i < data.m; ++i)
                T += data.X(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i)) *
                     data.X(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(i)) *
                     data.basis_rows[i].transpose() * data.basis_rows[i];
            CHECK((T - data.gram(l, q)).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("joint b draw has the right mean and covariance") {
    const ModelData data = tiny_model(3, 4, 1, 2, 22);
    const Hyperparameters hp;
    const GibbsSampler sampler(data, hp);

    ChainState state;
    state.b = VectorXd::Zero(2);
    state.Z = {1};
    state.theta = VectorXd::Constant(1, 0.5);
    state.mu = VectorXd::Constant(1, 0.5);
    state.sigma2 = 0.7;
    state.tau2 = VectorXd::Constant(2, 2.0);

    MatrixXd Q = data.gram(0, 0);
    Q.diagonal().array() += 0.5;
    const VectorXd mean = Q.llt().solve(data.proj[0]);
    const MatrixXd cov = 0.7 * Q.inverse();

    Rng rng = make_stream(5, 3);
    const int n = 100000;
    VectorXd sum = VectorXd::Zero(2);
    MatrixXd sum2 = MatrixXd::Zero(2, 2);
    for (int i = 0; i < n; ++i) {
        sampler.draw_b(state, rng);
        sum += state.b;
        sum2 += state.b * state.b.transpose();
    }
    const VectorXd mhat = sum / n;
    const MatrixXd chat = sum2 / n - mhat * mhat.transpose();
    for (int j = 0; j < 2; ++j)
        CHECK(mhat[j] == Catch::Approx(mean[j]).margin(5.0 * std::sqrt(cov(j, j) / n)));
    CHECK((chat - cov).cwiseAbs().maxCoeff() < 0.05 * cov.diagonal().maxCoeff());
}

TEST_CASE("initial state presets alternate between over-dispersed corners") {
    const ModelData data = tiny_model(3, 4, 2, 3, 23);
    const GibbsSampler sampler(data, Hyperparameters::parameter_mu());
    const std::vector<int> Z0{1, 0};

    const auto s0 = sampler.initial_state_preset(0, Z0);
    CHECK(s0.b[0] == -1.0);
    CHECK(s0.sigma2 == 1.0);
    CHECK(s0.tau2[0] == 1.0);
    CHECK(s0.theta[0] == 0.2);
    CHECK(s0.mu[0] == 0.2);
    CHECK(s0.Z == Z0);

    const auto s1 = sampler.initial_state_preset(1, Z0);
    CHECK(s1.b[0] == 1.0);
    CHECK(s1.sigma2 == 5.0);
    CHECK(s1.tau2[0] == 5.0);
    CHECK(s1.theta[0] == 0.8);
    CHECK(s1.mu[0] == 0.8);
    CHECK(s1.Z == std::vector<int>{0, 1});
}

TEST_CASE("fixed-mu mode keeps mu constant across the run") {
    const ModelData data = tiny_model(3, 5, 2, 3, 24);
    GibbsConfig cfg;
    cfg.n_iterations = 100;
    cfg.thinning = 5;
    cfg.seed = 77;
    const auto draws = run_chains(data, Hyperparameters::fixed_mu(0.3), cfg);
    for (const auto& chain : draws.chains)
        for (const auto& mu : chain.mu)
            CHECK((mu.array() == 0.3).all());
}

TEST_CASE("state invariants hold after many sweeps") {
    const ModelData data = tiny_model(4, 8, 2, 4, 25);
    const GibbsSampler sampler(data, Hyperparameters::parameter_mu());
    auto state = sampler.initial_state_preset(0, {1, 1});
    Rng rng = make_stream(5, 4);
    for (int iter = 0; iter < 1000; ++iter) {
        sampler.step(state, rng);
        REQUIRE(state.valid());
        CHECK(state.mu.minCoeff() > 0.0);
        CHECK(state.mu.maxCoeff() < 0.6);
    }
}

TEST_CASE("runs are reproducible and thread-count independent") {
    const ModelData data = tiny_model(3, 6, 2, 3, 26);
    GibbsConfig cfg;
    cfg.n_iterations = 200;
    cfg.thinning = 10;
    cfg.seed = 4242;

    const auto a = run_chains(data, Hyperparameters::parameter_mu(), cfg);
    const auto b = run_chains(data, Hyperparameters::parameter_mu(), cfg);
    cfg.n_threads = 2;
    const auto c = run_chains(data, Hyperparameters::parameter_mu(), cfg);

    REQUIRE(a.chains.size() == 2);
    for (std::size_t ch = 0; ch < 2; ++ch) {
        CHECK(draws_equal(a.chains[ch], b.chains[ch]));
        CHECK(draws_equal(a.chains[ch], c.chains[ch]));
    }

    cfg.n_threads = 1;
    cfg.seed = 4243;
    const auto d = run_chains(data, Hyperparameters::parameter_mu(), cfg);
    CHECK_FALSE(draws_equal(a.chains[0], d.chains[0]));
}

TEST_CASE("retention bookkeeping follows burn-in and thinning") {
    GibbsConfig cfg;
    CHECK(cfg.burn_in() == 5000);
    CHECK(cfg.retained_per_chain() == 100);

    const ModelData data = tiny_model(3, 4, 1, 3, 27);
    cfg.n_iterations = 40;
    cfg.burn_in_fraction = 0.5;
    cfg.thinning = 5;
    const auto draws = run_chains(data, Hyperparameters::fixed_mu(0.5), cfg);
    for (const auto& chain : draws.chains) {
        REQUIRE(chain.iterations == std::vector<std::size_t>{25, 30, 35, 40});
        CHECK(chain.sigma2.size() == 4);
    }
    CHECK(draws.total_retained() == 8);
}

TEST_CASE("configuration validation") {
    GibbsConfig cfg;
    cfg.n_chains = 0;
    CHECK_THROWS_AS(cfg.validate(), NumericalInput);
    cfg = GibbsConfig{};
    cfg.thinning = 0;
    CHECK_THROWS_AS(cfg.validate(), NumericalInput);
    cfg = GibbsConfig{};
    cfg.burn_in_fraction = 1.0;
    CHECK_THROWS_AS(cfg.validate(), NumericalInput);
    cfg = GibbsConfig{};
    cfg.n_iterations = 60;
    cfg.thinning = 50;
    CHECK_THROWS_AS(cfg.validate(), NumericalInput);

    Hyperparameters hp;
    hp.lambda = 0.0;
    CHECK_THROWS_AS(hp.validate(), NumericalInput);
    hp = Hyperparameters::fixed_mu(0.5);
    hp.mu = 1.0;
    CHECK_THROWS_AS(hp.validate(), NumericalInput);
    CHECK(Hyperparameters::prior_count(2.0, 6).mu == Catch::Approx(1.0 / 3.0));
}

TEST_CASE("sampler concentrates on the truly active covariates") {
    // strong signal at low noise: beta3, beta5 active
    SyntheticSpec spec;
    spec.m = 12;
    spec.seed = 31;
    Rng rng = make_stream(spec.seed, 1, 0x64617461);
    const auto synth = generate_dataset(spec, rng);
    const auto std_data = standardize(synth.data);
    const auto basis = build_bspline_basis(10, 4, spec.domain);

    GibbsConfig cfg;
    cfg.n_iterations = 1500;
    cfg.thinning = 10;
    cfg.seed = 31;
    const auto draws = run_chains(std_data, basis, Hyperparameters::fixed_mu(0.5), cfg);

    std::vector<double> freq(SyntheticSpec::p, 0.0);
    std::size_t total = 0;
    for (const auto& chain : draws.chains)
        for (const auto& Z : chain.Z) {
            for (std::size_t l = 0; l < freq.size(); ++l) freq[l] += Z[l];
            ++total;
        }
    for (auto& f : freq) f /= static_cast<double>(total);
    CHECK(freq[2] > 0.9);
    CHECK(freq[4] > 0.9);
}
