#pragma once

#include <cmath>
#include <random>

#include "fosr/errors.hpp"
#include "fosr/rng.hpp"

namespace fosr {

/// Inverse gamma with shape/rate parameterisation: density ~ x^{-a-1} e^{-b/x}.
inline double sample_inverse_gamma(double shape, double rate, Rng& rng) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw DegenerateConditional("inverse-gamma conditional is improper");
    std::gamma_distribution<double> gamma(shape, 1.0 / rate);
    double g = 0.0;
    while (g <= 0.0) g = gamma(rng);
    return 1.0 / g;
}

/// Inverse Gaussian via the Michael-Schucany-Haas transformation. The root
/// is computed in a cancellation-free form so very large mean/shape ratios
/// (tiny |b| in the shrinkage update) stay strictly positive.
inline double sample_inverse_gaussian(double mean, double shape, Rng& rng) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    const double z = normal(rng);
    const double a = mean * z * z;
    if (a == 0.0) return mean;
    const double root = std::sqrt(a * (a + 4.0 * shape));
    // mean (root - a)/(root + a) rewritten without the subtraction
    const double x = 4.0 * mean * shape * a / ((root + a) * (root + a));
    if (unif(rng) <= mean / (mean + x)) return x;
    return mean * mean / x;
}

/// Gamma-ratio beta draw, clamped into the open interval so that downstream
/// Bernoulli weights and beta updates never see an exact 0 or 1 (gamma draws
/// with shape < 1 occasionally underflow to zero).
inline double sample_beta(double a, double b, Rng& rng) {
    std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
    double x = 0.0, y = 0.0;
    while (x <= 0.0 || y <= 0.0) {
        x = ga(rng);
        y = gb(rng);
    }
    const double r = x / (x + y);
    return std::min(std::max(r, 1e-300), 1.0 - 1e-16);
}

/// CDF on (0, psi) of the continuous Bernoulli density ~ theta^x (1-theta)^{1-x}.
inline double truncated_cb_cdf(double x, double theta, double psi) {
    if (x <= 0.0) return 0.0;
    if (x >= psi) return 1.0;
    const double c = std::log(theta / (1.0 - theta));
    if (std::abs(theta - 0.5) < 1e-6) return x / psi;  // uniform limit
    return std::expm1(c * x) / std::expm1(c * psi);
}

/// Inverse-CDF draw from the continuous Bernoulli truncated to (0, psi).
inline double sample_truncated_continuous_bernoulli(double theta, double psi, Rng& rng) {
    std::uniform_real_distribution<double> unif;
    const double u = unif(rng);
    if (std::abs(theta - 0.5) < 1e-6) return u * psi;
    const double c = std::log(theta / (1.0 - theta));
    return std::log1p(u * std::expm1(c * psi)) / c;
}

}  // namespace fosr
