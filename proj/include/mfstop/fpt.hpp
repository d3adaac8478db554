// SPDX-License-Identifier: MIT
/**
 * @file fpt.hpp
 * @brief Closed-form analytics for GBM stopping at a constant threshold.
 *
 * Stopping a GBM at a level x* is the first passage of a standard Brownian
 * motion W over the line a' t + b'. The passage time is inverse Gaussian
 * when a' < 0 and defective (P(tau = inf) > 0) when a' > 0.
 */
#pragma once

#include "mfstop/market.hpp"
#include "mfstop/rng.hpp"

namespace mfstop {

/// Roots of sigma^2/2 k^2 + (alpha - sigma^2/2) k - beta = 0, k1 < 0 and k2 > 1.
struct CharacteristicRoots {
    double k1;
    double k2;
};

CharacteristicRoots characteristic_roots(const MarketParams& params);

/// Roots of lambda^2 - 2 a' lambda - 2 s = 0.
struct LambdaRoots {
    double minus;
    double plus;
};

LambdaRoots lambda_roots(double a_prime, double s);

/// tau = inf{t : W(t) >= a' t + b'}.
struct HittingLaw {
    double a_prime = 0.0;
    double b_prime = 0.0;

    /// P(tau < inf): 1 when a' <= 0, exp(-2 a' b') otherwise.
    double hit_prob() const noexcept;
};

/// Inverse Gaussian law IG(mu, rho): mean mu, shape rho.
struct IgParams {
    double mu;
    double rho;
};

enum class Direction { up, down };

/// Law of the first time the GBM started at params.x0 reaches x_star.
/// `down` returns the reflected problem so that E e^{-beta tau} = (x*/x0)^{-k1}.
HittingLaw hitting_law_from_threshold(const MarketParams& params, double x_star,
                                      Direction direction);

/// E e^{-s tau}, s > 0. Paths that never hit contribute zero.
double discounted_factor(const HittingLaw& law, double s);

/// E e^{t tau} for t <= a'^2 / 2. For t > 0 the law must be proper.
double mgf(const HittingLaw& law, double t);

/// Mean and variance of a proper law (a' < 0).
double tau_mean(const HittingLaw& law);
double tau_var(const HittingLaw& law);

/// (mu, rho) = (b' / -a', b'^2); requires a' < 0 and b' > 0.
IgParams ig_params(const HittingLaw& law);

double ig_pdf(const IgParams& p, double t);
double ig_log_pdf(const IgParams& p, double t);
double ig_cdf(const IgParams& p, double t);

/// Density of tau on (0, inf); integrates to hit_prob().
double hitting_pdf(const HittingLaw& law, double t);

/// P(tau <= t) including the defective case; hitting_cdf(law, inf) == hit_prob().
double hitting_cdf(const HittingLaw& law, double t);

/// Michael-Schucany-Haas draw from IG(mu, rho): one normal and one uniform.
double sample_ig(const IgParams& p, Stream& rng);

/// Exact draw of tau; returns +inf for paths that never hit.
double sample_tau(const HittingLaw& law, Stream& rng);

}  // namespace mfstop
