// SPDX-License-Identifier: MIT
/**
 * @file inverse_design.hpp
 * @brief Choosing the transaction fee K so that the population's stopping
 * law meets a statistical target.
 *
 * The design context fixes theta = 0, l1 = 0, l2 = 1. The stopping time is
 * then inverse Gaussian with a' = sigma/2 - alpha/sigma and
 * b' = ln(K k2/(k2-1)) / (k2 sigma), independent of x0. Feasible fees satisfy
 * K > k_min = (k2-1)/k2.
 */
#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "mfstop/fpt.hpp"
#include "mfstop/market.hpp"

namespace mfstop {

struct DesignContext {
    MarketParams params;
    CharacteristicRoots roots{};
    double a_prime = 0.0;
    double k2 = 0.0;
    double sigma = 0.0;
    double k_min = 0.0;
    double k_max = 0.0;  ///< k_min e^{log_span}
};

/// Throws ValidationError unless theta = 0, l1 = 0, l2 = 1 and a' < 0.
DesignContext make_design_context(const MarketParams& params, double log_span = 50.0);

/// Throws FeasibilityError when K <= k_min.
HittingLaw law_from_fee(const DesignContext& ctx, double K);

/// Inverse of law_from_fee in the b' coordinate.
double fee_from_b_prime(const DesignContext& ctx, double b_prime);

double fee_for_target_mean(const DesignContext& ctx, double mu0);
double fee_for_target_variance(const DesignContext& ctx, double kappa0);

/// E (tau - t0)^2 in closed form.
double l2_deviation(const DesignContext& ctx, double K, double t0);

/// Minimiser of l2_deviation; k_min when t0 <= 1/(2 a'^2).
double fee_for_l2(const DesignContext& ctx, double t0);

enum class UtilityKind { linear, power };

struct MixedObjectiveSpec {
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    double t0 = 0.0;
    UtilityKind utility = UtilityKind::linear;
    double rho = 0.5;  ///< power utility K^rho / rho
};

void validate(const MixedObjectiveSpec& spec);

double utility(const MixedObjectiveSpec& spec, double K);

/// gamma1 E(tau - t0)^2 - gamma2 U(K) k_min / K.
double mixed_objective(const DesignContext& ctx, const MixedObjectiveSpec& spec, double K);

/// K dGamma/dK, the derivative in ln K. Same sign as dGamma/dK.
double mixed_objective_log_slope(const DesignContext& ctx, const MixedObjectiveSpec& spec, double K);

struct MixedSolution {
    double k_opt = 0.0;
    double objective = 0.0;
    bool at_boundary = false;
    std::size_t sign_changes = 0;  ///< of the log slope on the scan grid
    // Quantities of the closed-form case analysis, reported for comparison only.
    double theta_constant = 0.0;   ///< gamma1 (2 t0/(k2 sigma a') - 1/(k2 sigma a'^3))
    double delta1 = std::numeric_limits<double>::quiet_NaN();
    double delta2 = std::numeric_limits<double>::quiet_NaN();
    double theta_at_delta1 = std::numeric_limits<double>::quiet_NaN();
    double case_gate = std::numeric_limits<double>::quiet_NaN();
};

/// Linear utility reduces to fee_for_l2. Power utility scans the log slope
/// on 2000 points of ln(K/k_min) in [0, ln(k_max/k_min)], bisects each
/// sign change and compares local minima with the boundary. Throws
/// UnboundedBelow when the slope is still negative at k_max.
MixedSolution solve_mixed(const DesignContext& ctx, const MixedObjectiveSpec& spec);

/// Theta(K) of the power-utility first-order condition.
double theta_function(const DesignContext& ctx, const MixedObjectiveSpec& spec, double K);

enum class TargetFamily { inverse_gaussian, lognormal, gamma };

/// inverse_gaussian: (mean, shape); lognormal: (mean of log, sd of log);
/// gamma: (shape, scale).
struct TargetDensity {
    TargetFamily family = TargetFamily::inverse_gaussian;
    double p1 = 1.0;
    double p2 = 1.0;

    double log_pdf(double t) const;
    double pdf(double t) const;
};

void validate(const TargetDensity& target);

std::string family_name(TargetFamily family);

/// Log-density of the design law at fee K.
double design_log_pdf(const DesignContext& ctx, double K, double t);

/// Expectations under the target that determine D(p || q_K) for every K.
struct TargetMoments {
    double entropy = 0.0;
    double mean = 0.0;
    double mean_inverse = 0.0;  ///< infinite for gamma shape <= 1
    double mean_log = 0.0;
};

TargetMoments target_moments(const TargetDensity& target);

/// D(p || q_K); infinite when E[1/t] diverges under the target.
double kl_divergence(const DesignContext& ctx, double K, const TargetMoments& moments);
double kl_divergence(const DesignContext& ctx, double K, const TargetDensity& target);

struct SampleDivergence {
    double risk = 0.0;               ///< -(1/n) sum ln q_K(t_i)
    double entropy_estimate = 0.0;   ///< nearest-neighbour estimate of the target entropy
    double divergence = 0.0;         ///< max(0, risk - entropy_estimate)
};

/// Throws DomainError on non-positive samples.
SampleDivergence kl_divergence(const DesignContext& ctx, double K, const std::vector<double>& samples);

/// Kozachenko-Leonenko one-nearest-neighbour entropy estimate in one dimension.
double entropy_estimate(std::vector<double> samples);

struct KlFitResult {
    double k_hat = 0.0;
    double b_prime = 0.0;
    double divergence = 0.0;
    double risk = 0.0;
    double l1_bound = 0.0;  ///< 2 sqrt(1 - e^{-divergence})
    /// Sign changes of the score in b' on a 2000-point grid (1 means unimodal).
    std::size_t score_sign_changes = 0;
};

/// Maximum likelihood fee by golden-section search in b' on (0, b_max].
/// Throws DegenerateSample when two or more samples are all equal.
KlFitResult fit_fee_mle(const DesignContext& ctx, const std::vector<double>& samples);

/// Minimiser of D(p || q_K) for a density target.
KlFitResult fit_fee_kl(const DesignContext& ctx, const TargetDensity& target);

struct BhCheck {
    double l1_distance = 0.0;
    double divergence = 0.0;
    double bound = 0.0;        ///< 2 sqrt(1 - e^{-D})
    double chain_bound = 0.0;  ///< sqrt(2 D)
    bool holds = false;
    bool chain_holds = false;
};

BhCheck bh_bound_check(const DesignContext& ctx, double K, const TargetDensity& target);

}  // namespace mfstop
