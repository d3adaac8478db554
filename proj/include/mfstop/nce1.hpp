// SPDX-License-Identifier: MIT
/**
 * @file nce1.hpp
 * @brief Consistency fixed point for the relative-performance selling problem.
 *
 * In the large-population limit each agent maximises
 * theta_bar * E[e^{-beta tau} (x(tau) - K_bar)] with K_bar = K / theta_bar,
 * whose solution is the up-crossing rule x >= x* = K_bar k2 / (k2 - 1).
 * theta_bar is pinned down by requiring that the population average of the
 * discounted stopped values generated by that rule reproduces theta_bar.
 */
#pragma once

#include "mfstop/fpt.hpp"
#include "mfstop/market.hpp"

namespace mfstop {

struct NceSolution1 {
    double theta_bar = 0.0;      ///< effective weight
    double k_bar = 0.0;          ///< adjusted fee K / theta_bar
    double x_star = 0.0;         ///< up-crossing threshold
    double value_coeff_A = 0.0;  ///< coefficient of x^{k1}; always zero
    double value_coeff_B = 0.0;  ///< coefficient of x^{k2} below x*
    double residual = 0.0;       ///< nce_lhs - nce_rhs at theta_bar
    double limit_payoff = 0.0;   ///< theta_bar * v(x0)
    double k2 = 0.0;
    bool closed_form = false;    ///< theta = 0, l1 = 0 path was used
    double crosscheck_rel_diff = 0.0;  ///< |closed form - bisection| / closed form
};

/// l2 theta_bar^{k2-1} (K k2/(k2-1))^{1-k2} x0^{k2} + l1
double nce_lhs(double theta_bar, const MarketParams& params);

/// (1 - theta) / (theta_bar - theta); requires theta_bar > theta.
double nce_rhs(double theta_bar, const MarketParams& params);

/// Root of nce_lhs = nce_rhs by bisection with geometric bracket expansion.
/// Exposed separately so the closed-form path can be cross-checked.
double bisect_theta_bar(const MarketParams& params);

/// Solves the consistency condition and fills the derived fields.
/// Throws InteriorStartViolation when x0 >= x*.
NceSolution1 solve_theta_bar(const MarketParams& params);

/// Value of the auxiliary stopping problem, v(x) = B x^{k2} below x* and x - K_bar above.
double value_function1(const NceSolution1& sol, double x);

/// First derivative of value_function1.
double value_function1_derivative(const NceSolution1& sol, double x);

/// Stop at the first t with x(t) >= threshold.
struct ThresholdRule {
    double threshold;
    Direction direction;
};

ThresholdRule stopping_rule1(const NceSolution1& sol);

/// Hitting law of the rule for an agent started at params.x0.
HittingLaw rule_law(const MarketParams& params, const ThresholdRule& rule);

}  // namespace mfstop
