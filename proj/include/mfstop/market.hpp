// SPDX-License-Identifier: MIT
/**
 * @file market.hpp
 * @brief Homogeneous agent coefficients shared by every solver.
 *
 * Each agent holds an asset following dx = alpha x dt + sigma x dW, discounts
 * at rate beta and pays the fee K when it stops. theta, l1 and l2 shape the
 * relative-performance payoff.
 */
#pragma once

namespace mfstop {

struct MarketParams {
    double alpha = 0.0;  ///< drift rate
    double sigma = 1.0;  ///< volatility
    double beta = 1.0;   ///< discount rate
    double x0 = 1.0;     ///< initial state
    double K = 1.0;      ///< transaction fee
    double theta = 0.0;  ///< convex weight in [0, 1]
    double l1 = 0.0;     ///< affine tax basis
    double l2 = 1.0;     ///< tax slope
};

/// Throws ValidationError naming the first offending field.
/// Enforces sigma, x0, K, beta, l2 > 0, l1 >= 0, theta in [0, 1] and beta > alpha.
void validate(const MarketParams& params);

}  // namespace mfstop
