// SPDX-License-Identifier: MIT
/**
 * @file nce2.hpp
 * @brief Consistency system for the running-profit (natural resource) problem.
 *
 * Each producer earns f(x) until it shuts down at the first time the price
 * falls to x*. Below x* the value is -K_bar2; above it
 * v(x) = A x^{k1} + p(x) where p is the resolvent of f. Value matching and
 * smooth fit at x* give A and theta_bar2 as functions of x*, and the
 * population consistency condition leaves one scalar equation in x*.
 */
#pragma once

#include <array>
#include <utility>
#include <vector>

#include "mfstop/market.hpp"

namespace mfstop {

enum class ProfitKind { affine, power };

/// f(x) = c0 + c1 x^gamma; gamma is fixed to 1 for the affine kind.
struct ProfitFunction {
    ProfitKind kind = ProfitKind::affine;
    double c0 = 0.0;
    double c1 = 1.0;
    double gamma = 1.0;

    double exponent() const noexcept { return kind == ProfitKind::affine ? 1.0 : gamma; }
    double operator()(double x) const;
};

void validate(const ProfitFunction& f);

/// p(x) = E int_0^inf e^{-beta t} f(x(t)) dt in closed form.
class Resolvent {
public:
    /// Throws ResolventDivergence when beta <= alpha g + sigma^2 g (g - 1) / 2.
    Resolvent(const ProfitFunction& f, const MarketParams& params);

    double value(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;

private:
    double c0_over_beta_;
    double c1_scaled_;
    double gamma_;
};

struct NceSolution2 {
    double coeff_A = 0.0;
    double x_star = 0.0;
    double theta_bar2 = 0.0;
    double k_bar2 = 0.0;
    std::array<double, 3> residuals{};
    bool no_stopping = false;
    double k1 = 0.0;
    /// Sign-change brackets of the reduced equation found on the scan grid.
    std::vector<std::pair<double, double>> brackets;
};

/// Reduced equation in x* alone after eliminating A and theta_bar2.
double scalar_equation_residual(double x_star, const ProfitFunction& f, const MarketParams& params);

/// Shut-down weight theta_bar2 = -K / (A x*^{k1} + p(x*)) implied by a threshold.
double implied_theta_bar2(double x_star, const ProfitFunction& f, const MarketParams& params);

/// Solves the consistency system by a 200-point log scan of (1e-4 x0, x0) and
/// bisection. Returns no_stopping when there is no admissible root and throws
/// MultipleRoots when there is more than one.
NceSolution2 solve_system2(const ProfitFunction& f, const MarketParams& params);

double value_function2(const NceSolution2& sol, const ProfitFunction& f,
                       const MarketParams& params, double x);

/// E int_0^{tau*} e^{-beta t} f(x(t)) dt for the solved rule.
double expected_running_profit(const NceSolution2& sol, const ProfitFunction& f,
                               const MarketParams& params);

}  // namespace mfstop
