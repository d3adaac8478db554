// SPDX-License-Identifier: MIT
#include "mfstop/nce1.hpp"

#include <cmath>
#include <string>

#include "mfstop/errors.hpp"
#include "mfstop/numerics.hpp"

namespace mfstop {

namespace {

constexpr double kBracketEps = 1e-12;
constexpr double kThetaTol = 1e-12;
constexpr int kMaxDoublings = 200;

double fee_factor(double K, double k2) { return K * k2 / (k2 - 1.0); }

void fill_derived(NceSolution1& sol, const MarketParams& p, double k2) {
    sol.k2 = k2;
    sol.k_bar = p.K / sol.theta_bar;
    sol.x_star = sol.k_bar * k2 / (k2 - 1.0);
    sol.value_coeff_A = 0.0;
    sol.value_coeff_B = 1.0 / (k2 * std::pow(sol.x_star, k2 - 1.0));
}

}  // namespace

double nce_lhs(double theta_bar, const MarketParams& p) {
    const double k2 = characteristic_roots(p).k2;
    return p.l2 * std::pow(theta_bar, k2 - 1.0) * std::pow(fee_factor(p.K, k2), 1.0 - k2) *
               std::pow(p.x0, k2) +
           p.l1;
}

double nce_rhs(double theta_bar, const MarketParams& p) {
    validate(p);
    if (!(theta_bar > p.theta))
        throw DomainError("nce_rhs: theta_bar must exceed theta (theta_bar=" +
                          std::to_string(theta_bar) + ", theta=" + std::to_string(p.theta) + ")");
    return (1.0 - p.theta) / (theta_bar - p.theta);
}

double bisect_theta_bar(const MarketParams& p) {
    validate(p);
    if (p.theta == 1.0) return 1.0;
    const double k2 = characteristic_roots(p).k2;
    const double scale = p.l2 * std::pow(fee_factor(p.K, k2), 1.0 - k2) * std::pow(p.x0, k2);
    auto gap = [&](double tb) {
        return scale * std::pow(tb, k2 - 1.0) + p.l1 - (1.0 - p.theta) / (tb - p.theta);
    };
    const double lo = p.theta + kBracketEps;
    double hi = p.theta + 1.0;
    int doublings = 0;
    while (gap(hi) <= 0.0) {
        hi = p.theta + 2.0 * (hi - p.theta);
        if (++doublings > kMaxDoublings || !std::isfinite(hi))
            throw BracketError("solve_theta_bar: no sign change found while expanding the bracket");
    }
    if (gap(lo) >= 0.0)
        throw BracketError("solve_theta_bar: consistency gap is not negative at theta+");
    return bisect_root(gap, lo, hi, kThetaTol);
}

NceSolution1 solve_theta_bar(const MarketParams& p) {
    validate(p);
    const double k2 = characteristic_roots(p).k2;
    NceSolution1 sol;
    if (p.theta == 1.0) {
        sol.theta_bar = 1.0;
    } else if (p.theta == 0.0 && p.l1 == 0.0) {
        sol.theta_bar = std::pow(fee_factor(p.K, k2), (k2 - 1.0) / k2) /
                        (p.x0 * std::pow(p.l2, 1.0 / k2));
        sol.closed_form = true;
        sol.crosscheck_rel_diff =
            std::fabs(sol.theta_bar - bisect_theta_bar(p)) / sol.theta_bar;
    } else {
        sol.theta_bar = bisect_theta_bar(p);
    }
    // Denominator l1 + l2 E[e^{-beta tau} x(tau)] of the effective weight.
    if (p.theta < 1.0 && !((1.0 - p.theta) / (sol.theta_bar - p.theta) > 0.0))
        throw DomainError("solve_theta_bar: non-positive mean-field denominator");
    fill_derived(sol, p, k2);
    if (p.x0 >= sol.x_star) throw InteriorStartViolation(p.x0, sol.x_star);
    sol.residual = p.theta == 1.0 ? 0.0 : nce_lhs(sol.theta_bar, p) - nce_rhs(sol.theta_bar, p);
    sol.limit_payoff = sol.theta_bar * value_function1(sol, p.x0);
    return sol;
}

double value_function1(const NceSolution1& sol, double x) {
    if (!(x > 0.0)) throw DomainError("value_function1: x must be > 0");
    if (x >= sol.x_star) return x - sol.k_bar;
    return sol.value_coeff_B * std::pow(x, sol.k2);
}

double value_function1_derivative(const NceSolution1& sol, double x) {
    if (!(x > 0.0)) throw DomainError("value_function1: x must be > 0");
    if (x >= sol.x_star) return 1.0;
    return sol.value_coeff_B * sol.k2 * std::pow(x, sol.k2 - 1.0);
}

ThresholdRule stopping_rule1(const NceSolution1& sol) { return {sol.x_star, Direction::up}; }

HittingLaw rule_law(const MarketParams& params, const ThresholdRule& rule) {
    return hitting_law_from_threshold(params, rule.threshold, rule.direction);
}

}  // namespace mfstop
