// SPDX-License-Identifier: MIT
#include "mfstop/nce2.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfstop/errors.hpp"
#include "mfstop/fpt.hpp"
#include "mfstop/numerics.hpp"

namespace mfstop {

namespace {

constexpr std::size_t kScanPoints = 200;
constexpr double kScanLowFactor = 1e-4;

struct Threshold {
    double A;
    double theta_bar2;
    double denominator;  // p'(x*) x* - k1 p(x*)
};

Threshold at_threshold(double x_star, const Resolvent& p, double k1, double K) {
    const double px = p.value(x_star);
    const double dpx = p.derivative(x_star);
    const double denom = dpx * x_star - k1 * px;
    const double A = -dpx / (k1 * std::pow(x_star, k1 - 1.0));
    return {A, K * k1 / denom, denom};
}

double reduced_residual(double x_star, const Resolvent& p, const MarketParams& m, double k1) {
    const Threshold t = at_threshold(x_star, p, k1, m.K);
    if (t.denominator == 0.0)
        throw DomainError("scalar_equation_residual: k1 p(x*) - p'(x*) x* vanishes at x*=" +
                          std::to_string(x_star));
    const double rhs = (1.0 - m.theta) / (m.l2 * (t.theta_bar2 - m.theta));
    return (-(p.value(m.x0) + m.l1 / m.l2) + p.value(x_star) * std::pow(m.x0 / x_star, k1) + rhs) /
           std::pow(m.x0, k1);
}

}  // namespace

double ProfitFunction::operator()(double x) const { return c0 + c1 * std::pow(x, exponent()); }

void validate(const ProfitFunction& f) {
    if (!std::isfinite(f.c0)) throw ValidationError("c0", "must be finite");
    if (!std::isfinite(f.c1) || f.c1 < 0.0)
        throw ValidationError("c1", "must be >= 0 (profit must be nondecreasing)");
    if (f.kind == ProfitKind::power && !(f.gamma > 0.0))
        throw ValidationError("gamma", "must be > 0 for a power profit");
}

Resolvent::Resolvent(const ProfitFunction& f, const MarketParams& m) {
    validate(f);
    validate(m);
    gamma_ = f.exponent();
    const double denom =
        m.beta - m.alpha * gamma_ - 0.5 * m.sigma * m.sigma * gamma_ * (gamma_ - 1.0);
    if (f.c1 != 0.0 && !(denom > 0.0))
        throw ResolventDivergence("resolvent diverges: beta - alpha g - sigma^2 g(g-1)/2 = " +
                                  std::to_string(denom) + " <= 0");
    c0_over_beta_ = f.c0 / m.beta;
    c1_scaled_ = f.c1 == 0.0 ? 0.0 : f.c1 / denom;
}

double Resolvent::value(double x) const { return c0_over_beta_ + c1_scaled_ * std::pow(x, gamma_); }

double Resolvent::derivative(double x) const {
    return c1_scaled_ * gamma_ * std::pow(x, gamma_ - 1.0);
}

double Resolvent::second_derivative(double x) const {
    return c1_scaled_ * gamma_ * (gamma_ - 1.0) * std::pow(x, gamma_ - 2.0);
}

double scalar_equation_residual(double x_star, const ProfitFunction& f, const MarketParams& m) {
    const Resolvent p(f, m);
    if (!(x_star > 0.0 && x_star < m.x0))
        throw DomainError("scalar_equation_residual: x* must lie in (0, x0)");
    return reduced_residual(x_star, p, m, characteristic_roots(m).k1);
}

double implied_theta_bar2(double x_star, const ProfitFunction& f, const MarketParams& m) {
    const Resolvent p(f, m);
    const Threshold t = at_threshold(x_star, p, characteristic_roots(m).k1, m.K);
    if (t.denominator == 0.0) throw DomainError("implied_theta_bar2: vanishing denominator");
    return t.theta_bar2;
}

NceSolution2 solve_system2(const ProfitFunction& f, const MarketParams& m) {
    const Resolvent p(f, m);
    const double k1 = characteristic_roots(m).k1;
    const double floor = std::max(m.theta, 0.0);

    auto admissible = [&](double x, double& r) {
        const Threshold t = at_threshold(x, p, k1, m.K);
        if (t.denominator == 0.0 || !(t.theta_bar2 > floor)) return false;
        r = reduced_residual(x, p, m, k1);
        return std::isfinite(r);
    };

    // Scan points strictly inside (1e-4 x0, x0).
    std::vector<double> grid = log_grid(kScanLowFactor * m.x0, m.x0, kScanPoints + 1);
    grid.pop_back();

    NceSolution2 sol;
    sol.k1 = k1;
    std::vector<double> roots;
    double r_prev = 0.0;
    bool ok_prev = admissible(grid[0], r_prev);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        double r = 0.0;
        const bool ok = admissible(grid[i], r);
        if (ok && r == 0.0) {
            sol.brackets.emplace_back(grid[i], grid[i]);
            roots.push_back(grid[i]);
        } else if (ok && ok_prev && r_prev != 0.0 && (r_prev < 0.0) != (r < 0.0)) {
            sol.brackets.emplace_back(grid[i - 1], grid[i]);
            auto g = [&](double x) { return reduced_residual(x, p, m, k1); };
            roots.push_back(bisect_root(g, grid[i - 1], grid[i], 1e-15 * m.x0));
        }
        ok_prev = ok;
        r_prev = r;
    }

    if (roots.size() > 1) throw MultipleRoots(sol.brackets);

    if (roots.empty()) {
        sol.no_stopping = true;
        const double denom = m.l1 + m.l2 * p.value(m.x0);
        sol.theta_bar2 = m.theta + (1.0 - m.theta) / denom;
        sol.k_bar2 = m.K / sol.theta_bar2;
        return sol;
    }

    const double xs = roots.front();
    const Threshold t = at_threshold(xs, p, k1, m.K);
    sol.x_star = xs;
    sol.coeff_A = t.A;
    sol.theta_bar2 = -m.K / (t.A * std::pow(xs, k1) + p.value(xs));
    sol.k_bar2 = m.K / sol.theta_bar2;
    if (!(sol.theta_bar2 > floor) || !(sol.k_bar2 > 0.0))
        throw DomainError("solve_system2: root violates theta_bar2 > max(theta, 0)");
    sol.residuals[0] = t.A * std::pow(xs, k1) + p.value(xs) + sol.k_bar2;
    sol.residuals[1] = k1 * t.A * std::pow(xs, k1 - 1.0) + p.derivative(xs);
    sol.residuals[2] = t.A * std::pow(m.x0, k1) + p.value(m.x0) +
                       sol.k_bar2 * std::pow(xs / m.x0, -k1) -
                       ((1.0 - m.theta) / (sol.theta_bar2 - m.theta) - m.l1) / m.l2;
    return sol;
}

double value_function2(const NceSolution2& sol, const ProfitFunction& f, const MarketParams& m,
                       double x) {
    if (!(x > 0.0)) throw DomainError("value_function2: x must be > 0");
    const Resolvent p(f, m);
    if (sol.no_stopping) return p.value(x);
    if (x <= sol.x_star) return -sol.k_bar2;
    return sol.coeff_A * std::pow(x, sol.k1) + p.value(x);
}

double expected_running_profit(const NceSolution2& sol, const ProfitFunction& f,
                               const MarketParams& m) {
    const Resolvent p(f, m);
    if (sol.no_stopping) return p.value(m.x0);
    return sol.coeff_A * std::pow(m.x0, sol.k1) + p.value(m.x0) +
           sol.k_bar2 * std::pow(sol.x_star / m.x0, -sol.k1);
}

}  // namespace mfstop
