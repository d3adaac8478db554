// SPDX-License-Identifier: MIT
/**
 * @file numerics.hpp
 * @brief Scalar numerical kernels: quadrature, bracketing, line search and
 *        Kolmogorov-Smirnov statistics.
 */
#pragma once

#include <functional>
#include <span>
#include <vector>

namespace mfstop {

struct Quadrature {
    double value;
    double error;  ///< estimated absolute error
};

/// Adaptive 15-point Gauss-Kronrod over (0, inf) after the map t = u / (1 - u).
/// The integrand is never evaluated at t = 0.
Quadrature integrate_half_line(const std::function<double(double)>& f, double tol = 1e-10);

/// Adaptive Gauss-Kronrod over a finite interval.
Quadrature integrate_interval(const std::function<double(double)>& f, double a, double b,
                              double tol = 1e-10);

/// Bisection on [lo, hi] where f(lo) and f(hi) differ in sign; stops when the
/// bracket width is below abs_tol. Returns the bracket midpoint.
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double abs_tol);

/// Golden-section search for the maximiser of a unimodal f on [lo, hi].
double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          double abs_tol);

double normal_cdf(double x) noexcept;

/// log of the standard normal upper tail 1 - Phi(x), accurate for large x.
double log_normal_sf(double x) noexcept;

/// sup_t |F_n(t) - F(t)| for a possibly defective sample (entries may be +inf).
/// `cdf(+inf)` must return the total mass of the model distribution.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov statistic. Infinite entries are allowed.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Asymptotic two-sample critical value at significance level `alpha`.
double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha);

/// Dvoretzky-Kiefer-Wolfowitz band half-width at confidence 1 - alpha.
double dkw_bound(std::size_t n, double alpha);

/// Evenly spaced points on a log scale, both endpoints included.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

}  // namespace mfstop
