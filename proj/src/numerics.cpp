// SPDX-License-Identifier: MIT
#include "mfstop/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "mfstop/errors.hpp"

namespace mfstop {

namespace {

constexpr unsigned kMaxDepth = 30;

}  // namespace

Quadrature integrate_half_line(const std::function<double(double)>& f, double tol) {
    double error = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, 0.0, std::numeric_limits<double>::infinity(), kMaxDepth, tol, &error);
    return {value, error};
}

Quadrature integrate_interval(const std::function<double(double)>& f, double a, double b,
                              double tol) {
    double error = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, kMaxDepth, tol, &error);
    return {value, error};
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double abs_tol) {
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0))
        throw BracketError("bisect_root: no sign change on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
    auto done = [abs_tol](double a, double b) { return std::fabs(b - a) <= abs_tol; };
    const auto [a, b] = boost::math::tools::bisect(f, lo, hi, done);
    return 0.5 * (a + b);
}

double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          double abs_tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > abs_tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_normal_sf(double x) noexcept {
    if (x < 25.0) return std::log(0.5 * std::erfc(x / std::numbers::sqrt2));
    // Asymptotic series of the Mills ratio.
    const double x2 = x * x;
    const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    return -0.5 * x2 - std::log(x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
    std::vector<double> xs;
    xs.reserve(samples.size());
    for (double s : samples)
        if (std::isfinite(s)) xs.push_back(s);
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    std::size_t i = 0;
    while (i < xs.size()) {
        std::size_t j = i;
        while (j < xs.size() && xs[j] == xs[i]) ++j;
        const double f = cdf(xs[i]);
        d = std::max({d, std::fabs(f - static_cast<double>(i) / n),
                      std::fabs(f - static_cast<double>(j) / n)});
        i = j;
    }
    const double mass = cdf(std::numeric_limits<double>::infinity());
    d = std::max(d, std::fabs(mass - static_cast<double>(xs.size()) / n));
    return std::min(d, 1.0);
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(x.size());
    const double m = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double t = std::min(x[i], y[j]);
        if (!std::isfinite(t)) break;
        while (i < x.size() && x[i] == t) ++i;
        while (j < y.size() && y[j] == t) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    // Remaining finite points of the longer-running sample.
    while (i < x.size() && std::isfinite(x[i])) {
        ++i;
        d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    while (j < y.size() && std::isfinite(y[j])) {
        ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return d;
}

double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    const double nd = static_cast<double>(n), md = static_cast<double>(m);
    return c * std::sqrt((nd + md) / (nd * md));
}

double dkw_bound(std::size_t n, double alpha) {
    return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    if (n == 1) {
        g[0] = lo;
        return g;
    }
    const double llo = std::log(lo), lhi = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

}  // namespace mfstop
