// SPDX-License-Identifier: MIT
#include "mfstop/fpt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mfstop/errors.hpp"
#include "mfstop/numerics.hpp"

namespace mfstop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_nonnegative_intercept(const HittingLaw& law) {
    if (!(law.b_prime >= 0.0))
        throw DomainError("hitting law intercept b' must be >= 0, got " +
                          std::to_string(law.b_prime));
}

}  // namespace

CharacteristicRoots characteristic_roots(const MarketParams& params) {
    validate(params);
    const double s2 = params.sigma * params.sigma;
    const double a = 0.5 * s2;
    const double b = params.alpha - 0.5 * s2;
    const double c = -params.beta;
    const double disc = b * b - 4.0 * a * c;
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b == 0.0 ? 1.0 : b));
    const double r1 = q / a;
    const double r2 = c / q;
    return {std::min(r1, r2), std::max(r1, r2)};
}

LambdaRoots lambda_roots(double a_prime, double s) {
    const double disc = a_prime * a_prime + 2.0 * s;
    if (disc < 0.0)
        throw DomainError("lambda_roots: a'^2 + 2s < 0 (a'=" + std::to_string(a_prime) +
                          ", s=" + std::to_string(s) + ")");
    const double root = std::sqrt(disc);
    return {a_prime - root, a_prime + root};
}

double HittingLaw::hit_prob() const noexcept {
    if (a_prime <= 0.0 || b_prime == 0.0) return 1.0;
    return std::exp(-2.0 * a_prime * b_prime);
}

HittingLaw hitting_law_from_threshold(const MarketParams& params, double x_star,
                                      Direction direction) {
    validate(params);
    if (!(x_star > 0.0) || !std::isfinite(x_star))
        throw DomainError("threshold must be a positive finite price");
    const double slope = 0.5 * params.sigma - params.alpha / params.sigma;
    if (direction == Direction::up) {
        if (params.x0 > x_star)
            throw DomainError("up-crossing rule requires x0 <= x* (x0=" +
                              std::to_string(params.x0) + ", x*=" + std::to_string(x_star) + ")");
        return {slope, std::log(x_star / params.x0) / params.sigma};
    }
    if (params.x0 < x_star)
        throw DomainError("down-crossing rule requires x0 >= x* (x0=" +
                          std::to_string(params.x0) + ", x*=" + std::to_string(x_star) + ")");
    return {-slope, std::log(params.x0 / x_star) / params.sigma};
}

double discounted_factor(const HittingLaw& law, double s) {
    require_nonnegative_intercept(law);
    if (!(s > 0.0)) throw DomainError("discount rate must be > 0");
    if (law.b_prime == 0.0) return 1.0;
    return std::exp(-lambda_roots(law.a_prime, s).plus * law.b_prime);
}

double mgf(const HittingLaw& law, double t) {
    require_nonnegative_intercept(law);
    const double a = law.a_prime;
    if (t > 0.5 * a * a)
        throw DomainError("mgf: t=" + std::to_string(t) + " exceeds a'^2/2=" +
                          std::to_string(0.5 * a * a));
    if (t > 0.0 && a >= 0.0) throw DomainError("mgf: t > 0 requires a proper law (a' < 0)");
    if (law.b_prime == 0.0) return 1.0;
    const double lambda = a + std::sqrt(a * a - 2.0 * t);
    return std::exp(-lambda * law.b_prime);
}

double tau_mean(const HittingLaw& law) {
    require_nonnegative_intercept(law);
    if (law.a_prime >= 0.0) throw DomainError("tau_mean: infinite mean for a' >= 0");
    return law.b_prime / (-law.a_prime);
}

double tau_var(const HittingLaw& law) {
    require_nonnegative_intercept(law);
    if (law.a_prime >= 0.0) throw DomainError("tau_var: infinite variance for a' >= 0");
    const double na = -law.a_prime;
    return law.b_prime / (na * na * na);
}

IgParams ig_params(const HittingLaw& law) {
    if (law.a_prime >= 0.0)
        throw DomainError("ig_params: law is defective or heavy-tailed (a' >= 0)");
    if (!(law.b_prime > 0.0)) throw DomainError("ig_params: b' must be > 0");
    return {law.b_prime / (-law.a_prime), law.b_prime * law.b_prime};
}

double ig_log_pdf(const IgParams& p, double t) {
    if (!(t > 0.0)) throw DomainError("ig_pdf: t must be > 0");
    const double d = t - p.mu;
    return 0.5 * (std::log(p.rho) - std::log(2.0 * std::numbers::pi) - 3.0 * std::log(t)) -
           p.rho * d * d / (2.0 * p.mu * p.mu * t);
}

double ig_pdf(const IgParams& p, double t) { return std::exp(ig_log_pdf(p, t)); }

double hitting_cdf(const HittingLaw& law, double t) {
    require_nonnegative_intercept(law);
    if (t < 0.0) return 0.0;
    if (law.b_prime == 0.0) return 1.0;
    if (t == 0.0) return 0.0;
    if (std::isinf(t)) return law.hit_prob();
    const double a = law.a_prime, b = law.b_prime;
    const double st = std::sqrt(t);
    // P(tau <= t) = Phi(-(b + a t)/sqrt t) + e^{-2ab} Phi(-(b - a t)/sqrt t)
    const double first = normal_cdf(-(b + a * t) / st);
    const double second = std::exp(-2.0 * a * b + log_normal_sf((b - a * t) / st));
    return std::min(1.0, first + second);
}

double hitting_pdf(const HittingLaw& law, double t) {
    require_nonnegative_intercept(law);
    if (!(t > 0.0) || std::isinf(t) || law.b_prime == 0.0) return 0.0;
    const double a = law.a_prime, b = law.b_prime;
    const double z = b + a * t;
    return b / std::sqrt(2.0 * std::numbers::pi * t * t * t) * std::exp(-z * z / (2.0 * t));
}

double ig_cdf(const IgParams& p, double t) {
    const double b = std::sqrt(p.rho);
    return hitting_cdf(HittingLaw{-b / p.mu, b}, t);
}

double sample_ig(const IgParams& p, Stream& rng) {
    const double nu = rng.normal();
    const double r = p.mu * nu * nu / (2.0 * p.rho);
    // Smaller root of the MSH quadratic, written without cancellation.
    const double x = p.mu / (1.0 + r + std::sqrt(r * (r + 2.0)));
    const double u = rng.uniform();
    return u <= p.mu / (p.mu + x) ? x : p.mu * p.mu / x;
}

double sample_tau(const HittingLaw& law, Stream& rng) {
    require_nonnegative_intercept(law);
    const double a = law.a_prime, b = law.b_prime;
    if (b == 0.0) return 0.0;
    if (a < 0.0) return sample_ig({b / -a, b * b}, rng);
    if (a > 0.0) {
        if (rng.uniform() >= law.hit_prob()) return kInf;
        return sample_ig({b / a, b * b}, rng);
    }
    const double z = rng.normal();
    return (b / z) * (b / z);
}

}  // namespace mfstop
