// SPDX-License-Identifier: MIT
#include "mfstop/inverse_design.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/digamma.hpp>

#include "mfstop/errors.hpp"
#include "mfstop/numerics.hpp"

namespace mfstop {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kScanPoints = 2000;
constexpr double kBTol = 1e-10;
constexpr double kBFloor = 1e-12;

double log_ratio(const DesignContext& ctx, double K) {
    if (!(K > ctx.k_min) || !std::isfinite(K))
        throw FeasibilityError("fee K=" + std::to_string(K) + " must exceed k_min=" +
                               std::to_string(ctx.k_min) + " (otherwise stopping is immediate)");
    return std::log(K / ctx.k_min);
}

double b_max(const DesignContext& ctx) { return std::log(ctx.k_max / ctx.k_min) / (ctx.k2 * ctx.sigma); }

double mean_inverse(const std::vector<double>& samples) {
    double h = 0.0;
    for (double t : samples) h += 1.0 / t;
    return h / static_cast<double>(samples.size());
}

void check_samples(const std::vector<double>& samples) {
    if (samples.empty()) throw DomainError("sample set is empty");
    for (double t : samples)
        if (!(t > 0.0) || !std::isfinite(t))
            throw DomainError("samples must be finite and > 0, got " + std::to_string(t));
}

double mean_log_likelihood(const DesignContext& ctx, double b, const std::vector<double>& samples) {
    const IgParams p = ig_params(HittingLaw{ctx.a_prime, b});
    double s = 0.0;
    for (double t : samples) s += ig_log_pdf(p, t);
    return s / static_cast<double>(samples.size());
}

}  // namespace

DesignContext make_design_context(const MarketParams& params, double log_span) {
    validate(params);
    if (params.theta != 0.0) throw ValidationError("theta", "fee design requires theta = 0");
    if (params.l1 != 0.0) throw ValidationError("l1", "fee design requires l1 = 0");
    if (params.l2 != 1.0) throw ValidationError("l2", "fee design requires l2 = 1");
    if (!(log_span > 0.0) || !std::isfinite(log_span))
        throw ValidationError("k_max", "log span above k_min must be finite and > 0");
    DesignContext ctx;
    ctx.params = params;
    ctx.roots = characteristic_roots(params);
    ctx.sigma = params.sigma;
    ctx.a_prime = params.sigma / 2.0 - params.alpha / params.sigma;
    if (!(ctx.a_prime < 0.0))
        throw ValidationError("alpha", "fee design needs a proper stopping law: sigma^2/2 < alpha, "
                                       "got a'=" + std::to_string(ctx.a_prime));
    ctx.k2 = ctx.roots.k2;
    ctx.k_min = (ctx.k2 - 1.0) / ctx.k2;
    ctx.k_max = ctx.k_min * std::exp(log_span);
    return ctx;
}

HittingLaw law_from_fee(const DesignContext& ctx, double K) {
    return HittingLaw{ctx.a_prime, log_ratio(ctx, K) / (ctx.k2 * ctx.sigma)};
}

double fee_from_b_prime(const DesignContext& ctx, double b_prime) {
    return ctx.k_min * std::exp(b_prime * ctx.k2 * ctx.sigma);
}

double fee_for_target_mean(const DesignContext& ctx, double mu0) {
    if (!(mu0 > 0.0) || !std::isfinite(mu0))
        throw FeasibilityError("target mean must be finite and > 0");
    return ctx.k_min * std::exp(-ctx.a_prime * mu0 * ctx.k2 * ctx.sigma);
}

double fee_for_target_variance(const DesignContext& ctx, double kappa0) {
    if (!(kappa0 > 0.0) || !std::isfinite(kappa0))
        throw FeasibilityError("target variance must be finite and > 0");
    const double a = ctx.a_prime;
    return ctx.k_min * std::exp(-a * a * a * kappa0 * ctx.k2 * ctx.sigma);
}

double l2_deviation(const DesignContext& ctx, double K, double t0) {
    const double l = log_ratio(ctx, K);
    const double c = ctx.k2 * ctx.sigma * ctx.a_prime;
    const double a3 = ctx.a_prime * ctx.a_prime * ctx.a_prime;
    const double linear = 2.0 * t0 / c - 1.0 / (ctx.k2 * ctx.sigma * a3);
    return l * l / (c * c) + linear * l + t0 * t0;
}

double fee_for_l2(const DesignContext& ctx, double t0) {
    if (!(t0 >= 0.0) || !std::isfinite(t0)) throw FeasibilityError("target time must be >= 0");
    const double a = ctx.a_prime;
    if (!(t0 > 1.0 / (2.0 * a * a))) return ctx.k_min;
    return ctx.k_min * std::exp(0.5 * ctx.k2 * ctx.sigma * (1.0 / a - 2.0 * t0 * a));
}

void validate(const MixedObjectiveSpec& s) {
    if (!(s.gamma1 > 0.0) || !std::isfinite(s.gamma1)) throw ValidationError("gamma1", "must be > 0");
    if (!(s.gamma2 > 0.0) || !std::isfinite(s.gamma2)) throw ValidationError("gamma2", "must be > 0");
    if (!(s.t0 >= 0.0) || !std::isfinite(s.t0)) throw ValidationError("t0", "must be >= 0");
    if (s.utility == UtilityKind::power && !(s.rho > 0.0 && s.rho < 1.0))
        throw ValidationError("rho", "must lie in (0, 1)");
}

double utility(const MixedObjectiveSpec& s, double K) {
    return s.utility == UtilityKind::linear ? K : std::pow(K, s.rho) / s.rho;
}

double mixed_objective(const DesignContext& ctx, const MixedObjectiveSpec& s, double K) {
    return s.gamma1 * l2_deviation(ctx, K, s.t0) - s.gamma2 * utility(s, K) / K * ctx.k_min;
}

double mixed_objective_log_slope(const DesignContext& ctx, const MixedObjectiveSpec& s, double K) {
    const double l = log_ratio(ctx, K);
    const double c = ctx.k2 * ctx.sigma * ctx.a_prime;
    const double a3 = ctx.a_prime * ctx.a_prime * ctx.a_prime;
    const double linear = 2.0 * s.t0 / c - 1.0 / (ctx.k2 * ctx.sigma * a3);
    // d/dlnK of U(K)/K is (U'(K) - U(K)/K).
    const double du = s.utility == UtilityKind::linear
                          ? 0.0
                          : (std::pow(K, s.rho - 1.0) - std::pow(K, s.rho - 1.0) / s.rho);
    return s.gamma1 * (2.0 * l / (c * c) + linear) - s.gamma2 * ctx.k_min * du;
}

double theta_function(const DesignContext& ctx, const MixedObjectiveSpec& s, double K) {
    const double c = ctx.k2 * ctx.sigma * ctx.a_prime;
    return -s.gamma2 * (1.0 - 1.0 / s.rho) * ctx.k_min * std::pow(K, s.rho - 1.0) +
           2.0 * s.gamma1 / (c * c) * std::log(K / ctx.k_min);
}

MixedSolution solve_mixed(const DesignContext& ctx, const MixedObjectiveSpec& s) {
    validate(s);
    MixedSolution sol;
    const double c = ctx.k2 * ctx.sigma * ctx.a_prime;
    const double a3 = ctx.a_prime * ctx.a_prime * ctx.a_prime;
    sol.theta_constant = s.gamma1 * (2.0 * s.t0 / c - 1.0 / (ctx.k2 * ctx.sigma * a3));

    if (s.utility == UtilityKind::linear) {
        sol.k_opt = fee_for_l2(ctx, s.t0);
        sol.at_boundary = sol.k_opt == ctx.k_min;
        sol.objective = sol.at_boundary ? s.gamma1 * s.t0 * s.t0 - s.gamma2 * ctx.k_min
                                        : mixed_objective(ctx, s, sol.k_opt);
        return sol;
    }

    const double rho = s.rho;
    const double base = 2.0 * s.gamma1 / s.gamma2 / (c * c) * rho / ((1.0 - rho) * (1.0 - rho));
    sol.delta1 = std::pow(base, 1.0 / (2.0 - rho));
    sol.case_gate = std::pow(base * ctx.k2 / (ctx.k2 - 1.0), 1.0 / (1.0 - rho));
    sol.delta2 = sol.theta_constant + s.gamma2 * (1.0 / rho - 1.0) * std::pow(ctx.k_min, rho);
    if (sol.delta1 > ctx.k_min) sol.theta_at_delta1 = theta_function(ctx, s, sol.delta1);

    // Work in L = ln(K/k_min) so that L = 0 is the boundary.
    const double span = std::log(ctx.k_max / ctx.k_min);
    auto fee = [&](double L) { return ctx.k_min * std::exp(L); };
    auto slope = [&](double L) {
        // Limit of the slope at the boundary is finite; evaluate it directly there.
        const double K = fee(L);
        const double l = L;
        const double linear = sol.theta_constant / s.gamma1;
        const double du = std::pow(K, rho - 1.0) - std::pow(K, rho - 1.0) / rho;
        return s.gamma1 * (2.0 * l / (c * c) + linear) - s.gamma2 * ctx.k_min * du;
    };
    auto objective = [&](double L) {
        const double K = fee(L);
        const double linear = sol.theta_constant / s.gamma1;
        return s.gamma1 * (L * L / (c * c) + linear * L + s.t0 * s.t0) -
               s.gamma2 * std::pow(K, rho - 1.0) / rho * ctx.k_min;
    };

    if (slope(span) < 0.0) throw UnboundedBelow(ctx.k_max);

    double best_L = 0.0;
    double best = objective(0.0);
    double prev_L = 0.0;
    double prev = slope(0.0);
    for (std::size_t i = 1; i < kScanPoints; ++i) {
        const double L = span * static_cast<double>(i) / static_cast<double>(kScanPoints - 1);
        const double g = slope(L);
        if ((prev < 0.0) != (g < 0.0)) {
            ++sol.sign_changes;
            if (prev < 0.0) {
                const double root = bisect_root(slope, prev_L, L, 1e-14 * std::max(1.0, L));
                const double val = objective(root);
                if (val < best) {
                    best = val;
                    best_L = root;
                }
            }
        }
        prev = g;
        prev_L = L;
    }
    sol.at_boundary = best_L == 0.0;
    sol.k_opt = fee(best_L);
    sol.objective = best;
    return sol;
}

double TargetDensity::log_pdf(double t) const {
    if (!(t > 0.0)) return -std::numeric_limits<double>::infinity();
    switch (family) {
        case TargetFamily::inverse_gaussian:
            return ig_log_pdf(IgParams{p1, p2}, t);
        case TargetFamily::lognormal: {
            const double z = (std::log(t) - p1) / p2;
            return -std::log(t * p2) - 0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * z * z;
        }
        case TargetFamily::gamma:
            return (p1 - 1.0) * std::log(t) - t / p2 - std::lgamma(p1) - p1 * std::log(p2);
    }
    return kNaN;
}

double TargetDensity::pdf(double t) const { return std::exp(log_pdf(t)); }

void validate(const TargetDensity& d) {
    switch (d.family) {
        case TargetFamily::inverse_gaussian:
            if (!(d.p1 > 0.0) || !(d.p2 > 0.0))
                throw ValidationError("target", "inverse_gaussian needs mean > 0 and shape > 0");
            break;
        case TargetFamily::lognormal:
            if (!std::isfinite(d.p1) || !(d.p2 > 0.0))
                throw ValidationError("target", "lognormal needs finite mu and sigma > 0");
            break;
        case TargetFamily::gamma:
            if (!(d.p1 > 0.0) || !(d.p2 > 0.0))
                throw ValidationError("target", "gamma needs shape > 0 and scale > 0");
            break;
    }
    if (!std::isfinite(d.p1) || !std::isfinite(d.p2))
        throw ValidationError("target", "parameters must be finite");
}

std::string family_name(TargetFamily f) {
    switch (f) {
        case TargetFamily::inverse_gaussian: return "inverse_gaussian";
        case TargetFamily::lognormal: return "lognormal";
        case TargetFamily::gamma: return "gamma";
    }
    return "unknown";
}

double design_log_pdf(const DesignContext& ctx, double K, double t) {
    if (!(t > 0.0)) return -std::numeric_limits<double>::infinity();
    return ig_log_pdf(ig_params(law_from_fee(ctx, K)), t);
}

TargetMoments target_moments(const TargetDensity& target) {
    validate(target);
    TargetMoments m;
    switch (target.family) {
        case TargetFamily::inverse_gaussian:
            m.mean = target.p1;
            m.mean_inverse = 1.0 / target.p1 + 1.0 / target.p2;
            m.mean_log = integrate_half_line([&](double t) {
                             const double p = target.pdf(t);
                             return p == 0.0 ? 0.0 : p * std::log(t);
                         }).value;
            m.entropy = -0.5 * std::log(target.p2 / (2.0 * std::numbers::pi)) + 1.5 * m.mean_log + 0.5;
            break;
        case TargetFamily::lognormal:
            m.mean_log = target.p1;
            m.mean = std::exp(target.p1 + 0.5 * target.p2 * target.p2);
            m.mean_inverse = std::exp(-target.p1 + 0.5 * target.p2 * target.p2);
            m.entropy = target.p1 + 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * target.p2 * target.p2);
            break;
        case TargetFamily::gamma: {
            const double k = target.p1, scale = target.p2;
            m.mean_log = boost::math::digamma(k) + std::log(scale);
            m.mean = k * scale;
            m.mean_inverse = k > 1.0 ? 1.0 / ((k - 1.0) * scale) : std::numeric_limits<double>::infinity();
            m.entropy = k + std::log(scale) + std::lgamma(k) + (1.0 - k) * boost::math::digamma(k);
            break;
        }
    }
    return m;
}

double kl_divergence(const DesignContext& ctx, double K, const TargetMoments& m) {
    const IgParams q = ig_params(law_from_fee(ctx, K));
    if (!std::isfinite(m.mean_inverse)) return std::numeric_limits<double>::infinity();
    const double expected_log_q = 0.5 * std::log(q.rho / (2.0 * std::numbers::pi)) - 1.5 * m.mean_log -
                                  q.rho / (2.0 * q.mu * q.mu) *
                                      (m.mean - 2.0 * q.mu + q.mu * q.mu * m.mean_inverse);
    return std::max(0.0, -m.entropy - expected_log_q);
}

double kl_divergence(const DesignContext& ctx, double K, const TargetDensity& target) {
    return kl_divergence(ctx, K, target_moments(target));
}

double entropy_estimate(std::vector<double> samples) {
    const std::size_t n = samples.size();
    if (n < 2) return kNaN;
    std::sort(samples.begin(), samples.end());
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < n; ++i)
        if (samples[i] > samples[i - 1]) min_gap = std::min(min_gap, samples[i] - samples[i - 1]);
    if (!std::isfinite(min_gap)) return kNaN;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = std::numeric_limits<double>::infinity();
        if (i > 0) d = std::min(d, samples[i] - samples[i - 1]);
        if (i + 1 < n) d = std::min(d, samples[i + 1] - samples[i]);
        if (d == 0.0) d = min_gap;
        s += std::log(d);
    }
    return s / static_cast<double>(n) + std::log(2.0) + boost::math::digamma(static_cast<double>(n)) +
           std::numbers::egamma;
}

SampleDivergence kl_divergence(const DesignContext& ctx, double K, const std::vector<double>& samples) {
    check_samples(samples);
    const HittingLaw law = law_from_fee(ctx, K);
    SampleDivergence out;
    out.risk = -mean_log_likelihood(ctx, law.b_prime, samples);
    out.entropy_estimate = entropy_estimate(samples);
    out.divergence = std::isfinite(out.entropy_estimate)
                         ? std::max(0.0, out.risk - out.entropy_estimate)
                         : kNaN;
    return out;
}

KlFitResult fit_fee_mle(const DesignContext& ctx, const std::vector<double>& samples) {
    check_samples(samples);
    if (samples.size() >= 2 &&
        std::all_of(samples.begin(), samples.end(), [&](double t) { return t == samples.front(); }))
        throw DegenerateSample("all samples are equal; the likelihood carries no spread information");

    const double hi = b_max(ctx);
    const double b = golden_section_max(
        [&](double bb) { return mean_log_likelihood(ctx, bb, samples); }, kBFloor, hi, kBTol);

    KlFitResult r;
    r.b_prime = b;
    r.k_hat = fee_from_b_prime(ctx, b);
    const SampleDivergence d = kl_divergence(ctx, r.k_hat, samples);
    r.risk = d.risk;
    r.divergence = d.divergence;
    r.l1_bound = std::isfinite(d.divergence) ? 2.0 * std::sqrt(1.0 - std::exp(-d.divergence)) : kNaN;

    const double h = mean_inverse(samples);
    auto score = [&](double bb) { return 1.0 / bb - bb * h - ctx.a_prime; };
    double prev = score(hi / static_cast<double>(kScanPoints));
    for (std::size_t i = 2; i <= kScanPoints; ++i) {
        const double g = score(hi * static_cast<double>(i) / static_cast<double>(kScanPoints));
        if ((prev < 0.0) != (g < 0.0)) ++r.score_sign_changes;
        prev = g;
    }
    return r;
}

KlFitResult fit_fee_kl(const DesignContext& ctx, const TargetDensity& target) {
    const TargetMoments m = target_moments(target);
    const double hi = b_max(ctx);
    auto neg_div = [&](double bb) { return -kl_divergence(ctx, fee_from_b_prime(ctx, bb), m); };
    const double b = golden_section_max(neg_div, kBFloor, hi, kBTol);
    KlFitResult r;
    r.b_prime = b;
    r.k_hat = fee_from_b_prime(ctx, b);
    r.divergence = kl_divergence(ctx, r.k_hat, m);
    r.risk = kNaN;
    r.l1_bound = 2.0 * std::sqrt(1.0 - std::exp(-r.divergence));
    return r;
}

BhCheck bh_bound_check(const DesignContext& ctx, double K, const TargetDensity& target) {
    validate(target);
    const IgParams q = ig_params(law_from_fee(ctx, K));
    BhCheck c;
    c.divergence = kl_divergence(ctx, K, target);
    c.l1_distance = integrate_half_line([&](double t) {
                        return std::abs(target.pdf(t) - std::exp(ig_log_pdf(q, t)));
                    }).value;
    c.bound = 2.0 * std::sqrt(1.0 - std::exp(-c.divergence));
    c.chain_bound = std::sqrt(2.0 * c.divergence);
    c.holds = c.l1_distance <= c.bound + 1e-9;
    c.chain_holds = c.l1_distance <= c.chain_bound + 1e-9;
    return c;
}

}  // namespace mfstop
