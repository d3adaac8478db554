// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "mfstop/errors.hpp"
#include "mfstop/fpt.hpp"
#include "mfstop/numerics.hpp"

using namespace mfstop;

namespace {

// Textbook inverse Gaussian CDF with mean m and shape l.
double ig_cdf_textbook(double m, double l, double t) {
    const double s = std::sqrt(l / t);
    return normal_cdf(s * (t / m - 1.0)) + std::exp(2.0 * l / m) * normal_cdf(-s * (t / m + 1.0));
}

// Random valid market with beta > alpha.
MarketParams random_market(Stream& g) {
    MarketParams m;
    m.alpha = -1.0 + 3.0 * g.uniform();
    m.sigma = 0.1 + 1.9 * g.uniform();
    m.beta = m.alpha + 0.01 + 3.0 * g.uniform();
    if (m.beta <= 0.0) m.beta = 0.01 + g.uniform();
    if (m.beta <= m.alpha) m.beta = m.alpha + 0.5;
    m.x0 = 0.2 + 3.0 * g.uniform();
    return m;
}

}  // namespace

TEST_CASE("characteristic roots at fixtures") {
    MarketParams a{.alpha = 0, .sigma = 1, .beta = 1};
    auto r = characteristic_roots(a);
    CHECK(r.k1 == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(r.k2 == doctest::Approx(2.0).epsilon(1e-14));
    MarketParams b{.alpha = 1, .sigma = 1, .beta = 3};
    r = characteristic_roots(b);
    CHECK(r.k1 == doctest::Approx(-3.0).epsilon(1e-14));
    CHECK(r.k2 == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("characteristic roots solve the quadratic and bracket the unit interval") {
    Stream g(2024, 1);
    for (int i = 0; i < 500; ++i) {
        const MarketParams m = random_market(g);
        const auto r = characteristic_roots(m);
        const double s2 = m.sigma * m.sigma;
        auto q = [&](double k) { return 0.5 * s2 * k * k + (m.alpha - 0.5 * s2) * k - m.beta; };
        const double scale = 0.5 * s2 * r.k2 * r.k2 + std::abs(m.alpha) * r.k2 + m.beta;
        CHECK(std::abs(q(r.k1)) < 1e-12 * std::max(1.0, 0.5 * s2 * r.k1 * r.k1 + m.beta));
        CHECK(std::abs(q(r.k2)) < 1e-12 * scale);
        CHECK(r.k1 < 0.0);
        CHECK(r.k2 > 1.0);
    }
}

TEST_CASE("lambda roots match sigma times characteristic roots") {
    Stream g(99, 3);
    for (int i = 0; i < 1000; ++i) {
        const MarketParams m = random_market(g);
        const auto r = characteristic_roots(m);
        const double ap = m.sigma / 2 - m.alpha / m.sigma;
        const auto lam = lambda_roots(ap, m.beta);
        CHECK(std::abs(lam.minus - r.k1 * m.sigma) < 1e-10);
        CHECK(std::abs(lam.plus - r.k2 * m.sigma) < 1e-10);
    }
}

TEST_CASE("lambda roots domain") {
    CHECK_THROWS_AS(lambda_roots(0.1, -1.0), DomainError);
}

TEST_CASE("hitting law from thresholds reproduces the discount identities") {
    Stream g(5, 5);
    for (int i = 0; i < 200; ++i) {
        MarketParams m = random_market(g);
        const auto r = characteristic_roots(m);
        const double up = m.x0 * (1.0 + 2.0 * g.uniform());
        const double dn = m.x0 * (0.1 + 0.9 * g.uniform());
        const auto lu = hitting_law_from_threshold(m, up, Direction::up);
        const auto ld = hitting_law_from_threshold(m, dn, Direction::down);
        CHECK(discounted_factor(lu, m.beta) == doctest::Approx(std::pow(m.x0 / up, r.k2)).epsilon(1e-11));
        CHECK(discounted_factor(ld, m.beta) == doctest::Approx(std::pow(dn / m.x0, -r.k1)).epsilon(1e-11));
    }
}

TEST_CASE("threshold on the wrong side is a domain error") {
    MarketParams m{.alpha = 0, .sigma = 1, .beta = 1, .x0 = 2};
    CHECK_THROWS_AS(hitting_law_from_threshold(m, 1.0, Direction::up), DomainError);
    CHECK_THROWS_AS(hitting_law_from_threshold(m, 3.0, Direction::down), DomainError);
    const auto at = hitting_law_from_threshold(m, 2.0, Direction::up);
    CHECK(at.b_prime == 0.0);
}

TEST_CASE("hit probability") {
    CHECK(HittingLaw{-0.5, 1.0}.hit_prob() == 1.0);
    CHECK(HittingLaw{0.0, 1.0}.hit_prob() == 1.0);
    CHECK(HittingLaw{0.5, std::log(2.0)}.hit_prob() == doctest::Approx(0.5));
    CHECK(HittingLaw{0.5, std::log(4.0)}.hit_prob() == doctest::Approx(0.25));
}

TEST_CASE("discounted factor agrees with quadrature of the density") {
    const std::vector<HittingLaw> laws{{-0.5, 0.5}, {0.5, std::log(2.0)}, {0.0, 1.0}, {-2.0, 0.1}, {1.3, 0.7}};
    for (const auto& law : laws) {
        for (double s : {0.1, 1.0, 3.0}) {
            const double q = integrate_half_line([&](double t) { return std::exp(-s * t) * hitting_pdf(law, t); }).value;
            CHECK(discounted_factor(law, s) == doctest::Approx(q).epsilon(1e-8));
        }
    }
}

TEST_CASE("density integrates to the hit probability and matches the CDF") {
    const std::vector<HittingLaw> laws{{-0.5, 0.5}, {0.5, std::log(2.0)}, {-1.0, 2.0}, {0.8, 0.3}};
    for (const auto& law : laws) {
        const double mass = integrate_half_line([&](double t) { return hitting_pdf(law, t); }).value;
        CHECK(mass == doctest::Approx(law.hit_prob()).epsilon(1e-8));
        CHECK(hitting_cdf(law, std::numeric_limits<double>::infinity()) == law.hit_prob());
        for (double t : {0.05, 0.5, 1.0, 4.0, 20.0}) {
            const double c = integrate_interval([&](double u) { return hitting_pdf(law, u); }, 0.0, t).value;
            CHECK(hitting_cdf(law, t) == doctest::Approx(c).epsilon(1e-8));
        }
    }
}

TEST_CASE("IG parameters, moments and CDF against textbook formulas") {
    const HittingLaw law{-0.5, 0.5};
    const IgParams p = ig_params(law);
    CHECK(p.mu == doctest::Approx(1.0));
    CHECK(p.rho == doctest::Approx(0.25));
    CHECK(tau_mean(law) == doctest::Approx(1.0));
    CHECK(tau_var(law) == doctest::Approx(4.0));
    CHECK(tau_var(law) == doctest::Approx(p.mu * p.mu * p.mu / p.rho));
    Stream g(3, 3);
    for (int i = 0; i < 200; ++i) {
        const double m = 0.1 + 5.0 * g.uniform(), l = 0.1 + 5.0 * g.uniform();
        const double t = 0.01 + 10.0 * g.uniform();
        CHECK(ig_cdf({m, l}, t) == doctest::Approx(ig_cdf_textbook(m, l, t)).epsilon(1e-10));
        const double logpdf = 0.5 * std::log(l / (2 * std::numbers::pi * t * t * t)) -
                              l * (t - m) * (t - m) / (2 * m * m * t);
        CHECK(ig_log_pdf({m, l}, t) == doctest::Approx(logpdf).epsilon(1e-12));
    }
    CHECK_THROWS_AS(tau_mean(HittingLaw{0.5, 1.0}), DomainError);
    CHECK_THROWS_AS(ig_pdf({1.0, 1.0}, 0.0), DomainError);
}

TEST_CASE("mgf matches the IG moment generating function") {
    const HittingLaw law{-0.5, 0.5};
    const IgParams p = ig_params(law);
    for (double t : {-2.0, -0.5, 0.0, 0.05, 0.1}) {
        const double ref = std::exp(p.rho / p.mu * (1.0 - std::sqrt(1.0 - 2.0 * p.mu * p.mu * t / p.rho)));
        CHECK(mgf(law, t) == doctest::Approx(ref).epsilon(1e-12));
    }
    CHECK_THROWS_AS(mgf(law, 0.2), DomainError);
    CHECK_THROWS_AS(mgf(HittingLaw{0.5, 1.0}, 0.01), DomainError);
}

TEST_CASE("CDF properties over random laws") {
    Stream g(17, 0);
    for (int i = 0; i < 300; ++i) {
        const HittingLaw law{-2.0 + 4.0 * g.uniform(), 0.01 + 3.0 * g.uniform()};
        double prev = 0.0;
        for (double t = 0.01; t < 50.0; t *= 1.3) {
            const double c = hitting_cdf(law, t);
            CHECK(c >= prev - 1e-15);
            CHECK(c <= law.hit_prob() + 1e-12);
            prev = c;
        }
        CHECK(hitting_cdf(law, 1e6) == doctest::Approx(law.hit_prob()).epsilon(1e-6));
    }
}

TEST_CASE("exact sampler moments and defective mass") {
    Stream rng(1, 0);
    const HittingLaw law{-0.5, 0.5};
    const int n = 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double t = sample_tau(law, rng);
        s += t;
        s2 += t * t;
    }
    const double mean = s / n, var = s2 / n - mean * mean;
    CHECK(std::abs(mean - 1.0) < 0.02);
    CHECK(std::abs(var - 4.0) < 0.3);

    // alpha = 0 makes x a martingale, so from x0 = 1 the level 2 is reached
    // with probability 1/2 by optional stopping.
    const HittingLaw def{0.5, std::log(2.0)};
    CHECK(def.hit_prob() == doctest::Approx(0.5));
    int hits = 0;
    for (int i = 0; i < n; ++i)
        if (std::isfinite(sample_tau(def, rng))) ++hits;
    CHECK(std::abs(hits / double(n) - 0.5) < 0.005);
}

TEST_CASE("sampler KS against analytic CDF for proper, defective and driftless laws") {
    const std::vector<HittingLaw> laws{{-0.5, 0.5}, {0.5, std::log(2.0)}, {0.0, 0.7}, {-3.0, 2.0}};
    std::uint64_t id = 0;
    for (const auto& law : laws) {
        Stream rng(77, id++);
        std::vector<double> t(20000);
        for (auto& v : t) v = sample_tau(law, rng);
        const double d = ks_distance(t, [&](double x) { return hitting_cdf(law, x); });
        CHECK(d < 1.63 / std::sqrt(20000.0));
    }
}

TEST_CASE("sampler edge cases") {
    Stream rng(1, 1);
    CHECK(sample_tau(HittingLaw{-0.5, 0.0}, rng) == 0.0);
    CHECK(sample_tau(HittingLaw{0.5, 0.0}, rng) == 0.0);
    CHECK_THROWS(sample_tau(HittingLaw{-0.5, -1.0}, rng));
}
