// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfstop/errors.hpp"
#include "mfstop/nce2.hpp"
#include "mfstop/numerics.hpp"

using namespace mfstop;

namespace {

MarketParams instance(double K) {
    return {.alpha = 1, .sigma = 1, .beta = 3, .x0 = 1, .K = K, .theta = 0, .l1 = 0, .l2 = 1};
}

const ProfitFunction kLinear{ProfitKind::affine, -1.0, 1.0, 1.0};

// Independent construction for f(x) = x - 1, alpha = 1, sigma = 1, beta = 3:
// p(x) = x/2 - 1/3, k1 = -3. For a chosen threshold y, value matching and
// smooth pasting give A and K_bar; consistency gives theta_bar2; the fee is
// their product.
struct Constructed {
    double A, k_bar, theta_bar, K;
};

Constructed construct(double y, double x0 = 1.0) {
    const double k1 = -3.0;
    auto p = [](double x) { return x / 2.0 - 1.0 / 3.0; };
    const double A = -0.5 / (k1 * std::pow(y, k1 - 1.0));
    const double k_bar = -(A * std::pow(y, k1) + p(y));
    const double running = p(x0) - std::pow(y / x0, -k1) * p(y);
    const double theta_bar = 1.0 / running;
    return {A, k_bar, theta_bar, theta_bar * k_bar};
}

}  // namespace

TEST_CASE("resolvent matches quadrature of the expected discounted profit") {
    const MarketParams m = instance(1.0);
    const std::vector<ProfitFunction> fs{kLinear, {ProfitKind::power, 0.5, 2.0, 0.5}, {ProfitKind::power, 0.0, 1.0, 1.5}};
    for (const auto& f : fs) {
        const Resolvent p(f, m);
        const double g = f.exponent();
        const double growth = m.alpha * g + 0.5 * m.sigma * m.sigma * g * (g - 1.0);
        for (double x : {0.3, 1.0, 2.5}) {
            const double q = integrate_half_line([&](double t) {
                return f.c0 * std::exp(-m.beta * t) + f.c1 * std::pow(x, g) * std::exp((growth - m.beta) * t);
            }).value;
            CHECK(p.value(x) == doctest::Approx(q).epsilon(1e-9));
            const double h = 1e-5 * x;
            CHECK(p.derivative(x) == doctest::Approx((p.value(x + h) - p.value(x - h)) / (2 * h)).epsilon(1e-7));
        }
    }
}

TEST_CASE("resolvent diverges when the profit grows faster than the discount") {
    const MarketParams m = instance(1.0);
    CHECK_THROWS_AS(Resolvent(ProfitFunction{ProfitKind::power, 0.0, 1.0, 3.0}, m), ResolventDivergence);
}

TEST_CASE("inverse-constructed instance is recovered") {
    const Constructed c = construct(0.25);
    CHECK(c.A == doctest::Approx(std::pow(0.25, 4) / 6.0).epsilon(1e-12));
    CHECK(c.k_bar == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(1.0 / c.theta_bar == doctest::Approx(0.169922).epsilon(1e-5));
    CHECK(c.K == doctest::Approx(0.98084).epsilon(1e-4));

    const MarketParams m = instance(c.K);
    const NceSolution2 s = solve_system2(kLinear, m);
    REQUIRE_FALSE(s.no_stopping);
    CHECK(std::abs(s.x_star - 0.25) < 1e-4);
    CHECK(s.coeff_A == doctest::Approx(c.A).epsilon(1e-6));
    CHECK(s.theta_bar2 == doctest::Approx(c.theta_bar).epsilon(1e-6));
    CHECK(s.k_bar2 == doctest::Approx(c.k_bar).epsilon(1e-6));
    for (double r : s.residuals) CHECK(std::abs(r) < 1e-8);
    CHECK(s.brackets.size() == 1);

    // Value matching and smooth pasting of the solved value function.
    const double xs = s.x_star;
    CHECK(value_function2(s, kLinear, m, xs) == doctest::Approx(-s.k_bar2));
    const double h = 1e-6;
    const double right = (value_function2(s, kLinear, m, xs + 2 * h) - value_function2(s, kLinear, m, xs + h)) / h;
    CHECK(std::abs(right) < 1e-4);
    CHECK(expected_running_profit(s, kLinear, m) == doctest::Approx(1.0 / c.theta_bar).epsilon(1e-8));
}

TEST_CASE("solver agrees with a 10^4-point grid search on the constructed fee") {
    for (double y_true : {0.1, 0.25, 0.4}) {
        const double K = construct(y_true).K;
        const NceSolution2 s = solve_system2(kLinear, instance(K));
        REQUIRE_FALSE(s.no_stopping);
        double best = 0, best_err = 1e300;
        for (int i = 1; i <= 10000; ++i) {
            const double y = 1e-4 + (0.999 - 1e-4) * (i - 1) / 9999.0;
            const double err = std::abs(construct(y).K - K);
            if (err < best_err) {
                best_err = err;
                best = y;
            }
        }
        CHECK(std::abs(s.x_star - best) < 1.5e-4);
        CHECK(std::abs(s.x_star - y_true) < 1e-6);
    }
}

TEST_CASE("strictly positive profit never stops") {
    const ProfitFunction pos{ProfitKind::affine, 1.0, 1.0, 1.0};
    const MarketParams m = instance(0.5);
    const NceSolution2 s = solve_system2(pos, m);
    CHECK(s.no_stopping);
    const Resolvent p(pos, m);
    CHECK(s.theta_bar2 == doctest::Approx(1.0 / p.value(m.x0)));
    CHECK(value_function2(s, pos, m, 1.3) == doctest::Approx(p.value(1.3)));
}

TEST_CASE("scalar residual vanishes at the constructed threshold for several starting points") {
    for (double x0 : {1.0, 1.7, 3.0}) {
        const Constructed c = construct(0.25, x0);
        MarketParams m = instance(c.K);
        m.x0 = x0;
        CHECK(std::abs(scalar_equation_residual(0.25, kLinear, m)) < 1e-12);
        CHECK(implied_theta_bar2(0.25, kLinear, m) == doctest::Approx(c.theta_bar).epsilon(1e-12));
        const NceSolution2 s = solve_system2(kLinear, m);
        CHECK(std::abs(s.x_star - 0.25) < 1e-6);
    }
}

TEST_CASE("profit validation") {
    CHECK_THROWS_AS(validate(ProfitFunction{ProfitKind::affine, 0.0, -1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(validate(ProfitFunction{ProfitKind::power, 0.0, 1.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(scalar_equation_residual(2.0, kLinear, instance(1.0)), DomainError);
}
