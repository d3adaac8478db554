// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "mfstop/errors.hpp"
#include "mfstop/numerics.hpp"

using namespace mfstop;

TEST_CASE("half-line quadrature of closed-form integrals") {
    CHECK(integrate_half_line([](double t) { return std::exp(-t); }).value ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(integrate_half_line([](double t) { return 1.0 / (1.0 + t * t); }).value ==
          doctest::Approx(std::numbers::pi / 2).epsilon(1e-10));
    // Gamma(1.5) = sqrt(pi)/2 with an integrable endpoint singularity in the derivative.
    CHECK(integrate_half_line([](double t) { return std::sqrt(t) * std::exp(-t); }).value ==
          doctest::Approx(std::sqrt(std::numbers::pi) / 2).epsilon(1e-8));
}

TEST_CASE("interval quadrature") {
    CHECK(integrate_interval([](double x) { return x * x; }, 0.0, 3.0).value ==
          doctest::Approx(9.0).epsilon(1e-13));
}

TEST_CASE("bisect_root finds sqrt 2 and rejects non-brackets") {
    const double r = bisect_root([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-14);
    CHECK(std::abs(r - std::sqrt(2.0)) < 1e-13);
    CHECK_THROWS_AS(bisect_root([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-12), BracketError);
    CHECK(bisect_root([](double x) { return x - 1.0; }, 1.0, 3.0, 1e-12) == 1.0);
}

TEST_CASE("golden-section maximiser of a concave function") {
    const double x = golden_section_max([](double v) { return -(v - 0.3) * (v - 0.3); }, -2.0, 5.0, 1e-10);
    CHECK(std::abs(x - 0.3) < 1e-8);
}

TEST_CASE("normal tail helpers") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    // Below the switch point the erfc path is exact; compare the series with it at x = 20.
    CHECK(log_normal_sf(20.0) == doctest::Approx(std::log(0.5 * std::erfc(20.0 / std::sqrt(2.0)))).epsilon(1e-8));
    // Continuity across the switch to the asymptotic series.
    const double below = log_normal_sf(24.999999), above = log_normal_sf(25.0);
    CHECK(std::abs(below - above) < 1e-4);
    CHECK(std::isfinite(log_normal_sf(200.0)));
}

TEST_CASE("one-sample KS distance against hand-computed values") {
    const std::vector<double> s{0.1, 0.4, 0.7};
    auto uni = [](double t) { return std::isinf(t) ? 1.0 : std::clamp(t, 0.0, 1.0); };
    // Deviations: |0.1-0|, |0.1-1/3|, |0.4-1/3|, |0.4-2/3|, |0.7-2/3|, |0.7-1|
    CHECK(ks_distance(s, uni) == doctest::Approx(0.3));

    // Defective model: half the mass at +inf.
    const std::vector<double> d{0.5, std::numeric_limits<double>::infinity()};
    auto half = [](double t) { return std::isinf(t) ? 0.5 : 0.5 * std::clamp(t, 0.0, 1.0); };
    CHECK(ks_distance(d, half) == doctest::Approx(0.25));
}

TEST_CASE("two-sample KS") {
    const std::vector<double> a{1, 2, 3, 4}, b{1, 2, 3, 4};
    CHECK(ks_two_sample(a, b) == 0.0);
    const std::vector<double> c{5, 6, 7, 8};
    CHECK(ks_two_sample(a, c) == 1.0);
    const double inf = std::numeric_limits<double>::infinity();
    const std::vector<double> e{1, inf}, f{1, 2};
    CHECK(ks_two_sample(e, f) == doctest::Approx(0.5));
    CHECK(ks_two_sample_critical(10000, 10000, 0.01) == doctest::Approx(1.6276 * std::sqrt(2.0 / 10000)).epsilon(1e-3));
    CHECK(dkw_bound(10000, 0.05) == doctest::Approx(0.01358).epsilon(1e-3));
}

TEST_CASE("log grid endpoints and ratios") {
    const auto g = log_grid(0.5, 8.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 0.5);
    CHECK(g.back() == 8.0);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(2.0));
}
