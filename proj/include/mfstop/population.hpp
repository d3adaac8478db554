// SPDX-License-Identifier: MIT
/**
 * @file population.hpp
 * @brief Finite-N Monte Carlo of the population under the decentralized rules.
 *
 * Replications are independent work units. Every (replication, agent) pair
 * draws from its own counter-based stream and per-replication results are
 * combined by a pairwise reduction in index order, so a report depends only
 * on (params, config) and never on the worker count.
 *
 * The deviation class for the Nash gap is one-sided threshold rules on a
 * user-supplied grid. The deviating agent is agent 0; its hitting times for
 * all candidate thresholds are coupled along one Brownian path, and the
 * other N-1 agents are shared across candidates.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mfstop/fpt.hpp"
#include "mfstop/market.hpp"
#include "mfstop/nce1.hpp"
#include "mfstop/nce2.hpp"
#include "mfstop/rng.hpp"

namespace mfstop {

enum class Problem { I, II };

struct SimConfig {
    std::size_t n_agents = 100;
    std::size_t n_reps = 100;
    std::uint64_t seed = 0;
    std::vector<double> deviation_grid;
    Problem problem = Problem::I;
    unsigned workers = 1;  ///< 0 selects std::thread::hardware_concurrency()
    double step = 1e-3;    ///< path step for Problem II
    double t_max = 50.0;   ///< path horizon cap for Problem II
};

/// Throws SimulationError.
void validate(const SimConfig& cfg);

struct Estimate {
    double mean = 0.0;
    double se = std::numeric_limits<double>::quiet_NaN();
};

struct SimReport {
    Estimate j_finite;          ///< symmetric estimate of J_1(tau*, tau*_{-1})
    double j_limit = 0.0;       ///< theta_bar v(x0)
    double abs_error = 0.0;     ///< |j_finite - j_limit|
    Estimate gap;               ///< floored at zero; NaN se when not computed
    double gap_threshold = 0.0; ///< best deviation threshold (x* when none helps)
    bool gap_computed = false;
    std::vector<double> deviation_grid;
    std::vector<double> deviation_gain;  ///< mean gain per grid point
    double theta_bar = 0.0;
    double theta_tilde_mean = 0.0;
    double theta_tilde_var = 0.0;
    double ks_distance = 0.0;   ///< mean over replications of sup|F_N - F|
    Estimate second_moment;     ///< E (e^{-beta tau} x(tau))^2
    std::size_t n_agents = 0;
    std::size_t n_reps = 0;
    bool se_reliable = false;   ///< false for a single replication
    std::string deviation_class = "one-sided threshold rules on the configured grid";
};

SimReport simulate_population_I(const MarketParams& params, const NceSolution1& sol,
                                const SimConfig& cfg);

/// Diagnostic run for the running-profit problem: paths are simulated with
/// exact log-increments and the profit integral is accumulated by the
/// trapezoid rule. No gap is computed.
SimReport simulate_population_II(const MarketParams& params, const ProfitFunction& f,
                                 const NceSolution2& sol, const SimConfig& cfg);

struct GapEstimate {
    double gap = 0.0;
    double se = std::numeric_limits<double>::quiet_NaN();
    double best_threshold = 0.0;
    bool se_reliable = false;
};

GapEstimate epsilon_nash_gap(const MarketParams& params, const NceSolution1& sol,
                             const SimConfig& cfg);

/// `points` log-spaced thresholds on [max(x*/2, x0+), 2 x*].
std::vector<double> default_deviation_grid(const MarketParams& params, const NceSolution1& sol,
                                           std::size_t points = 50);

struct GapSweepRow {
    std::size_t n_agents;
    GapEstimate estimate;
};

struct GapSweep {
    std::vector<GapSweepRow> rows;
    double slope;  ///< least-squares slope of log gap on log N; NaN if any gap is zero
};

GapSweep gap_sweep(const MarketParams& params, const NceSolution1& sol, const SimConfig& cfg,
                   const std::vector<std::size_t>& n_values);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// KS distance between n exact draws of the law and its analytic CDF.
double empirical_cdf_check(const HittingLaw& law, std::size_t n_samples, std::uint64_t seed);

double empirical_cdf_check(const MarketParams& params, const NceSolution1& sol,
                           std::size_t n_samples, std::uint64_t seed);

struct PathOptions {
    double step = 1e-3;
    double t_max = 100.0;
    /// Also detect crossings between grid points through the Brownian-bridge
    /// crossing probability.
    bool bridge = true;
};

/// Time-stepping oracle for the first passage of the GBM to x_star.
/// Returns +inf when the cap is reached first.
double path_simulate_tau(const MarketParams& params, double x_star, Direction direction,
                         Stream& rng, const PathOptions& opts = {});

/// Sum in a fixed pairwise order.
double pairwise_sum(const std::vector<double>& v);

}  // namespace mfstop
