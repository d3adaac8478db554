// SPDX-License-Identifier: MIT
#include "mfstop/population.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include "mfstop/errors.hpp"
#include "mfstop/numerics.hpp"

namespace mfstop {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n && !failed; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

Estimate estimate_of(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = pairwise_sum(v) / n;
    if (v.size() < 2) return {mean, kNaN};
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    return {mean, std::sqrt(pairwise_sum(sq) / (n - 1.0) / n)};
}

double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mean = pairwise_sum(v) / static_cast<double>(v.size());
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    return pairwise_sum(sq) / static_cast<double>(v.size() - 1);
}

void require_finite_n_safe(const MarketParams& m) {
    if (!(m.l1 > 0.0) && m.theta != 1.0)
        throw SimulationError(
            "finite-N simulation requires l1 > 0 unless theta = 1 (the population average in "
            "the weight denominator can vanish)");
}

double theta_tilde(const MarketParams& m, double avg) {
    if (m.theta == 1.0) return 1.0;
    return m.theta + (1.0 - m.theta) / (m.l1 + m.l2 * avg);
}

// Agent 0 hitting times for increasing levels, coupled along one path by the
// strong Markov property.
std::vector<double> coupled_hitting_times(const MarketParams& m, const std::vector<double>& levels,
                                          Stream& rng) {
    const HittingLaw base = hitting_law_from_threshold(m, levels.front(), Direction::up);
    std::vector<double> out(levels.size(), kInf);
    double t = 0.0;
    double prev_b = 0.0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const double b = std::log(levels[k] / m.x0) / m.sigma;
        t += sample_tau(HittingLaw{base.a_prime, b - prev_b}, rng);
        prev_b = b;
        out[k] = t;
        if (!std::isfinite(t)) break;
    }
    return out;
}

struct RepResult {
    double j = 0.0;
    double theta_tilde = 0.0;
    double ks = 0.0;
    double y2 = 0.0;
    std::vector<double> gains;
};

struct GapPlan {
    std::vector<double> levels;       // sorted unique grid plus x*
    std::vector<std::size_t> grid_at; // grid index -> level index
    std::size_t star_at = 0;
};

GapPlan plan_gap(const MarketParams& m, const NceSolution1& sol, const std::vector<double>& grid) {
    GapPlan plan;
    for (double g : grid) {
        if (!(g > m.x0) || !std::isfinite(g))
            throw SimulationError("deviation_grid: thresholds must be finite and > x0");
    }
    plan.levels = grid;
    plan.levels.push_back(sol.x_star);
    std::sort(plan.levels.begin(), plan.levels.end());
    plan.levels.erase(std::unique(plan.levels.begin(), plan.levels.end()), plan.levels.end());
    auto index_of = [&](double v) {
        return static_cast<std::size_t>(
            std::lower_bound(plan.levels.begin(), plan.levels.end(), v) - plan.levels.begin());
    };
    for (double g : grid) plan.grid_at.push_back(index_of(g));
    plan.star_at = index_of(sol.x_star);
    return plan;
}

RepResult run_rep_I(const MarketParams& m, const NceSolution1& sol, const SimConfig& cfg,
                    const HittingLaw& law, const GapPlan* plan, std::size_t rep) {
    const std::size_t n = cfg.n_agents;
    std::vector<double> tau(n), y(n), disc(n);
    std::vector<double> agent0_tau;
    for (std::size_t i = 0; i < n; ++i) {
        Stream rng(cfg.seed, agent_stream(static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(i)));
        if (i == 0 && plan != nullptr) {
            agent0_tau = coupled_hitting_times(m, plan->levels, rng);
            tau[i] = agent0_tau[plan->star_at];
        } else {
            tau[i] = sample_tau(law, rng);
        }
        disc[i] = std::isfinite(tau[i]) ? std::exp(-m.beta * tau[i]) : 0.0;
        y[i] = disc[i] * sol.x_star;
    }
    const double sum_y = pairwise_sum(y);
    const double tt = theta_tilde(m, sum_y / static_cast<double>(n));

    RepResult r;
    r.theta_tilde = tt;
    std::vector<double> payoff(n), y2(n);
    for (std::size_t i = 0; i < n; ++i) {
        payoff[i] = y[i] * tt - disc[i] * m.K;
        y2[i] = y[i] * y[i];
    }
    r.j = pairwise_sum(payoff) / static_cast<double>(n);
    r.y2 = pairwise_sum(y2) / static_cast<double>(n);
    r.ks = ks_distance(tau, [&](double t) { return hitting_cdf(law, t); });

    if (plan != nullptr) {
        const double others = sum_y - y[0];
        r.gains.resize(plan->grid_at.size());
        for (std::size_t g = 0; g < plan->grid_at.size(); ++g) {
            const std::size_t k = plan->grid_at[g];
            if (k == plan->star_at) {
                r.gains[g] = 0.0;
                continue;
            }
            const double t = agent0_tau[k];
            const double d = std::isfinite(t) ? std::exp(-m.beta * t) : 0.0;
            const double yh = d * plan->levels[k];
            const double th = theta_tilde(m, (others + yh) / static_cast<double>(n));
            r.gains[g] = (yh * th - d * m.K) - payoff[0];
        }
    }
    return r;
}

struct GapSummary {
    std::vector<double> mean_gain;
    GapEstimate est;
};

GapSummary summarize_gap(const std::vector<RepResult>& reps, const std::vector<double>& grid,
                         double x_star) {
    GapSummary s;
    s.mean_gain.resize(grid.size());
    std::size_t best = grid.size();
    double best_gain = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::vector<double> col(reps.size());
        for (std::size_t r = 0; r < reps.size(); ++r) col[r] = reps[r].gains[g];
        s.mean_gain[g] = pairwise_sum(col) / static_cast<double>(col.size());
        if (s.mean_gain[g] > best_gain) {
            best_gain = s.mean_gain[g];
            best = g;
        }
    }
    s.est.se_reliable = reps.size() >= 2;
    if (best == grid.size()) {
        s.est.gap = 0.0;
        s.est.best_threshold = x_star;
        s.est.se = s.est.se_reliable ? 0.0 : kNaN;
        return s;
    }
    std::vector<double> col(reps.size());
    for (std::size_t r = 0; r < reps.size(); ++r) col[r] = reps[r].gains[best];
    const Estimate e = estimate_of(col);
    s.est.gap = best_gain;
    s.est.se = e.se;
    s.est.best_threshold = grid[best];
    return s;
}

// Steps ln x exactly; `on_step(t0, x0, t1, x1)` sees every completed step
// before the crossing check. Returns the crossing time or +inf at the cap.
double step_path(const MarketParams& m, double x_star, Direction dir, Stream& rng,
                 const PathOptions& opts,
                 const std::function<void(double, double, double, double)>& on_step) {
    if (!(opts.step > 0.0)) throw SimulationError("step must be > 0");
    if (!(opts.t_max > 0.0)) throw SimulationError("t_max must be > 0");
    const double c = std::log(x_star);
    double yv = std::log(m.x0);
    const bool up = dir == Direction::up;
    if (up ? yv >= c : yv <= c) return 0.0;
    const double drift = (m.alpha - 0.5 * m.sigma * m.sigma) * opts.step;
    const double vol = m.sigma * std::sqrt(opts.step);
    const double var = m.sigma * m.sigma * opts.step;
    const auto steps = static_cast<std::uint64_t>(std::ceil(opts.t_max / opts.step));
    for (std::uint64_t k = 0; k < steps; ++k) {
        const double t0 = static_cast<double>(k) * opts.step;
        const double t1 = static_cast<double>(k + 1) * opts.step;
        const double yn = yv + drift + vol * rng.normal();
        if (on_step) on_step(t0, std::exp(yv), t1, std::exp(yn));
        if (up ? yn >= c : yn <= c) return t1;
        if (opts.bridge) {
            const double p = std::exp(-2.0 * (c - yv) * (c - yn) / var);
            if (rng.uniform() < p) return t1;
        }
        yv = yn;
    }
    return kInf;
}

}  // namespace

void validate(const SimConfig& cfg) {
    if (cfg.n_agents < 2) throw SimulationError("n_agents must be >= 2");
    if (cfg.n_reps < 1) throw SimulationError("n_reps must be >= 1");
    if (cfg.n_agents > 0xffffffffULL || cfg.n_reps > 0xffffffffULL)
        throw SimulationError("n_agents and n_reps must fit in 32 bits");
    for (double g : cfg.deviation_grid)
        if (!(g > 0.0) || !std::isfinite(g))
            throw SimulationError("deviation_grid values must be finite and > 0");
    if (!(cfg.step > 0.0)) throw SimulationError("step must be > 0");
    if (!(cfg.t_max > 0.0)) throw SimulationError("t_max must be > 0");
}

double pairwise_sum(const std::vector<double>& v) {
    std::function<double(std::size_t, std::size_t)> rec = [&](std::size_t lo, std::size_t hi) {
        if (hi - lo <= 8) {
            double s = 0.0;
            for (std::size_t i = lo; i < hi; ++i) s += v[i];
            return s;
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        return rec(lo, mid) + rec(mid, hi);
    };
    return v.empty() ? 0.0 : rec(0, v.size());
}

std::vector<double> default_deviation_grid(const MarketParams& m, const NceSolution1& sol,
                                           std::size_t points) {
    const double lo = std::max(0.5 * sol.x_star, m.x0 * 1.000001);
    return log_grid(lo, 2.0 * sol.x_star, points);
}

SimReport simulate_population_I(const MarketParams& m, const NceSolution1& sol,
                                const SimConfig& cfg) {
    validate(m);
    validate(cfg);
    require_finite_n_safe(m);
    const HittingLaw law = rule_law(m, stopping_rule1(sol));

    GapPlan plan;
    const bool with_gap = !cfg.deviation_grid.empty();
    if (with_gap) plan = plan_gap(m, sol, cfg.deviation_grid);

    std::vector<RepResult> reps(cfg.n_reps);
    parallel_for(cfg.n_reps, cfg.workers, [&](std::size_t r) {
        reps[r] = run_rep_I(m, sol, cfg, law, with_gap ? &plan : nullptr, r);
    });

    std::vector<double> j(cfg.n_reps), tt(cfg.n_reps), ks(cfg.n_reps), y2(cfg.n_reps);
    for (std::size_t r = 0; r < cfg.n_reps; ++r) {
        j[r] = reps[r].j;
        tt[r] = reps[r].theta_tilde;
        ks[r] = reps[r].ks;
        y2[r] = reps[r].y2;
    }
    SimReport rep;
    rep.n_agents = cfg.n_agents;
    rep.n_reps = cfg.n_reps;
    rep.se_reliable = cfg.n_reps >= 2;
    rep.j_finite = estimate_of(j);
    rep.j_limit = sol.limit_payoff;
    rep.abs_error = std::abs(rep.j_finite.mean - rep.j_limit);
    rep.theta_bar = sol.theta_bar;
    rep.theta_tilde_mean = pairwise_sum(tt) / static_cast<double>(cfg.n_reps);
    rep.theta_tilde_var = sample_variance(tt);
    rep.ks_distance = pairwise_sum(ks) / static_cast<double>(cfg.n_reps);
    rep.second_moment = estimate_of(y2);
    rep.gap_threshold = sol.x_star;
    if (with_gap) {
        const GapSummary s = summarize_gap(reps, cfg.deviation_grid, sol.x_star);
        rep.gap_computed = true;
        rep.gap = {s.est.gap, s.est.se};
        rep.gap_threshold = s.est.best_threshold;
        rep.deviation_grid = cfg.deviation_grid;
        rep.deviation_gain = s.mean_gain;
    }
    return rep;
}

GapEstimate epsilon_nash_gap(const MarketParams& m, const NceSolution1& sol, const SimConfig& cfg) {
    if (cfg.deviation_grid.empty()) throw SimulationError("deviation_grid must be nonempty");
    if (cfg.problem != Problem::I)
        throw SimulationError("the Nash gap is only defined for Problem I");
    const SimReport r = simulate_population_I(m, sol, cfg);
    GapEstimate g;
    g.gap = r.gap.mean;
    g.se = r.gap.se;
    g.best_threshold = r.gap_threshold;
    g.se_reliable = r.se_reliable;
    return g;
}

SimReport simulate_population_II(const MarketParams& m, const ProfitFunction& f,
                                 const NceSolution2& sol, const SimConfig& cfg) {
    validate(m);
    validate(f);
    validate(cfg);
    require_finite_n_safe(m);
    const CharacteristicRoots roots = characteristic_roots(m);
    const PathOptions opts{cfg.step, cfg.t_max, true};
    const double threshold = sol.no_stopping ? 0.0 : sol.x_star;

    struct Rep2 {
        double j, theta_tilde, ks, y2;
    };
    std::vector<Rep2> reps(cfg.n_reps);
    const HittingLaw law = sol.no_stopping
                               ? HittingLaw{}
                               : hitting_law_from_threshold(m, sol.x_star, Direction::down);
    parallel_for(cfg.n_reps, cfg.workers, [&](std::size_t r) {
        const std::size_t n = cfg.n_agents;
        std::vector<double> integral(n), disc(n), tau(n);
        for (std::size_t i = 0; i < n; ++i) {
            Stream rng(cfg.seed, agent_stream(static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(i)));
            double acc = 0.0;
            auto accumulate = [&](double t0, double x0, double t1, double x1) {
                acc += 0.5 * (t1 - t0) * (std::exp(-m.beta * t0) * f(x0) + std::exp(-m.beta * t1) * f(x1));
            };
            tau[i] = sol.no_stopping ? step_path(m, 0.0, Direction::down, rng, opts, accumulate)
                                     : step_path(m, threshold, Direction::down, rng, opts, accumulate);
            integral[i] = acc;
            disc[i] = std::isfinite(tau[i]) ? std::exp(-m.beta * tau[i]) : 0.0;
        }
        const double tt = theta_tilde(m, pairwise_sum(integral) / static_cast<double>(n));
        std::vector<double> payoff(n), sq(n);
        for (std::size_t i = 0; i < n; ++i) {
            payoff[i] = integral[i] * tt - disc[i] * m.K;
            sq[i] = integral[i] * integral[i];
        }
        const double ks =
            sol.no_stopping ? 0.0 : ks_distance(tau, [&](double t) { return hitting_cdf(law, t); });
        reps[r] = {pairwise_sum(payoff) / static_cast<double>(n), tt, ks,
                   pairwise_sum(sq) / static_cast<double>(n)};
    });

    std::vector<double> j(cfg.n_reps), tt(cfg.n_reps), ks(cfg.n_reps), y2(cfg.n_reps);
    for (std::size_t r = 0; r < cfg.n_reps; ++r) {
        j[r] = reps[r].j;
        tt[r] = reps[r].theta_tilde;
        ks[r] = reps[r].ks;
        y2[r] = reps[r].y2;
    }
    SimReport rep;
    rep.n_agents = cfg.n_agents;
    rep.n_reps = cfg.n_reps;
    rep.se_reliable = cfg.n_reps >= 2;
    rep.j_finite = estimate_of(j);
    const double running = expected_running_profit(sol, f, m);
    const double disc_mean =
        sol.no_stopping ? 0.0 : std::pow(sol.x_star / m.x0, -roots.k1);
    rep.j_limit = sol.theta_bar2 * running - m.K * disc_mean;
    rep.abs_error = std::abs(rep.j_finite.mean - rep.j_limit);
    rep.theta_bar = sol.theta_bar2;
    rep.theta_tilde_mean = pairwise_sum(tt) / static_cast<double>(cfg.n_reps);
    rep.theta_tilde_var = sample_variance(tt);
    rep.ks_distance = pairwise_sum(ks) / static_cast<double>(cfg.n_reps);
    rep.second_moment = estimate_of(y2);
    rep.gap_threshold = sol.x_star;
    rep.deviation_class = "none (Problem II runs are diagnostic)";
    return rep;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) return kNaN;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) return kNaN;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return kNaN;
    return (n * sxy - sx * sy) / den;
}

GapSweep gap_sweep(const MarketParams& m, const NceSolution1& sol, const SimConfig& cfg,
                   const std::vector<std::size_t>& n_values) {
    GapSweep sweep;
    std::vector<double> xs, ys;
    for (std::size_t n : n_values) {
        SimConfig c = cfg;
        c.n_agents = n;
        const GapEstimate g = epsilon_nash_gap(m, sol, c);
        sweep.rows.push_back({n, g});
        xs.push_back(static_cast<double>(n));
        ys.push_back(g.gap);
    }
    sweep.slope = loglog_slope(xs, ys);
    return sweep;
}

double empirical_cdf_check(const HittingLaw& law, std::size_t n_samples, std::uint64_t seed) {
    if (n_samples == 0) throw SimulationError("n_samples must be >= 1");
    Stream rng(seed, 0);
    std::vector<double> t(n_samples);
    for (auto& v : t) v = sample_tau(law, rng);
    return ks_distance(t, [&](double s) { return hitting_cdf(law, s); });
}

double empirical_cdf_check(const MarketParams& m, const NceSolution1& sol, std::size_t n_samples,
                           std::uint64_t seed) {
    return empirical_cdf_check(rule_law(m, stopping_rule1(sol)), n_samples, seed);
}

double path_simulate_tau(const MarketParams& m, double x_star, Direction direction, Stream& rng,
                         const PathOptions& opts) {
    if (!(x_star > 0.0)) throw SimulationError("x_star must be > 0");
    return step_path(m, x_star, direction, rng, opts, nullptr);
}

}  // namespace mfstop
