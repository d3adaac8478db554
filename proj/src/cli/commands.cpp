// SPDX-License-Identifier: MIT
#include "cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli/config.hpp"
#include "cli/record.hpp"
#include "mfstop/errors.hpp"
#include "mfstop/fpt.hpp"
#include "mfstop/inverse_design.hpp"
#include "mfstop/nce1.hpp"
#include "mfstop/nce2.hpp"
#include "mfstop/population.hpp"

namespace mfstop::cli {

namespace {

const std::vector<std::string> kAllMarket{"alpha", "sigma", "beta", "x0", "K", "theta", "l1", "l2"};
const std::vector<std::string> kDynamics{"alpha", "sigma", "beta"};

Json law_record(const HittingLaw& law) {
    Json j = Json::object();
    j["a_prime"] = num(law.a_prime);
    j["b_prime"] = num(law.b_prime);
    j["hit_prob"] = num(law.hit_prob());
    return j;
}

Report cmd_roots(const Json& doc, std::ostream& err) {
    const MarketParams m = read_market(doc, kDynamics);
    const CharacteristicRoots r = characteristic_roots(m);
    const double a_prime = m.sigma / 2.0 - m.alpha / m.sigma;
    const LambdaRoots lam = lambda_roots(a_prime, m.beta);
    Report rep;
    rep.command = "roots";
    rep.result["k1"] = num(r.k1);
    rep.result["k2"] = num(r.k2);
    rep.result["a_prime"] = num(a_prime);
    rep.result["lambda_minus"] = num(lam.minus);
    rep.result["lambda_plus"] = num(lam.plus);
    rep.result["beta_gt_alpha"] = m.beta > m.alpha;
    rep.result["a_prime_negative"] = a_prime < 0.0;
    rep.result["k_min"] = num((r.k2 - 1.0) / r.k2);
    rep.result["design_feasible"] = a_prime < 0.0;
    if (!(a_prime < 0.0)) {
        const std::string w = "inverse-design infeasible (a'>=0)";
        rep.notes.push_back(w);
        err << "warning: " << w << '\n';
    }
    return rep;
}

Report cmd_solve_nce1(const Json& doc) {
    const MarketParams m = read_market(doc, kAllMarket);
    const NceSolution1 s = solve_theta_bar(m);
    Report rep;
    rep.command = "solve-nce1";
    auto& r = rep.result;
    r["theta_bar"] = num(s.theta_bar);
    r["k_bar"] = num(s.k_bar);
    r["x_star"] = num(s.x_star);
    r["value_coeff_A"] = num(s.value_coeff_A);
    r["value_coeff_B"] = num(s.value_coeff_B);
    r["k2"] = num(s.k2);
    r["residual"] = num(s.residual);
    r["nce_lhs"] = num(nce_lhs(s.theta_bar, m));
    r["nce_rhs"] = num(nce_rhs(s.theta_bar, m));
    r["value_at_x0"] = num(value_function1(s, m.x0));
    r["limit_payoff"] = num(s.limit_payoff);
    r["closed_form"] = s.closed_form;
    r["crosscheck_rel_diff"] = num(s.crosscheck_rel_diff);
    r["stopping_law"] = law_record(rule_law(m, stopping_rule1(s)));
    return rep;
}

Report cmd_solve_nce2(const Json& doc) {
    const MarketParams m = read_market(doc, kAllMarket);
    const ProfitFunction f = read_profit(doc);
    const NceSolution2 s = solve_system2(f, m);
    Report rep;
    rep.command = "solve-nce2";
    auto& r = rep.result;
    r["no_stopping"] = s.no_stopping;
    r["x_star"] = num(s.x_star);
    r["coeff_A"] = num(s.coeff_A);
    r["theta_bar2"] = num(s.theta_bar2);
    r["k_bar2"] = num(s.k_bar2);
    r["k1"] = num(s.k1);
    r["residuals"] = num_array({s.residuals.begin(), s.residuals.end()});
    Json br = Json::array();
    for (const auto& [lo, hi] : s.brackets) br.push_back(Json::array({num(lo), num(hi)}));
    r["brackets"] = br;
    r["value_at_x0"] = num(value_function2(s, f, m, m.x0));
    r["expected_running_profit"] = num(expected_running_profit(s, f, m));
    if (s.no_stopping) rep.notes.push_back("no admissible threshold: the firm never stops");
    return rep;
}

std::vector<double> resolve_grid(const Json& doc, const MarketParams& m, const NceSolution1& s,
                                 SimConfig& cfg) {
    if (wants_default_grid(doc))
        cfg.deviation_grid =
            default_deviation_grid(m, s, get_uint_or(doc, "sim.deviation_points", 50));
    return cfg.deviation_grid;
}

void add_estimate(Json& r, const std::string& key, const Estimate& e) {
    r[key] = num(e.mean);
    r[key + "_se"] = num(e.se);
}

Report cmd_simulate(const Json& doc) {
    SimConfig cfg = read_sim(doc);
    Report rep;
    rep.command = "simulate";
    rep.seed = cfg.seed;
    SimReport sr;
    if (cfg.problem == Problem::I) {
        const MarketParams m = read_market(doc, kAllMarket);
        const NceSolution1 s = solve_theta_bar(m);
        resolve_grid(doc, m, s, cfg);
        sr = simulate_population_I(m, s, cfg);
    } else {
        if (has(doc, "sim.deviation_grid"))
            throw SimulationError("sim.deviation_grid: the Nash gap is only defined for Problem I");
        const MarketParams m = read_market(doc, kAllMarket);
        const ProfitFunction f = read_profit(doc);
        const NceSolution2 s = solve_system2(f, m);
        sr = simulate_population_II(m, f, s, cfg);
    }
    auto& r = rep.result;
    r["problem"] = cfg.problem == Problem::I ? "I" : "II";
    r["n_agents"] = sr.n_agents;
    r["n_reps"] = sr.n_reps;
    add_estimate(r, "j_finite", sr.j_finite);
    r["j_limit"] = num(sr.j_limit);
    r["abs_error"] = num(sr.abs_error);
    r["theta_bar"] = num(sr.theta_bar);
    r["theta_tilde_mean"] = num(sr.theta_tilde_mean);
    r["theta_tilde_var"] = num(sr.theta_tilde_var);
    r["ks_distance"] = num(sr.ks_distance);
    add_estimate(r, "second_moment", sr.second_moment);
    r["se_reliable"] = sr.se_reliable;
    r["gap_computed"] = sr.gap_computed;
    if (sr.gap_computed) {
        add_estimate(r, "gap", sr.gap);
        r["gap_threshold"] = num(sr.gap_threshold);
        rep.table.columns = {"threshold", "mean_gain"};
        for (std::size_t i = 0; i < sr.deviation_grid.size(); ++i)
            rep.table.rows.push_back({num(sr.deviation_grid[i]), num(sr.deviation_gain[i])});
    }
    r["deviation_class"] = sr.deviation_class;
    if (!sr.se_reliable) rep.notes.push_back("single replication: standard errors are unreliable");
    return rep;
}

Report cmd_nash_gap(const Json& doc) {
    SimConfig cfg = read_sim(doc);
    if (cfg.problem != Problem::I) throw SimulationError("the Nash gap is only defined for Problem I");
    const std::vector<std::size_t> ns = read_n_values(doc);
    const MarketParams m = read_market(doc, kAllMarket);
    const NceSolution1 s = solve_theta_bar(m);
    if (!has(doc, "sim.deviation_grid") || wants_default_grid(doc))
        cfg.deviation_grid = default_deviation_grid(m, s, get_uint_or(doc, "sim.deviation_points", 50));
    const GapSweep sweep = gap_sweep(m, s, cfg, ns);
    Report rep;
    rep.command = "nash-gap";
    rep.seed = cfg.seed;
    rep.table.columns = {"n_agents", "gap", "se", "best_threshold"};
    for (const auto& row : sweep.rows)
        rep.table.rows.push_back({Json(row.n_agents), num(row.estimate.gap), num(row.estimate.se),
                                  num(row.estimate.best_threshold)});
    auto& r = rep.result;
    r["slope"] = num(sweep.slope);
    r["gap_first"] = num(sweep.rows.front().estimate.gap);
    r["gap_last"] = num(sweep.rows.back().estimate.gap);
    r["gap_decreased"] = sweep.rows.back().estimate.gap < sweep.rows.front().estimate.gap;
    r["n_reps"] = cfg.n_reps;
    r["grid_points"] = cfg.deviation_grid.size();
    r["x_star"] = num(s.x_star);
    r["se_reliable"] = cfg.n_reps >= 2;
    r["deviation_class"] = "one-sided threshold rules on the configured grid";
    if (cfg.n_reps < 2) rep.notes.push_back("single replication: standard errors are unreliable");
    if (std::isnan(sweep.slope)) rep.notes.push_back("slope undefined: some gap estimates are zero");
    return rep;
}

void check_design_feasible(const MarketParams& m) {
    const double a_prime = m.sigma / 2.0 - m.alpha / m.sigma;
    if (!(a_prime < 0.0))
        throw FeasibilityError("fee design needs a proper stopping law, a' = sigma/2 - alpha/sigma < 0 "
                               "(equivalently sigma^2/2 < alpha); got a' = " + format_double(a_prime));
}

DesignContext read_design_context(const Json& doc) {
    const MarketParams m = read_market(doc, kDynamics);
    check_design_feasible(m);
    return make_design_context(m, get_number_or(doc, "inverse.k_max_log_span", 50.0));
}

HittingLaw read_law(const Json& doc, Json& source) {
    const std::string kind = get_string_or(doc, "fpt.law_source", "threshold");
    source["law_source"] = kind;
    if (kind == "direct") {
        return HittingLaw{get_number(doc, "fpt.a_prime"), get_number(doc, "fpt.b_prime")};
    }
    if (kind == "threshold") {
        const MarketParams m = read_market(doc, {"alpha", "sigma", "beta", "x0"});
        const std::string dir = get_string_or(doc, "fpt.direction", "up");
        if (dir != "up" && dir != "down")
            throw ValidationError("fpt.direction", "expected up or down, got '" + dir + "'");
        return hitting_law_from_threshold(m, get_number(doc, "fpt.x_star"),
                                          dir == "up" ? Direction::up : Direction::down);
    }
    if (kind == "fee") {
        const DesignContext ctx = read_design_context(doc);
        const double K = get_number(doc, "fpt.K");
        source["k_min"] = num(ctx.k_min);
        return law_from_fee(ctx, K);
    }
    if (kind == "nce1") {
        const MarketParams m = read_market(doc, kAllMarket);
        const NceSolution1 s = solve_theta_bar(m);
        source["x_star"] = num(s.x_star);
        return rule_law(m, stopping_rule1(s));
    }
    throw ValidationError("fpt.law_source", "expected threshold, fee, nce1 or direct, got '" + kind + "'");
}

Report cmd_fpt(const Json& doc, const std::string& mode) {
    Report rep;
    rep.command = "fpt " + mode;
    Json source = Json::object();
    const HittingLaw law = read_law(doc, source);
    auto& r = rep.result;
    r.update(source);
    r.update(law_record(law));
    const bool proper = law.a_prime < 0.0 && law.b_prime > 0.0;
    if (mode == "law") {
        r["proper"] = law.a_prime <= 0.0;
        if (proper) {
            const IgParams p = ig_params(law);
            r["ig_mu"] = num(p.mu);
            r["ig_rho"] = num(p.rho);
        }
    } else if (mode == "moments") {
        r["mean"] = num(proper ? tau_mean(law) : (law.b_prime == 0.0 ? 0.0 : HUGE_VAL));
        r["var"] = num(proper ? tau_var(law) : (law.b_prime == 0.0 ? 0.0 : HUGE_VAL));
        if (has(doc, "market.beta")) {
            const double beta = get_number(doc, "market.beta");
            r["discounted_factor"] = num(beta > 0.0 ? discounted_factor(law, beta) : HUGE_VAL);
        }
    } else if (mode == "pdf") {
        std::vector<double> ts;
        if (has(doc, "fpt.t")) {
            ts = get_number_array(doc, "fpt.t");
        } else {
            const double lo = get_number_or(doc, "fpt.t_min", 0.01);
            const double hi = get_number_or(doc, "fpt.t_max", 10.0);
            const auto n = get_uint_or(doc, "fpt.points", 200);
            if (!(lo > 0.0) || !(hi > lo) || n < 2)
                throw ValidationError("fpt.t_min", "need 0 < t_min < t_max and points >= 2");
            for (std::uint64_t i = 0; i < n; ++i)
                ts.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
        }
        rep.table.columns = {"t", "pdf", "cdf"};
        for (double t : ts) rep.table.rows.push_back({num(t), num(hitting_pdf(law, t)), num(hitting_cdf(law, t))});
    } else if (mode == "sample") {
        const auto n = get_uint_or(doc, "fpt.n_samples", 1000);
        const auto seed = get_uint_or(doc, "fpt.seed", 0);
        if (n == 0) throw ValidationError("fpt.n_samples", "must be >= 1");
        rep.seed = seed;
        Stream rng(seed, 0);
        rep.table.columns = {"tau"};
        std::size_t hits = 0;
        double sum = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) {
            const double t = sample_tau(law, rng);
            if (std::isfinite(t)) {
                ++hits;
                sum += t;
            }
            rep.table.rows.push_back({num(t)});
        }
        r["n_samples"] = n;
        r["hit_fraction"] = num(static_cast<double>(hits) / static_cast<double>(n));
        r["mean_finite"] = num(hits ? sum / static_cast<double>(hits) : HUGE_VAL);
    }
    return rep;
}

void add_design_law(Json& r, const DesignContext& ctx, double K) {
    r["k_min"] = num(ctx.k_min);
    if (K > ctx.k_min) {
        const HittingLaw law = law_from_fee(ctx, K);
        r["b_prime"] = num(law.b_prime);
        r["achieved_mean"] = num(tau_mean(law));
        r["achieved_var"] = num(tau_var(law));
    } else {
        r["b_prime"] = num(0.0);
        r["achieved_mean"] = num(0.0);
        r["achieved_var"] = num(0.0);
    }
}

Report cmd_inverse(const Json& doc, const std::string& target, const std::filesystem::path& config_dir) {
    const DesignContext ctx = read_design_context(doc);
    Report rep;
    rep.command = "inverse " + target;
    auto& r = rep.result;
    r["a_prime"] = num(ctx.a_prime);
    r["k2"] = num(ctx.k2);
    if (target == "mean") {
        const double K = fee_for_target_mean(ctx, get_number(doc, "inverse.mu0"));
        r["K"] = num(K);
        add_design_law(r, ctx, K);
    } else if (target == "var") {
        const double K = fee_for_target_variance(ctx, get_number(doc, "inverse.kappa0"));
        r["K"] = num(K);
        add_design_law(r, ctx, K);
    } else if (target == "l2") {
        const double t0 = get_number(doc, "inverse.t0");
        const double K = fee_for_l2(ctx, t0);
        const bool boundary = K == ctx.k_min;
        r["K"] = num(K);
        r["switch_point"] = num(1.0 / (2.0 * ctx.a_prime * ctx.a_prime));
        r["branch"] = boundary ? "boundary" : "interior";
        r["objective"] = num(boundary ? t0 * t0 : l2_deviation(ctx, K, t0));
        add_design_law(r, ctx, K);
        if (boundary) rep.notes.push_back("trivial branch t0 <= 1/(2a'^2): the fee sits at k_min");
    } else if (target == "mixed") {
        const MixedObjectiveSpec spec = read_mixed(doc);
        const MixedSolution s = solve_mixed(ctx, spec);
        r["K"] = num(s.k_opt);
        r["objective"] = num(s.objective);
        r["at_boundary"] = s.at_boundary;
        r["sign_changes"] = s.sign_changes;
        r["theta_constant"] = num(s.theta_constant);
        r["delta1"] = num(s.delta1);
        r["delta2"] = num(s.delta2);
        r["theta_at_delta1"] = num(s.theta_at_delta1);
        r["case_gate"] = num(s.case_gate);
        add_design_law(r, ctx, s.k_opt);
    } else if (target == "kl-fit") {
        if (has(doc, "inverse.samples_file")) {
            std::filesystem::path path = get_string_or(doc, "inverse.samples_file", "");
            // Relative paths missing from the working directory resolve next to the config file.
            if (path.is_relative() && !std::filesystem::exists(path) && !config_dir.empty())
                path = config_dir / path;
            const std::vector<double> samples = read_sample_file(path.string());
            const KlFitResult f = fit_fee_mle(ctx, samples);
            r["method"] = "mle";
            r["n_samples"] = samples.size();
            r["K"] = num(f.k_hat);
            r["divergence"] = num(f.divergence);
            r["risk"] = num(f.risk);
            r["l1_bound"] = num(f.l1_bound);
            r["score_sign_changes"] = f.score_sign_changes;
            add_design_law(r, ctx, f.k_hat);
            if (samples.size() < 2) rep.notes.push_back("divergence needs at least two samples");
        } else if (has(doc, "inverse.target")) {
            const TargetDensity t = read_target(doc);
            const KlFitResult f = fit_fee_kl(ctx, t);
            const BhCheck bh = bh_bound_check(ctx, f.k_hat, t);
            r["method"] = "density";
            r["family"] = family_name(t.family);
            r["K"] = num(f.k_hat);
            r["divergence"] = num(f.divergence);
            r["l1_bound"] = num(f.l1_bound);
            r["l1_distance"] = num(bh.l1_distance);
            r["bh_holds"] = bh.holds;
            r["chain_bound"] = num(bh.chain_bound);
            add_design_law(r, ctx, f.k_hat);
        } else {
            throw ValidationError("inverse.samples_file", "kl-fit needs samples_file or target");
        }
    }
    return rep;
}

struct Overrides {
    std::vector<std::pair<std::string, std::string>> items;
    std::vector<std::string> rest;
};

Overrides split_overrides(int argc, const char* const argv[]) {
    Overrides o;
    for (int i = 0; i < argc; ++i) {
        const std::string a = argv[i];
        if (i > 0 && a.rfind("--", 0) == 0) {
            const std::string body = a.substr(2);
            const auto eq = body.find('=');
            const std::string key = body.substr(0, eq);
            const auto dot = key.find('.');
            if (is_config_section(key.substr(0, dot)) && (dot != std::string::npos || eq != std::string::npos)) {
                if (eq != std::string::npos) {
                    o.items.emplace_back(key, body.substr(eq + 1));
                } else if (i + 1 < argc) {
                    o.items.emplace_back(key, argv[++i]);
                } else {
                    throw ValidationError(key, "override is missing a value");
                }
                continue;
            }
        }
        o.rest.push_back(a);
    }
    return o;
}

int write_report(const Report& rep, const Json& doc, const std::string& format_flag,
                 const std::string& output_flag, std::ostream& out) {
    const Format format =
        parse_format(!format_flag.empty() ? format_flag : get_string_or(doc, "output.format", "json"));
    const std::string path = !output_flag.empty() ? output_flag : get_string_or(doc, "output.path", "");
    std::ostringstream buf;
    emit(buf, rep, format);
    if (path.empty()) {
        out << buf.str();
        return kOk;
    }
    const std::string resolved = resolve_output_path(path);
    std::ofstream f(resolved, std::ios::binary);
    if (!f) throw ValidationError("output.path", "cannot open '" + resolved + "' for writing");
    f << buf.str();
    if (!f) throw ValidationError("output.path", "write to '" + resolved + "' failed");
    return kOk;
}

}  // namespace

int run_cli(int argc, const char* const argv[], std::ostream& out, std::ostream& err) {
    Overrides ov;
    try {
        ov = split_overrides(argc, argv);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    CLI::App app{"Mean-field optimal stopping: equilibrium solvers, population simulation and fee design"};
    app.name(argc > 0 ? argv[0] : "mfstop");
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, format_flag, output_flag;
    app.add_option("-c,--config", config_path, "JSON run configuration");
    app.add_option("-f,--format", format_flag, "json, csv or tsv (overrides output.format)");
    app.add_option("-o,--output", output_flag, "output file (overrides output.path)");
    app.footer("Any config key can be overridden as --section.key=value (e.g. --market.K=2.0);\n--section={...} merges a JSON object into a section");

    auto* roots = app.add_subcommand("roots", "characteristic roots and feasibility flags");
    auto* nce1 = app.add_subcommand("solve-nce1", "Problem I consistency condition");
    auto* nce2 = app.add_subcommand("solve-nce2", "Problem II consistency system");
    auto* sim = app.add_subcommand("simulate", "finite-N population simulation");
    auto* gap = app.add_subcommand("nash-gap", "epsilon-Nash gap sweep over sim.n_values");
    std::string fpt_mode, inverse_target;
    auto* fpt = app.add_subcommand("fpt", "first-passage law of a threshold rule");
    fpt->add_option("mode", fpt_mode, "law, moments, pdf or sample")
        ->required()
        ->check(CLI::IsMember({"law", "moments", "pdf", "sample"}));
    auto* inv = app.add_subcommand("inverse", "transaction fee design");
    inv->add_option("target", inverse_target, "mean, var, l2, mixed or kl-fit")
        ->required()
        ->check(CLI::IsMember({"mean", "var", "l2", "mixed", "kl-fit"}));

    std::vector<const char*> rest_argv;
    for (const auto& s : ov.rest) rest_argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(rest_argv.size()), rest_argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    Json doc = Json::object();
    Report rep;
    try {
        if (!config_path.empty()) doc = load_config_file(config_path);
        for (const auto& [k, v] : ov.items) apply_override(doc, k, v);
        check_keys(doc);
        if (roots->parsed()) rep = cmd_roots(doc, err);
        else if (nce1->parsed()) rep = cmd_solve_nce1(doc);
        else if (nce2->parsed()) rep = cmd_solve_nce2(doc);
        else if (sim->parsed()) rep = cmd_simulate(doc);
        else if (gap->parsed()) rep = cmd_nash_gap(doc);
        else if (fpt->parsed()) rep = cmd_fpt(doc, fpt_mode);
        else if (inv->parsed()) rep = cmd_inverse(doc, inverse_target, std::filesystem::path(config_path).parent_path());
        rep.config = provenance_config(doc);
        return write_report(rep, doc, format_flag, output_flag, out);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InteriorStartViolation& e) {
        err << "error: solver infeasible: " << e.what() << '\n';
        return kSolverError;
    } catch (const MultipleRoots& e) {
        err << "error: solver infeasible: " << e.what() << '\n';
        for (const auto& [lo, hi] : e.brackets())
            err << "  bracket [" << format_double(lo) << ", " << format_double(hi) << "]\n";
        return kSolverError;
    } catch (const SimulationError& e) {
        err << "error: simulation: " << e.what() << '\n';
        return kSimulationError;
    } catch (const FeasibilityError& e) {
        err << "error: design infeasible: " << e.what() << '\n';
        return kDesignError;
    } catch (const UnboundedBelow& e) {
        err << "error: design infeasible: " << e.what() << '\n';
        return kDesignError;
    } catch (const DegenerateSample& e) {
        err << "error: design infeasible: " << e.what() << '\n';
        return kDesignError;
    } catch (const Error& e) {
        err << "error: solver infeasible: " << e.what() << '\n';
        return kSolverError;
    }
}

}  // namespace mfstop::cli
