// SPDX-License-Identifier: MIT
#include "cli/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mfstop/errors.hpp"

namespace mfstop::cli {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"market", {"alpha", "sigma", "beta", "x0", "K", "theta", "l1", "l2"}},
        {"profit", {"kind", "c0", "c1", "gamma"}},
        {"sim",
         {"n_agents", "n_reps", "seed", "deviation_grid", "deviation_points", "problem", "workers",
          "step", "t_max", "n_values"}},
        {"fpt",
         {"law_source", "x_star", "direction", "K", "a_prime", "b_prime", "t", "t_min", "t_max",
          "points", "n_samples", "seed"}},
        {"inverse",
         {"mu0", "kappa0", "t0", "gamma1", "gamma2", "utility", "rho", "k_max_log_span",
          "samples_file", "target"}},
        {"output", {"format", "path"}},
    };
    return s;
}

const std::set<std::string> kTargetKeys{"family", "p1", "p2"};

std::vector<std::string> split_dotted(const std::string& dotted) {
    std::vector<std::string> parts;
    std::stringstream ss(dotted);
    std::string p;
    while (std::getline(ss, p, '.')) parts.push_back(p);
    return parts;
}

const Json* find(const Json& doc, const std::string& dotted) {
    const Json* cur = &doc;
    for (const auto& p : split_dotted(dotted)) {
        if (!cur->is_object()) return nullptr;
        auto it = cur->find(p);
        if (it == cur->end()) return nullptr;
        cur = &*it;
    }
    return cur;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

bool is_config_section(const std::string& name) { return schema().count(name) != 0; }

Json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config", "cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("config", std::string("malformed JSON in '") + path + "': " + e.what());
    }
}

void apply_override(Json& doc, const std::string& dotted, const std::string& value) {
    const auto parts = split_dotted(dotted);
    Json parsed;
    try {
        parsed = Json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
        parsed = value;
    }
    if (!doc.is_object()) doc = Json::object();
    if (parts.size() == 1) {
        if (!parsed.is_object()) throw ValidationError(dotted, "section override must be a JSON object");
        Json& section = doc[parts[0]];
        if (section.is_null()) section = Json::object();
        if (!section.is_object()) throw ValidationError(dotted, "not a section");
        section.update(parsed);
        return;
    }
    Json* cur = &doc;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        Json& next = (*cur)[parts[i]];
        if (next.is_null()) next = Json::object();
        if (!next.is_object()) throw ValidationError(dotted, "'" + parts[i] + "' is not a section");
        cur = &next;
    }
    (*cur)[parts.back()] = parsed;
}

void check_keys(const Json& doc) {
    if (!doc.is_object()) throw ValidationError("config", "top level must be an object");
    for (const auto& [section, body] : doc.items()) {
        auto it = schema().find(section);
        if (it == schema().end()) throw ValidationError(section, "unknown key");
        if (!body.is_object()) throw ValidationError(section, "expected an object");
        for (const auto& [key, value] : body.items()) {
            if (!it->second.count(key)) throw ValidationError(section + "." + key, "unknown key");
            if (section == "inverse" && key == "target") {
                if (!value.is_object()) throw ValidationError("inverse.target", "expected an object");
                for (const auto& [tk, tv] : value.items()) {
                    (void)tv;
                    if (!kTargetKeys.count(tk))
                        throw ValidationError("inverse.target." + tk, "unknown key");
                }
            }
        }
    }
}

bool has(const Json& doc, const std::string& dotted) { return find(doc, dotted) != nullptr; }

double get_number(const Json& doc, const std::string& dotted) {
    const Json* v = find(doc, dotted);
    if (v == nullptr) throw ValidationError(dotted, "required field is missing");
    if (!v->is_number()) throw ValidationError(dotted, "expected a number, got " + v->dump());
    return v->get<double>();
}

double get_number_or(const Json& doc, const std::string& dotted, double fallback) {
    return has(doc, dotted) ? get_number(doc, dotted) : fallback;
}

std::string get_string_or(const Json& doc, const std::string& dotted, const std::string& fallback) {
    const Json* v = find(doc, dotted);
    if (v == nullptr) return fallback;
    if (!v->is_string()) throw ValidationError(dotted, "expected a string, got " + v->dump());
    return v->get<std::string>();
}

std::uint64_t get_uint_or(const Json& doc, const std::string& dotted, std::uint64_t fallback) {
    const Json* v = find(doc, dotted);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0))
        throw ValidationError(dotted, "expected a non-negative integer, got " + v->dump());
    return v->get<std::uint64_t>();
}

std::vector<double> get_number_array(const Json& doc, const std::string& dotted) {
    const Json* v = find(doc, dotted);
    if (v == nullptr) throw ValidationError(dotted, "required field is missing");
    if (!v->is_array()) throw ValidationError(dotted, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
        if (!e.is_number()) throw ValidationError(dotted, "expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

MarketParams read_market(const Json& doc, const std::vector<std::string>& required) {
    for (const auto& r : required)
        if (!has(doc, "market." + r)) throw ValidationError("market." + r, "required field is missing");
    MarketParams m;
    m.alpha = get_number_or(doc, "market.alpha", m.alpha);
    m.sigma = get_number_or(doc, "market.sigma", m.sigma);
    m.beta = get_number_or(doc, "market.beta", m.beta);
    m.x0 = get_number_or(doc, "market.x0", m.x0);
    m.K = get_number_or(doc, "market.K", m.K);
    m.theta = get_number_or(doc, "market.theta", m.theta);
    m.l1 = get_number_or(doc, "market.l1", m.l1);
    m.l2 = get_number_or(doc, "market.l2", m.l2);
    try {
        validate(m);
    } catch (const ValidationError& e) {
        throw ValidationError("market." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
    }
    return m;
}

ProfitFunction read_profit(const Json& doc) {
    if (!has(doc, "profit")) throw ValidationError("profit", "required section is missing");
    ProfitFunction f;
    const std::string kind = get_string_or(doc, "profit.kind", "affine");
    if (kind == "affine") {
        f.kind = ProfitKind::affine;
        if (has(doc, "profit.gamma")) throw ValidationError("profit.gamma", "not used by an affine profit");
    } else if (kind == "power") {
        f.kind = ProfitKind::power;
        f.gamma = get_number(doc, "profit.gamma");
    } else {
        throw ValidationError("profit.kind", "expected affine or power, got '" + kind + "'");
    }
    f.c0 = get_number(doc, "profit.c0");
    f.c1 = get_number(doc, "profit.c1");
    try {
        validate(f);
    } catch (const ValidationError& e) {
        throw ValidationError("profit." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
    }
    return f;
}

SimConfig read_sim(const Json& doc) {
    SimConfig c;
    c.n_agents = get_uint_or(doc, "sim.n_agents", c.n_agents);
    c.n_reps = get_uint_or(doc, "sim.n_reps", c.n_reps);
    c.seed = get_uint_or(doc, "sim.seed", c.seed);
    c.workers = static_cast<unsigned>(get_uint_or(doc, "sim.workers", c.workers));
    c.step = get_number_or(doc, "sim.step", c.step);
    c.t_max = get_number_or(doc, "sim.t_max", c.t_max);
    const std::string problem = get_string_or(doc, "sim.problem", "I");
    if (problem == "I") c.problem = Problem::I;
    else if (problem == "II") c.problem = Problem::II;
    else throw ValidationError("sim.problem", "expected I or II, got '" + problem + "'");
    if (has(doc, "sim.deviation_grid") && !wants_default_grid(doc))
        c.deviation_grid = get_number_array(doc, "sim.deviation_grid");
    return c;
}

bool wants_default_grid(const Json& doc) {
    const Json* v = find(doc, "sim.deviation_grid");
    if (v == nullptr) return false;
    if (v->is_string()) {
        if (v->get<std::string>() != "default")
            throw ValidationError("sim.deviation_grid", "expected an array of thresholds or \"default\"");
        return true;
    }
    return false;
}

std::vector<std::size_t> read_n_values(const Json& doc) {
    const Json* v = find(doc, "sim.n_values");
    if (v == nullptr) throw ValidationError("sim.n_values", "required field is missing");
    if (!v->is_array() || v->empty()) throw ValidationError("sim.n_values", "expected a nonempty array of integers");
    std::vector<std::size_t> out;
    for (const auto& e : *v) {
        if (!e.is_number_unsigned()) throw ValidationError("sim.n_values", "expected positive integers");
        out.push_back(e.get<std::size_t>());
    }
    return out;
}

MixedObjectiveSpec read_mixed(const Json& doc) {
    MixedObjectiveSpec s;
    s.gamma1 = get_number(doc, "inverse.gamma1");
    s.gamma2 = get_number(doc, "inverse.gamma2");
    s.t0 = get_number(doc, "inverse.t0");
    const std::string u = get_string_or(doc, "inverse.utility", "linear");
    if (u == "linear") {
        s.utility = UtilityKind::linear;
    } else if (u == "power") {
        s.utility = UtilityKind::power;
        s.rho = get_number(doc, "inverse.rho");
    } else {
        throw ValidationError("inverse.utility", "expected linear or power, got '" + u + "'");
    }
    try {
        validate(s);
    } catch (const ValidationError& e) {
        throw ValidationError("inverse." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
    }
    return s;
}

TargetDensity read_target(const Json& doc) {
    TargetDensity t;
    const std::string fam = get_string_or(doc, "inverse.target.family", "");
    if (fam == "inverse_gaussian") t.family = TargetFamily::inverse_gaussian;
    else if (fam == "lognormal") t.family = TargetFamily::lognormal;
    else if (fam == "gamma") t.family = TargetFamily::gamma;
    else throw ValidationError("inverse.target.family",
                               "expected inverse_gaussian, lognormal or gamma, got '" + fam + "'");
    t.p1 = get_number(doc, "inverse.target.p1");
    t.p2 = get_number(doc, "inverse.target.p2");
    try {
        validate(t);
    } catch (const ValidationError& e) {
        throw ValidationError("inverse.target", std::string(e.what()).substr(e.field().size() + 2));
    }
    return t;
}

std::vector<double> read_sample_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("inverse.samples_file", "cannot open '" + path + "'");
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    bool seen_data = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string s = trim(line);
        if (s.empty()) continue;
        if (!seen_data && s == "tau") {
            seen_data = true;
            continue;
        }
        seen_data = true;
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            throw ValidationError("inverse.samples_file",
                                  "line " + std::to_string(lineno) + ": not a decimal: '" + s + "'");
        if (!(v > 0.0) || !std::isfinite(v))
            throw ValidationError("inverse.samples_file",
                                  "line " + std::to_string(lineno) + ": samples must be finite and > 0");
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError("inverse.samples_file", "no samples in '" + path + "'");
    return out;
}

std::string resolve_output_path(const std::string& path) {
    const std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    if (const char* dir = std::getenv("MFSTOP_OUTPUT_DIR"); dir != nullptr && *dir != '\0')
        return (std::filesystem::path(dir) / p).string();
    return path;
}

Json provenance_config(const Json& doc) {
    Json out = doc;
    out.erase("output");
    if (out.contains("sim")) out["sim"].erase("workers");
    if (out.contains("sim") && out["sim"].empty()) out.erase("sim");
    return out;
}

}  // namespace mfstop::cli
