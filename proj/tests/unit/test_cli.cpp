// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli/commands.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out, err;
    json doc() const { return json::parse(out); }
};

Run run(std::initializer_list<std::string> args) {
    std::vector<std::string> store{"mfstop"};
    store.insert(store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : store) argv.push_back(s.c_str());
    std::ostringstream out, err;
    const int code = mfstop::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path temp_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("mfstop_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const std::string kMarket1 = "--market={\"alpha\":0,\"sigma\":1,\"beta\":1,\"x0\":1,\"K\":2,\"theta\":0,\"l1\":0,\"l2\":1}";
const std::string kDesign = "--market={\"alpha\":1,\"sigma\":1,\"beta\":3,\"x0\":1}";

}  // namespace

TEST_CASE("roots") {
    auto r = run({"roots", "--market.alpha=1", "--market.sigma=1", "--market.beta=3"});
    REQUIRE(r.code == 0);
    auto d = r.doc()["result"];
    CHECK(d["k1"].get<double>() == doctest::Approx(-3));
    CHECK(d["k2"].get<double>() == doctest::Approx(2));
    CHECK(d["a_prime"].get<double>() == doctest::Approx(-0.5));
    CHECK(d["k_min"].get<double>() == doctest::Approx(0.5));

    r = run({"roots", "--market.alpha=0", "--market.sigma=1", "--market.beta=1"});
    REQUIRE(r.code == 0);
    CHECK(r.doc()["result"]["a_prime"].get<double>() == doctest::Approx(0.5));
    CHECK(r.err.find("inverse-design infeasible (a'>=0)") != std::string::npos);

    r = run({"roots", "--market.alpha=1", "--market.beta=3"});
    CHECK(r.code == 2);
    CHECK(r.err.find("market.sigma") != std::string::npos);
}

TEST_CASE("strict keys") {
    auto r = run({"roots", "--market.alpha=1", "--market.sigma=1", "--market.beta=3", "--market.gamma=1"});
    CHECK(r.code == 2);
    CHECK(r.err.find("market.gamma") != std::string::npos);
    const fs::path d = temp_dir("strict");
    std::ofstream(d / "c.json") << R"({"market": {"alpha": 1, "sigma": 1, "beta": 3}, "sim": {"n_agent": 4}})";
    r = run({"-c", (d / "c.json").string(), "roots"});
    CHECK(r.code == 2);
    CHECK(r.err.find("sim.n_agent") != std::string::npos);
    std::ofstream(d / "bad.json") << "{\"market\": ";
    CHECK(run({"-c", (d / "bad.json").string(), "roots"}).code == 2);
    CHECK(run({"solve-nce3"}).code == 2);
}

TEST_CASE("solvers through the command line") {
    auto r = run({"solve-nce1", kMarket1});
    REQUIRE(r.code == 0);
    auto d = r.doc()["result"];
    CHECK(d["theta_bar"].get<double>() == doctest::Approx(2).epsilon(1e-12));
    CHECK(d["x_star"].get<double>() == doctest::Approx(2).epsilon(1e-12));
    CHECK(d["value_at_x0"].get<double>() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(d["limit_payoff"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(d["residual"].get<double>()) < 1e-10);

    r = run({"solve-nce1", kMarket1, "--market.theta=1", "--market.x0=5"});
    CHECK(r.code == 3);
    CHECK(r.err.find("x*=") != std::string::npos);

    const std::string m2 = "--market={\"alpha\":1,\"sigma\":1,\"beta\":3,\"x0\":1,\"K\":0.9808429118773945,"
                           "\"theta\":0,\"l1\":0,\"l2\":1}";
    r = run({"solve-nce2", m2, "--profit={\"kind\":\"affine\",\"c0\":-1,\"c1\":1}"});
    REQUIRE(r.code == 0);
    d = r.doc()["result"];
    CHECK_FALSE(d["no_stopping"].get<bool>());
    CHECK(std::abs(d["x_star"].get<double>() - 0.25) < 1e-4);
    for (const auto& v : d["residuals"]) CHECK(std::abs(v.get<double>()) < 1e-8);

    r = run({"solve-nce2", m2, "--market.K=100", "--profit={\"kind\":\"affine\",\"c0\":-1,\"c1\":1}"});
    REQUIRE(r.code == 0);
    CHECK(r.doc()["result"]["no_stopping"].get<bool>());
    r = run({"solve-nce2", m2, "--profit={\"kind\":\"affine\",\"c0\":0,\"c1\":1}"});
    REQUIRE(r.code == 0);
    CHECK(r.doc()["result"]["no_stopping"].get<bool>());
    CHECK(run({"solve-nce2", m2}).code == 2);
}

TEST_CASE("simulation exit codes and flags") {
    auto r = run({"simulate", kMarket1, "--sim.n_agents=10", "--sim.n_reps=4"});
    CHECK(r.code == 4);
    r = run({"simulate", kMarket1, "--market.l1=0.5", "--sim.n_agents=10", "--sim.n_reps=1"});
    REQUIRE(r.code == 0);
    CHECK_FALSE(r.doc()["result"]["se_reliable"].get<bool>());
    CHECK(run({"simulate", kMarket1, "--market.l1=0.5", "--sim.n_agents=0"}).code == 4);
}

TEST_CASE("gap sweep") {
    auto r = run({"nash-gap", kMarket1, "--market.l1=0.5", "--sim.n_reps=200", "--sim.seed=42",
                  "--sim.deviation_grid=default", "--sim.n_values=[16,64,256,1024]"});
    REQUIRE(r.code == 0);
    const auto d = r.doc();
    const double slope = d["result"]["slope"].get<double>();
    CHECK(slope >= -0.75);
    CHECK(slope <= -0.25);
    CHECK(d["table"]["rows"].size() == 4);
}

TEST_CASE("outputs do not depend on the worker count") {
    const std::vector<std::string> base{kMarket1, "--market.l1=0.5", "--sim.n_agents=64", "--sim.n_reps=50",
                                        "--sim.seed=9", "--sim.deviation_grid=default"};
    auto go = [&](const std::string& cmd, const std::string& workers, const std::string& fmt) {
        std::vector<std::string> store{"mfstop", cmd, "--sim.workers=" + workers, "-f", fmt};
        store.insert(store.end(), base.begin(), base.end());
        if (cmd == "nash-gap") store.push_back("--sim.n_values=[8,32]");
        std::vector<const char*> argv;
        for (const auto& s : store) argv.push_back(s.c_str());
        std::ostringstream out, err;
        REQUIRE(mfstop::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err) == 0);
        return out.str();
    };
    for (const std::string cmd : {"simulate", "nash-gap"}) {
        for (const std::string fmt : {"json", "csv"}) {
            const std::string one = go(cmd, "1", fmt);
            CHECK(one == go(cmd, "1", fmt));
            CHECK(one == go(cmd, "4", fmt));
            CHECK(one == go(cmd, "0", fmt));
        }
    }
}

TEST_CASE("inverse design through the command line") {
    auto r = run({"inverse", "mean", kDesign, "--inverse.mu0=1"});
    REQUIRE(r.code == 0);
    auto d = r.doc()["result"];
    CHECK(d["K"].get<double>() == doctest::Approx(std::numbers::e / 2).epsilon(1e-14));
    CHECK(d["achieved_mean"].get<double>() == doctest::Approx(1).epsilon(1e-12));
    CHECK(d["k_min"].get<double>() == doctest::Approx(0.5));

    r = run({"inverse", "l2", kDesign, "--inverse.t0=1"});
    REQUIRE(r.code == 0);
    CHECK(r.doc()["result"]["K"].get<double>() == 0.5);
    CHECK(r.out.find("trivial branch t0 <= 1/(2a'^2)") != std::string::npos);

    r = run({"inverse", "var", kDesign, "--inverse.kappa0=4"});
    REQUIRE(r.code == 0);
    CHECK(r.doc()["result"]["K"].get<double>() == doctest::Approx(std::numbers::e / 2).epsilon(1e-14));

    r = run({"inverse", "mean", "--market={\"alpha\":0,\"sigma\":1,\"beta\":1}", "--inverse.mu0=1"});
    CHECK(r.code == 5);
    CHECK(r.err.find("a'") != std::string::npos);
    CHECK(run({"inverse", "mean", kDesign, "--inverse.mu0=-1"}).code != 0);
    CHECK(run({"inverse", "mixed", kDesign, "--inverse.t0=3", "--inverse.gamma1=1", "--inverse.gamma2=0.5",
               "--inverse.utility=power", "--inverse.rho=0.5"})
              .code == 0);
}

TEST_CASE("kl-fit reads a generated sample file") {
    const fs::path d = temp_dir("klfit");
    const std::string samples = (d / "tau.csv").string();
    auto r = run({"fpt", "sample", kDesign, "--fpt.law_source=fee", "--fpt.K=1.3591409142295225",
                  "--fpt.n_samples=10000", "--fpt.seed=5", "-f", "csv", "-o", samples});
    REQUIRE(r.code == 0);
    r = run({"inverse", "kl-fit", kDesign, "--inverse.samples_file=" + samples});
    REQUIRE(r.code == 0);
    const double k = r.doc()["result"]["K"].get<double>();
    CHECK(std::abs(k - std::numbers::e / 2) / (std::numbers::e / 2) < 0.05);

    std::ofstream(d / "same.txt") << "# constant\n1.0\n1.0\n1.0\n";
    CHECK(run({"inverse", "kl-fit", kDesign, "--inverse.samples_file=" + (d / "same.txt").string()}).code == 5);
    std::ofstream(d / "neg.txt") << "1.0\n-2.0\n";
    CHECK(run({"inverse", "kl-fit", kDesign, "--inverse.samples_file=" + (d / "neg.txt").string()}).code == 2);
}

TEST_CASE("sampling is reproducible") {
    auto a = run({"fpt", "sample", kDesign, "--fpt.law_source=fee", "--fpt.K=2", "--fpt.n_samples=500",
                  "--fpt.seed=3", "-f", "tsv"});
    auto b = run({"fpt", "sample", kDesign, "--fpt.law_source=fee", "--fpt.K=2", "--fpt.n_samples=500",
                  "--fpt.seed=3", "-f", "tsv"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("# command: fpt sample\n", 0) == 0);
}

TEST_CASE("numbers round-trip through the text output") {
    const auto csv = run({"solve-nce1", kMarket1, "--market.l1=0.5", "-f", "csv"});
    const auto js = run({"solve-nce1", kMarket1, "--market.l1=0.5"});
    REQUIRE(csv.code == 0);
    REQUIRE(js.code == 0);
    const auto result = js.doc()["result"];
    std::istringstream in(csv.out);
    std::string line;
    int compared = 0;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (line.empty() || line[0] == '#' || comma == std::string::npos) continue;
        const std::string key = line.substr(0, comma);
        if (!result.contains(key) || !result[key].is_number()) continue;
        CHECK(std::stod(line.substr(comma + 1)) == result[key].get<double>());
        ++compared;
    }
    CHECK(compared > 5);
}

TEST_CASE("output directory from the environment") {
    const fs::path d = temp_dir("outdir");
    ::setenv("MFSTOP_OUTPUT_DIR", d.string().c_str(), 1);
    auto r = run({"roots", "--market.alpha=1", "--market.sigma=1", "--market.beta=3", "-o", "roots.json"});
    ::unsetenv("MFSTOP_OUTPUT_DIR");
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    REQUIRE(fs::exists(d / "roots.json"));
    CHECK(json::parse(slurp(d / "roots.json"))["result"]["k2"].get<double>() == doctest::Approx(2));
}

TEST_CASE("shipped example configs run") {
    const char* dir = std::getenv("MFSTOP_EXAMPLES_DIR");
    if (dir == nullptr) return;
    const fs::path e(dir);
    const std::vector<std::pair<std::string, std::vector<std::string>>> cases{
        {"roots.json", {"roots"}},
        {"nce1.json", {"solve-nce1"}},
        {"nce2.json", {"solve-nce2"}},
        {"simulate.json", {"simulate"}},
        {"nash_gap.json", {"nash-gap"}},
        {"fpt_sample.json", {"fpt", "sample"}},
        {"inverse_mean.json", {"inverse", "mean"}},
        {"inverse_l2.json", {"inverse", "l2"}},
        {"inverse_mixed.json", {"inverse", "mixed"}},
        {"kl_fit.json", {"inverse", "kl-fit"}},
    };
    for (const auto& [file, cmd] : cases) {
        CAPTURE(file);
        std::vector<std::string> store{"mfstop", "-c", (e / file).string()};
        store.insert(store.end(), cmd.begin(), cmd.end());
        std::vector<const char*> argv;
        for (const auto& s : store) argv.push_back(s.c_str());
        std::ostringstream out, err;
        CHECK(mfstop::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err) == 0);
        CHECK(err.str().empty());
    }
}
