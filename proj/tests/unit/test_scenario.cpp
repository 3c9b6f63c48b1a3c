#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "unobs/artifacts.hpp"
#include "unobs/errors.hpp"
#include "unobs/scenario.hpp"

using namespace unobs;
using namespace unobs::scenario;
namespace fs = std::filesystem;

namespace {

const std::string kFinite = R"(# finite loop on the rotation plant
name = fin
strategy = finite
seed = 7
runs = 3
plant.poles = -1, -2
ic.radius_x = 0.5
ic.radius_xhat = 0.5
integrator.step = 0.01
integrator.horizon = 2
)";

const std::string kSpectral = R"(name = spec
strategy = spectral
seed = 3
runs = 2
output.kind = j2_cos2theta
output.mu = 0.5
params.delta = 0.05
params.Delta = 0.1
params.N = 12
integrator.step = 0.01
integrator.horizon = 1
)";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("unobs_test_scenario_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::vector<std::string> config_errors(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.problems();
    }
    return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
    for (const auto& s : v) {
        if (s.find(needle) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("valid configs parse", "[config]") {
    const auto fin = parse_config_text(kFinite);
    CHECK(fin.strategy == Strategy::Finite);
    CHECK(fin.name == "fin");
    CHECK(fin.seed == 7);
    CHECK(fin.runs == 3);
    CHECK(fin.integrator.method == sim::Method::Rk4Coupled);
    CHECK(fin.delta0 > 0.0);
    CHECK(fin.fin.delta == Catch::Approx(0.5 * fin.delta0));
    CHECK(fin.warnings.empty());

    const auto sp = parse_config_text(kSpectral);
    CHECK(sp.strategy == Strategy::Spectral);
    CHECK(sp.output.kind == spectral::OutputKind::J2Cos2Theta);
    CHECK(sp.spec.mu == 0.5);
    CHECK(sp.spec.Delta == 0.1);
    CHECK(sp.spec.N == 12);
    CHECK_FALSE(sp.radii.has_value());
}

TEST_CASE("Delta outside (0, pi) is rejected with its key", "[config]") {
    const auto errs = config_errors(kSpectral + "params.Delta = 4.0\n");
    // duplicate key and the range check both name params.Delta
    REQUIRE_FALSE(errs.empty());
    const auto single = config_errors(std::string(R"(strategy = spectral
params.delta = 0.05
params.Delta = 4.0
)"));
    REQUIRE(single.size() == 1);
    CHECK(single[0].rfind("params.Delta:", 0) == 0);
    CHECK(single[0].find("Delta must lie in (0, pi)") != std::string::npos);
}

TEST_CASE("every problem is reported", "[config]") {
    const auto errs = config_errors(R"(strategy = finite
runs = 0
integrator.step = -1
params.alpha = abc
bogus.key = 1
)");
    CHECK(any_contains(errs, "runs:"));
    CHECK(any_contains(errs, "integrator.step:"));
    CHECK(any_contains(errs, "params.alpha: expected a real number"));
    CHECK(any_contains(errs, "bogus.key"));
    CHECK(errs.size() >= 4);

    CHECK(any_contains(config_errors("runs = 1\n"), "strategy"));
    CHECK(any_contains(config_errors("strategy = finite\nstrategy = finite\n"), "strategy"));
    CHECK(any_contains(config_errors("strategy = finite\nparams.Delta = 0.1\n"), "params.Delta"));
    CHECK(any_contains(config_errors("strategy = finite\nplant.poles = 1, 2\n"), "Hurwitz"));
    CHECK(any_contains(config_errors("strategy = sideways\n"), "strategy"));
}

TEST_CASE("delta at or above delta0 warns", "[config]") {
    const auto cfg = parse_config_text(kFinite + "params.delta = 100\n");
    REQUIRE_FALSE(cfg.warnings.empty());
    CHECK(any_contains(cfg.warnings, "delta0"));
    const auto zero = parse_config_text(kFinite + "params.delta_fraction = 0\n");
    CHECK(zero.fin.delta == 0.0);
}

TEST_CASE("seed override from the environment", "[config]") {
    auto cfg = parse_config_text(kFinite);
    ::setenv("UNOBS_STAB_SEED", "12345", 1);
    apply_seed_override(cfg);
    CHECK(cfg.seed == 12345);
    ::setenv("UNOBS_STAB_SEED", "twelve", 1);
    CHECK_THROWS_AS(apply_seed_override(cfg), ConfigError);
    ::unsetenv("UNOBS_STAB_SEED");
    auto other = parse_config_text(kFinite);
    apply_seed_override(other);
    CHECK(other.seed == 7);
}

TEST_CASE("initial conditions are seeded draws inside the balls", "[ic]") {
    auto cfg = parse_config_text(kFinite);
    cfg.runs = 200;
    const auto a = initial_conditions(cfg);
    const auto b = initial_conditions(cfg);
    REQUIRE(a.size() == 200);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x0 == b[i].x0);
        CHECK(a[i].xhat0 == b[i].xhat0);
        CHECK(a[i].x0.norm() <= cfg.radius_x);
        CHECK(a[i].xhat0.norm() <= cfg.radius_xhat);
    }
    cfg.seed = 8;
    CHECK(initial_conditions(cfg)[0].x0 != a[0].x0);

    const auto listed = parse_config_text(kFinite + "ic.list = 0.1 0.2 0.3 0.4; 0 0 0 0\n");
    const auto ics = initial_conditions(listed);
    REQUIRE(ics.size() == 2);
    CHECK(ics[0].x0(1) == 0.2);
    CHECK(ics[0].xhat0(0) == 0.3);
    CHECK(ics[1].x0.norm() == 0.0);
}

TEST_CASE("equilibrium run writes a CSV of zeros", "[artifacts]") {
    const auto cfg = parse_config_text(kFinite + "ic.list = 0 0 0 0\n");
    const auto dir = fresh_dir("zeros");
    const auto outcome = run_scenario(cfg, dir, 1, false);
    REQUIRE(outcome.runs.size() == 1);
    std::ifstream in(dir / "run_000.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,x1,x2,u,eps_norm,c_eps_abs");
    int rows = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        while (std::getline(ss, cell, ',')) CHECK(cell == "0");
        ++rows;
    }
    CHECK(rows == 201);
}

TEST_CASE("CSV values carry 17 significant digits", "[artifacts]") {
    CHECK(artifacts::fmt(0.1) == "0.10000000000000001");
    CHECK(artifacts::fmt(1.0) == "1");
    CHECK(std::stod(artifacts::fmt(1.0 / 3.0)) == 1.0 / 3.0);

    const auto cfg = parse_config_text(kSpectral);
    const auto dir = fresh_dir("digits");
    run_scenario(cfg, dir, 1, true);
    std::ifstream in(dir / "run_000.csv");
    std::string header, row0, row1;
    std::getline(in, header);
    std::getline(in, row0);
    std::getline(in, row1);
    CHECK(header == "t,x1,x2,u,eps_norm,c_eps_abs,weak_eps");
    CHECK(row1.rfind("0.01,", 0) == 0);
    CHECK(fs::exists(dir / "run_000.svg"));
    CHECK(slurp(dir / "run_000.svg").find("<polyline") != std::string::npos);
}

TEST_CASE("reruns are byte-identical and independent of the job count", "[artifacts]") {
    const auto cfg = parse_config_text(kSpectral);
    const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
    const auto oa = run_scenario(cfg, a, 1, false);
    const auto ob = run_scenario(cfg, b, 2, false);
    REQUIRE(oa.files.size() == ob.files.size());
    for (int i = 0; i < cfg.runs; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "run_%03d.csv", i);
        CHECK(slurp(a / name) == slurp(b / name));
    }
    CHECK(slurp(a / "summary.txt") == slurp(b / "summary.txt"));
}

TEST_CASE("summary is key=value lines", "[artifacts]") {
    const auto cfg = parse_config_text(kFinite);
    const auto dir = fresh_dir("summary");
    const auto outcome = run_scenario(cfg, dir, 1, false);
    std::ifstream in(dir / "summary.txt");
    std::string line;
    std::map<std::string, std::string> kv;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        REQUIRE(eq != std::string::npos);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    CHECK(kv.at("scenario") == "fin");
    CHECK(kv.at("strategy") == "finite");
    CHECK(kv.at("seed") == "7");
    CHECK(kv.count("run.0.pass") == 1);
    CHECK(kv.at("all_pass") == (outcome.all_pass ? "1" : "0"));
}

TEST_CASE("analysis of a degenerate finite config reports a singular Q", "[analyze]") {
    const auto cfg = parse_config_text(kFinite + "params.delta = 0\nanalysis.detq_trials = 10\n");
    std::map<std::string, std::string> kv;
    for (const auto& [k, v] : analyze(cfg)) kv[k] = v;
    CHECK(kv.at("Q.singular") == "1");
    CHECK(kv.count("detq.max_rel_err") == 1);
}

TEST_CASE("analysis of a spectral config sweeps the Gramian", "[analyze]") {
    const auto cfg = parse_config_text(kSpectral + "analysis.gramian_N = 4\nanalysis.gramian_steps = 200\n");
    std::map<std::string, std::string> kv;
    for (const auto& [k, v] : analyze(cfg)) kv[k] = v;
    for (const char* u : {"0", "0.10000000000000001", "0.5"}) {
        INFO(u);
        CHECK(kv.count(std::string("gramian.u=") + u + ".lambda_min") == 1);
    }
    CHECK(kv.count("umax") == 1);
}
