#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
};

Result run(const std::string& args, const std::string& env = "") {
    const fs::path log = fs::temp_directory_path() / "unobs_cli_test.log";
    const std::string cmd = env + " \"" UNOBS_CLI_PATH "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / ("unobs_cli_" + name + ".cfg");
    std::ofstream(p) << text;
    return p;
}

fs::path out_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("unobs_cli_out_" + name);
    fs::remove_all(p);
    return p;
}

const std::string kPass = R"(strategy = finite
runs = 2
plant.poles = -1, -2
ic.radius_x = 0.3
ic.radius_xhat = 0.3
params.alpha = 10
integrator.step = 0.01
)";

}  // namespace

TEST_CASE("zeros prints the constants", "[cli]") {
    const auto r = run("zeros");
    CHECK(r.code == 0);
    CHECK(r.out.find("j0=2.4048255576957") != std::string::npos);
    CHECK(r.out.find("j1=1.8411837813406") != std::string::npos);
    CHECK(r.out.find("nu=1.775766903322") != std::string::npos);
}

TEST_CASE("simulate exit codes", "[cli]") {
    const auto good = write_config("pass", kPass + "integrator.horizon = 10\nmetrics.x_threshold = 5\n");
    const auto d1 = out_dir("pass");
    auto r = run("simulate --config \"" + good.string() + "\" --out \"" + d1.string() + "\" --jobs 2 --svg");
    CHECK(r.code == 0);
    CHECK(fs::exists(d1 / "summary.txt"));
    CHECK(fs::exists(d1 / "run_001.csv"));
    CHECK(fs::exists(d1 / "run_001.svg"));

    const auto strict = write_config("fail", kPass + "integrator.horizon = 0.1\nmetrics.x_threshold = 1e-6\n");
    r = run("simulate --config \"" + strict.string() + "\" --out \"" + out_dir("fail").string() + "\"");
    CHECK(r.code == 1);

    const auto bad = write_config("bad", "strategy = spectral\nparams.delta = 0.1\nparams.Delta = 4.0\n");
    r = run("simulate --config \"" + bad.string() + "\" --out \"" + out_dir("bad").string() + "\"");
    CHECK(r.code == 2);
    CHECK(r.out.find("params.Delta") != std::string::npos);
    CHECK(r.out.find("Delta must lie in (0, pi)") != std::string::npos);

    r = run("simulate --config /nonexistent/file.cfg --out \"" + out_dir("missing").string() + "\"");
    CHECK(r.code != 0);
}

TEST_CASE("seed override changes the draws", "[cli]") {
    const auto cfg = write_config("seed", kPass + "integrator.horizon = 0.1\nmetrics.require_eps_decrease = false\nmetrics.x_threshold = 10\n");
    const auto a = out_dir("seed_a"), b = out_dir("seed_b");
    run("simulate --config \"" + cfg.string() + "\" --out \"" + a.string() + "\"", "UNOBS_STAB_SEED=99");
    run("simulate --config \"" + cfg.string() + "\" --out \"" + b.string() + "\"", "UNOBS_STAB_SEED=99");
    std::ifstream sa(a / "summary.txt");
    std::string all((std::istreambuf_iterator<char>(sa)), {});
    CHECK(all.find("seed=99") != std::string::npos);
    std::ifstream ca(a / "run_000.csv"), cb(b / "run_000.csv");
    std::string xa((std::istreambuf_iterator<char>(ca)), {}), xb((std::istreambuf_iterator<char>(cb)), {});
    CHECK(xa == xb);
}

TEST_CASE("analyze writes a report", "[cli]") {
    const auto cfg = write_config("analyze", kPass + "integrator.horizon = 1\nparams.delta = 0\nanalysis.detq_trials = 5\n");
    const auto d = out_dir("analyze");
    const auto r = run("analyze --config \"" + cfg.string() + "\" --out \"" + d.string() + "\"");
    CHECK(r.code == 0);
    CHECK(fs::exists(d / "analysis.txt"));
    CHECK(r.out.find("Q.singular=1") != std::string::npos);
}

TEST_CASE("usage errors", "[cli]") {
    CHECK(run("").code != 0);
    CHECK(run("simulate").code != 0);
    CHECK(run("frobnicate").code != 0);
}
