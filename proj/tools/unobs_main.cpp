#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "unobs/artifacts.hpp"
#include "unobs/errors.hpp"
#include "unobs/scenario.hpp"
#include "unobs/special_functions.hpp"
#include "unobs/spectral_embedding.hpp"

namespace {

unobs::scenario::ScenarioConfig load(const std::string& path) {
    auto cfg = unobs::scenario::parse_config(path);
    unobs::scenario::apply_seed_override(cfg);
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';
    return cfg;
}

int report_config_error(const unobs::ConfigError& e) {
    for (const auto& p : e.problems()) std::cerr << "config error: " << p << '\n';
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Output-feedback stabilization at unobservable targets: simulation and analysis"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int jobs = 1;
    bool svg = false;

    auto* simulate = app.add_subcommand("simulate", "Run every initial condition of a scenario");
    simulate->add_option("--config", config_path, "Scenario file")->required()->check(CLI::ExistingFile);
    simulate->add_option("--out", out_dir, "Output directory")->required();
    simulate->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
    simulate->add_flag("--svg", svg, "Also write |x| and ||eps|| plots");

    auto* analyze = app.add_subcommand("analyze", "Observability and parameter-bound report");
    analyze->add_option("--config", config_path, "Scenario file")->required()->check(CLI::ExistingFile);
    analyze->add_option("--out", out_dir, "Output directory")->required();

    app.add_subcommand("zeros", "Print j0, j1 and nu");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("zeros")) {
            const auto& z = unobs::special::find_zeros();
            std::cout << "j0=" << unobs::artifacts::fmt(z.j0) << '\n'
                      << "j1=" << unobs::artifacts::fmt(z.j1) << '\n'
                      << "nu=" << unobs::artifacts::fmt(unobs::spectral::nu_constant()) << '\n';
            return 0;
        }
        if (app.got_subcommand("analyze")) {
            const auto cfg = load(config_path);
            const auto kv = unobs::scenario::analyze(cfg);
            std::filesystem::create_directories(out_dir);
            const auto path = std::filesystem::path(out_dir) / "analysis.txt";
            unobs::artifacts::write_key_values(path, kv);
            std::cout << unobs::artifacts::format_key_values(kv);
            return 0;
        }
        const auto cfg = load(config_path);
        const auto outcome = unobs::scenario::run_scenario(cfg, out_dir, jobs, svg);
        int passed = 0;
        for (const auto& r : outcome.runs) {
            passed += r.pass ? 1 : 0;
            if (!r.pass) std::cerr << "run " << r.index << " failed: " << r.failure << '\n';
        }
        std::cout << cfg.name << ": " << passed << "/" << outcome.runs.size() << " runs passed\n";
        return outcome.all_pass ? 0 : 1;
    } catch (const unobs::ConfigError& e) {
        return report_config_error(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
