#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "unobs/finite_embedding.hpp"
#include "unobs/observability.hpp"
#include "unobs/sim_engine.hpp"
#include "unobs/spectral_embedding.hpp"

namespace unobs::scenario {

enum class Strategy { Finite, Spectral };

struct InitialCondition {
    Vector x0;
    Vector xhat0;
};

struct Thresholds {
    double window = 0.1;
    double x_max = 1e-3;        // trailing-window max |x| must stay below
    double c_eps_max = 0.0;     // final |C eps| bound, 0 disables
    bool require_eps_decrease = true;
};

struct AnalysisConfig {
    int detq_trials = 100;
    std::vector<double> gramian_u = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    double gramian_T = 6.283185307179586;
    int gramian_N = 12;
    int gramian_steps = 2000;
    int f_ell_L = 8;
};

struct ScenarioConfig {
    std::string name = "scenario";
    Strategy strategy = Strategy::Finite;
    std::uint64_t seed = 0;
    int runs = 1;

    finite::PlantSpec plant = finite::rotation_plant();
    std::vector<Complex> poles;
    GainMatrix K;

    // finite strategy
    finite::FinParams fin;
    double rho = 0.0;
    double delta0 = 0.0;

    // spectral strategy
    spectral::OutputSpec output;
    spectral::SpectralParams spec;
    std::optional<observability::BoundParams> radii;  // set when delta/Delta come from choose_radii
    double R0 = 1.0;

    double radius_x = 1.0;
    double radius_xhat = 1.0;
    std::vector<InitialCondition> explicit_ics;

    sim::IntegratorConfig integrator;
    Thresholds thresholds;
    AnalysisConfig analysis;

    std::vector<std::string> warnings;
};

/// Parses and validates the flat key-value format; throws ConfigError listing every problem.
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig parse_config(const std::filesystem::path& path);

/// Applies UNOBS_STAB_SEED when set; throws ConfigError when it is not an unsigned integer.
void apply_seed_override(ScenarioConfig& cfg);

/// Explicit list when given, otherwise `runs` seeded draws uniform in B(0, radius_x) x B(0, radius_xhat).
std::vector<InitialCondition> initial_conditions(const ScenarioConfig& cfg);

struct RunResult {
    int index = 0;
    InitialCondition ic;
    sim::Trajectory traj;
    sim::ConvergenceReport metrics;
    bool pass = false;
    std::string failure;
};

RunResult execute_run(const ScenarioConfig& cfg, int index, const InitialCondition& ic);

/// Runs every initial condition on up to `jobs` threads; results are ordered by index.
std::vector<RunResult> run_batch(const ScenarioConfig& cfg, int jobs);

struct ScenarioOutcome {
    std::vector<RunResult> runs;
    bool all_pass = false;
    std::vector<std::filesystem::path> files;
};

/// Executes the batch and writes run_<i>.csv, optional run_<i>.svg and summary.txt into out_dir.
ScenarioOutcome run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                             int jobs, bool svg);

/// Observability report as key=value lines.
std::vector<std::pair<std::string, std::string>> analyze(const ScenarioConfig& cfg);

}  // namespace unobs::scenario
