#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "unobs/sim_engine.hpp"

namespace unobs::artifacts {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// 17 significant digits, "%.17g".
std::string fmt(double v);

/// Columns t,x1,x2,u,eps_norm,c_eps_abs[,weak_eps].
void write_csv(const std::filesystem::path& path, const sim::Trajectory& traj, bool spectral);

/// One key=value per line.
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);
std::string format_key_values(const KeyValues& kv);

/// Two stacked line plots: |x(t)| and ||eps(t)||.
void write_svg(const std::filesystem::path& path, const sim::Trajectory& traj,
               const std::string& title);

}  // namespace unobs::artifacts
