#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pmm/scenario.hpp"

namespace pmm {

/// Shortest round-trip text for a double, at most 15 significant digits.
std::string format_number(double v);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  std::optional<int> l_max;           // overrides the scenario lmax
};

struct RunReport {
  std::vector<std::filesystem::path> artifacts;
  bool gate_checks_passed = true;
};

/// Applies command-line overrides and re-validates mode ranges.
Scenario with_overrides(Scenario sc, const RunOptions& opt);

/// Writes every requested output of the scenario into opt.out_dir.
RunReport run_scenario(const Scenario& sc, const RunOptions& opt);

// CSV bodies, shared by the scenario runner and the single-purpose subcommands.
std::string sweep_csv(const std::vector<int>& modes, const std::vector<double>& deltas,
                      const DPParams& dp, int l_max);
std::string gate_csv(const std::vector<int>& moduli, const std::vector<int>& dimensions,
                     const DPParams& dp, int l_max, bool& all_pass);

/// Process fidelity a gate must reach to pass.
inline constexpr double kGateFidelityTolerance = 1e-10;

}  // namespace pmm
