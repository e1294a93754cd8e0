#pragma once

#include "fiberwave/evolution.hpp"
#include "fiberwave/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fiberwave {

struct CheckResult {
  std::string name;
  double measured;
  double threshold;
  bool pass;
};

struct RunOverrides {
  std::optional<long> steps;
  std::optional<bool> oracle;
  std::string out_dir = ".";
  bool write_files = true;
};

struct RunResult {
  Scenario scenario;  // effective settings after overrides
  EvolutionReport<double> report;
  VecX<double> phase_analytic;  // per-node; NaN column for superposition starts
  std::vector<CheckResult> checks;
  double arc_length = std::numeric_limits<double>::quiet_NaN();
  double tangent_windings = std::numeric_limits<double>::quiet_NaN();
  bool all_passed = false;
  std::string csv_path, json_path, states_path;
};

/// Runs the full pipeline (geometry → propagation → analytic comparison →
/// verification) and, unless disabled, writes `<name>_timeseries.csv`,
/// `<name>_report.json` and optionally `<name>_states.csv` into out_dir.
RunResult run_scenario(const Scenario& scenario, const RunOverrides& overrides = {});

}  // namespace fiberwave
