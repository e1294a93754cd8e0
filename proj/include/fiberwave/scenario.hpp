#pragma once

#include "fiberwave/guide_geometry.hpp"

#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fiberwave {

/// Guide-path description as it appears in scenario files.
struct PathSpec {
  std::string kind;  // straight | circular_arc | helix | archimedean_spiral | composite
  std::map<std::string, double> params;
  std::optional<Vec3<double>> direction;  // straight only
  std::vector<PathSpec> segments;         // composite only
};

/// Per-check thresholds; scenario files may override any of them.
struct ToleranceSet {
  double norm = 1e-10;
  double transport = 1e-8;
  double helicity = 1e-8;
  double populations = 1e-8;
  double dynamical_phase = 1e-6;
  double fidelity = 1e-8;
  double momentum = 1e-9;
  double schrodinger = 1e-3;
  double lvn = 1e-2;
  double cross_integrator = 1e-7;
  double arc_length = 1e-3;
};

struct Scenario {
  std::string name;
  PathSpec path;
  double k_mag = 1.0;
  double j = 0.5;
  // (m, coefficient) pairs over the J3 basis; one entry is an eigenstate start
  std::vector<std::pair<double, std::complex<double>>> initial;
  double t_end = 1.0;
  long steps = 10000;
  FrameConvention frame = FrameConvention::working;
  DerivativeMode derivatives = DerivativeMode::analytic;
  bool run_oracle_integrator = false;
  bool emit_states = false;
  double min_windings = 0.0;  // >0 adds a tangent-winding check (spiral kinds)
  ToleranceSet tol;
  std::vector<std::string> warnings;  // defaulted fields, normalizations
};

/// Parses the line-oriented `key = value` format. Throws ValidationError
/// naming the offending line/field on syntax problems.
Scenario parse_scenario_text(const std::string& text);

/// Parses the JSON alternative of the same schema.
Scenario parse_scenario_json(const std::string& text);

/// Loads a scenario file, dispatching on the leading non-space character
/// ('{' selects JSON).
Scenario load_scenario_file(const std::string& file_path);

/// Field-level diagnostics; empty means the scenario is runnable.
std::vector<std::string> validate_scenario(const Scenario& scenario);

/// Materializes the guide path. When no speed is given, finite paths are
/// traversed completely over t_end. Spiral specs may give length_mm instead
/// of spacing_mm_per_turn; the spacing is then solved by bisection.
std::unique_ptr<GuidePath<double>> build_path(const PathSpec& spec, double t_end);

const std::vector<Scenario>& builtin_scenarios();
const Scenario* find_builtin(const std::string& name);

}  // namespace fiberwave
