#include "fiberwave/runner.hpp"
#include "fiberwave/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitCheckFailure = 3;
constexpr int kExitPolePassage = 4;

fiberwave::Scenario resolve_scenario(const std::string& ref) {
  if (std::filesystem::exists(ref)) return fiberwave::load_scenario_file(ref);
  if (const auto* builtin = fiberwave::find_builtin(ref)) return *builtin;
  throw fiberwave::ValidationError("'" + ref +
                                   "' is neither a scenario file nor a built-in name");
}

std::string output_dir(const std::string& flag_value) {
  // FIBERWAVE_OUT overrides whatever was passed on the command line
  if (const char* env = std::getenv("FIBERWAVE_OUT"); env && *env) return env;
  return flag_value;
}

int do_run(const std::string& ref, const std::string& out_flag, long steps_flag,
           bool oracle_flag) {
  fiberwave::Scenario scenario;
  try {
    scenario = resolve_scenario(ref);
  } catch (const fiberwave::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  }
  for (const auto& w : scenario.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  fiberwave::RunOverrides overrides;
  overrides.out_dir = output_dir(out_flag);
  if (steps_flag > 0) overrides.steps = steps_flag;
  if (oracle_flag) overrides.oracle = true;

  fiberwave::RunResult result;
  try {
    result = fiberwave::run_scenario(scenario, overrides);
  } catch (const fiberwave::PolePassageError& e) {
    std::fprintf(stderr, "pole passage: %s\n", e.what());
    return kExitPolePassage;
  } catch (const fiberwave::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  }

  std::printf("scenario %s: %ld steps over t_end = %s\n", result.scenario.name.c_str(),
              result.scenario.steps, std::to_string(result.scenario.t_end).c_str());
  for (const auto& c : result.checks)
    std::printf("  [%s] %-22s measured %.6e  threshold %.6e\n", c.pass ? "pass" : "FAIL",
                c.name.c_str(), c.measured, c.threshold);
  std::printf("wrote %s\n", result.csv_path.c_str());
  std::printf("wrote %s\n", result.json_path.c_str());
  if (!result.states_path.empty()) std::printf("wrote %s\n", result.states_path.c_str());
  if (!result.all_passed) {
    std::fprintf(stderr, "one or more checks failed (report written)\n");
    return kExitCheckFailure;
  }
  return kExitOk;
}

int do_validate(const std::string& ref) {
  fiberwave::Scenario scenario;
  try {
    scenario = resolve_scenario(ref);
  } catch (const fiberwave::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  }
  for (const auto& w : scenario.warnings) std::printf("warning: %s\n", w.c_str());
  const auto problems = fiberwave::validate_scenario(scenario);
  if (problems.empty()) {
    std::printf("scenario '%s' is valid\n", scenario.name.c_str());
    return kExitOk;
  }
  for (const auto& p : problems) std::printf("problem: %s\n", p.c_str());
  return kExitValidation;
}

int do_list() {
  std::printf("built-in scenarios (run or validate by name):\n");
  for (const auto& s : fiberwave::builtin_scenarios()) {
    std::printf("  %-11s %s path, j = %g, %ld steps, t_end = %g, %s frame\n",
                s.name.c_str(), s.path.kind.c_str(), s.j, s.steps, s.t_end,
                s.frame == fiberwave::FrameConvention::working ? "working" : "lab");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spin transport along curved atom guides"};
  app.require_subcommand(1);

  std::string run_ref, run_out = ".";
  long run_steps = 0;
  bool run_oracle = false;
  auto* run_cmd = app.add_subcommand("run", "run a scenario and write CSV + JSON reports");
  run_cmd->add_option("scenario", run_ref, "scenario file or built-in name")->required();
  run_cmd->add_option("--out", run_out, "output directory (FIBERWAVE_OUT overrides)");
  run_cmd->add_option("--steps", run_steps, "override the number of time steps");
  run_cmd->add_flag("--oracle", run_oracle, "also run the RK4 cross-check integrator");

  std::string validate_ref;
  auto* validate_cmd =
      app.add_subcommand("validate", "check a scenario file without running it");
  validate_cmd->add_option("scenario", validate_ref, "scenario file or built-in name")
      ->required();

  auto* list_cmd = app.add_subcommand("list", "list built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kExitValidation : kExitOk;
  }

  try {
    if (run_cmd->parsed()) return do_run(run_ref, run_out, run_steps, run_oracle);
    if (validate_cmd->parsed()) return do_validate(validate_ref);
    if (list_cmd->parsed()) return do_list();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
  return kExitOk;
}
