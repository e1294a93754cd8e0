#include "fiberwave/runner.hpp"

#include "fiberwave/analytic_solution.hpp"
#include "fiberwave/oracle.hpp"
#include "fiberwave/verification.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

namespace fiberwave {

namespace {

using nlohmann::ordered_json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Shortest round-trip decimal form; reproducible across runs on a platform.
std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

VecX<double> pad_interior(const VecX<double>& interior, Index n) {
  VecX<double> out = VecX<double>::Constant(n, kNaN);
  out.segment(1, interior.size()) = interior;
  return out;
}

ordered_json check_to_json(const CheckResult& c) {
  return ordered_json{{"name", c.name},
                      {"measured", c.measured},
                      {"threshold", c.threshold},
                      {"pass", c.pass}};
}

}  // namespace

RunResult run_scenario(const Scenario& scenario, const RunOverrides& overrides) {
  Scenario s = scenario;
  if (overrides.steps) s.steps = *overrides.steps;
  if (overrides.oracle) s.run_oracle_integrator = *overrides.oracle;

  if (const auto problems = validate_scenario(s); !problems.empty()) {
    std::string joined = "scenario '" + s.name + "' is invalid:";
    for (const auto& p : problems) joined += "\n  " + p;
    throw ValidationError(joined);
  }

  const auto path = build_path(s.path, s.t_end);
  TrackOptions topts;
  topts.frame = s.frame;
  topts.derivatives = s.derivatives;
  const auto track = sample_track<double>(*path, s.k_mag, s.t_end, s.steps, topts);
  const auto rep = make_spin_rep(s.j);

  CVecX<double> coeffs = CVecX<double>::Zero(rep.dim);
  for (const auto& [m, c] : s.initial) coeffs(rep.index_of(m)) += c;
  coeffs /= coeffs.norm();
  const bool eigenstate_start = (s.initial.size() == 1);

  const QuantumState<double> psi0 =
      rotation_operator(track.theta(0), track.phi(0), rep) * coeffs;

  RunResult result;
  result.scenario = s;
  result.report = propagate(track, rep, psi0);
  auto& report = result.report;
  const Index n = track.samples();

  const CMatX<double> ana = analytic_states(track, rep, coeffs);
  report.fidelity = fidelity_series(ana, report.states);
  report.schrodinger_residual =
      pad_interior(schrodinger_residual(report.states, track, rep), n);
  report.lvn_residual = pad_interior(lvn_residual_series(track, rep), n);

  const VecX<double> solid = solid_angle_series(track);
  if (eigenstate_start)
    result.phase_analytic = s.initial.front().first * solid;
  else
    result.phase_analytic = VecX<double>::Constant(n, kNaN);

  // scenario-level geometry summaries
  result.tangent_windings = (track.phi(n - 1) - track.phi(0)) / (2 * std::numbers::pi);
  if (std::isfinite(path->length())) {
    double chord = 0;
    for (Index i = 0; i + 1 < n; ++i)
      chord += (path->position(path->speed() * track.times(i + 1)) -
                path->position(path->speed() * track.times(i)))
                   .norm();
    result.arc_length = chord;
  }

  double omega_max = 0;
  for (Index i = 0; i < n; ++i) omega_max = std::max(omega_max, track.omega.col(i).norm());
  const double omega_floor = std::max(omega_max, 1e-300);

  auto add_check = [&](const std::string& name, double measured, double threshold,
                       bool at_least = false) {
    result.checks.push_back(
        {name, measured, threshold, at_least ? measured >= threshold : measured <= threshold});
  };

  add_check("norm_conservation", (report.norms.array() - 1.0).abs().maxCoeff(), s.tol.norm);
  add_check("transport_identity", transport_residual(track).maxCoeff() / (s.k_mag * omega_floor),
            s.tol.transport);

  double momentum_worst = 0;
  for (Index i = 0; i < n; ++i)
    momentum_worst = std::max(
        momentum_worst, (momentum_eigenvalues(track, i) - Vec3<double>(track.k.col(i))).norm());
  add_check("momentum_eigenvalue", momentum_worst / s.k_mag, s.tol.momentum);

  double helicity_target = 0;
  for (const auto& [m, c] : s.initial) helicity_target += std::norm(c) * m;
  add_check("helicity_conservation",
            (report.helicity_expect.array() - helicity_target).abs().maxCoeff(),
            s.tol.helicity);

  VecX<double> pops0 = coeffs.cwiseAbs2();
  double pop_drift = 0;
  for (Index i = 0; i < n; ++i) {
    const VecX<double> pops = helicity_populations(
        rep, track.theta(i), track.phi(i), QuantumState<double>(report.states.col(i)));
    pop_drift = std::max(pop_drift, (pops - pops0).cwiseAbs().maxCoeff());
  }
  add_check("helicity_populations", pop_drift, s.tol.populations);

  add_check("dynamical_phase", report.energy_expect.cwiseAbs().maxCoeff() / omega_floor,
            s.tol.dynamical_phase);
  add_check("fidelity_vs_analytic", 1.0 - report.fidelity.minCoeff(), s.tol.fidelity);
  add_check("schrodinger_residual",
            report.schrodinger_residual.segment(1, n - 2).maxCoeff(), s.tol.schrodinger);
  add_check("lvn_residual", report.lvn_residual.segment(1, n - 2).maxCoeff(), s.tol.lvn);

  if (std::isfinite(result.arc_length)) {
    const double expected = path->speed() * s.t_end;
    add_check("arc_length", std::abs(result.arc_length - expected) / expected,
              s.tol.arc_length);
  }
  if (s.min_windings > 0)
    add_check("tangent_windings", result.tangent_windings, s.min_windings, /*at_least=*/true);

  if (s.run_oracle_integrator) {
    const CMatX<double> oracle = rk4_reference_states(track, rep, psi0);
    double worst = 0;
    for (Index i = 0; i < n; ++i)
      worst = std::max(worst, (oracle.col(i) - report.states.col(i)).norm());
    add_check("cross_integrator", worst, s.tol.cross_integrator);
  }

  result.all_passed = true;
  for (const auto& c : result.checks) result.all_passed = result.all_passed && c.pass;

  if (overrides.write_files) {
    namespace fs = std::filesystem;
    fs::create_directories(overrides.out_dir);
    const std::string base = (fs::path(overrides.out_dir) / s.name).string();

    result.csv_path = base + "_timeseries.csv";
    {
      std::ofstream out(result.csv_path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + result.csv_path);
      out << "t,theta,phi,phase_analytic,norm,helicity_expect,energy_expect,fidelity,"
             "schrodinger_residual,lvn_residual\n";
      for (Index i = 0; i < n; ++i) {
        out << fmt(report.times(i)) << ',' << fmt(track.theta(i)) << ',' << fmt(track.phi(i))
            << ',' << fmt(result.phase_analytic(i)) << ',' << fmt(report.norms(i)) << ','
            << fmt(report.helicity_expect(i)) << ',' << fmt(report.energy_expect(i)) << ','
            << fmt(report.fidelity(i)) << ',' << fmt(report.schrodinger_residual(i)) << ','
            << fmt(report.lvn_residual(i)) << '\n';
      }
    }

    if (s.emit_states) {
      result.states_path = base + "_states.csv";
      std::ofstream out(result.states_path, std::ios::binary);
      out << "t";
      for (Index c = 0; c < rep.dim; ++c) {
        const std::string m = fmt(rep.m_of(c));
        out << ",re_m" << m << ",im_m" << m;
      }
      out << '\n';
      for (Index i = 0; i < n; ++i) {
        out << fmt(report.times(i));
        for (Index c = 0; c < rep.dim; ++c)
          out << ',' << fmt(report.states(c, i).real()) << ','
              << fmt(report.states(c, i).imag());
        out << '\n';
      }
    }

    result.json_path = base + "_report.json";
    ordered_json doc;
    doc["scenario"] = s.name;
    doc["path_kind"] = s.path.kind;
    doc["frame"] = (s.frame == FrameConvention::working) ? "working" : "lab";
    doc["j"] = s.j;
    doc["k_mag"] = s.k_mag;
    doc["t_end"] = s.t_end;
    doc["steps"] = s.steps;
    ordered_json initial = ordered_json::array();
    for (const auto& [m, c] : s.initial)
      initial.push_back({{"m", m}, {"re", c.real()}, {"im", c.imag()}});
    doc["initial"] = initial;
    doc["arc_length_mm"] = result.arc_length;
    doc["tangent_winding_turns"] = result.tangent_windings;
    if (eigenstate_start) doc["phase_analytic_final"] = result.phase_analytic(n - 1);
    ordered_json checks = ordered_json::array();
    for (const auto& c : result.checks) checks.push_back(check_to_json(c));
    doc["checks"] = checks;
    doc["passed"] = result.all_passed;
    if (!s.warnings.empty()) doc["warnings"] = s.warnings;
    std::ofstream out(result.json_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + result.json_path);
    out << doc.dump(2) << '\n';
  }

  return result;
}

}  // namespace fiberwave
