#include "fiberwave/scenario.hpp"

#include "fiberwave/spin_algebra.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace fiberwave {

namespace {

using nlohmann::ordered_json;

const std::set<std::string> kPathParamKeys = {
    "radius_mm", "pitch_mm_per_turn", "cone_angle_rad", "turns", "inner_radius_mm",
    "spacing_mm_per_turn", "length_mm", "speed_mm_s"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, const std::string& value) {
  try {
    std::size_t used = 0;
    const double x = std::stod(value, &used);
    if (trim(value.substr(used)).empty()) return x;
  } catch (const std::exception&) {
  }
  throw ValidationError("field " + field + ": invalid number '" + value + "'");
}

long parse_integer(const std::string& field, const std::string& value) {
  const double x = parse_number(field, value);
  if (std::abs(x - std::llround(x)) > 1e-9)
    throw ValidationError("field " + field + ": expected an integer, got '" + value + "'");
  return std::llround(x);
}

bool parse_bool(const std::string& field, const std::string& value) {
  if (value == "true" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "no" || value == "0") return false;
  throw ValidationError("field " + field + ": expected a boolean, got '" + value + "'");
}

std::vector<double> parse_number_list(const std::string& field, const std::string& value) {
  std::istringstream in(value);
  std::vector<double> out;
  std::string token;
  while (in >> token) out.push_back(parse_number(field, token));
  return out;
}

FrameConvention parse_frame(const std::string& value) {
  if (value == "working") return FrameConvention::working;
  if (value == "lab") return FrameConvention::lab;
  throw ValidationError("field frame: expected 'working' or 'lab', got '" + value + "'");
}

DerivativeMode parse_derivatives(const std::string& value) {
  if (value == "analytic") return DerivativeMode::analytic;
  if (value == "central") return DerivativeMode::central;
  throw ValidationError("field derivatives: expected 'analytic' or 'central', got '" +
                        value + "'");
}

bool assign_tolerance(ToleranceSet& tol, const std::string& field, double value) {
  if (field == "norm") tol.norm = value;
  else if (field == "transport") tol.transport = value;
  else if (field == "helicity") tol.helicity = value;
  else if (field == "populations") tol.populations = value;
  else if (field == "dynamical_phase") tol.dynamical_phase = value;
  else if (field == "fidelity") tol.fidelity = value;
  else if (field == "momentum") tol.momentum = value;
  else if (field == "schrodinger") tol.schrodinger = value;
  else if (field == "lvn") tol.lvn = value;
  else if (field == "cross_integrator") tol.cross_integrator = value;
  else if (field == "arc_length") tol.arc_length = value;
  else return false;
  return true;
}

void finalize_initial_state(Scenario& s, bool m_given, bool superposition_given) {
  if (!m_given && !superposition_given) {
    s.initial = {{s.j, 1.0}};
    s.warnings.push_back("initial state not specified; defaulted to m = j");
    return;
  }
  double norm2 = 0;
  for (const auto& [m, c] : s.initial) norm2 += std::norm(c);
  if (norm2 > 0 && std::abs(norm2 - 1.0) > 1e-12) {
    const double nrm = std::sqrt(norm2);
    for (auto& [m, c] : s.initial) c /= nrm;
    if (std::abs(norm2 - 1.0) > 1e-9)
      s.warnings.push_back("initial state normalized (norm was " + std::to_string(nrm) + ")");
  }
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
  Scenario s;
  std::map<long, std::map<std::string, std::string>> segment_fields;
  bool k_mag_given = false, m_given = false, superposition_given = false;

  std::istringstream in(text);
  std::string raw;
  long line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("line " + std::to_string(line_no) +
                            ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ValidationError("line " + std::to_string(line_no) + ": empty key or value");

    if (key.rfind("segment.", 0) == 0) {
      const auto rest = key.substr(8);
      const auto dot = rest.find('.');
      if (dot == std::string::npos)
        throw ValidationError("field " + key + ": expected segment.<n>.<param>");
      const long idx = parse_integer("segment index", rest.substr(0, dot));
      segment_fields[idx][rest.substr(dot + 1)] = value;
      continue;
    }
    if (key.rfind("tol.", 0) == 0) {
      if (!assign_tolerance(s.tol, key.substr(4), parse_number(key, value)))
        throw ValidationError("unknown tolerance field '" + key + "'");
      continue;
    }

    if (key == "name") s.name = value;
    else if (key == "kind") s.path.kind = value;
    else if (key == "direction") {
      const auto v = parse_number_list(key, value);
      if (v.size() != 3)
        throw ValidationError("field direction: expected three numbers");
      s.path.direction = Vec3<double>{v[0], v[1], v[2]};
    } else if (kPathParamKeys.count(key)) {
      s.path.params[key] = parse_number(key, value);
    } else if (key == "k_mag") {
      s.k_mag = parse_number(key, value);
      k_mag_given = true;
    } else if (key == "j") s.j = parse_number(key, value);
    else if (key == "m") {
      s.initial = {{parse_number(key, value), 1.0}};
      m_given = true;
    } else if (key == "superposition") {
      const auto v = parse_number_list(key, value);
      if (v.empty() || v.size() % 3 != 0)
        throw ValidationError("field superposition: expected 'm re im' triplets");
      s.initial.clear();
      for (std::size_t i = 0; i < v.size(); i += 3)
        s.initial.emplace_back(v[i], std::complex<double>(v[i + 1], v[i + 2]));
      superposition_given = true;
    } else if (key == "t_end") s.t_end = parse_number(key, value);
    else if (key == "steps") s.steps = parse_integer(key, value);
    else if (key == "frame") s.frame = parse_frame(value);
    else if (key == "derivatives") s.derivatives = parse_derivatives(value);
    else if (key == "run_oracle_integrator") s.run_oracle_integrator = parse_bool(key, value);
    else if (key == "emit_states") s.emit_states = parse_bool(key, value);
    else if (key == "min_windings") s.min_windings = parse_number(key, value);
    else throw ValidationError("unknown field '" + key + "'");
  }

  for (auto& [idx, fields] : segment_fields) {
    PathSpec seg;
    for (auto& [k, v] : fields) {
      if (k == "kind") seg.kind = v;
      else if (k == "direction") {
        const auto nums = parse_number_list(k, v);
        if (nums.size() != 3)
          throw ValidationError("field segment." + std::to_string(idx) +
                                ".direction: expected three numbers");
        seg.direction = Vec3<double>{nums[0], nums[1], nums[2]};
      } else if (kPathParamKeys.count(k)) {
        seg.params[k] = parse_number("segment." + std::to_string(idx) + "." + k, v);
      } else {
        throw ValidationError("unknown field 'segment." + std::to_string(idx) + "." + k + "'");
      }
    }
    s.path.segments.push_back(std::move(seg));
  }

  if (!k_mag_given)
    s.warnings.push_back("k_mag not specified; defaulted to 1");
  finalize_initial_state(s, m_given, superposition_given);
  return s;
}

namespace {

PathSpec path_spec_from_json(const ordered_json& node, const std::string& where) {
  PathSpec spec;
  for (const auto& [key, value] : node.items()) {
    if (key == "kind") spec.kind = value.get<std::string>();
    else if (key == "direction") {
      const auto arr = value.get<std::vector<double>>();
      if (arr.size() != 3)
        throw ValidationError("field " + where + ".direction: expected three numbers");
      spec.direction = Vec3<double>{arr[0], arr[1], arr[2]};
    } else if (key == "segments") {
      for (const auto& seg : value)
        spec.segments.push_back(path_spec_from_json(seg, where + ".segments"));
    } else if (kPathParamKeys.count(key)) {
      spec.params[key] = value.get<double>();
    } else {
      throw ValidationError("unknown field '" + where + "." + key + "'");
    }
  }
  return spec;
}

}  // namespace

Scenario parse_scenario_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError(std::string("malformed JSON scenario: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("scenario JSON must be an object");

  Scenario s;
  bool k_mag_given = false, m_given = false, superposition_given = false;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "name") s.name = value.get<std::string>();
      else if (key == "path") s.path = path_spec_from_json(value, "path");
      else if (key == "k_mag") {
        s.k_mag = value.get<double>();
        k_mag_given = true;
      } else if (key == "j") s.j = value.get<double>();
      else if (key == "m") {
        s.initial = {{value.get<double>(), 1.0}};
        m_given = true;
      } else if (key == "superposition") {
        s.initial.clear();
        for (const auto& term : value)
          s.initial.emplace_back(
              term.at("m").get<double>(),
              std::complex<double>(term.value("re", 0.0), term.value("im", 0.0)));
        superposition_given = true;
      } else if (key == "t_end") s.t_end = value.get<double>();
      else if (key == "steps") s.steps = value.get<long>();
      else if (key == "frame") s.frame = parse_frame(value.get<std::string>());
      else if (key == "derivatives") s.derivatives = parse_derivatives(value.get<std::string>());
      else if (key == "run_oracle_integrator") s.run_oracle_integrator = value.get<bool>();
      else if (key == "emit_states") s.emit_states = value.get<bool>();
      else if (key == "min_windings") s.min_windings = value.get<double>();
      else if (key == "tol") {
        for (const auto& [tk, tv] : value.items())
          if (!assign_tolerance(s.tol, tk, tv.get<double>()))
            throw ValidationError("unknown tolerance field 'tol." + tk + "'");
      } else throw ValidationError("unknown field '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scenario JSON: ") + e.what());
  }
  if (!k_mag_given)
    s.warnings.push_back("k_mag not specified; defaulted to 1");
  finalize_initial_state(s, m_given, superposition_given);
  return s;
}

Scenario load_scenario_file(const std::string& file_path) {
  std::ifstream in(file_path);
  if (!in) throw ValidationError("cannot open scenario file '" + file_path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_scenario_json(text);
  return parse_scenario_text(text);
}

namespace {

double required_param(const PathSpec& spec, const std::string& key) {
  const auto it = spec.params.find(key);
  if (it == spec.params.end())
    throw ValidationError(spec.kind + ": " + key + " is required");
  return it->second;
}

double param_or(const PathSpec& spec, const std::string& key, double fallback) {
  const auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : it->second;
}

std::unique_ptr<GuidePath<double>> build_path_with_speed(const PathSpec& spec, double speed);

double natural_length(const PathSpec& spec) {
  // length of the path built with a placeholder speed; used to default the speed
  return build_path_with_speed(spec, 1.0)->length();
}

std::unique_ptr<GuidePath<double>> build_path_with_speed(const PathSpec& spec, double speed) {
  if (spec.kind == "straight") {
    const Vec3<double> dir = spec.direction.value_or(Vec3<double>{0, 0, 1});
    const double len =
        param_or(spec, "length_mm", std::numeric_limits<double>::infinity());
    return std::make_unique<StraightPath<double>>(dir, speed, len);
  }
  if (spec.kind == "circular_arc") {
    return std::make_unique<CircularArcPath<double>>(required_param(spec, "radius_mm"),
                                                     required_param(spec, "turns"), speed);
  }
  if (spec.kind == "helix") {
    const double radius = required_param(spec, "radius_mm");
    const double turns = required_param(spec, "turns");
    if (spec.params.count("cone_angle_rad"))
      return std::make_unique<HelixPath<double>>(HelixPath<double>::with_cone_angle(
          radius, spec.params.at("cone_angle_rad"), turns, speed));
    return std::make_unique<HelixPath<double>>(
        radius, required_param(spec, "pitch_mm_per_turn"), turns, speed);
  }
  if (spec.kind == "archimedean_spiral") {
    const double inner = param_or(spec, "inner_radius_mm", 0.0);
    const double turns = required_param(spec, "turns");
    double spacing;
    if (spec.params.count("spacing_mm_per_turn")) spacing = spec.params.at("spacing_mm_per_turn");
    else if (spec.params.count("length_mm"))
      spacing = ArchimedeanSpiralPath<double>::solve_spacing(spec.params.at("length_mm"),
                                                             inner, turns);
    else throw ValidationError("archimedean_spiral: spacing_mm_per_turn or length_mm is required");
    return std::make_unique<ArchimedeanSpiralPath<double>>(inner, spacing, turns, speed);
  }
  if (spec.kind == "composite") {
    if (spec.segments.empty())
      throw ValidationError("composite: at least one segment is required");
    std::vector<std::unique_ptr<GuidePath<double>>> segs;
    for (const auto& seg : spec.segments) segs.push_back(build_path_with_speed(seg, 1.0));
    return std::make_unique<CompositePath<double>>(std::move(segs), speed);
  }
  if (spec.kind.empty()) throw ValidationError("kind: path kind is required");
  throw ValidationError("kind: unknown path kind '" + spec.kind + "'");
}

}  // namespace

std::unique_ptr<GuidePath<double>> build_path(const PathSpec& spec, double t_end) {
  double speed;
  if (spec.params.count("speed_mm_s")) {
    speed = spec.params.at("speed_mm_s");
  } else {
    const double len = natural_length(spec);
    speed = std::isfinite(len) && t_end > 0 ? len / t_end : 1.0;
  }
  return build_path_with_speed(spec, speed);
}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> problems;
  if (s.name.empty()) problems.push_back("name: must be nonempty");
  if (!(s.k_mag > 0)) problems.push_back("k_mag: must be positive");
  if (!(s.t_end > 0)) problems.push_back("t_end: must be positive");
  if (s.steps < 2) problems.push_back("steps: must be at least 2");
  if (s.min_windings < 0) problems.push_back("min_windings: must be nonnegative");

  bool j_ok = true;
  if (!(s.j > 0) || !detail::is_half_integer(s.j)) {
    problems.push_back("j: must be a positive half-integer, got " + std::to_string(s.j));
    j_ok = false;
  } else if (2 * s.j + 1 > 64) {
    problems.push_back("j: representation dimension exceeds 64");
    j_ok = false;
  }

  if (s.initial.empty()) {
    problems.push_back("m: an initial state (m or superposition) is required");
  } else if (j_ok) {
    double norm2 = 0;
    for (const auto& [m, c] : s.initial) {
      if (!valid_m(s.j, m))
        problems.push_back("m: " + std::to_string(m) + " is not in {j, j-1, ..., -j} for j = " +
                           std::to_string(s.j));
      norm2 += std::norm(c);
    }
    if (!(norm2 > 0)) problems.push_back("superposition: coefficients are all zero");
  }

  for (double t :
       {s.tol.norm, s.tol.transport, s.tol.helicity, s.tol.populations, s.tol.dynamical_phase,
        s.tol.fidelity, s.tol.momentum, s.tol.schrodinger, s.tol.lvn, s.tol.cross_integrator,
        s.tol.arc_length}) {
    if (!(t >= 0)) {
      problems.push_back("tol: thresholds must be nonnegative");
      break;
    }
  }

  try {
    const auto path = build_path(s.path, s.t_end > 0 ? s.t_end : 1.0);
    const double span = path->speed() * s.t_end;
    if (s.t_end > 0 && span > path->length() * (1 + 1e-9))
      problems.push_back("t_end: traversal needs arc length " + std::to_string(span) +
                         " but the path has " + std::to_string(path->length()));
  } catch (const ValidationError& e) {
    problems.push_back(std::string("path: ") + e.what());
  }
  return problems;
}

const std::vector<Scenario>& builtin_scenarios() {
  static const std::vector<Scenario> builtins = [] {
    std::vector<Scenario> list;

    {
      Scenario s;
      s.name = "straight";
      s.path.kind = "straight";
      s.path.direction = Vec3<double>{0, 0, 1};
      s.j = 0.5;
      s.initial = {{0.5, 1.0}};
      s.t_end = 1.0;
      s.steps = 1000;
      s.frame = FrameConvention::working;
      s.tol.schrodinger = 1e-10;
      s.tol.lvn = 1e-10;
      list.push_back(std::move(s));
    }
    {
      Scenario s;
      s.name = "circle";
      s.path.kind = "circular_arc";
      s.path.params["radius_mm"] = 1.0;
      s.path.params["turns"] = 1.0;
      s.j = 0.5;
      s.initial = {{0.5, 1.0}};
      s.t_end = 1.0;
      s.steps = 10000;
      s.frame = FrameConvention::lab;
      s.run_oracle_integrator = true;
      s.tol.schrodinger = 1e-5;
      s.tol.lvn = 1e-4;
      list.push_back(std::move(s));
    }
    {
      Scenario s;
      s.name = "cone";
      s.path.kind = "helix";
      s.path.params["radius_mm"] = 1.0;
      s.path.params["cone_angle_rad"] = std::numbers::pi / 3;
      s.path.params["turns"] = 1.0;
      s.j = 1.0;
      s.initial = {{1.0, 1.0}};
      s.t_end = 1.0;
      s.steps = 10000;
      s.frame = FrameConvention::lab;
      s.run_oracle_integrator = true;
      s.tol.schrodinger = 1e-5;
      s.tol.lvn = 1e-4;
      list.push_back(std::move(s));
    }
    {
      Scenario s;
      s.name = "luo_spiral";
      s.path.kind = "archimedean_spiral";
      s.path.params["inner_radius_mm"] = 0.0;
      s.path.params["turns"] = 2.25;
      s.path.params["length_mm"] = 25.0;
      s.j = 0.5;
      s.initial = {{0.5, 1.0}};
      s.t_end = 1.0;
      s.steps = 100000;
      s.frame = FrameConvention::lab;
      s.run_oracle_integrator = true;
      s.min_windings = 2.0;
      s.tol.schrodinger = 1e-2;
      s.tol.lvn = 1e-2;
      s.tol.cross_integrator = 1e-6;
      list.push_back(std::move(s));
    }
    return list;
  }();
  return builtins;
}

const Scenario* find_builtin(const std::string& name) {
  for (const auto& s : builtin_scenarios())
    if (s.name == name) return &s;
  return nullptr;
}

}  // namespace fiberwave
