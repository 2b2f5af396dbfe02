#include "epivax/scenario_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "epivax/errors.hpp"
#include "epivax/reproduction.hpp"

namespace epivax::io {

using nlohmann::json;

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

std::string join(const std::string& prefix, std::string_view key) {
  return prefix.empty() ? std::string(key) : prefix + "." + std::string(key);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) {
    throw ValidationError(path.empty() ? "<root>" : path, "expected an object");
  }
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) {
      ok = ok || key == a;
    }
    if (!ok) {
      throw ValidationError(join(path, key), "unknown key");
    }
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) {
    throw ValidationError(path, "expected a number");
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    throw ValidationError(path, "must be finite");
  }
  return v;
}

std::size_t get_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) {
    throw ValidationError(path, "expected a non-negative integer");
  }
  const auto v = j.get<long long>();
  if (v < 0) {
    throw ValidationError(path, "expected a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) {
    throw ValidationError(path, "expected a string");
  }
  return j.get<std::string>();
}

// Reads `key` from object `j` into `target` when present; errors when required and absent.
void read_number(const json& j, const std::string& path, std::string_view key, double& target, bool required) {
  const auto it = j.find(std::string(key));
  if (it == j.end()) {
    if (required) {
      throw ValidationError(join(path, key), "missing required key");
    }
    return;
  }
  target = get_number(*it, join(path, key));
}

struct NumberField {
  std::string_view name;
  double EpiParams::*member;
};

constexpr NumberField kParamFields[] = {
    {"N_h", &EpiParams::N_h},     {"B", &EpiParams::B},         {"beta_mh", &EpiParams::beta_mh},
    {"beta_hm", &EpiParams::beta_hm}, {"mu_h", &EpiParams::mu_h}, {"eta_h", &EpiParams::eta_h},
    {"mu_m", &EpiParams::mu_m},   {"phi", &EpiParams::phi},     {"mu_A", &EpiParams::mu_A},
    {"eta_A", &EpiParams::eta_A}, {"m", &EpiParams::m},         {"k", &EpiParams::k},
};

struct StateField {
  std::string_view name;
  double SysState::*member;
};

constexpr StateField kStateFields[] = {
    {"S_h", &SysState::S_h}, {"V_h", &SysState::V_h}, {"I_h", &SysState::I_h}, {"R_h", &SysState::R_h},
    {"A_m", &SysState::A_m}, {"S_m", &SysState::S_m}, {"I_m", &SysState::I_m},
};

void read_params(const json& j, EpiParams& p, bool required) {
  const std::string path = "params";
  require_object(j, path);
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const auto& f : kParamFields) {
      known = known || key == f.name;
    }
    if (!known) {
      throw ValidationError(join(path, key), "unknown key");
    }
  }
  for (const auto& f : kParamFields) {
    read_number(j, path, f.name, p.*(f.member), required);
  }
}

void read_state(const json& j, SysState& s, bool required) {
  const std::string path = "initial";
  require_object(j, path);
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const auto& f : kStateFields) {
      known = known || key == f.name;
    }
    if (!known) {
      throw ValidationError(join(path, key), "unknown key");
    }
  }
  for (const auto& f : kStateFields) {
    read_number(j, path, f.name, s.*(f.member), required);
  }
}

VaccineStrategy read_strategy(const json& j) {
  const std::string path = "strategy";
  require_object(j, path);
  const auto type_it = j.find("type");
  if (type_it == j.end()) {
    throw ValidationError("strategy.type", "missing required key");
  }
  const std::string type = get_string(*type_it, "strategy.type");
  double a = 0.0;
  double b = 0.0;
  if (type == "none") {
    reject_unknown(j, path, {"type"});
    return strategy::NoVaccine{};
  }
  if (type == "pediatric") {
    reject_unknown(j, path, {"type", "p"});
    read_number(j, path, "p", a, true);
    return strategy::Pediatric{a};
  }
  if (type == "mass_perfect") {
    reject_unknown(j, path, {"type", "psi"});
    read_number(j, path, "psi", a, true);
    return strategy::MassPerfect{a};
  }
  if (type == "mass_imperfect") {
    reject_unknown(j, path, {"type", "psi", "sigma"});
    read_number(j, path, "psi", a, true);
    read_number(j, path, "sigma", b, true);
    return strategy::MassImperfect{a, b};
  }
  if (type == "mass_waning") {
    reject_unknown(j, path, {"type", "psi", "theta"});
    read_number(j, path, "psi", a, true);
    read_number(j, path, "theta", b, true);
    return strategy::MassWaning{a, b};
  }
  throw ValidationError("strategy.type", "unknown strategy tag '" + type +
                                             "' (expected none, pediatric, mass_perfect, mass_imperfect, mass_waning)");
}

ControlSettings read_control(const json& j) {
  const std::string path = "control";
  require_object(j, path);
  reject_unknown(j, path, {"gamma_D", "gamma_V", "theta", "u_min", "u_max"});
  ControlSettings c;
  read_number(j, path, "gamma_D", c.gamma_D, false);
  read_number(j, path, "gamma_V", c.gamma_V, false);
  read_number(j, path, "theta", c.theta, false);
  read_number(j, path, "u_min", c.u_min, false);
  read_number(j, path, "u_max", c.u_max, false);
  return c;
}

SolverSettings read_solver(const json& j) {
  const std::string path = "solver";
  require_object(j, path);
  reject_unknown(j, path,
                 {"step", "relaxation", "min_relaxation", "tolerance", "max_iter", "n_intervals", "fd_step", "starts",
                  "direct_max_iter", "direct_tolerance"});
  SolverSettings s;
  read_number(j, path, "step", s.step, false);
  read_number(j, path, "relaxation", s.sweep.relaxation, false);
  read_number(j, path, "min_relaxation", s.sweep.min_relaxation, false);
  read_number(j, path, "tolerance", s.sweep.tolerance, false);
  read_number(j, path, "fd_step", s.direct.fd_step, false);
  read_number(j, path, "direct_tolerance", s.direct.tolerance, false);
  if (j.contains("max_iter")) {
    s.sweep.max_iter = get_count(j["max_iter"], "solver.max_iter");
  }
  if (j.contains("n_intervals")) {
    s.direct.n_intervals = get_count(j["n_intervals"], "solver.n_intervals");
  }
  if (j.contains("direct_max_iter")) {
    s.direct.max_iter = get_count(j["direct_max_iter"], "solver.direct_max_iter");
  }
  if (j.contains("starts")) {
    const auto& arr = j["starts"];
    if (!arr.is_array()) {
      throw ValidationError("solver.starts", "expected an array of numbers");
    }
    s.direct.starts.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      s.direct.starts.push_back(get_number(arr[i], "solver.starts[" + std::to_string(i) + "]"));
    }
  }
  if (!(s.step > 0.0)) {
    throw ValidationError("solver.step", "must be positive");
  }
  if (!(s.sweep.relaxation > 0.0 && s.sweep.relaxation <= 1.0)) {
    throw ValidationError("solver.relaxation", "must lie in (0, 1]");
  }
  if (!(s.sweep.min_relaxation > 0.0 && s.sweep.min_relaxation <= 1.0)) {
    throw ValidationError("solver.min_relaxation", "must lie in (0, 1]");
  }
  if (!(s.sweep.tolerance > 0.0)) {
    throw ValidationError("solver.tolerance", "must be positive");
  }
  if (s.sweep.max_iter < 1) {
    throw ValidationError("solver.max_iter", "must be at least 1");
  }
  if (s.direct.n_intervals < 1) {
    throw ValidationError("solver.n_intervals", "must be at least 1");
  }
  if (!(s.direct.fd_step > 0.0)) {
    throw ValidationError("solver.fd_step", "must be positive");
  }
  if (!(s.direct.tolerance > 0.0)) {
    throw ValidationError("solver.direct_tolerance", "must be positive");
  }
  if (s.direct.starts.empty()) {
    throw ValidationError("solver.starts", "at least one start is required");
  }
  return s;
}

OutputSettings read_output(const json& j) {
  const std::string path = "output";
  require_object(j, path);
  reject_unknown(j, path, {"csv", "summary"});
  OutputSettings o;
  if (j.contains("csv")) {
    o.csv = get_string(j["csv"], "output.csv");
  }
  if (j.contains("summary")) {
    o.summary = get_string(j["summary"], "output.summary");
  }
  return o;
}

// Re-throws model validation errors with the section prefix in the field path.
template <class Fn>
void with_prefix(const std::string& prefix, Fn&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    const auto& field = e.field();
    if (field.rfind(prefix + ".", 0) == 0 || field.find('.') != std::string::npos) {
      throw;
    }
    std::string message = e.what();
    const auto colon = message.find(": ");
    if (colon != std::string::npos) {
      message = message.substr(colon + 2);
    }
    throw ValidationError(prefix + "." + field, message);
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

control::ControlProblem ScenarioFile::control_problem() const {
  auto problem = control::ControlProblem::from_scenario(scenario);
  const ControlSettings c = control.value_or(ControlSettings{});
  problem.gamma_D = c.gamma_D;
  problem.gamma_V = c.gamma_V;
  problem.theta = c.theta;
  problem.u_min = c.u_min;
  problem.u_max = c.u_max;
  problem.step = solver.step;
  return problem;
}

ScenarioFile parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("JSON syntax error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + e.what(),
                     line, column);
  }
  require_object(root, "");
  reject_unknown(root, "",
                 {"schema_version", "preset", "label", "params", "initial", "horizon", "strategy", "control", "solver",
                  "output"});

  ScenarioFile file;
  if (root.contains("schema_version")) {
    file.schema_version = get_string(root["schema_version"], "schema_version");
    if (file.schema_version != kSchemaVersion) {
      throw ValidationError("schema_version", "unsupported version '" + file.schema_version + "'");
    }
  }
  const bool has_preset = root.contains("preset");
  if (has_preset) {
    const auto name = get_string(root["preset"], "preset");
    try {
      file.scenario = preset_scenario(name);
    } catch (const LookupError& e) {
      throw ValidationError("preset", e.what());
    }
    file.preset = name;
  } else {
    file.scenario.label = "scenario";
  }
  if (root.contains("label")) {
    file.scenario.label = get_string(root["label"], "label");
  }
  if (root.contains("params")) {
    read_params(root["params"], file.scenario.params, !has_preset);
  } else if (!has_preset) {
    throw ValidationError("params", "missing required section (or give a preset)");
  }
  if (root.contains("initial")) {
    read_state(root["initial"], file.scenario.initial, !has_preset);
  } else if (!has_preset) {
    throw ValidationError("initial", "missing required section (or give a preset)");
  }
  if (root.contains("horizon")) {
    file.scenario.horizon = get_number(root["horizon"], "horizon");
  }
  if (root.contains("strategy")) {
    file.scenario.strategy = read_strategy(root["strategy"]);
  }
  if (root.contains("control")) {
    file.control = read_control(root["control"]);
  }
  if (root.contains("solver")) {
    file.solver = read_solver(root["solver"]);
  }
  if (root.contains("output")) {
    file.output = read_output(root["output"]);
  }

  with_prefix("params", [&] { file.scenario.params.validate(); });
  with_prefix("initial", [&] { file.scenario.initial.validate(file.scenario.params); });
  validate_strategy(file.scenario.strategy);
  if (!(file.scenario.horizon > 0.0)) {
    throw ValidationError("horizon", "must be positive");
  }
  if (file.control) {
    file.control_problem().validate();
  }
  return file;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open scenario file '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

json params_to_json(const EpiParams& p) {
  json j = json::object();
  for (const auto& f : kParamFields) {
    j[std::string(f.name)] = p.*(f.member);
  }
  return j;
}

json state_to_json(const SysState& s) {
  json j = json::object();
  for (const auto& f : kStateFields) {
    j[std::string(f.name)] = s.*(f.member);
  }
  return j;
}

json strategy_to_json(const VaccineStrategy& s) {
  json j = {{"type", strategy_tag(s)}};
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, strategy::Pediatric>) {
          j["p"] = v.p;
        } else if constexpr (std::is_same_v<T, strategy::MassPerfect>) {
          j["psi"] = v.psi;
        } else if constexpr (std::is_same_v<T, strategy::MassImperfect>) {
          j["psi"] = v.psi;
          j["sigma"] = v.sigma;
        } else if constexpr (std::is_same_v<T, strategy::MassWaning>) {
          j["psi"] = v.psi;
          j["theta"] = v.theta;
        }
      },
      s);
  return j;
}

json scenario_to_json(const ScenarioFile& file) {
  json j;
  j["schema_version"] = file.schema_version;
  j["label"] = file.scenario.label;
  j["params"] = params_to_json(file.scenario.params);
  j["initial"] = state_to_json(file.scenario.initial);
  j["horizon"] = file.scenario.horizon;
  j["strategy"] = strategy_to_json(file.scenario.strategy);
  if (file.control) {
    const auto& c = *file.control;
    j["control"] = {{"gamma_D", c.gamma_D}, {"gamma_V", c.gamma_V}, {"theta", c.theta},
                    {"u_min", c.u_min},     {"u_max", c.u_max}};
  }
  const auto& s = file.solver;
  j["solver"] = {{"step", s.step},
                 {"relaxation", s.sweep.relaxation},
                 {"min_relaxation", s.sweep.min_relaxation},
                 {"tolerance", s.sweep.tolerance},
                 {"max_iter", s.sweep.max_iter},
                 {"n_intervals", s.direct.n_intervals},
                 {"fd_step", s.direct.fd_step},
                 {"starts", s.direct.starts},
                 {"direct_max_iter", s.direct.max_iter},
                 {"direct_tolerance", s.direct.tolerance}};
  json out = json::object();
  if (!file.output.csv.empty()) {
    out["csv"] = file.output.csv;
  }
  if (!file.output.summary.empty()) {
    out["summary"] = file.output.summary;
  }
  if (!out.empty()) {
    j["output"] = out;
  }
  return j;
}

std::string serialize_scenario(const ScenarioFile& file) { return scenario_to_json(file).dump(2) + "\n"; }

std::string format_trajectory_csv(const ode::Trajectory& traj, std::optional<std::span<const double>> control) {
  if (traj.states.size() != traj.times.size()) {
    throw ContractViolation("trajectory times and states differ in length");
  }
  if (control && control->size() != traj.size()) {
    throw ContractViolation("control column length differs from the trajectory");
  }
  std::string out = "t";
  for (auto name : kCompartmentNames) {
    out += ',';
    out += name;
  }
  if (control) {
    out += ",u";
  }
  out += '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.states[i].size() != kCompartments) {
      throw ContractViolation("trajectory CSV needs seven compartments per row");
    }
    out += format_double(traj.times[i]);
    for (double v : traj.states[i]) {
      out += ',';
      out += format_double(v);
    }
    if (control) {
      out += ',';
      out += format_double((*control)[i]);
    }
    out += '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot open '" + path.string() + "' for writing");
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) {
    throw Error("failed writing '" + path.string() + "'");
  }
}

void write_trajectory_csv(const ode::Trajectory& traj, std::optional<std::span<const double>> control,
                          const std::filesystem::path& path) {
  write_text(path, format_trajectory_csv(traj, control));
}

ode::Trajectory parse_trajectory_csv(std::string_view text) {
  ode::Trajectory traj;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  bool with_u = false;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    const std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) {
        break;
      }
      start = comma + 1;
    }
    if (line_no == 1) {
      columns = cells.size();
      with_u = columns == kCompartments + 2 && cells.back() == "u";
      if (cells.front() != "t" || (columns != kCompartments + 1 && !with_u)) {
        throw ParseError("unexpected trajectory CSV header", 1, 1);
      }
      for (std::size_t c = 0; c < kCompartments; ++c) {
        if (cells[c + 1] != kCompartmentNames[c]) {
          throw ParseError("unexpected trajectory CSV column '" + cells[c + 1] + "'", 1, c + 2);
        }
      }
      continue;
    }
    if (cells.size() != columns) {
      throw ParseError("row has " + std::to_string(cells.size()) + " cells, expected " + std::to_string(columns),
                       line_no, 1);
    }
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      char* endp = nullptr;
      errno = 0;
      values[c] = std::strtod(cells[c].c_str(), &endp);
      if (endp == cells[c].c_str() || *endp != '\0' || errno == ERANGE) {
        throw ParseError("invalid number '" + cells[c] + "'", line_no, c + 1);
      }
    }
    traj.times.push_back(values[0]);
    traj.states.emplace_back(values.begin() + 1, values.begin() + 1 + kCompartments);
    if (with_u) {
      traj.control.push_back(values.back());
    }
  }
  if (line_no == 0) {
    throw ParseError("empty trajectory CSV", 1, 1);
  }
  return traj;
}

ode::Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trajectory_csv(buf.str());
}

double round_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value)) {
    return value;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return std::strtod(buf, nullptr);
}

namespace {

void check_finite_json(const json& j, const std::string& path) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) {
    throw ContractViolation("run summary field '" + path + "' is not finite");
  }
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      check_finite_json(v, join(path, k));
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      check_finite_json(j[i], path + "[" + std::to_string(i) + "]");
    }
  }
}

}  // namespace

json RunSummary::to_json() const {
  json j;
  j["label"] = label;
  j["strategy"] = strategy;
  j["r0"] = {{"baseline", round_significant(r0, 4)}};
  if (r0_strategy) {
    j["r0"]["strategy"] = round_significant(*r0_strategy, 4);
  }
  j["thresholds"] = {{"p_c", round_significant(p_c, 4)},
                     {"p_c_already_subcritical", p_c_subcritical},
                     {"psi_c", round_significant(psi_c, 4)},
                     {"psi_c_already_subcritical", psi_c_subcritical}};
  j["peak"] = {{"compartment", "I_h"}, {"t", peak_time}, {"value", peak_value}};
  j["final_state"] = state_to_json(final_state);
  if (!costs.is_null()) {
    j["costs"] = costs;
  }
  if (!diagnostics.is_null()) {
    j["diagnostics"] = diagnostics;
  }
  check_finite_json(j, "");
  return j;
}

RunSummary summarize_run(const Scenario& scenario, const ode::Trajectory& traj, double step) {
  RunSummary s;
  s.label = scenario.label;
  s.strategy = strategy_tag(scenario.strategy);
  const auto& p = scenario.params;
  s.r0 = r0_baseline(p);
  s.r0_strategy = std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, strategy::Pediatric>) {
          return r0_pediatric(p, v.p);
        } else if constexpr (std::is_same_v<T, strategy::MassPerfect>) {
          return r0_mass(p, v.psi);
        } else if constexpr (std::is_same_v<T, strategy::MassImperfect>) {
          return r0_imperfect(p, v.psi, v.sigma);
        } else if constexpr (std::is_same_v<T, strategy::MassWaning>) {
          return r0_waning(p, v.psi);
        } else {
          return r0_baseline(p);
        }
      },
      scenario.strategy);
  const auto pc = critical_pediatric_coverage_from_r0(s.r0);
  const auto psic = critical_mass_rate_from_r0(s.r0, p.mu_h);
  s.p_c = pc.value;
  s.p_c_subcritical = pc.already_subcritical;
  s.psi_c = psic.value;
  s.psi_c_subcritical = psic.already_subcritical;
  const auto pk = peak(traj, "I_h");
  s.peak_time = pk.time;
  s.peak_value = pk.value;
  s.final_state = SysState::from_span(traj.states.back());
  double drift = 0.0;
  for (const auto& row : traj.states) {
    drift = std::max(drift, std::abs(row[0] + row[1] + row[2] + row[3] - p.N_h));
  }
  s.diagnostics = {{"step", step}, {"points", traj.size()}, {"max_human_drift", drift}};
  return s;
}

}  // namespace epivax::io
