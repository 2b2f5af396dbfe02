#include "epivax/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epivax/control.hpp"
#include "epivax/errors.hpp"
#include "epivax/models.hpp"
#include "epivax/parallel.hpp"
#include "epivax/reproduction.hpp"
#include "epivax/scenario_io.hpp"

namespace epivax {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

io::ScenarioFile resolve_scenario(const std::string& spec) {
  std::error_code ec;
  if (fs::is_regular_file(spec, ec)) {
    return io::load_scenario(spec);
  }
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), spec) != names.end()) {
    io::ScenarioFile file;
    file.preset = spec;
    file.scenario = preset_scenario(spec);
    return file;
  }
  throw Error("'" + spec + "' is neither a readable scenario file nor a preset name");
}

// Shortest text that reads back to the same double.
std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string file_stem(const io::ScenarioFile& file) {
  std::string s = file.scenario.label.empty() ? std::string("scenario") : file.scenario.label;
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') {
      c = '_';
    }
  }
  return s;
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir.empty() ? "." : dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) {
    throw Error("cannot create output directory '" + p.string() + "': " + ec.message());
  }
  return p;
}

void prepare_parent(const std::string& file) {
  const fs::path parent = fs::path(file).parent_path();
  if (!parent.empty()) {
    prepare_dir(parent.string());
  }
}

json report_to_json(const control::SolveReport& r, const control::ControlProblem& problem) {
  json j;
  j["method"] = control::to_string(r.method);
  j["cost"] = r.cost;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["theta"] = problem.theta;
  j["gamma_D"] = problem.gamma_D;
  j["gamma_V"] = problem.gamma_V;
  j["points"] = r.control.u.size();
  if (r.method == control::SolveMethod::indirect) {
    j["final_delta"] = r.final_delta;
    j["relaxation"] = r.relaxation;
  }
  if (r.method == control::SolveMethod::direct) {
    j["piece_values"] = r.piece_values;
    j["cost_history"] = r.cost_history;
  }
  const auto pk = peak(control::denormalize(r.states, problem.normalization()), "I_h");
  j["peak_I_h"] = {{"t", pk.time}, {"value", pk.value}};
  j["max_u"] = r.control.u.empty() ? 0.0 : *std::max_element(r.control.u.begin(), r.control.u.end());
  return j;
}

void write_report_files(const control::SolveReport& r, const control::ControlProblem& problem,
                        const fs::path& csv_path, const fs::path& json_path) {
  const auto absolute = control::denormalize(r.states, problem.normalization());
  io::write_trajectory_csv(absolute, std::span<const double>(absolute.control), csv_path);
  io::write_text(json_path, report_to_json(r, problem).dump(2) + "\n");
}

VaccineStrategy sweep_strategy(const std::string& vary, double value, double psi, std::optional<double> sigma,
                               std::optional<double> theta) {
  if (vary == "p") {
    return strategy::Pediatric{value};
  }
  if (vary == "psi") {
    if (sigma) {
      return strategy::MassImperfect{value, *sigma};
    }
    if (theta) {
      return strategy::MassWaning{value, *theta};
    }
    return strategy::MassPerfect{value};
  }
  if (vary == "sigma") {
    return strategy::MassImperfect{psi, value};
  }
  return strategy::MassWaning{psi, value};
}

struct Options {
  std::string scenario;
  std::optional<double> step;

  // simulate
  std::string out_csv;
  std::string summary_path;

  // r0 / sweep
  std::optional<double> p, psi, sigma, theta;
  std::string vary;
  std::vector<double> values;
  double base_psi = 0.85;

  // optimize / compare
  std::string method = "indirect";
  std::string out_dir = ".";
  std::vector<double> thetas;
};

int cmd_simulate(const Options& o, std::ostream& out) {
  const auto file = resolve_scenario(o.scenario);
  const double step = o.step.value_or(file.solver.step);
  const auto traj = simulate(file.scenario, step);
  std::string csv = o.out_csv.empty() ? file.output.csv : o.out_csv;
  if (csv.empty()) {
    csv = file_stem(file) + "_trajectory.csv";
  }
  prepare_parent(csv);
  io::write_trajectory_csv(traj, std::nullopt, csv);
  auto summary = io::summarize_run(file.scenario, traj, step).to_json();
  summary["csv"] = csv;
  const std::string summary_path = o.summary_path.empty() ? file.output.summary : o.summary_path;
  if (!summary_path.empty()) {
    prepare_parent(summary_path);
    io::write_text(summary_path, summary.dump(2) + "\n");
  }
  out << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_r0(const Options& o, std::ostream& out) {
  const auto file = resolve_scenario(o.scenario);
  const auto& params = file.scenario.params;
  const double r0 = r0_baseline(params);
  const auto pc = critical_pediatric_coverage_from_r0(r0);
  const auto psic = critical_mass_rate_from_r0(r0, params.mu_h);
  json j;
  j["label"] = file.scenario.label;
  j["r0"] = io::round_significant(r0, 4);
  j["p_c"] = io::round_significant(pc.value, 4);
  j["p_c_already_subcritical"] = pc.already_subcritical;
  j["psi_c"] = io::round_significant(psic.value, 4);
  j["psi_c_already_subcritical"] = psic.already_subcritical;
  if (o.p) {
    validate_strategy(strategy::Pediatric{*o.p});
    j["p"] = *o.p;
    j["r0_pediatric"] = io::round_significant(r0_pediatric(params, *o.p), 4);
  }
  if (o.psi) {
    validate_strategy(strategy::MassPerfect{*o.psi});
    j["psi"] = *o.psi;
    j["r0_mass"] = io::round_significant(r0_mass(params, *o.psi), 4);
    if (o.sigma) {
      validate_strategy(strategy::MassImperfect{*o.psi, *o.sigma});
      j["sigma"] = *o.sigma;
      j["r0_imperfect"] = io::round_significant(r0_imperfect(params, *o.psi, *o.sigma), 4);
    }
    if (o.theta) {
      validate_strategy(strategy::MassWaning{*o.psi, *o.theta});
      j["theta"] = *o.theta;
      j["r0_waning"] = io::round_significant(r0_waning(params, *o.psi), 4);
    }
  }
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const auto file = resolve_scenario(o.scenario);
  const double step = o.step.value_or(file.solver.step);
  std::vector<Scenario> runs;
  for (double v : o.values) {
    Scenario sc = file.scenario;
    sc.strategy = sweep_strategy(o.vary, v, o.base_psi, o.sigma, o.theta);
    validate_strategy(sc.strategy);
    runs.push_back(std::move(sc));
  }
  std::vector<ode::Trajectory> trajs(runs.size());
  parallel_for(runs.size(), default_threads(), [&](std::size_t i) { trajs[i] = simulate(runs[i], step); });

  std::string table = o.vary + ",strategy,r0_strategy,peak_t,peak_I_h,final_I_h\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto s = io::summarize_run(runs[i], trajs[i], step);
    table += num(o.values[i]) + "," + s.strategy + "," + num(*s.r0_strategy) + "," + num(s.peak_time) + "," +
             num(s.peak_value) + "," + num(s.final_state.I_h) + "\n";
  }
  if (!o.out_dir.empty() && o.out_dir != "-") {
    const auto dir = prepare_dir(o.out_dir);
    std::string stem = file_stem(file) + "_sweep_" + o.vary;
    if (o.vary == "psi" && o.sigma) {
      stem += "_sigma" + num(*o.sigma);
    } else if (o.vary == "psi" && o.theta) {
      stem += "_theta" + num(*o.theta);
    }
    std::string curves = "t";
    for (double v : o.values) {
      curves += ",I_h@" + num(v);
    }
    curves += "\n";
    const auto ih = compartment_index("I_h");
    if (!trajs.empty()) {
      for (std::size_t r = 0; r < trajs.front().size(); ++r) {
        curves += num(trajs.front().times[r]);
        for (const auto& t : trajs) {
          curves += "," + num(t.states[r][ih]);
        }
        curves += "\n";
      }
    }
    io::write_text(dir / (stem + "_infected.csv"), curves);
    io::write_text(dir / (stem + "_peaks.csv"), table);
  }
  out << table;
  return kExitOk;
}

int cmd_optimize(const Options& o, std::ostream& out) {
  const auto file = resolve_scenario(o.scenario);
  auto problem = file.control_problem();
  if (o.step) {
    problem.step = *o.step;
  }
  problem.validate();
  const auto dir = prepare_dir(o.out_dir);
  const std::string stem = file_stem(file);

  if (!o.thetas.empty()) {
    if (o.method != "indirect") {
      throw ValidationError("method", "--thetas runs the indirect method only");
    }
    const auto reports = control::efficacy_sweep(problem, o.thetas, file.solver.sweep, default_threads());
    std::string table = "theta,cost,iterations,converged,peak_I_h,max_u\n";
    std::string curves = "t";
    for (double th : o.thetas) {
      curves += ",u@" + num(th) + ",I_h@" + num(th);
    }
    curves += "\n";
    std::vector<ode::Trajectory> absolute;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      auto p = problem;
      p.theta = o.thetas[i];
      const auto j = report_to_json(reports[i], p);
      table += num(o.thetas[i]) + "," + num(reports[i].cost) + "," + std::to_string(reports[i].iterations) + "," +
               (reports[i].converged ? "true" : "false") + "," + num(j["peak_I_h"]["value"].get<double>()) + "," +
               num(j["max_u"].get<double>()) + "\n";
      absolute.push_back(control::denormalize(reports[i].states, p.normalization()));
    }
    const auto ih = compartment_index("I_h");
    if (!absolute.empty()) {
      for (std::size_t r = 0; r < absolute.front().size(); ++r) {
        curves += num(absolute.front().times[r]);
        for (const auto& t : absolute) {
          curves += "," + num(t.control[r]) + "," + num(t.states[r][ih]);
        }
        curves += "\n";
      }
    }
    io::write_text(dir / (stem + "_efficacy.csv"), curves);
    io::write_text(dir / (stem + "_efficacy_costs.csv"), table);
    out << table;
    return kExitOk;
  }

  std::string table = "method,cost,iterations,converged\n";
  auto run = [&](const control::SolveReport& r) {
    const std::string m = control::to_string(r.method);
    write_report_files(r, problem, dir / (stem + "_" + m + ".csv"), dir / (stem + "_" + m + ".json"));
    table += m + "," + num(r.cost) + "," + std::to_string(r.iterations) + "," + (r.converged ? "true" : "false") +
             "\n";
  };
  if (o.method == "indirect" || o.method == "both") {
    run(control::solve_indirect(problem, file.solver.sweep));
  }
  if (o.method == "direct" || o.method == "both") {
    run(control::solve_direct(problem, file.solver.direct));
  }
  io::write_text(dir / (stem + "_costs.csv"), table);
  out << table;
  return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
  const auto file = resolve_scenario(o.scenario);
  auto problem = file.control_problem();
  if (o.step) {
    problem.step = *o.step;
  }
  problem.validate();
  const auto dir = prepare_dir(o.out_dir);
  const std::string stem = file_stem(file);
  const auto cmp = control::compare_policies(problem, file.solver.sweep);
  const control::PolicyRow* rows[] = {&cmp.optimal, &cmp.no_control, &cmp.upper_control};

  std::string table = "policy,cost,peak_I_h,peak_t\n";
  for (const auto* row : rows) {
    table += row->name + "," + num(row->cost) + "," + num(row->peak_infected) + "," + num(row->peak_time) + "\n";
  }
  std::string curves = "t,I_h_optimal,I_h_no_control,I_h_upper_control,u_optimal\n";
  for (std::size_t r = 0; r < cmp.optimal.infected.size(); ++r) {
    curves += num(cmp.optimal.infected.times[r]);
    for (const auto* row : rows) {
      curves += "," + num(row->infected.states[r][0]);
    }
    curves += "," + num(cmp.optimal.infected.control[r]) + "\n";
  }
  io::write_text(dir / (stem + "_compare.csv"), table);
  io::write_text(dir / (stem + "_compare_infected.csv"), curves);
  out << table;
  return kExitOk;
}

int cmd_presets(std::ostream& out) {
  json j = json::object();
  for (const auto& name : preset_names()) {
    const auto sc = preset_scenario(name);
    j[name] = {{"params", io::params_to_json(sc.params)},
               {"initial", io::state_to_json(sc.initial)},
               {"horizon", sc.horizon},
               {"r0", io::round_significant(r0_baseline(sc.params), 4)}};
  }
  out << j.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dengue vaccination dynamics: simulation, reproduction numbers and optimal control", "epivax"};
  app.require_subcommand(1);
  Options o;

  auto add_scenario = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", o.scenario, "Scenario JSON file or preset name (epidemic, endemic)")->required();
  };
  auto add_step = [&](CLI::App* cmd) {
    cmd->add_option("--step", o.step, "RK4 step in days")->check(CLI::PositiveNumber);
  };

  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a scenario; summary JSON on stdout");
  add_scenario(simulate_cmd);
  add_step(simulate_cmd);
  simulate_cmd->add_option("--out", o.out_csv, "Trajectory CSV path");
  simulate_cmd->add_option("--summary", o.summary_path, "Also write the summary JSON here");

  auto* r0_cmd = app.add_subcommand("r0", "Reproduction numbers and eradication thresholds");
  add_scenario(r0_cmd);
  auto* p_opt = r0_cmd->add_option("--p", o.p, "Pediatric coverage");
  auto* psi_opt = r0_cmd->add_option("--psi", o.psi, "Mass vaccination rate");
  r0_cmd->add_option("--sigma", o.sigma, "Relative susceptibility of vaccinated (needs --psi)")->needs(psi_opt);
  r0_cmd->add_option("--theta", o.theta, "Waning rate (needs --psi)")->needs(psi_opt);
  p_opt->excludes(psi_opt);

  auto* sweep_cmd = app.add_subcommand("sweep", "Peak infected humans over a parameter sweep");
  add_scenario(sweep_cmd);
  add_step(sweep_cmd);
  sweep_cmd->add_option("--vary", o.vary, "Swept parameter")
      ->required()
      ->check(CLI::IsMember({"p", "psi", "sigma", "theta"}));
  sweep_cmd->add_option("--values", o.values, "Comma-separated values")->required()->delimiter(',');
  sweep_cmd->add_option("--psi", o.base_psi, "Vaccination rate when sweeping sigma or theta")
      ->capture_default_str();
  auto* sweep_sigma = sweep_cmd->add_option("--sigma", o.sigma, "Imperfect vaccine when sweeping psi");
  auto* sweep_theta = sweep_cmd->add_option("--theta", o.theta, "Waning vaccine when sweeping psi");
  sweep_sigma->excludes(sweep_theta);
  o.out_dir.clear();
  sweep_cmd->add_option("--out-dir", o.out_dir, "Directory for the infected-curve and peak CSVs");

  auto* optimize_cmd = app.add_subcommand("optimize", "Solve the vaccination optimal-control problem");
  add_scenario(optimize_cmd);
  add_step(optimize_cmd);
  optimize_cmd->add_option("--method", o.method, "indirect, direct or both")
      ->check(CLI::IsMember({"indirect", "direct", "both"}));
  optimize_cmd->add_option("--out-dir", o.out_dir, "Directory for report files");
  optimize_cmd->add_option("--thetas", o.thetas, "Comma-separated waning rates (indirect efficacy sweep)")
      ->delimiter(',');

  auto* compare_cmd = app.add_subcommand("compare", "Optimal vs no control vs upper control");
  add_scenario(compare_cmd);
  add_step(compare_cmd);
  compare_cmd->add_option("--out-dir", o.out_dir, "Directory for report files");

  auto* presets_cmd = app.add_subcommand("presets", "List built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (simulate_cmd->parsed()) {
      return cmd_simulate(o, out);
    }
    if (r0_cmd->parsed()) {
      return cmd_r0(o, out);
    }
    if (sweep_cmd->parsed()) {
      return cmd_sweep(o, out);
    }
    if (optimize_cmd->parsed()) {
      if (o.out_dir.empty()) {
        o.out_dir = ".";
      }
      return cmd_optimize(o, out);
    }
    if (compare_cmd->parsed()) {
      if (o.out_dir.empty()) {
        o.out_dir = ".";
      }
      return cmd_compare(o, out);
    }
    if (presets_cmd->parsed()) {
      return cmd_presets(out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace epivax
