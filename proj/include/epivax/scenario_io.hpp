/**
 * @file scenario_io.hpp
 * @brief Scenario JSON files, trajectory CSV and run-summary JSON.
 *
 * Scenario document (all sections optional except as noted):
 *
 *   {
 *     "schema_version": "1",
 *     "preset": "epidemic",            // base values; omit to spell out everything
 *     "label": "my run",
 *     "params":  { "N_h": ..., "B": ..., ... },   // all 12 keys required without a preset
 *     "initial": { "S_h": ..., ..., "I_m": ... }, // all 7 keys required without a preset
 *     "horizon": 365,
 *     "strategy": { "type": "mass_imperfect", "psi": 0.05, "sigma": 0.2 },
 *     "control": { "gamma_D": 0.5, "gamma_V": 0.5, "theta": 0.05, "u_min": 0, "u_max": 1 },
 *     "solver":  { "step": 0.05, "relaxation": 0.5, "tolerance": 1e-6, ... },
 *     "output":  { "csv": "run.csv", "summary": "run.json" }
 *   }
 *
 * Unknown keys are rejected at every level.
 */
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "epivax/control.hpp"
#include "epivax/models.hpp"
#include "epivax/ode.hpp"

namespace epivax::io {

inline constexpr std::string_view kSchemaVersion = "1";

struct ControlSettings {
  double gamma_D = 0.5;
  double gamma_V = 0.5;
  double theta = 0.05;
  double u_min = 0.0;
  double u_max = 1.0;

  friend bool operator==(const ControlSettings&, const ControlSettings&) = default;
};

struct SolverSettings {
  double step = kDefaultStep;
  control::SweepConfig sweep;
  control::DirectConfig direct;
};

struct OutputSettings {
  std::string csv;
  std::string summary;

  friend bool operator==(const OutputSettings&, const OutputSettings&) = default;
};

struct ScenarioFile {
  std::string schema_version = std::string(kSchemaVersion);
  std::optional<std::string> preset;
  Scenario scenario;
  std::optional<ControlSettings> control;
  SolverSettings solver;
  OutputSettings output;

  /** Control problem from this file; default weights when no "control" section was given. */
  [[nodiscard]] control::ControlProblem control_problem() const;
};

/**
 * Parse and validate a scenario document.
 * Throws ParseError (with line/column) on malformed JSON and ValidationError
 * (with a dotted field path such as "params.beta_mh") on bad content.
 */
[[nodiscard]] ScenarioFile parse_scenario(std::string_view text);
[[nodiscard]] ScenarioFile load_scenario(const std::filesystem::path& path);

/** Fully explicit document (no "preset" key) that parses back to identical values. */
[[nodiscard]] nlohmann::json scenario_to_json(const ScenarioFile& file);
[[nodiscard]] std::string serialize_scenario(const ScenarioFile& file);

[[nodiscard]] nlohmann::json params_to_json(const EpiParams& p);
[[nodiscard]] nlohmann::json state_to_json(const SysState& s);
[[nodiscard]] nlohmann::json strategy_to_json(const VaccineStrategy& s);

/**
 * CSV with header `t,S_h,V_h,I_h,R_h,A_m,S_m,I_m` (plus `,u` when a control is given),
 * one row per sample, 17 significant digits, '\n' line endings.
 * The trajectory must have seven components in absolute units.
 */
[[nodiscard]] std::string format_trajectory_csv(const ode::Trajectory& traj,
                                                std::optional<std::span<const double>> control = std::nullopt);
void write_trajectory_csv(const ode::Trajectory& traj, std::optional<std::span<const double>> control,
                          const std::filesystem::path& path);
/** Inverse of format_trajectory_csv; a trailing `u` column becomes the control column. */
[[nodiscard]] ode::Trajectory parse_trajectory_csv(std::string_view text);
[[nodiscard]] ode::Trajectory read_trajectory_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, std::string_view text);

/** Summary of one run. Serialized with R0-family values at 4 significant digits. */
struct RunSummary {
  std::string label;
  std::string strategy;
  double r0 = 0.0;
  std::optional<double> r0_strategy;  // reproduction number under the run's strategy
  double p_c = 0.0;
  bool p_c_subcritical = false;
  double psi_c = 0.0;
  bool psi_c_subcritical = false;
  double peak_time = 0.0;
  double peak_value = 0.0;
  SysState final_state;
  nlohmann::json costs;        // null unless a control run
  nlohmann::json diagnostics;  // solver details

  /** Throws ContractViolation when any numeric field is not finite. */
  [[nodiscard]] nlohmann::json to_json() const;
};

/** Summary of a simulated scenario trajectory (absolute units). */
[[nodiscard]] RunSummary summarize_run(const Scenario& scenario, const ode::Trajectory& traj, double step);

/** Round to `digits` significant digits. */
[[nodiscard]] double round_significant(double value, int digits);

}  // namespace epivax::io
