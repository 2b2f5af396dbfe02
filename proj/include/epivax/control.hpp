/**
 * @file control.hpp
 * @brief Optimal vaccination control for the six-compartment model.
 *
 * Minimizes J[u] = integral of gamma_D I_h(t)^2 + gamma_V u(t)^2 over [0, horizon]
 * subject to the controlled dynamics, with u(t) in [u_min, u_max]. Two solvers:
 *
 *  - solve_indirect: forward-backward sweep on the Pontryagin optimality system
 *    (state forward, costates backward from zero terminal values, control from
 *    the projected minimality condition, relaxed update).
 *  - solve_direct: piecewise-constant control, projected gradient descent on the
 *    simulated cost with finite-difference gradients and a multi-start.
 *
 * Both operate on the normalized system: humans / N_h, aquatic / (k N_h),
 * adult mosquitoes / (m N_h). Time stays in days.
 */
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "epivax/models.hpp"
#include "epivax/ode.hpp"

namespace epivax::control {

inline constexpr std::size_t kStates = 6;

/// Normalized (S_h, I_h, R_h, A_m, S_m, I_m).
using ControlState = std::array<double, kStates>;
/// Costates paired with ControlState components.
using AdjointVec = std::array<double, kStates>;

enum Index : std::size_t { kS = 0, kI = 1, kR = 2, kA = 3, kSm = 4, kIm = 5 };

struct NormalizationSpec {
  double human_scale = 1.0;
  double aquatic_scale = 1.0;
  double adult_mosquito_scale = 1.0;

  [[nodiscard]] static NormalizationSpec from_params(const EpiParams& params);
  void validate() const;

  friend bool operator==(const NormalizationSpec&, const NormalizationSpec&) = default;
};

/** @brief Parameters of the normalized dynamics, derived from EpiParams. */
struct NormalizedParams {
  double mu_h, eta_h, mu_m, phi, mu_A, eta_A;
  double infect_h;   // B beta_mh m: force on humans per unit normalized I_m
  double infect_m;   // B beta_hm: force on mosquitoes per unit normalized I_h
  double egg_ratio;  // m / k: adult-to-aquatic scale ratio in the egg term
  double mature_ratio;  // k / m: aquatic-to-adult scale ratio in maturation

  [[nodiscard]] static NormalizedParams from(const EpiParams& params);
};

struct ControlProblem {
  Scenario scenario;  // strategy is ignored; the control replaces it
  double gamma_D = 0.5;
  double gamma_V = 0.5;
  double theta = 0.05;
  double u_min = 0.0;
  double u_max = 1.0;
  double horizon = 365.0;
  double step = kDefaultStep;

  [[nodiscard]] static ControlProblem from_scenario(const Scenario& scenario);
  void validate() const;
  [[nodiscard]] NormalizationSpec normalization() const { return NormalizationSpec::from_params(scenario.params); }
  [[nodiscard]] ode::TimeGrid grid() const { return ode::TimeGrid::with_step(0.0, horizon, step); }
};

/** @brief Control values on a time grid. */
struct ControlGrid {
  ode::TimeGrid grid;
  std::vector<double> u;
};

enum class SolveMethod { indirect, direct, fixed };
[[nodiscard]] std::string to_string(SolveMethod m);

struct SolveReport {
  ControlGrid control;
  ode::Trajectory states;    // normalized, six components, control column attached
  ode::Trajectory adjoints;  // indirect only
  double cost = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  SolveMethod method = SolveMethod::indirect;
  std::vector<double> piece_values;   // direct only: one value per control interval
  std::vector<double> cost_history;   // direct only: objective after each accepted iteration of the best start
  double final_delta = 0.0;           // indirect: last relative change of (u, states)
  double relaxation = 0.0;            // indirect: relaxation in effect at the last iteration
};

/**
 * Forward-backward sweep settings. The relaxation starts at `relaxation` and is
 * halved (down to `min_relaxation`) whenever the iteration change grows.
 */
struct SweepConfig {
  double relaxation = 0.5;
  double min_relaxation = 1e-3;
  double tolerance = 1e-6;
  std::size_t max_iter = 2000;
};

struct DirectConfig {
  std::size_t n_intervals = 10;
  double fd_step = 1e-6;
  std::vector<double> starts = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::size_t max_iter = 500;
  double tolerance = 1e-8;   // sup norm of the projected-gradient step
  std::size_t threads = 0;   // 0 = default_threads()
};

// Normalization.
[[nodiscard]] ControlState normalize(const SysState& s, const NormalizationSpec& n);
[[nodiscard]] SysState denormalize(const ControlState& x, const NormalizationSpec& n);
/** Six-component normalized trajectory -> seven-column absolute trajectory (V_h = 0), control kept. */
[[nodiscard]] ode::Trajectory denormalize(const ode::Trajectory& normalized, const NormalizationSpec& n);

/** Normalized controlled dynamics. */
[[nodiscard]] ControlState controlled_field(const ControlState& x, double u, double theta,
                                            const NormalizedParams& p) noexcept;

/**
 * Cost integral on the control grid: Simpson's rule over an even number of
 * intervals, with a trapezoid for the final interval when the count is odd.
 * Throws ContractViolation when `infected` is not sampled on the control grid.
 */
[[nodiscard]] double evaluate_cost(const ControlGrid& control, std::span<const double> infected, double gamma_D,
                                   double gamma_V);
/**
 * Cost of a piecewise-constant control: the infected term by the same
 * quadrature as evaluate_cost, the control term integrated exactly per piece.
 */
[[nodiscard]] double piecewise_cost(const ode::TimeGrid& grid, std::span<const double> pieces,
                                    std::span<const double> infected, double gamma_D, double gamma_V);
/** Composite Simpson (trapezoid tail) of samples on a uniform grid. */
[[nodiscard]] double integrate_samples(const ode::TimeGrid& grid, std::span<const double> values);

/** gamma_D I^2 + gamma_V u^2 + lambda . f(x, u). */
[[nodiscard]] double hamiltonian(const ControlState& x, const AdjointVec& lam, double u, const ControlProblem& problem);
/** dH/du = 2 gamma_V u - (lambda_S - lambda_R)(S - theta R). */
[[nodiscard]] double hamiltonian_du(const ControlState& x, const AdjointVec& lam, double u,
                                    const ControlProblem& problem);
/** Costate derivatives -dH/dx. */
[[nodiscard]] AdjointVec adjoint_rhs(const ControlState& x, const AdjointVec& lam, double u,
                                     const ControlProblem& problem);
/** min(u_max, max(u_min, (lambda_S - lambda_R)(S - theta R) / (2 gamma_V))). */
[[nodiscard]] double project_control(const ControlState& x, const AdjointVec& lam, const ControlProblem& problem);

/** Forward simulation of the normalized system; u is linearly interpolated between grid points. */
[[nodiscard]] ode::Trajectory simulate_controlled(const ControlProblem& problem, std::span<const double> u_on_grid);
/** Forward simulation with a piecewise-constant control of `pieces.size()` equal intervals. */
[[nodiscard]] ode::Trajectory simulate_piecewise(const ControlProblem& problem, std::span<const double> pieces);
/** Costates from zero terminal values along a forward trajectory that carries its control column. */
[[nodiscard]] ode::Trajectory solve_adjoint(const ControlProblem& problem, const ode::Trajectory& forward);

/** Simulate with a control that is constant in time and return its cost. */
[[nodiscard]] SolveReport evaluate_constant_policy(const ControlProblem& problem, double u);

[[nodiscard]] SolveReport solve_indirect(const ControlProblem& problem, const SweepConfig& config = {});
[[nodiscard]] SolveReport solve_direct(const ControlProblem& problem, const DirectConfig& config = {});

struct PolicyRow {
  std::string name;
  double cost = 0.0;
  double peak_infected = 0.0;  // absolute persons
  double peak_time = 0.0;
  ode::Trajectory infected;    // absolute I_h, one component, with control column
};

struct PolicyComparison {
  PolicyRow optimal;
  PolicyRow no_control;
  PolicyRow upper_control;
  SolveReport optimal_report;
};

/** Optimal (indirect), u = u_min ("no control") and u = u_max ("upper control"). */
[[nodiscard]] PolicyComparison compare_policies(const ControlProblem& problem, const SweepConfig& config = {});

/** One indirect solve per waning rate, in input order. */
[[nodiscard]] std::vector<SolveReport> efficacy_sweep(const ControlProblem& problem, std::span<const double> thetas,
                                                      const SweepConfig& config = {}, std::size_t threads = 0);

}  // namespace epivax::control
