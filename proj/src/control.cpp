#include "epivax/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "epivax/errors.hpp"
#include "epivax/parallel.hpp"
#include "epivax/reproduction.hpp"

namespace epivax::control {

NormalizationSpec NormalizationSpec::from_params(const EpiParams& params) {
  return {params.N_h, params.k * params.N_h, params.m * params.N_h};
}

void NormalizationSpec::validate() const {
  if (!(human_scale > 0.0) || !(aquatic_scale > 0.0) || !(adult_mosquito_scale > 0.0)) {
    throw ValidationError("normalization", "all scales must be positive");
  }
}

NormalizedParams NormalizedParams::from(const EpiParams& p) {
  NormalizedParams n{};
  n.mu_h = p.mu_h;
  n.eta_h = p.eta_h;
  n.mu_m = p.mu_m;
  n.phi = p.phi;
  n.mu_A = p.mu_A;
  n.eta_A = p.eta_A;
  n.infect_h = p.B * p.beta_mh * p.m;
  n.infect_m = p.B * p.beta_hm;
  n.egg_ratio = p.m / p.k;
  n.mature_ratio = p.k / p.m;
  return n;
}

ControlProblem ControlProblem::from_scenario(const Scenario& scenario) {
  ControlProblem problem;
  problem.scenario = scenario;
  problem.scenario.strategy = strategy::NoVaccine{};
  problem.horizon = scenario.horizon;
  return problem;
}

void ControlProblem::validate() const {
  scenario.params.validate();
  scenario.initial.validate(scenario.params);
  if (scenario.initial.V_h != 0.0) {
    throw ValidationError("initial.V_h", "the controlled model has no vaccinated compartment; V_h must be 0");
  }
  if (!(gamma_D > 0.0) || !std::isfinite(gamma_D)) {
    throw ValidationError("control.gamma_D", "must be positive");
  }
  if (!(gamma_V > 0.0) || !std::isfinite(gamma_V)) {
    throw ValidationError("control.gamma_V", "must be positive");
  }
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw ValidationError("control.theta", "must be non-negative");
  }
  if (!(u_min >= 0.0)) {
    throw ValidationError("control.u_min", "must be >= 0");
  }
  if (!(u_max <= 1.0)) {
    throw ValidationError("control.u_max", "must be <= 1");
  }
  if (!(u_min <= u_max)) {
    throw ValidationError("control.u_min", "must not exceed u_max");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ValidationError("horizon", "must be positive");
  }
  if (!(step > 0.0) || step > horizon) {
    throw ValidationError("solver.step", "must be positive and no larger than the horizon");
  }
  normalization().validate();
}

std::string to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::indirect:
      return "indirect";
    case SolveMethod::direct:
      return "direct";
    case SolveMethod::fixed:
      return "fixed";
  }
  return "unknown";
}

ControlState normalize(const SysState& s, const NormalizationSpec& n) {
  return {s.S_h / n.human_scale,          s.I_h / n.human_scale,
          s.R_h / n.human_scale,          s.A_m / n.aquatic_scale,
          s.S_m / n.adult_mosquito_scale, s.I_m / n.adult_mosquito_scale};
}

SysState denormalize(const ControlState& x, const NormalizationSpec& n) {
  SysState s;
  s.S_h = x[kS] * n.human_scale;
  s.I_h = x[kI] * n.human_scale;
  s.R_h = x[kR] * n.human_scale;
  s.A_m = x[kA] * n.aquatic_scale;
  s.S_m = x[kSm] * n.adult_mosquito_scale;
  s.I_m = x[kIm] * n.adult_mosquito_scale;
  return s;
}

ode::Trajectory denormalize(const ode::Trajectory& normalized, const NormalizationSpec& n) {
  ode::Trajectory out;
  out.times = normalized.times;
  out.control = normalized.control;
  out.states.reserve(normalized.states.size());
  for (const auto& row : normalized.states) {
    if (row.size() != kStates) {
      throw ContractViolation("normalized trajectory must have six components");
    }
    ControlState x;
    std::copy(row.begin(), row.end(), x.begin());
    const auto a = denormalize(x, n).to_array();
    out.states.emplace_back(a.begin(), a.end());
  }
  return out;
}

ControlState controlled_field(const ControlState& x, double u, double theta, const NormalizedParams& p) noexcept {
  const double force_h = p.infect_h * x[kIm];
  const double force_m = p.infect_m * x[kI];
  ControlState d;
  d[kS] = p.mu_h - (force_h + p.mu_h + u) * x[kS] + theta * u * x[kR];
  d[kI] = force_h * x[kS] - (p.eta_h + p.mu_h) * x[kI];
  d[kR] = p.eta_h * x[kI] + u * x[kS] - (theta * u + p.mu_h) * x[kR];
  d[kA] = p.phi * p.egg_ratio * (1.0 - x[kA]) * (x[kSm] + x[kIm]) - (p.eta_A + p.mu_A) * x[kA];
  d[kSm] = p.eta_A * p.mature_ratio * x[kA] - (force_m + p.mu_m) * x[kSm];
  d[kIm] = force_m * x[kSm] - p.mu_m * x[kIm];
  return d;
}

double integrate_samples(const ode::TimeGrid& grid, std::span<const double> values) {
  if (values.size() != grid.size()) {
    throw ContractViolation("samples are not on the integration grid (" + std::to_string(values.size()) + " vs " +
                            std::to_string(grid.size()) + " points)");
  }
  const std::size_t intervals = grid.intervals();
  const double h = grid.spacing();
  const std::size_t even = intervals - intervals % 2;
  double total = 0.0;
  if (even > 0) {
    double odd_sum = 0.0;
    double even_sum = 0.0;
    for (std::size_t i = 1; i < even; ++i) {
      (i % 2 == 1 ? odd_sum : even_sum) += values[i];
    }
    total = h / 3.0 * (values[0] + 4.0 * odd_sum + 2.0 * even_sum + values[even]);
  }
  if (even != intervals) {
    total += 0.5 * h * (values[intervals - 1] + values[intervals]);
  }
  return total;
}

double evaluate_cost(const ControlGrid& control, std::span<const double> infected, double gamma_D, double gamma_V) {
  if (control.u.size() != control.grid.size() || infected.size() != control.grid.size()) {
    throw ContractViolation("control and infected series must be sampled on the same grid");
  }
  std::vector<double> integrand(control.grid.size());
  for (std::size_t i = 0; i < integrand.size(); ++i) {
    integrand[i] = gamma_D * infected[i] * infected[i] + gamma_V * control.u[i] * control.u[i];
  }
  return integrate_samples(control.grid, integrand);
}

namespace {

std::size_t piece_of(std::size_t interval, std::size_t intervals, std::size_t pieces) {
  return interval * pieces / intervals;
}

}  // namespace

double piecewise_cost(const ode::TimeGrid& grid, std::span<const double> pieces, std::span<const double> infected,
                      double gamma_D, double gamma_V) {
  if (pieces.empty()) {
    throw ContractViolation("piecewise control needs at least one piece");
  }
  std::vector<double> sq(infected.size());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    sq[i] = infected[i] * infected[i];
  }
  double control_term = 0.0;
  const double h = grid.spacing();
  for (std::size_t i = 0; i < grid.intervals(); ++i) {
    const double u = pieces[piece_of(i, grid.intervals(), pieces.size())];
    control_term += u * u * h;
  }
  return gamma_D * integrate_samples(grid, sq) + gamma_V * control_term;
}

double hamiltonian(const ControlState& x, const AdjointVec& lam, double u, const ControlProblem& problem) {
  const auto f = controlled_field(x, u, problem.theta, NormalizedParams::from(problem.scenario.params));
  double h = problem.gamma_D * x[kI] * x[kI] + problem.gamma_V * u * u;
  for (std::size_t i = 0; i < kStates; ++i) {
    h += lam[i] * f[i];
  }
  return h;
}

double hamiltonian_du(const ControlState& x, const AdjointVec& lam, double u, const ControlProblem& problem) {
  return 2.0 * problem.gamma_V * u - (lam[kS] - lam[kR]) * (x[kS] - problem.theta * x[kR]);
}

namespace {

AdjointVec costate_rates(const ControlState& x, const AdjointVec& l, double u, double theta, double gamma_D,
                         const NormalizedParams& p) noexcept {
  const double force_h = p.infect_h * x[kIm];
  const double force_m = p.infect_m * x[kI];
  const double crowding = p.phi * p.egg_ratio * (1.0 - x[kA]);
  AdjointVec d;
  d[kS] = (l[kS] - l[kI]) * force_h + l[kS] * p.mu_h + (l[kS] - l[kR]) * u;
  d[kI] = -2.0 * gamma_D * x[kI] + l[kI] * (p.eta_h + p.mu_h) - l[kR] * p.eta_h +
          (l[kSm] - l[kIm]) * p.infect_m * x[kSm];
  d[kR] = -l[kS] * theta * u + l[kR] * (p.mu_h + theta * u);
  d[kA] = l[kA] * p.phi * p.egg_ratio * (x[kSm] + x[kIm]) + l[kA] * (p.eta_A + p.mu_A) -
          l[kSm] * p.eta_A * p.mature_ratio;
  d[kSm] = -l[kA] * crowding + (l[kSm] - l[kIm]) * force_m + l[kSm] * p.mu_m;
  d[kIm] = (l[kS] - l[kI]) * p.infect_h * x[kS] - l[kA] * crowding + l[kIm] * p.mu_m;
  return d;
}

double project(double candidate, double lo, double hi) { return std::min(hi, std::max(lo, candidate)); }

ControlState row_to_state(std::span<const double> row) {
  ControlState x;
  std::copy(row.begin(), row.end(), x.begin());
  return x;
}

ode::IntegratorOptions state_options() {
  ode::IntegratorOptions o;
  o.clamp_negative = true;
  return o;
}

// Forward RK4 on the normalized system; `control_at(i, frac)` gives u on
// interval i at fraction 0, 1/2 or 1 of the step.
template <class ControlAt>
ode::Trajectory forward_sweep(const ControlProblem& problem, ControlAt&& control_at) {
  const auto grid = problem.grid();
  const auto params = NormalizedParams::from(problem.scenario.params);
  const auto x0 = normalize(problem.scenario.initial, problem.normalization());
  const auto options = state_options();

  ode::Trajectory out;
  out.times = grid.points();
  out.states.reserve(grid.size());
  ode::StateVec y(x0.begin(), x0.end());
  out.states.push_back(y);
  for (std::size_t i = 0; i < grid.intervals(); ++i) {
    const double t = out.times[i];
    const double h = out.times[i + 1] - t;
    const double u_left = control_at(i, 0);
    const double u_mid = control_at(i, 1);
    const double u_right = control_at(i, 2);
    const ode::VectorField field = [&](double tt, std::span<const double> yy, std::span<double> dy) {
      const double frac = (tt - t) / h;
      const double u = frac < 0.25 ? u_left : (frac > 0.75 ? u_right : u_mid);
      const auto d = controlled_field(row_to_state(yy), u, problem.theta, params);
      std::copy(d.begin(), d.end(), dy.begin());
    };
    y = ode::rk4_step(field, t, y, h);
    for (auto& v : y) {
      if (v < 0.0) {
        if (-v <= options.negative_snap) {
          v = 0.0;
        } else {
          throw IntegrationError("normalized state became negative at t=" + std::to_string(out.times[i + 1]),
                                 out.times[i + 1]);
        }
      }
    }
    out.states.push_back(y);
  }
  return out;
}

std::vector<double> pieces_on_grid(const ode::TimeGrid& grid, std::span<const double> pieces) {
  std::vector<double> u(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const std::size_t interval = std::min(j, grid.intervals() - 1);
    u[j] = pieces[piece_of(interval, grid.intervals(), pieces.size())];
  }
  return u;
}

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) {
    m = std::max(m, std::abs(x));
  }
  return m;
}

double relative_change(std::span<const double> next, std::span<const double> prev) {
  double diff = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) {
    diff = std::max(diff, std::abs(next[i] - prev[i]));
  }
  if (diff == 0.0) {
    return 0.0;
  }
  return diff / std::max(sup_norm(next), std::numeric_limits<double>::min());
}

double state_change(const ode::Trajectory& next, const ode::Trajectory& prev) {
  double worst = 0.0;
  for (std::size_t c = 0; c < kStates; ++c) {
    worst = std::max(worst, relative_change(next.component(c), prev.component(c)));
  }
  return worst;
}

}  // namespace

AdjointVec adjoint_rhs(const ControlState& x, const AdjointVec& lam, double u, const ControlProblem& problem) {
  return costate_rates(x, lam, u, problem.theta, problem.gamma_D, NormalizedParams::from(problem.scenario.params));
}

double project_control(const ControlState& x, const AdjointVec& lam, const ControlProblem& problem) {
  const double candidate = (lam[kS] - lam[kR]) * (x[kS] - problem.theta * x[kR]) / (2.0 * problem.gamma_V);
  return project(candidate, problem.u_min, problem.u_max);
}

ode::Trajectory simulate_controlled(const ControlProblem& problem, std::span<const double> u_on_grid) {
  const auto grid = problem.grid();
  if (u_on_grid.size() != grid.size()) {
    throw ContractViolation("control must have one value per grid point");
  }
  auto traj = forward_sweep(problem, [&](std::size_t i, int stage) {
    switch (stage) {
      case 0:
        return u_on_grid[i];
      case 2:
        return u_on_grid[i + 1];
      default:
        return 0.5 * (u_on_grid[i] + u_on_grid[i + 1]);
    }
  });
  traj.control.assign(u_on_grid.begin(), u_on_grid.end());
  return traj;
}

ode::Trajectory simulate_piecewise(const ControlProblem& problem, std::span<const double> pieces) {
  if (pieces.empty()) {
    throw ContractViolation("piecewise control needs at least one piece");
  }
  const auto grid = problem.grid();
  if (pieces.size() > grid.intervals()) {
    throw ContractViolation("more control pieces than grid intervals");
  }
  const std::size_t intervals = grid.intervals();
  auto traj = forward_sweep(problem, [&](std::size_t i, int) { return pieces[piece_of(i, intervals, pieces.size())]; });
  traj.control = pieces_on_grid(grid, pieces);
  return traj;
}

ode::Trajectory solve_adjoint(const ControlProblem& problem, const ode::Trajectory& forward) {
  if (!forward.has_control()) {
    throw ContractViolation("adjoint integration needs the forward trajectory's control column");
  }
  const auto params = NormalizedParams::from(problem.scenario.params);
  const double theta = problem.theta;
  const double gamma_D = problem.gamma_D;
  const ode::BackwardField field = [&](double, const ode::ContextPoint& ctx, std::span<const double> lam,
                                       std::span<double> dlam) {
    AdjointVec l;
    std::copy(lam.begin(), lam.end(), l.begin());
    const auto d = costate_rates(row_to_state(ctx.state), l, ctx.control, theta, gamma_D, params);
    std::copy(d.begin(), d.end(), dlam.begin());
  };
  const std::array<double, kStates> terminal{};
  return ode::integrate_backward(field, problem.grid(), terminal, forward);
}

namespace {

SolveReport finish_report(const ControlProblem& problem, ode::Trajectory states, SolveMethod method) {
  SolveReport r;
  r.method = method;
  r.control.grid = problem.grid();
  r.control.u = states.control;
  const auto infected = states.component(kI);
  r.cost = evaluate_cost(r.control, infected, problem.gamma_D, problem.gamma_V);
  r.states = std::move(states);
  return r;
}

}  // namespace

SolveReport evaluate_constant_policy(const ControlProblem& problem, double u) {
  problem.validate();
  if (u < problem.u_min || u > problem.u_max) {
    throw ValidationError("u", "constant control outside [u_min, u_max]");
  }
  const std::vector<double> pieces{u};
  auto r = finish_report(problem, simulate_piecewise(problem, pieces), SolveMethod::fixed);
  r.piece_values = pieces;
  r.converged = true;
  return r;
}

SolveReport solve_indirect(const ControlProblem& problem, const SweepConfig& config) {
  problem.validate();
  if (!(config.relaxation > 0.0 && config.relaxation <= 1.0)) {
    throw ValidationError("solver.relaxation", "must lie in (0, 1]");
  }
  if (!(config.tolerance > 0.0)) {
    throw ValidationError("solver.tolerance", "must be positive");
  }
  const auto grid = problem.grid();
  double omega = config.relaxation;
  double previous_delta = std::numeric_limits<double>::infinity();

  std::vector<double> u(grid.size(), problem.u_min);
  auto states = simulate_controlled(problem, u);
  ode::Trajectory adjoints;

  SolveReport report;
  report.final_delta = std::numeric_limits<double>::infinity();
  std::vector<double> u_next(grid.size());
  for (std::size_t iter = 1; iter <= config.max_iter; ++iter) {
    adjoints = solve_adjoint(problem, states);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      AdjointVec lam;
      std::copy(adjoints.states[i].begin(), adjoints.states[i].end(), lam.begin());
      const double target = project_control(row_to_state(states.states[i]), lam, problem);
      u_next[i] = project((1.0 - omega) * u[i] + omega * target, problem.u_min, problem.u_max);
    }
    auto next_states = simulate_controlled(problem, u_next);
    const double delta = std::max(relative_change(u_next, u), state_change(next_states, states));
    u.swap(u_next);
    states = std::move(next_states);
    report.iterations = iter;
    report.final_delta = delta;
    if (delta < config.tolerance) {
      report.converged = true;
      break;
    }
    if (delta > previous_delta) {
      omega = std::max(0.5 * omega, std::min(config.min_relaxation, config.relaxation));
    }
    previous_delta = delta;
  }

  adjoints = solve_adjoint(problem, states);
  auto done = finish_report(problem, std::move(states), SolveMethod::indirect);
  done.adjoints = std::move(adjoints);
  done.iterations = report.iterations;
  done.converged = report.converged;
  done.final_delta = report.final_delta;
  done.relaxation = omega;
  return done;
}

namespace {

struct DirectRun {
  std::vector<double> pieces;
  double cost = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

class PiecewiseObjective {
 public:
  explicit PiecewiseObjective(const ControlProblem& problem) : problem_(problem), grid_(problem.grid()) {}

  double operator()(std::span<const double> pieces) const {
    const auto traj = simulate_piecewise(problem_, pieces);
    return piecewise_cost(grid_, pieces, traj.component(kI), problem_.gamma_D, problem_.gamma_V);
  }

 private:
  const ControlProblem& problem_;
  ode::TimeGrid grid_;
};

std::vector<double> fd_gradient(const PiecewiseObjective& f, std::vector<double> v, double h, double lo, double hi) {
  std::vector<double> g(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double base = v[k];
    const bool up = base + h <= hi;
    const bool down = base - h >= lo;
    double plus = 0.0;
    double minus = 0.0;
    double width = 0.0;
    if (up && down) {
      v[k] = base + h;
      plus = f(v);
      v[k] = base - h;
      minus = f(v);
      width = 2.0 * h;
    } else if (up) {
      v[k] = base + h;
      plus = f(v);
      v[k] = base;
      minus = f(v);
      width = h;
    } else {
      v[k] = base;
      plus = f(v);
      v[k] = base - h;
      minus = f(v);
      width = h;
    }
    v[k] = base;
    g[k] = (plus - minus) / width;
  }
  return g;
}

// Projected gradient descent with Armijo backtracking along the projection arc
// and Barzilai-Borwein trial steps. Every accepted iterate strictly decreases f.
DirectRun projected_gradient(const PiecewiseObjective& f, std::vector<double> v, const ControlProblem& problem,
                             const DirectConfig& config) {
  const double lo = problem.u_min;
  const double hi = problem.u_max;
  auto clamp_all = [&](std::vector<double>& x) {
    for (auto& xi : x) {
      xi = project(xi, lo, hi);
    }
  };
  clamp_all(v);

  DirectRun run;
  double fv = f(v);
  run.history.push_back(fv);
  auto g = fd_gradient(f, v, config.fd_step, lo, hi);
  double alpha = 1.0;
  std::vector<double> trial(v.size());
  std::vector<double> step(v.size());

  for (std::size_t iter = 0; iter < config.max_iter; ++iter) {
    double pg = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      pg = std::max(pg, std::abs(project(v[k] - g[k], lo, hi) - v[k]));
    }
    if (pg < config.tolerance) {
      run.converged = true;
      break;
    }

    bool accepted = false;
    double f_trial = fv;
    double a = alpha;
    for (int backtrack = 0; backtrack < 60; ++backtrack, a *= 0.5) {
      double slope = 0.0;
      double moved = 0.0;
      for (std::size_t k = 0; k < v.size(); ++k) {
        trial[k] = project(v[k] - a * g[k], lo, hi);
        step[k] = trial[k] - v[k];
        slope += g[k] * step[k];
        moved = std::max(moved, std::abs(step[k]));
      }
      if (moved == 0.0) {
        break;
      }
      f_trial = f(trial);
      if (f_trial <= fv + 1e-4 * slope && f_trial < fv) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No descent left at finite-difference resolution.
      run.converged = pg < 1e3 * config.tolerance;
      break;
    }

    auto g_next = fd_gradient(f, trial, config.fd_step, lo, hi);
    double ss = 0.0;
    double sy = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      ss += step[k] * step[k];
      sy += step[k] * (g_next[k] - g[k]);
    }
    alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : std::min(2.0 * a, 1e10);

    const double improvement = fv - f_trial;
    v = trial;
    fv = f_trial;
    g = std::move(g_next);
    run.history.push_back(fv);
    run.iterations = iter + 1;
    if (improvement <= 1e-15 * std::max(1.0, std::abs(fv))) {
      run.converged = true;
      break;
    }
  }
  run.pieces = std::move(v);
  run.cost = fv;
  return run;
}

}  // namespace

SolveReport solve_direct(const ControlProblem& problem, const DirectConfig& config) {
  problem.validate();
  if (config.n_intervals < 1) {
    throw ValidationError("solver.n_intervals", "must be at least 1");
  }
  if (!(config.fd_step > 0.0)) {
    throw ValidationError("solver.fd_step", "must be positive");
  }
  if (config.starts.empty()) {
    throw ValidationError("solver.starts", "at least one start is required");
  }
  const PiecewiseObjective objective(problem);

  std::vector<DirectRun> runs(config.starts.size());
  parallel_for(runs.size(), config.threads, [&](std::size_t s) {
    std::vector<double> v(config.n_intervals, config.starts[s]);
    runs[s] = projected_gradient(objective, std::move(v), problem, config);
  });

  std::size_t best = 0;
  for (std::size_t s = 1; s < runs.size(); ++s) {
    if (runs[s].cost < runs[best].cost) {
      best = s;
    }
  }
  auto& winner = runs[best];
  auto states = simulate_piecewise(problem, winner.pieces);
  SolveReport r = finish_report(problem, std::move(states), SolveMethod::direct);
  r.cost = winner.cost;
  r.piece_values = winner.pieces;
  r.iterations = winner.iterations;
  r.converged = winner.converged;
  r.cost_history = std::move(winner.history);
  return r;
}

namespace {

PolicyRow make_row(std::string name, const SolveReport& report, const NormalizationSpec& norm) {
  PolicyRow row;
  row.name = std::move(name);
  row.cost = report.cost;
  row.infected.times = report.states.times;
  row.infected.control = report.states.control;
  row.infected.states.reserve(report.states.size());
  for (const auto& s : report.states.states) {
    row.infected.states.push_back({s[kI] * norm.human_scale});
  }
  const auto p = peak(row.infected, std::size_t{0});
  row.peak_infected = p.value;
  row.peak_time = p.time;
  return row;
}

}  // namespace

PolicyComparison compare_policies(const ControlProblem& problem, const SweepConfig& config) {
  const auto norm = problem.normalization();
  PolicyComparison out;
  out.optimal_report = solve_indirect(problem, config);
  out.optimal = make_row("optimal", out.optimal_report, norm);
  out.no_control = make_row("no_control", evaluate_constant_policy(problem, problem.u_min), norm);
  out.upper_control = make_row("upper_control", evaluate_constant_policy(problem, problem.u_max), norm);
  return out;
}

std::vector<SolveReport> efficacy_sweep(const ControlProblem& problem, std::span<const double> thetas,
                                        const SweepConfig& config, std::size_t threads) {
  for (double theta : thetas) {
    if (!(theta >= 0.0) || !std::isfinite(theta)) {
      throw ValidationError("theta", "waning rates must be non-negative");
    }
  }
  std::vector<SolveReport> out(thetas.size());
  parallel_for(thetas.size(), threads, [&](std::size_t i) {
    ControlProblem p = problem;
    p.theta = thetas[i];
    out[i] = solve_indirect(p, config);
  });
  return out;
}

}  // namespace epivax::control
