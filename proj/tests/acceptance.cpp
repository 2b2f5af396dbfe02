// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "epivax/control.hpp"
#include "epivax/models.hpp"
#include "epivax/parallel.hpp"
#include "epivax/reproduction.hpp"

using namespace epivax;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) {
      detail += "; ";
    }
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double peak_of(const Scenario& sc) { return peak(simulate(sc), "I_h").value; }

Scenario with(const char* name, VaccineStrategy s) {
  auto sc = preset_scenario(name);
  sc.strategy = s;
  return sc;
}

Outcome criterion_1() {
  Outcome o;
  const auto epi = preset_scenario("epidemic").params;
  const auto end = preset_scenario("endemic").params;
  const auto start = Clock::now();
  const double a = r0_baseline(epi);
  const double b = r0_baseline(end);
  const double dt = seconds_since(start);
  o.require(std::abs(a - 2.46) <= 0.01, "epidemic R0 " + fmt("%.4f", a) + " vs 2.46+-0.01");
  o.require(std::abs(b - 1.29) <= 0.01, "endemic R0 " + fmt("%.4f", b) + " vs 1.29+-0.01");
  o.require(dt < 1e-3, "runtime " + fmt("%.2e", dt) + " s < 1 ms");
  return o;
}

Outcome criterion_2() {
  Outcome o;
  for (const char* name : {"epidemic", "endemic"}) {
    const auto start = Clock::now();
    const double pk = peak_of(preset_scenario(name));
    const double dt = seconds_since(start);
    if (std::string(name) == "epidemic") {
      o.require(pk > 80000.0, "epidemic peak " + fmt("%.1f", pk) + " > 80000");
    } else {
      o.require(pk < 3000.0, "endemic peak " + fmt("%.1f", pk) + " < 3000");
    }
    o.require(dt < 5.0, std::string(name) + " runtime " + fmt("%.3f", dt) + " s < 5 s");
  }
  return o;
}

Outcome criterion_3() {
  Outcome o;
  const double perfect = peak_of(with("epidemic", strategy::MassPerfect{0.05}));
  const double imperfect = peak_of(with("epidemic", strategy::MassImperfect{0.05, 0.2}));
  o.require(perfect < 1200.0, "perfect psi=0.05 peak " + fmt("%.1f", perfect) + " < 1200");
  o.require(imperfect <= 9000.0, "imperfect sigma=0.2 peak " + fmt("%.1f", imperfect) + " <= 9000");
  o.require(imperfect > perfect, "imperfect peak > perfect peak");
  return o;
}

Outcome criterion_4() {
  Outcome o;
  double worst = 0.0;
  for (const char* name : {"epidemic", "endemic"}) {
    const auto p = preset_scenario(name).params;
    worst = std::max(worst, std::abs(r0_pediatric(p, critical_pediatric_coverage(p).value) - 1.0));
    worst = std::max(worst, std::abs(r0_mass(p, critical_mass_rate(p).value) - 1.0));
  }
  o.require(worst < 1e-12, "max |R0(threshold) - 1| = " + fmt("%.2e", worst) + " < 1e-12");
  return o;
}

Outcome criterion_5() {
  Outcome o;
  const auto start = Clock::now();
  struct Suite {
    const char* label;
    std::vector<double> values;
    std::function<VaccineStrategy(double)> make;
    bool increasing;  // expected direction of the peak
  };
  const std::vector<Suite> suites = {
      {"p", {0.0, 0.25, 0.5, 0.75, 1.0}, [](double v) { return VaccineStrategy{strategy::Pediatric{v}}; }, false},
      {"psi", {0.05, 0.10, 0.25, 0.50, 1.0}, [](double v) { return VaccineStrategy{strategy::MassPerfect{v}}; },
       false},
      {"sigma", {0.0, 0.10, 0.20, 0.50, 0.75},
       [](double v) { return VaccineStrategy{strategy::MassImperfect{0.85, v}}; }, true},
      {"theta", {0.0, 0.05, 0.10, 0.15, 0.20},
       [](double v) { return VaccineStrategy{strategy::MassWaning{0.85, v}}; }, true},
  };
  for (const char* name : {"epidemic", "endemic"}) {
    for (const auto& s : suites) {
      std::vector<double> peaks(s.values.size());
      parallel_for(s.values.size(), 0, [&](std::size_t i) { peaks[i] = peak_of(with(name, s.make(s.values[i]))); });
      bool ok = true;
      for (std::size_t i = 1; i < peaks.size(); ++i) {
        ok = ok && (s.increasing ? peaks[i] >= peaks[i - 1] : peaks[i] <= peaks[i - 1]);
      }
      o.require(ok, std::string(name) + " " + s.label + (s.increasing ? " non-decreasing" : " non-increasing"));
    }
  }
  const double dt = seconds_since(start);
  o.require(dt < 60.0, "runtime " + fmt("%.2f", dt) + " s < 60 s");
  return o;
}

Outcome criterion_6() {
  Outcome o;
  double stationarity = 0.0;
  double drift = 0.0;
  for (const char* name : {"epidemic", "endemic"}) {
    const auto p = preset_scenario(name).params;
    const auto dfe = disease_free_equilibrium(p, 0.0);
    const auto d = rhs_pediatric(dfe, 0.0, p).to_array();
    const std::array<double, kCompartments> scale{p.N_h, p.N_h, p.N_h, p.N_h, p.k * p.N_h, p.m * p.N_h, p.m * p.N_h};
    for (std::size_t i = 0; i < d.size(); ++i) {
      stationarity = std::max(stationarity, std::abs(d[i]) / scale[i]);
    }
    const VaccineStrategy variants[] = {strategy::Pediatric{0.5}, strategy::MassPerfect{0.05},
                                        strategy::MassImperfect{0.05, 0.2}, strategy::MassWaning{0.85, 0.1}};
    for (const auto& v : variants) {
      const auto traj = simulate(with(name, v));
      for (const auto& row : traj.states) {
        drift = std::max(drift, std::abs(row[0] + row[1] + row[2] + row[3] - p.N_h) / p.N_h);
      }
    }
    const auto problem = control::ControlProblem::from_scenario(preset_scenario(name));
    const std::vector<double> u(problem.grid().size(), 0.5);
    const auto ctrl = control::simulate_controlled(problem, u);
    for (const auto& row : ctrl.states) {
      drift = std::max(drift, std::abs(row[control::kS] + row[control::kI] + row[control::kR] - 1.0));
    }
  }
  o.require(stationarity < 1e-9, "max normalized |rhs(DFE)| " + fmt("%.2e", stationarity) + " < 1e-9");
  o.require(drift < 1e-6, "max human drift / N_h " + fmt("%.2e", drift) + " < 1e-6");
  return o;
}

struct ControlRuns {
  control::SolveReport indirect[2];
  control::SolveReport direct[2];
  double indirect_seconds = 0.0;
  double direct_seconds = 0.0;
};

const ControlRuns& control_runs() {
  static const ControlRuns runs = [] {
    ControlRuns r;
    const char* names[] = {"epidemic", "endemic"};
    auto start = Clock::now();
    for (int i = 0; i < 2; ++i) {
      r.indirect[i] = control::solve_indirect(control::ControlProblem::from_scenario(preset_scenario(names[i])));
    }
    r.indirect_seconds = seconds_since(start);
    start = Clock::now();
    for (int i = 0; i < 2; ++i) {
      r.direct[i] = control::solve_direct(control::ControlProblem::from_scenario(preset_scenario(names[i])));
    }
    r.direct_seconds = seconds_since(start);
    return r;
  }();
  return runs;
}

Outcome criterion_7() {
  Outcome o;
  const char* names[] = {"epidemic", "endemic"};
  const double lo[] = {0.2, 0.005};
  const double hi[] = {0.45, 0.02};
  for (int i = 0; i < 2; ++i) {
    const auto problem = control::ControlProblem::from_scenario(preset_scenario(names[i]));
    const double j_opt = control_runs().indirect[i].cost;
    const double j0 = control::evaluate_constant_policy(problem, 0.0).cost;
    const double j1 = control::evaluate_constant_policy(problem, 1.0).cost;
    const std::string n = names[i];
    o.require(j_opt < j0 && j0 < j1, n + " J(opt) " + fmt("%.6g", j_opt) + " < J(0) " + fmt("%.6g", j0) +
                                         " < J(1) " + fmt("%.6g", j1));
    o.require(j0 >= lo[i] && j0 <= hi[i],
              n + " J(0) " + fmt("%.6g", j0) + " in [" + fmt("%g", lo[i]) + ", " + fmt("%g", hi[i]) + "]");
    o.require(j1 >= 100.0 * j0, n + " J(1)/J(0) " + fmt("%.1f", j1 / j0) + " >= 100");
  }
  return o;
}

Outcome criterion_8() {
  Outcome o;
  const auto& r = control_runs();
  const char* names[] = {"epidemic", "endemic"};
  for (int i = 0; i < 2; ++i) {
    o.require(r.direct[i].cost >= r.indirect[i].cost, std::string(names[i]) + " direct " +
                                                          fmt("%.8g", r.direct[i].cost) + " >= indirect " +
                                                          fmt("%.8g", r.indirect[i].cost));
  }
  const double ei = r.indirect[0].cost;
  const double ed = r.direct[0].cost;
  const double ni = r.indirect[1].cost;
  o.require(ei >= 0.04 && ei <= 0.10, "epidemic indirect " + fmt("%.6g", ei) + " in [0.04, 0.10]");
  o.require(ed >= 0.05 && ed <= 0.15, "epidemic direct " + fmt("%.6g", ed) + " in [0.05, 0.15]");
  o.require(ni >= 0.0004 && ni <= 0.002, "endemic indirect " + fmt("%.6g", ni) + " in [0.0004, 0.002]");
  const double dt = r.indirect_seconds + r.direct_seconds;
  o.require(dt < 300.0, "runtime " + fmt("%.1f", dt) + " s < 300 s");
  return o;
}

Outcome criterion_9() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pos(0.05, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  auto problem = control::ControlProblem::from_scenario(preset_scenario("epidemic"));
  double worst_fd = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    control::ControlState x{};
    control::AdjointVec lam{};
    for (auto& v : x) {
      v = pos(rng);
    }
    for (auto& v : lam) {
      v = sym(rng);
    }
    const double u = pos(rng);
    const auto rates = control::adjoint_rhs(x, lam, u, problem);
    for (std::size_t i = 0; i < control::kStates; ++i) {
      const double h = 1e-6;
      auto xp = x;
      auto xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd =
          -(control::hamiltonian(xp, lam, u, problem) - control::hamiltonian(xm, lam, u, problem)) / (2.0 * h);
      const double scale = std::max({std::abs(fd), std::abs(rates[i]), 1e-3});
      worst_fd = std::max(worst_fd, std::abs(fd - rates[i]) / scale);
    }
  }
  o.require(worst_fd < 1e-5, "adjoint vs FD max rel err " + fmt("%.2e", worst_fd) + " < 1e-5");

  double worst_du = 0.0;
  double worst_terminal = 0.0;
  bool converged = true;
  const char* names[] = {"epidemic", "endemic"};
  for (int k = 0; k < 2; ++k) {
    const auto pr = control::ControlProblem::from_scenario(preset_scenario(names[k]));
    const auto& rep = control_runs().indirect[k];
    converged = converged && rep.converged;
    for (double v : rep.adjoints.states.back()) {
      worst_terminal = std::max(worst_terminal, std::abs(v));
    }
    for (std::size_t i = 0; i < rep.states.size(); ++i) {
      const double u = rep.control.u[i];
      if (u > pr.u_min && u < pr.u_max) {
        control::ControlState x{};
        control::AdjointVec lam{};
        std::copy_n(rep.states.states[i].begin(), control::kStates, x.begin());
        std::copy_n(rep.adjoints.states[i].begin(), control::kStates, lam.begin());
        worst_du = std::max(worst_du, std::abs(control::hamiltonian_du(x, lam, u, pr)));
      }
    }
  }
  o.require(converged, "both sweeps converged");
  o.require(worst_du < 1e-4, "interior max |dH/du| " + fmt("%.2e", worst_du) + " < 1e-4");
  o.require(worst_terminal == 0.0, "max |lambda(tf)| = " + fmt("%g", worst_terminal));
  return o;
}

Outcome criterion_10() {
  Outcome o;
  const ode::VectorField decay = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; };
  auto max_err = [&](double h) {
    const std::vector<double> y0{1.0};
    const auto traj = ode::integrate(decay, ode::TimeGrid::with_step(0.0, 1.0, h), y0);
    double e = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      e = std::max(e, std::abs(traj.states[i][0] - std::exp(-traj.times[i])));
    }
    return e;
  };
  for (double h : {0.2, 0.1, 0.05}) {
    const double ratio = max_err(h) / max_err(h / 2.0);
    o.require(ratio >= 14.0 && ratio <= 18.0, "h=" + fmt("%g", h) + " ratio " + fmt("%.3f", ratio));
  }
  return o;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* title;
    Outcome (*run)();
  };
  const Entry criteria[] = {
      {1, "R0 reproduction", criterion_1},
      {2, "epidemic outbreak scale", criterion_2},
      {3, "mass-vaccination suppression", criterion_3},
      {4, "threshold identities", criterion_4},
      {5, "monotonicity suites", criterion_5},
      {6, "DFE stationarity and conservation", criterion_6},
      {7, "optimal-control ordering", criterion_7},
      {8, "direct vs indirect", criterion_8},
      {9, "Pontryagin consistency", criterion_9},
      {10, "ODE order check", criterion_10},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double dt = seconds_since(start);
    failures += o.pass ? 0 : 1;
    std::printf("%s  criterion %2d  %-34s (%.2f s)  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, dt,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
