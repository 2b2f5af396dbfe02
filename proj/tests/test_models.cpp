#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "epivax/errors.hpp"
#include "epivax/models.hpp"

using namespace epivax;

namespace {

// Term-by-term re-evaluation of the SVIR/ASI equations, kept independent of the library.
struct Oracle {
  EpiParams p;

  double force_h(const SysState& s) const { return p.B * p.beta_mh * s.I_m / p.N_h; }
  double force_m(const SysState& s) const { return p.B * p.beta_hm * s.I_h / p.N_h; }

  void mosquitoes(const SysState& s, SysRate& d) const {
    d.A_m = p.phi * (1.0 - s.A_m / (p.k * p.N_h)) * (s.S_m + s.I_m) - (p.eta_A + p.mu_A) * s.A_m;
    d.S_m = p.eta_A * s.A_m - (force_m(s) + p.mu_m) * s.S_m;
    d.I_m = force_m(s) * s.S_m - p.mu_m * s.I_m;
  }

  SysRate pediatric(const SysState& s, double pv) const {
    SysRate d;
    d.S_h = (1.0 - pv) * p.mu_h * p.N_h - (force_h(s) + p.mu_h) * s.S_h;
    d.V_h = pv * p.mu_h * p.N_h - p.mu_h * s.V_h;
    d.I_h = force_h(s) * s.S_h - (p.eta_h + p.mu_h) * s.I_h;
    d.R_h = p.eta_h * s.I_h - p.mu_h * s.R_h;
    mosquitoes(s, d);
    return d;
  }

  SysRate imperfect(const SysState& s, double psi, double sigma) const {
    SysRate d;
    d.S_h = p.mu_h * p.N_h - (force_h(s) + psi + p.mu_h) * s.S_h;
    d.V_h = psi * s.S_h - (sigma * force_h(s) + p.mu_h) * s.V_h;
    d.I_h = force_h(s) * (s.S_h + sigma * s.V_h) - (p.eta_h + p.mu_h) * s.I_h;
    d.R_h = p.eta_h * s.I_h - p.mu_h * s.R_h;
    mosquitoes(s, d);
    return d;
  }

  SysRate waning(const SysState& s, double psi, double theta) const {
    SysRate d;
    d.S_h = p.mu_h * p.N_h + theta * s.V_h - (force_h(s) + psi + p.mu_h) * s.S_h;
    d.V_h = psi * s.S_h - (theta + p.mu_h) * s.V_h;
    d.I_h = force_h(s) * s.S_h - (p.eta_h + p.mu_h) * s.I_h;
    d.R_h = p.eta_h * s.I_h - p.mu_h * s.R_h;
    mosquitoes(s, d);
    return d;
  }

  SysRate controlled(const SysState& s, double u, double theta) const {
    SysRate d;
    d.S_h = p.mu_h * p.N_h - (force_h(s) + p.mu_h + u) * s.S_h + theta * u * s.R_h;
    d.I_h = force_h(s) * s.S_h - (p.eta_h + p.mu_h) * s.I_h;
    d.R_h = p.eta_h * s.I_h + u * s.S_h - (theta * u + p.mu_h) * s.R_h;
    mosquitoes(s, d);
    return d;
  }
};

SysState random_state(std::mt19937_64& rng, const EpiParams& p, bool with_vaccinated = true) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::array<double, 4> w{unit(rng), with_vaccinated ? unit(rng) : 0.0, unit(rng), unit(rng)};
  const double total = w[0] + w[1] + w[2] + w[3];
  SysState s;
  s.S_h = p.N_h * w[0] / total;
  s.V_h = p.N_h * w[1] / total;
  s.I_h = p.N_h * w[2] / total;
  s.R_h = p.N_h - s.S_h - s.V_h - s.I_h;
  s.A_m = p.k * p.N_h * unit(rng);
  s.S_m = p.m * p.N_h * unit(rng);
  s.I_m = p.m * p.N_h * unit(rng);
  return s;
}

void check_close(const SysRate& a, const SysRate& b, double tol) {
  const auto x = a.to_array();
  const auto y = b.to_array();
  for (std::size_t i = 0; i < x.size(); ++i) {
    CAPTURE(i);
    CHECK(std::abs(x[i] - y[i]) <= tol * std::max(1.0, std::abs(y[i])));
  }
}

double human_sum(const SysRate& d) { return d.S_h + d.V_h + d.I_h + d.R_h; }

}  // namespace

TEST_CASE("presets carry the tabulated values") {
  const auto epi = preset_scenario("epidemic");
  CHECK(epi.params.B == 0.8);
  CHECK(epi.params.beta_mh == 0.375);
  CHECK(epi.params.beta_hm == 0.375);
  CHECK(epi.initial.S_h == 479990.0);
  CHECK(epi.initial.R_h == 0.0);
  CHECK(epi.horizon == 365.0);

  const auto end = preset_scenario("endemic");
  CHECK(end.params.B == 0.75);
  CHECK(end.params.beta_mh == 0.21);
  CHECK(end.initial.R_h == 100000.0);
  CHECK(end.initial.S_h == 379990.0);

  for (const auto& sc : {epi, end}) {
    CHECK(sc.params.mu_h == 1.0 / (71.0 * 365.0));
    CHECK(sc.params.N_h == 480000.0);
    CHECK(sc.initial.A_m == 1440000.0);
    CHECK(sc.initial.S_m == 1440000.0);
    CHECK(sc.initial.I_m == 0.0);
    CHECK(sc.initial.I_h == 10.0);
    CHECK_NOTHROW(sc.validate());
    CHECK(std::holds_alternative<strategy::NoVaccine>(sc.strategy));
  }
  CHECK_THROWS_AS((void)preset_scenario("pandemic"), LookupError);
  CHECK(preset_names() == std::vector<std::string>{"epidemic", "endemic"});
}

TEST_CASE("parameter and state validation") {
  auto p = preset_scenario("epidemic").params;
  p.beta_mh = 1.5;
  try {
    p.validate();
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "beta_mh");
  }
  p = preset_scenario("epidemic").params;
  p.phi = 0.1;  // phi*eta_A < (eta_A+mu_A)*mu_m
  CHECK_FALSE(p.mosquito_viable());
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = preset_scenario("epidemic").params;
  p.mu_h = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);

  auto sc = preset_scenario("epidemic");
  sc.initial.S_h += 1.0;
  CHECK_THROWS_AS(sc.validate(), ValidationError);
  sc = preset_scenario("epidemic");
  sc.initial.I_m = -1.0;
  CHECK_THROWS_AS(sc.validate(), ValidationError);
  sc = preset_scenario("epidemic");
  sc.initial.A_m = 3.0 * 480000.0 + 1.0;
  CHECK_THROWS_AS(sc.validate(), ValidationError);

  CHECK_THROWS_AS(validate_strategy(strategy::Pediatric{1.1}), ValidationError);
  CHECK_THROWS_AS(validate_strategy(strategy::MassImperfect{0.5, -0.1}), ValidationError);
  CHECK_THROWS_AS(validate_strategy(strategy::MassWaning{0.5, -1.0}), ValidationError);
  CHECK_NOTHROW(validate_strategy(strategy::MassWaning{0.5, 3.0}));
  CHECK(compartment_index("I_m") == 6);
  CHECK_THROWS_AS((void)compartment_index("E_h"), LookupError);
  CHECK_THROWS_AS((void)SysState::from_span(std::vector<double>(6, 0.0)), ContractViolation);
}

TEST_CASE("disease-free equilibrium") {
  const auto p = preset_scenario("epidemic").params;
  const auto dfe = disease_free_equilibrium(p, 0.0);
  CHECK(dfe.S_h == 480000.0);
  CHECK(dfe.V_h == 0.0);
  CHECK(dfe.A_m == doctest::Approx(1341000.0).epsilon(1e-12));
  CHECK(dfe.S_m == doctest::Approx(1072800.0).epsilon(1e-12));
  CHECK(dfe.I_m == 0.0);

  const auto full = disease_free_equilibrium(p, 1.0);
  CHECK(full.S_h == 0.0);
  CHECK(full.V_h == p.N_h);

  for (double pv : {0.0, 0.3, 1.0}) {
    const auto s = disease_free_equilibrium(p, pv);
    const auto d = rhs_pediatric(s, pv, p).to_array();
    const std::array<double, 7> scale{p.N_h, p.N_h, p.N_h, p.N_h, p.k * p.N_h, p.m * p.N_h, p.m * p.N_h};
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(std::abs(d[i] / scale[i]) < 1e-9);
    }
  }
  auto dead = p;
  dead.phi = 0.1;
  CHECK_THROWS_AS((void)disease_free_equilibrium(dead, 0.0), ViabilityError);
}

TEST_CASE("hand-evaluated derivatives at the epidemic initial state") {
  const auto sc = preset_scenario("epidemic");
  const auto& p = sc.params;
  const auto d = rhs_pediatric(sc.initial, 0.0, p);
  CHECK(d.I_h == doctest::Approx(-(1.0 / 3.0 + 1.0 / (71.0 * 365.0)) * 10.0).epsilon(1e-14));
  CHECK(d.I_h == doctest::Approx(-3.33372).epsilon(1e-5));
  CHECK(d.V_h == 0.0);

  const auto c = rhs_controlled(sc.initial, 1.0, 0.05, p);
  CHECK(c.S_h == doctest::Approx(p.mu_h * p.N_h - (p.mu_h + 1.0) * 479990.0).epsilon(1e-14));
  CHECK(c.S_h == doctest::Approx(-479990.0).epsilon(1e-9));
}

TEST_CASE("vector fields match the term-wise oracle at random states") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const char* name : {"epidemic", "endemic"}) {
    const auto p = preset_scenario(name).params;
    const Oracle o{p};
    for (int trial = 0; trial < 100; ++trial) {
      const auto s = random_state(rng, p);
      const double a = unit(rng);
      const double b = unit(rng);
      check_close(rhs_pediatric(s, a, p), o.pediatric(s, a), 1e-12);
      check_close(rhs_mass_perfect(s, a, p), o.imperfect(s, a, 0.0), 1e-12);
      check_close(rhs_mass_imperfect(s, a, b, p), o.imperfect(s, a, b), 1e-12);
      check_close(rhs_mass_imperfect(s, a, 0.2, p), o.imperfect(s, a, 0.2), 1e-12);
      check_close(rhs_mass_waning(s, a, b, p), o.waning(s, a, b), 1e-12);
      const auto s6 = random_state(rng, p, false);
      check_close(rhs_controlled(s6, a, b, p), o.controlled(s6, a, b), 1e-12);
    }
  }
}

TEST_CASE("human populations are conserved by every field") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto p = preset_scenario("epidemic").params;
  const double tol = 1e-9 * p.N_h;
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_state(rng, p);
    const double a = unit(rng);
    const double b = unit(rng);
    CHECK(std::abs(human_sum(rhs_pediatric(s, a, p))) < tol);
    CHECK(std::abs(human_sum(rhs_mass_perfect(s, a, p))) < tol);
    CHECK(std::abs(human_sum(rhs_mass_imperfect(s, a, b, p))) < tol);
    CHECK(std::abs(human_sum(rhs_mass_waning(s, a, b, p))) < tol);
    const auto s6 = random_state(rng, p, false);
    CHECK(std::abs(human_sum(rhs_controlled(s6, a, b, p))) < tol);
  }
}

TEST_CASE("reduction chain") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto p = preset_scenario("endemic").params;
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_state(rng, p);
    const double psi = unit(rng);
    CHECK(rhs_mass_imperfect(s, psi, 0.0, p) == rhs_mass_perfect(s, psi, p));
    CHECK(rhs_mass_waning(s, psi, 0.0, p) == rhs_mass_perfect(s, psi, p));

    const auto s0 = random_state(rng, p, false);
    CHECK(rhs_mass_perfect(s0, 0.0, p) == rhs_pediatric(s0, 0.0, p));
    const auto ctrl = rhs_controlled(s0, 0.0, unit(rng), p);
    const auto base = rhs_pediatric(s0, 0.0, p);
    CHECK(ctrl == base);

    // sigma = 1: the infection inflow only sees S_h + V_h
    SysState shifted = s;
    shifted.S_h = s.S_h + s.V_h;
    shifted.V_h = 0.0;
    CHECK(rhs_mass_imperfect(s, psi, 1.0, p).I_h == doctest::Approx(rhs_mass_imperfect(shifted, psi, 1.0, p).I_h));

    // S_h = 0 leaves only decay of V_h under mass vaccination
    SysState empty = s;
    empty.R_h += empty.S_h;
    empty.S_h = 0.0;
    CHECK(rhs_mass_perfect(empty, psi, p).V_h == doctest::Approx(-p.mu_h * empty.V_h));

    // V_h = 0 makes dS_h independent of the waning rate
    CHECK(rhs_mass_waning(s0, psi, 0.1, p).S_h == rhs_mass_waning(s0, psi, 0.9, p).S_h);
  }
  SysState bad = preset_scenario("epidemic").initial;
  bad.V_h = 1.0;
  CHECK_THROWS_AS((void)rhs_controlled(bad, 0.5, 0.05, p), ContractViolation);
}

TEST_CASE("preset trajectories: conservation, positivity and the logistic bound") {
  const VaccineStrategy strategies[] = {strategy::NoVaccine{}, strategy::Pediatric{0.5}, strategy::MassPerfect{0.05},
                                        strategy::MassImperfect{0.05, 0.2}, strategy::MassWaning{0.85, 0.1}};
  for (const char* name : {"epidemic", "endemic"}) {
    for (const auto& strat : strategies) {
      auto sc = preset_scenario(name);
      sc.strategy = strat;
      ode::IntegratorOptions unclamped;
      const auto traj = simulate(sc, kDefaultStep, unclamped);
      const auto& p = sc.params;
      CAPTURE(name);
      CAPTURE(strategy_tag(strat));
      REQUIRE(traj.size() == 7301);
      double drift = 0.0;
      double most_negative = 0.0;
      double max_aquatic = 0.0;
      for (const auto& row : traj.states) {
        drift = std::max(drift, std::abs(row[0] + row[1] + row[2] + row[3] - p.N_h));
        for (double v : row) {
          most_negative = std::min(most_negative, v);
        }
        max_aquatic = std::max(max_aquatic, row[4]);
      }
      CHECK(drift < 1e-6 * p.N_h);
      CHECK(most_negative >= -1e-9 * p.N_h);
      CHECK(max_aquatic <= p.k * p.N_h * (1.0 + 1e-6));
    }
  }
}

TEST_CASE("adult mosquitoes approach the aquatic equilibrium ratio") {
  auto sc = preset_scenario("endemic");
  sc.horizon = 365.0;
  const auto traj = simulate(sc);
  const auto dfe = disease_free_equilibrium(sc.params, 0.0);
  const auto& last = traj.states.back();
  CHECK(std::abs(last[5] + last[6] - dfe.S_m) / dfe.S_m < 1e-3);
  CHECK(std::abs(last[4] - dfe.A_m) / dfe.A_m < 1e-3);
}

TEST_CASE("simulate uses the fixed 0.05 day grid and the scenario strategy") {
  auto sc = preset_scenario("epidemic");
  const auto base = simulate(sc);
  CHECK(base.times.back() == 365.0);
  CHECK(base.times[1] == doctest::Approx(0.05));
  sc.strategy = strategy::Pediatric{0.0};
  CHECK(simulate(sc).states == base.states);
  sc.strategy = strategy::MassPerfect{0.0};
  CHECK(simulate(sc).states == base.states);
  sc.strategy = strategy::Pediatric{2.0};
  CHECK_THROWS_AS((void)simulate(sc), ValidationError);
}
