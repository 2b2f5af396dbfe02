#include <doctest.h>

#include <cmath>
#include <random>

#include "epivax/errors.hpp"
#include "epivax/models.hpp"
#include "epivax/reproduction.hpp"

using namespace epivax;

namespace {

// R0 written out from the closed form with the tabulated numbers.
double r0_oracle(double B, double beta) {
  const double k = 3.0, mu_m = 0.1, phi = 6.0, mu_A = 0.25, eta_A = 0.08, eta_h = 1.0 / 3.0;
  const double mu_h = 1.0 / (71.0 * 365.0);
  const double num = k * B * B * beta * beta * (phi * eta_A - (eta_A + mu_A) * mu_m);
  return std::sqrt(num / (phi * (eta_h + mu_h) * mu_m * mu_m));
}

}  // namespace

TEST_CASE("baseline R0 for both presets") {
  const auto epi = preset_scenario("epidemic").params;
  const auto end = preset_scenario("endemic").params;
  CHECK(std::abs(r0_baseline(epi) - 2.46) <= 0.01);
  CHECK(std::abs(r0_baseline(end) - 1.29) <= 0.01);
  CHECK(r0_baseline(epi) == doctest::Approx(r0_oracle(0.8, 0.375)).epsilon(1e-13));
  CHECK(r0_baseline(end) == doctest::Approx(r0_oracle(0.75, 0.21)).epsilon(1e-13));
}

TEST_CASE("R0 with a vanishing radicand is zero; a negative one is an error") {
  auto p = preset_scenario("epidemic").params;
  p.phi = 0.5;
  p.eta_A = 0.5;
  p.mu_A = 0.5;
  p.mu_m = 0.25;  // 0.25 == (0.5+0.5)*0.25 in binary floating point
  CHECK(p.phi * p.eta_A == (p.eta_A + p.mu_A) * p.mu_m);
  CHECK(r0_baseline(p) == 0.0);
  p.phi = 0.1;
  CHECK_THROWS_AS((void)r0_baseline(p), ViabilityError);
}

TEST_CASE("R0 family examples") {
  const auto p = preset_scenario("epidemic").params;
  const double r0 = r0_baseline(p);
  CHECK(r0_pediatric(p, 0.0) == r0);
  CHECK(r0_pediatric(p, 1.0) == 0.0);
  CHECK(std::abs(r0_pediatric(p, 0.5) - 1.228) <= 0.01);
  CHECK(r0_pediatric(p, 0.5) == doctest::Approx(r0 / 2.0));

  CHECK(r0_mass(p, 0.0) == r0);
  const double mu_h = 1.0 / (71.0 * 365.0);
  CHECK(r0_mass(p, 0.05) == doctest::Approx(r0 * mu_h / (mu_h + 0.05)).epsilon(1e-14));
  CHECK(r0_mass(p, 0.05) == doctest::Approx(1.90e-3).epsilon(0.01));
  double prev = r0_mass(p, 0.0);
  for (int i = 1; i < 100; ++i) {
    const double cur = r0_mass(p, i / 99.0);
    CHECK(cur < prev);
    prev = cur;
  }

  CHECK(r0_imperfect(p, 0.3, 0.0) == r0_mass(p, 0.3));
  CHECK(r0_imperfect(p, 1.0, 1.0) == doctest::Approx(2.0 * r0_mass(p, 1.0)));
  for (double psi : {0.0, 0.5, 1.0}) {
    CHECK(r0_waning(p, psi) == r0_mass(p, psi));
  }
  CHECK(r0_waning(p, 0.85) == doctest::Approx(r0 * mu_h / (mu_h + 0.85)).epsilon(1e-14));
  CHECK(r0_waning(p, 0.0) == r0);
}

TEST_CASE("R0 ordering over random strategies") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const char* name : {"epidemic", "endemic"}) {
    const auto p = preset_scenario(name).params;
    const double r0 = r0_baseline(p);
    for (int i = 0; i < 1000; ++i) {
      const double psi = unit(rng);
      const double sigma = unit(rng);
      const double pv = unit(rng);
      CHECK(r0_pediatric(p, pv) <= r0);
      CHECK(r0_mass(p, psi) <= r0);
      CHECK(r0_mass(p, psi) <= r0_imperfect(p, psi, sigma));
      CHECK(r0_imperfect(p, psi, sigma) <= r0 * (1.0 + sigma * psi) * p.mu_h / (p.mu_h + psi) * (1.0 + 1e-15));
      if (pv > 0.0) {
        CHECK(r0_pediatric(p, pv) < r0);
      }
      if (psi > 0.0) {
        CHECK(r0_mass(p, psi) < r0);
      }
    }
  }
}

TEST_CASE("eradication thresholds") {
  const auto epi = preset_scenario("epidemic").params;
  const auto end = preset_scenario("endemic").params;
  const auto pc = critical_pediatric_coverage(epi);
  CHECK_FALSE(pc.already_subcritical);
  CHECK(pc.value == doctest::Approx(1.0 - 1.0 / 2.4565).epsilon(1e-3));
  CHECK(pc.value == doctest::Approx(0.593).epsilon(1e-3));
  CHECK(critical_pediatric_coverage(end).value == doctest::Approx(0.224).epsilon(3e-3));

  const double mu_h = 1.0 / (71.0 * 365.0);
  CHECK(critical_mass_rate(epi).value == doctest::Approx((2.4565 - 1.0) * mu_h).epsilon(1e-3));
  CHECK(critical_mass_rate(epi).value == doctest::Approx(5.62e-5).epsilon(1e-3));
  CHECK(critical_mass_rate(end).value == doctest::Approx(1.12e-5).epsilon(5e-3));

  for (const auto& p : {epi, end}) {
    CHECK(std::abs(r0_pediatric(p, critical_pediatric_coverage(p).value) - 1.0) < 1e-12);
    CHECK(std::abs(r0_mass(p, critical_mass_rate(p).value) - 1.0) < 1e-12);
  }

  const auto at_one = critical_pediatric_coverage_from_r0(1.0);
  CHECK(at_one.value == 0.0);
  CHECK(at_one.already_subcritical);
  CHECK(critical_mass_rate_from_r0(1.0, mu_h).value == 0.0);
  CHECK(critical_mass_rate_from_r0(0.5, mu_h).already_subcritical);
  CHECK(critical_pediatric_coverage_from_r0(0.5).value == 0.0);
}

TEST_CASE("peak statistic") {
  ode::Trajectory t;
  t.times = {0.0, 1.0, 2.0};
  for (double v : {0.0, 5.0, 3.0}) {
    t.states.push_back({0.0, 0.0, v, 0.0, 0.0, 0.0, 0.0});
  }
  const auto pk = peak(t, "I_h");
  CHECK(pk.time == 1.0);
  CHECK(pk.value == 5.0);

  ode::Trajectory flat;
  flat.times = {2.0, 3.0, 4.0};
  flat.states = {{7.0}, {7.0}, {7.0}};
  const auto fp = peak(flat, std::size_t{0});
  CHECK(fp.time == 2.0);
  CHECK(fp.value == 7.0);

  CHECK_THROWS_AS((void)peak(t, "X_h"), LookupError);
  CHECK_THROWS_AS((void)peak(ode::Trajectory{}, std::size_t{0}), ContractViolation);
}

TEST_CASE("no-vaccine endemic peak stays below 3000 and epidemic peak is large") {
  const auto epi = simulate(preset_scenario("epidemic"));
  const auto end = simulate(preset_scenario("endemic"));
  CHECK(peak(end, "I_h").value < 3000.0);
  CHECK(peak(epi, "I_h").value > 80000.0);
}
