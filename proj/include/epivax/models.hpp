/**
 * @file models.hpp
 * @brief Dengue host-vector compartment models with vaccination.
 *
 * Humans: susceptible, vaccinated, infected, resistant (S_h, V_h, I_h, R_h).
 * Mosquitoes: aquatic phase, susceptible and infected adults (A_m, S_m, I_m).
 * All quantities are absolute counts; time is in days.
 */
#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "epivax/ode.hpp"

namespace epivax {

/** @brief Biological and entomological rate constants. */
struct EpiParams {
  double N_h = 0.0;      // total human population
  double B = 0.0;        // bites per mosquito per day
  double beta_mh = 0.0;  // mosquito -> human transmission probability per bite
  double beta_hm = 0.0;  // human -> mosquito transmission probability per bite
  double mu_h = 0.0;     // human mortality (1 / lifespan in days)
  double eta_h = 0.0;    // recovery rate (1 / viremic period)
  double mu_m = 0.0;     // adult mosquito mortality
  double phi = 0.0;      // eggs per deposit per capita per day
  double mu_A = 0.0;     // aquatic mortality
  double eta_A = 0.0;    // aquatic -> adult maturation rate
  double m = 0.0;        // female mosquitoes per human
  double k = 0.0;        // larvae per human

  /** Throws ValidationError naming the first offending field. */
  void validate() const;
  /** phi*eta_A > (eta_A + mu_A)*mu_m, i.e. a positive aquatic equilibrium exists. */
  [[nodiscard]] bool mosquito_viable() const noexcept;

  friend bool operator==(const EpiParams&, const EpiParams&) = default;
};

inline constexpr std::size_t kCompartments = 7;

/** @brief The seven-compartment state. Also used for its time derivative. */
struct SysState {
  double S_h = 0.0;
  double V_h = 0.0;
  double I_h = 0.0;
  double R_h = 0.0;
  double A_m = 0.0;
  double S_m = 0.0;
  double I_m = 0.0;

  [[nodiscard]] std::array<double, kCompartments> to_array() const noexcept {
    return {S_h, V_h, I_h, R_h, A_m, S_m, I_m};
  }
  [[nodiscard]] static SysState from_span(std::span<const double> v);
  [[nodiscard]] double humans() const noexcept { return S_h + V_h + I_h + R_h; }

  /** Non-negative, humans sum to N_h (relative 1e-9), A_m within carrying capacity. */
  void validate(const EpiParams& params) const;

  friend bool operator==(const SysState&, const SysState&) = default;
};

using SysRate = SysState;

/** Compartment names in state-vector order, matching CSV columns. */
inline constexpr std::array<std::string_view, kCompartments> kCompartmentNames = {"S_h", "V_h", "I_h", "R_h",
                                                                                  "A_m", "S_m", "I_m"};

/** Index of a compartment by name; throws LookupError when unknown. */
[[nodiscard]] std::size_t compartment_index(std::string_view name);

namespace strategy {
struct NoVaccine {
  friend bool operator==(const NoVaccine&, const NoVaccine&) = default;
};
/** A proportion p of newborns vaccinated with a perfect vaccine. */
struct Pediatric {
  double p = 0.0;
  friend bool operator==(const Pediatric&, const Pediatric&) = default;
};
/** Susceptibles vaccinated continuously at rate psi (per day). */
struct MassPerfect {
  double psi = 0.0;
  friend bool operator==(const MassPerfect&, const MassPerfect&) = default;
};
/** Mass vaccination where vaccinated individuals keep relative susceptibility sigma. */
struct MassImperfect {
  double psi = 0.0;
  double sigma = 0.0;
  friend bool operator==(const MassImperfect&, const MassImperfect&) = default;
};
/** Mass vaccination whose protection wanes at rate theta (per day). */
struct MassWaning {
  double psi = 0.0;
  double theta = 0.0;
  friend bool operator==(const MassWaning&, const MassWaning&) = default;
};
}  // namespace strategy

using VaccineStrategy = std::variant<strategy::NoVaccine, strategy::Pediatric, strategy::MassPerfect,
                                     strategy::MassImperfect, strategy::MassWaning>;

void validate_strategy(const VaccineStrategy& s);
/** "none", "pediatric", "mass_perfect", "mass_imperfect" or "mass_waning". */
[[nodiscard]] std::string strategy_tag(const VaccineStrategy& s);

struct Scenario {
  EpiParams params;
  SysState initial;
  VaccineStrategy strategy = strategy::NoVaccine{};
  double horizon = 365.0;
  std::string label;

  void validate() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Vector fields. Each returns the seven time derivatives at state s.

/** Pediatric vaccination of a proportion p of newborns. p = 0 is the no-vaccine baseline. */
[[nodiscard]] SysRate rhs_pediatric(const SysState& s, double p, const EpiParams& params) noexcept;
/** Continuous vaccination of susceptibles at rate psi. */
[[nodiscard]] SysRate rhs_mass_perfect(const SysState& s, double psi, const EpiParams& params) noexcept;
/** As rhs_mass_perfect, but vaccinated individuals are infected at sigma times the susceptible rate. */
[[nodiscard]] SysRate rhs_mass_imperfect(const SysState& s, double psi, double sigma,
                                         const EpiParams& params) noexcept;
/** As rhs_mass_perfect, with vaccinated individuals returning to S_h at rate theta. */
[[nodiscard]] SysRate rhs_mass_waning(const SysState& s, double psi, double theta, const EpiParams& params) noexcept;
/**
 * Six-compartment controlled model: u*S_h moves to R_h, theta*u*R_h returns to S_h.
 * Throws ContractViolation when s.V_h != 0.
 */
[[nodiscard]] SysRate rhs_controlled(const SysState& s, double u, double theta, const EpiParams& params);

/** Field for `strategy` over the seven-compartment state vector. */
[[nodiscard]] ode::VectorField strategy_field(const VaccineStrategy& strategy, const EpiParams& params);

/** Disease-free equilibrium with newborn coverage p. Throws ViabilityError when mosquitoes die out. */
[[nodiscard]] SysState disease_free_equilibrium(const EpiParams& params, double p);

/** Built-in scenarios: "epidemic" or "endemic". Throws LookupError otherwise. */
[[nodiscard]] Scenario preset_scenario(std::string_view name);
[[nodiscard]] std::vector<std::string> preset_names();

inline constexpr double kDefaultStep = 0.05;

/**
 * Integrate a scenario over [0, horizon] with fixed-step RK4.
 * Small negative round-off is clamped to zero; larger negatives raise IntegrationError.
 */
[[nodiscard]] ode::Trajectory simulate(const Scenario& scenario, double step = kDefaultStep);
[[nodiscard]] ode::Trajectory simulate(const Scenario& scenario, double step, const ode::IntegratorOptions& options);

}  // namespace epivax
