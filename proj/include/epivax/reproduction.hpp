/**
 * @file reproduction.hpp
 * @brief Closed-form basic reproduction numbers, eradication thresholds and peak statistics.
 */
#pragma once

#include <cstddef>
#include <string_view>

#include "epivax/models.hpp"
#include "epivax/ode.hpp"

namespace epivax {

/**
 * @brief Basic reproduction number without vaccination.
 *
 * sqrt(k B^2 beta_hm beta_mh (phi eta_A - (eta_A + mu_A) mu_m) / (phi (eta_h + mu_h) mu_m^2)).
 * Throws ViabilityError when the radicand is negative.
 */
[[nodiscard]] double r0_baseline(const EpiParams& params);

/// (1 - p) R0
[[nodiscard]] double r0_pediatric(const EpiParams& params, double p);
/// R0 mu_h / (mu_h + psi)
[[nodiscard]] double r0_mass(const EpiParams& params, double psi);
/// (1 + sigma psi) r0_mass(psi)
[[nodiscard]] double r0_imperfect(const EpiParams& params, double psi, double sigma);
/// Waning does not change the invasion threshold: equals r0_mass(psi).
[[nodiscard]] double r0_waning(const EpiParams& params, double psi);

/** @brief Eradication threshold. `already_subcritical` is set (and value is 0) when R0 <= 1. */
struct Threshold {
  double value = 0.0;
  bool already_subcritical = false;
};

/// Newborn coverage p_c = 1 - 1/R0, clamped to [0, 1].
[[nodiscard]] Threshold critical_pediatric_coverage(const EpiParams& params);
/// Mass vaccination rate psi_c = (R0 - 1) mu_h.
[[nodiscard]] Threshold critical_mass_rate(const EpiParams& params);

// Threshold formulas expressed in terms of a given R0, for callers that already hold it.
[[nodiscard]] Threshold critical_pediatric_coverage_from_r0(double r0);
[[nodiscard]] Threshold critical_mass_rate_from_r0(double r0, double mu_h);

struct Peak {
  double time = 0.0;
  double value = 0.0;
};

/** First global maximum of a compartment; ties go to the earliest time. */
[[nodiscard]] Peak peak(const ode::Trajectory& trajectory, std::size_t component);
/** Same, selecting the compartment by CSV column name (e.g. "I_h"). */
[[nodiscard]] Peak peak(const ode::Trajectory& trajectory, std::string_view compartment);

}  // namespace epivax
