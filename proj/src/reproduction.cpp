#include "epivax/reproduction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "epivax/errors.hpp"

namespace epivax {

double r0_baseline(const EpiParams& p) {
  const double numerator =
      p.k * p.B * p.B * p.beta_hm * p.beta_mh * (-p.eta_A * p.mu_m - p.mu_A * p.mu_m + p.phi * p.eta_A);
  const double denominator = p.phi * (p.eta_h + p.mu_h) * p.mu_m * p.mu_m;
  if (!(denominator > 0.0)) {
    throw ViabilityError("R0 undefined: phi, eta_h + mu_h and mu_m must be positive");
  }
  const double radicand = numerator / denominator;
  if (radicand < 0.0 || !std::isfinite(radicand)) {
    throw ViabilityError("R0 undefined: mosquito population is not viable (negative radicand)");
  }
  return std::sqrt(radicand);
}

double r0_pediatric(const EpiParams& params, double p) { return (1.0 - p) * r0_baseline(params); }

double r0_mass(const EpiParams& params, double psi) {
  return r0_baseline(params) * (params.mu_h / (params.mu_h + psi));
}

double r0_imperfect(const EpiParams& params, double psi, double sigma) {
  return (1.0 + sigma * psi) * r0_mass(params, psi);
}

double r0_waning(const EpiParams& params, double psi) { return r0_mass(params, psi); }

Threshold critical_pediatric_coverage_from_r0(double r0) {
  if (r0 <= 1.0) {
    return {0.0, true};
  }
  return {std::clamp(1.0 - 1.0 / r0, 0.0, 1.0), false};
}

Threshold critical_mass_rate_from_r0(double r0, double mu_h) {
  if (r0 <= 1.0) {
    return {0.0, true};
  }
  return {(r0 - 1.0) * mu_h, false};
}

Threshold critical_pediatric_coverage(const EpiParams& params) {
  return critical_pediatric_coverage_from_r0(r0_baseline(params));
}

Threshold critical_mass_rate(const EpiParams& params) {
  return critical_mass_rate_from_r0(r0_baseline(params), params.mu_h);
}

Peak peak(const ode::Trajectory& trajectory, std::size_t component) {
  if (trajectory.size() == 0 || trajectory.states.size() != trajectory.times.size()) {
    throw ContractViolation("peak requires a non-empty trajectory");
  }
  if (component >= trajectory.dimension()) {
    throw LookupError("compartment index " + std::to_string(component) + " out of range");
  }
  Peak best{trajectory.times[0], trajectory.states[0][component]};
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    const double v = trajectory.states[i][component];
    if (v > best.value) {
      best = {trajectory.times[i], v};
    }
  }
  return best;
}

Peak peak(const ode::Trajectory& trajectory, std::string_view compartment) {
  return peak(trajectory, compartment_index(compartment));
}

}  // namespace epivax
