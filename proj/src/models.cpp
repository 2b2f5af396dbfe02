#include "epivax/models.hpp"

#include <cmath>
#include <string>

#include "epivax/errors.hpp"

namespace epivax {

namespace {

void require_positive(double v, const char* field) {
  if (!std::isfinite(v) || !(v > 0.0)) {
    throw ValidationError(field, "must be a finite positive number, got " + std::to_string(v));
  }
}

void require_unit(double v, const char* field) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    throw ValidationError(field, "must lie in [0, 1], got " + std::to_string(v));
  }
}

// Force of infection on humans: B * beta_mh * I_m / N_h.
double human_force(const SysState& s, const EpiParams& p) noexcept { return p.B * p.beta_mh * s.I_m / p.N_h; }

// Force of infection on mosquitoes: B * beta_hm * I_h / N_h.
double mosquito_force(const SysState& s, const EpiParams& p) noexcept { return p.B * p.beta_hm * s.I_h / p.N_h; }

// Aquatic/adult mosquito equations, shared by every variant.
void mosquito_rates(const SysState& s, const EpiParams& p, SysRate& d) noexcept {
  const double lambda_m = mosquito_force(s, p);
  d.A_m = p.phi * (1.0 - s.A_m / (p.k * p.N_h)) * (s.S_m + s.I_m) - (p.eta_A + p.mu_A) * s.A_m;
  d.S_m = p.eta_A * s.A_m - (lambda_m + p.mu_m) * s.S_m;
  d.I_m = lambda_m * s.S_m - p.mu_m * s.I_m;
}

}  // namespace

void EpiParams::validate() const {
  require_positive(N_h, "N_h");
  require_positive(B, "B");
  require_unit(beta_mh, "beta_mh");
  require_unit(beta_hm, "beta_hm");
  require_positive(mu_h, "mu_h");
  require_positive(eta_h, "eta_h");
  require_positive(mu_m, "mu_m");
  require_positive(phi, "phi");
  require_positive(mu_A, "mu_A");
  require_positive(eta_A, "eta_A");
  require_positive(m, "m");
  require_positive(k, "k");
  if (!mosquito_viable()) {
    throw ValidationError("phi", "mosquito population is not viable: need phi*eta_A > (eta_A + mu_A)*mu_m");
  }
}

bool EpiParams::mosquito_viable() const noexcept { return phi * eta_A > (eta_A + mu_A) * mu_m; }

SysState SysState::from_span(std::span<const double> v) {
  if (v.size() != kCompartments) {
    throw ContractViolation("state vector must have 7 components, got " + std::to_string(v.size()));
  }
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

void SysState::validate(const EpiParams& params) const {
  const auto values = to_array();
  for (std::size_t i = 0; i < kCompartments; ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      throw ValidationError(std::string(kCompartmentNames[i]), "must be finite and non-negative");
    }
  }
  if (std::abs(humans() - params.N_h) > 1e-9 * params.N_h) {
    throw ValidationError("S_h", "human compartments sum to " + std::to_string(humans()) + ", expected N_h = " +
                                     std::to_string(params.N_h));
  }
  if (A_m > params.k * params.N_h * (1.0 + 1e-12)) {
    throw ValidationError("A_m", "exceeds the aquatic carrying capacity k*N_h");
  }
}

std::size_t compartment_index(std::string_view name) {
  for (std::size_t i = 0; i < kCompartments; ++i) {
    if (kCompartmentNames[i] == name) {
      return i;
    }
  }
  throw LookupError("unknown compartment '" + std::string(name) + "'");
}

void validate_strategy(const VaccineStrategy& s) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, strategy::Pediatric>) {
          require_unit(v.p, "strategy.p");
        } else if constexpr (std::is_same_v<T, strategy::MassPerfect>) {
          require_unit(v.psi, "strategy.psi");
        } else if constexpr (std::is_same_v<T, strategy::MassImperfect>) {
          require_unit(v.psi, "strategy.psi");
          require_unit(v.sigma, "strategy.sigma");
        } else if constexpr (std::is_same_v<T, strategy::MassWaning>) {
          require_unit(v.psi, "strategy.psi");
          if (!std::isfinite(v.theta) || v.theta < 0.0) {
            throw ValidationError("strategy.theta", "must be finite and non-negative");
          }
        }
      },
      s);
}

std::string strategy_tag(const VaccineStrategy& s) {
  static constexpr std::array<const char*, 5> kTags = {"none", "pediatric", "mass_perfect", "mass_imperfect",
                                                       "mass_waning"};
  return kTags[s.index()];
}

void Scenario::validate() const {
  params.validate();
  initial.validate(params);
  validate_strategy(strategy);
  if (!std::isfinite(horizon) || !(horizon > 0.0)) {
    throw ValidationError("horizon", "must be a positive number of days");
  }
}

SysRate rhs_pediatric(const SysState& s, double p, const EpiParams& params) noexcept {
  const double lambda_h = human_force(s, params);
  SysRate d;
  d.S_h = (1.0 - p) * params.mu_h * params.N_h - (lambda_h + params.mu_h) * s.S_h;
  d.V_h = p * params.mu_h * params.N_h - params.mu_h * s.V_h;
  d.I_h = lambda_h * s.S_h - (params.eta_h + params.mu_h) * s.I_h;
  d.R_h = params.eta_h * s.I_h - params.mu_h * s.R_h;
  mosquito_rates(s, params, d);
  return d;
}

SysRate rhs_mass_perfect(const SysState& s, double psi, const EpiParams& params) noexcept {
  const double lambda_h = human_force(s, params);
  SysRate d;
  d.S_h = params.mu_h * params.N_h - (lambda_h + psi + params.mu_h) * s.S_h;
  d.V_h = psi * s.S_h - params.mu_h * s.V_h;
  d.I_h = lambda_h * s.S_h - (params.eta_h + params.mu_h) * s.I_h;
  d.R_h = params.eta_h * s.I_h - params.mu_h * s.R_h;
  mosquito_rates(s, params, d);
  return d;
}

SysRate rhs_mass_imperfect(const SysState& s, double psi, double sigma, const EpiParams& params) noexcept {
  const double lambda_h = human_force(s, params);
  SysRate d;
  d.S_h = params.mu_h * params.N_h - (lambda_h + psi + params.mu_h) * s.S_h;
  d.V_h = psi * s.S_h - (sigma * lambda_h + params.mu_h) * s.V_h;
  d.I_h = lambda_h * (s.S_h + sigma * s.V_h) - (params.eta_h + params.mu_h) * s.I_h;
  d.R_h = params.eta_h * s.I_h - params.mu_h * s.R_h;
  mosquito_rates(s, params, d);
  return d;
}

SysRate rhs_mass_waning(const SysState& s, double psi, double theta, const EpiParams& params) noexcept {
  const double lambda_h = human_force(s, params);
  SysRate d;
  d.S_h = params.mu_h * params.N_h + theta * s.V_h - (lambda_h + psi + params.mu_h) * s.S_h;
  d.V_h = psi * s.S_h - (theta + params.mu_h) * s.V_h;
  d.I_h = lambda_h * s.S_h - (params.eta_h + params.mu_h) * s.I_h;
  d.R_h = params.eta_h * s.I_h - params.mu_h * s.R_h;
  mosquito_rates(s, params, d);
  return d;
}

SysRate rhs_controlled(const SysState& s, double u, double theta, const EpiParams& params) {
  if (s.V_h != 0.0) {
    throw ContractViolation("controlled model has no vaccinated compartment; V_h must be 0");
  }
  const double lambda_h = human_force(s, params);
  SysRate d;
  d.S_h = params.mu_h * params.N_h - (lambda_h + params.mu_h + u) * s.S_h + theta * u * s.R_h;
  d.V_h = 0.0;
  d.I_h = lambda_h * s.S_h - (params.eta_h + params.mu_h) * s.I_h;
  d.R_h = params.eta_h * s.I_h + u * s.S_h - (theta * u + params.mu_h) * s.R_h;
  mosquito_rates(s, params, d);
  return d;
}

ode::VectorField strategy_field(const VaccineStrategy& strategy, const EpiParams& params) {
  auto wrap = [](auto rate) -> ode::VectorField {
    return [rate](double, std::span<const double> y, std::span<double> dydt) {
      const auto d = rate(SysState::from_span(y)).to_array();
      std::copy(d.begin(), d.end(), dydt.begin());
    };
  };
  return std::visit(
      [&](const auto& v) -> ode::VectorField {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, strategy::NoVaccine>) {
          return wrap([params](const SysState& s) { return rhs_pediatric(s, 0.0, params); });
        } else if constexpr (std::is_same_v<T, strategy::Pediatric>) {
          return wrap([params, p = v.p](const SysState& s) { return rhs_pediatric(s, p, params); });
        } else if constexpr (std::is_same_v<T, strategy::MassPerfect>) {
          return wrap([params, psi = v.psi](const SysState& s) { return rhs_mass_perfect(s, psi, params); });
        } else if constexpr (std::is_same_v<T, strategy::MassImperfect>) {
          return wrap([params, v](const SysState& s) { return rhs_mass_imperfect(s, v.psi, v.sigma, params); });
        } else {
          return wrap([params, v](const SysState& s) { return rhs_mass_waning(s, v.psi, v.theta, params); });
        }
      },
      strategy);
}

SysState disease_free_equilibrium(const EpiParams& params, double p) {
  if (!params.mosquito_viable()) {
    throw ViabilityError("no positive disease-free equilibrium: phi*eta_A <= (eta_A + mu_A)*mu_m");
  }
  SysState s;
  s.S_h = (1.0 - p) * params.N_h;
  s.V_h = p * params.N_h;
  s.A_m = (1.0 - (params.eta_A + params.mu_A) / (params.phi * params.eta_A) * params.mu_m) * params.k * params.N_h;
  s.S_m = params.eta_A / params.mu_m * s.A_m;
  return s;
}

Scenario preset_scenario(std::string_view name) {
  Scenario sc;
  EpiParams& p = sc.params;
  p.N_h = 480000.0;
  p.mu_h = 1.0 / (71.0 * 365.0);
  p.eta_h = 1.0 / 3.0;
  p.mu_m = 1.0 / 10.0;
  p.phi = 6.0;
  p.mu_A = 1.0 / 4.0;
  p.eta_A = 0.08;
  p.m = 3.0;
  p.k = 3.0;
  sc.initial.V_h = 0.0;
  sc.initial.I_h = 10.0;
  sc.initial.A_m = 1440000.0;
  sc.initial.S_m = 1440000.0;
  sc.initial.I_m = 0.0;
  if (name == "epidemic") {
    p.B = 0.8;
    p.beta_mh = 0.375;
    p.beta_hm = 0.375;
    sc.initial.S_h = 479990.0;
    sc.initial.R_h = 0.0;
  } else if (name == "endemic") {
    p.B = 0.75;
    p.beta_mh = 0.21;
    p.beta_hm = 0.21;
    sc.initial.S_h = 379990.0;
    sc.initial.R_h = 100000.0;
  } else {
    throw LookupError("unknown preset '" + std::string(name) + "' (expected epidemic or endemic)");
  }
  sc.horizon = 365.0;
  sc.label = std::string(name);
  return sc;
}

std::vector<std::string> preset_names() { return {"epidemic", "endemic"}; }

ode::Trajectory simulate(const Scenario& scenario, double step) {
  ode::IntegratorOptions options;
  options.clamp_negative = true;
  return simulate(scenario, step, options);
}

ode::Trajectory simulate(const Scenario& scenario, double step, const ode::IntegratorOptions& options) {
  scenario.validate();
  const auto grid = ode::TimeGrid::with_step(0.0, scenario.horizon, step);
  const auto y0 = scenario.initial.to_array();
  return ode::integrate(strategy_field(scenario.strategy, scenario.params), grid, y0, options);
}

}  // namespace epivax
