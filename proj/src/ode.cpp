#include "epivax/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "epivax/errors.hpp"

namespace epivax::ode {

TimeGrid::TimeGrid(double t0, double tf, std::size_t n_points) : t0_(t0), tf_(tf), n_(n_points) {
  if (!std::isfinite(t0) || !std::isfinite(tf) || !(tf > t0)) {
    throw ContractViolation("time grid requires finite t0 < tf");
  }
  if (n_points < 2) {
    throw ContractViolation("time grid requires at least two points");
  }
}

TimeGrid TimeGrid::with_step(double t0, double tf, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw ContractViolation("time grid step must be positive");
  }
  const double span = tf - t0;
  // Tolerate representation error so that e.g. 365 / 0.05 gives 7300 intervals.
  const double ratio = span / step;
  auto intervals = static_cast<std::size_t>(std::ceil(ratio - 1e-9 * ratio));
  intervals = std::max<std::size_t>(intervals, 1);
  return TimeGrid(t0, tf, intervals + 1);
}

double TimeGrid::operator[](std::size_t i) const noexcept {
  if (i + 1 >= n_) {
    return tf_;
  }
  return t0_ + static_cast<double>(i) * (tf_ - t0_) / static_cast<double>(n_ - 1);
}

std::vector<double> TimeGrid::points() const {
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    out[i] = (*this)[i];
  }
  return out;
}

std::vector<double> Trajectory::component(std::size_t component) const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) {
    if (component >= s.size()) {
      throw ContractViolation("trajectory component index out of range");
    }
    out.push_back(s[component]);
  }
  return out;
}

namespace {

void check_finite(std::span<const double> values, double t, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw IntegrationError(std::string(what) + " is not finite at t=" + std::to_string(t) + ", component " +
                                 std::to_string(i),
                             t, i);
    }
  }
}

void eval_field(const VectorField& rhs, double t, std::span<const double> y, std::span<double> dydt) {
  rhs(t, y, dydt);
  check_finite(dydt, t, "field value");
}

void enforce_sign(const IntegratorOptions& options, double t, StateVec& y) {
  if (!options.clamp_negative) {
    return;
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0.0) {
      if (-y[i] <= options.negative_snap) {
        y[i] = 0.0;
      } else {
        throw IntegrationError("state component " + std::to_string(i) + " became negative (" + std::to_string(y[i]) +
                                   ") at t=" + std::to_string(t),
                               t, i);
      }
    }
  }
}

// y + a*k, written into out
void axpy(std::span<const double> y, double a, std::span<const double> k, StateVec& out) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i] = y[i] + a * k[i];
  }
}

Trajectory integrate_rk4(const VectorField& rhs, const TimeGrid& grid, std::span<const double> y0,
                         const IntegratorOptions& options) {
  Trajectory out;
  out.times = grid.points();
  out.states.reserve(grid.size());
  StateVec y(y0.begin(), y0.end());
  enforce_sign(options, grid.t0(), y);
  out.states.push_back(y);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double t = out.times[i];
    y = rk4_step(rhs, t, y, out.times[i + 1] - t);
    enforce_sign(options, out.times[i + 1], y);
    out.states.push_back(y);
  }
  return out;
}

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> kC = {0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5.0},
    {3.0 / 40.0, 9.0 / 40.0},
    {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0},
    {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0},
    {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0},
    {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0},
};
constexpr std::array<double, 7> kB5 = {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
                                       11.0 / 84.0, 0.0};
constexpr std::array<double, 7> kB4 = {5179.0 / 57600.0,    0.0,           7571.0 / 16695.0, 393.0 / 640.0,
                                       -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0};

double error_norm(std::span<const double> y, std::span<const double> y_new, std::span<const double> err,
                  const IntegratorOptions& o) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double scale = o.atol + o.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
    const double r = err[i] / scale;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(std::max<std::size_t>(y.size(), 1)));
}

// Dormand-Prince continuous extension: y(t + theta h) = y + h * sum_s k_s * poly_s(theta),
// poly_s(theta) = sum_j kDense[s][j] theta^(j+1).
constexpr double kDense[7][4] = {
    {1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0, -12715105075.0 / 11282082432.0},
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0, 87487479700.0 / 32700410799.0},
    {0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0, -10690763975.0 / 1880347072.0},
    {0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0, 701980252875.0 / 199316789632.0},
    {0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0, -1453857185.0 / 822651844.0},
    {0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0},
};

void dense_output(double theta, double h, std::span<const double> y, const std::array<StateVec, 7>& k,
                  StateVec& out) {
  double w[7];
  for (std::size_t s = 0; s < 7; ++s) {
    double acc = 0.0;
    double power = theta;
    for (std::size_t j = 0; j < 4; ++j) {
      acc += kDense[s][j] * power;
      power *= theta;
    }
    w[s] = acc;
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    double acc = 0.0;
    for (std::size_t s = 0; s < 7; ++s) {
      acc += w[s] * k[s][i];
    }
    out[i] = y[i] + h * acc;
  }
}

Trajectory integrate_dopri(const VectorField& rhs, const TimeGrid& grid, std::span<const double> y0,
                           const IntegratorOptions& options) {
  const std::size_t n = y0.size();
  Trajectory out;
  out.times = grid.points();
  out.states.reserve(grid.size());

  StateVec y(y0.begin(), y0.end());
  enforce_sign(options, grid.t0(), y);
  out.states.push_back(y);

  std::array<StateVec, 7> k;
  for (auto& ki : k) {
    ki.assign(n, 0.0);
  }
  StateVec stage(n), y5(n), err(n), dense(n);

  double t = grid.t0();
  const double tf = grid.tf();
  eval_field(rhs, t, y, k[0]);

  double h = std::min(grid.spacing(), tf - t);
  {
    double ny = 0.0;
    double nf = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ny = std::max(ny, std::abs(y[i]));
      nf = std::max(nf, std::abs(k[0][i]));
    }
    if (nf > 0.0 && ny > 0.0) {
      h = std::min(h, 0.01 * ny / nf);
    }
    h = std::max(h, 1e-6 * (tf - t));
  }

  std::size_t next = 1;
  int rejections = 0;
  std::size_t steps = 0;
  while (next < grid.size()) {
    if (++steps > options.max_steps) {
      throw IntegrationError("adaptive integration exceeded the step limit", t);
    }
    const bool last = t + h >= tf;
    if (last) {
      h = tf - t;
    }
    for (std::size_t s = 1; s < 7; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = y[i];
        for (std::size_t j = 0; j < s; ++j) {
          acc += h * kA[s][j] * k[j][i];
        }
        stage[i] = acc;
      }
      eval_field(rhs, t + kC[s] * h, stage, k[s]);
      if (s == 6) {
        y5 = stage;  // FSAL: row 7 of A equals the 5th-order weights
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double e = 0.0;
      for (std::size_t s = 0; s < 7; ++s) {
        e += (kB5[s] - kB4[s]) * k[s][i];
      }
      err[i] = h * e;
    }
    const double en = error_norm(y, y5, err, options);
    if (!std::isfinite(en) || en > 1.0) {
      if (++rejections > options.max_rejections) {
        throw IntegrationError("adaptive step rejected too many times; last valid t=" + std::to_string(t), t);
      }
      const double factor = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
      h *= factor;
      if (h <= 1e-14 * std::max(1.0, std::abs(t))) {
        throw IntegrationError("adaptive step size underflow; last valid t=" + std::to_string(t), t);
      }
      continue;
    }
    rejections = 0;
    const double t_new = last ? tf : t + h;
    // k[6] holds f(t_new, y5).
    while (next < grid.size() && out.times[next] <= t_new) {
      if (next + 1 == grid.size() && last) {
        dense = y5;
      } else {
        dense_output((out.times[next] - t) / h, h, y, k, dense);
      }
      enforce_sign(options, out.times[next], dense);
      out.states.push_back(dense);
      ++next;
    }
    y = y5;
    enforce_sign(options, t_new, y);
    k[0] = k[6];
    t = t_new;
    const double grow = en > 0.0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(en, -0.2))) : 5.0;
    h *= grow;
  }
  return out;
}

}  // namespace

StateVec rk4_step(const VectorField& rhs, double t, std::span<const double> y, double h) {
  if (!(h > 0.0)) {
    throw ContractViolation("rk4_step requires h > 0");
  }
  const std::size_t n = y.size();
  StateVec k1(n), k2(n), k3(n), k4(n), tmp(n);
  eval_field(rhs, t, y, k1);
  axpy(y, 0.5 * h, k1, tmp);
  eval_field(rhs, t + 0.5 * h, tmp, k2);
  axpy(y, 0.5 * h, k2, tmp);
  eval_field(rhs, t + 0.5 * h, tmp, k3);
  axpy(y, h, k3, tmp);
  eval_field(rhs, t + h, tmp, k4);
  StateVec out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  check_finite(out, t + h, "state");
  return out;
}

Trajectory integrate(const VectorField& rhs, const TimeGrid& grid, std::span<const double> y0,
                     const IntegratorOptions& options) {
  check_finite(y0, grid.t0(), "initial state");
  switch (options.method) {
    case Method::rk4:
      return integrate_rk4(rhs, grid, y0, options);
    case Method::dopri45:
      return integrate_dopri(rhs, grid, y0, options);
  }
  throw ContractViolation("unknown integration method");
}

Trajectory integrate_backward(const BackwardField& rhs, const TimeGrid& grid, std::span<const double> y_tf,
                              const Trajectory& forward_ctx, const IntegratorOptions& options) {
  if (options.method != Method::rk4) {
    throw ContractViolation("backward integration supports fixed-step RK4 only");
  }
  if (forward_ctx.size() != grid.size() || forward_ctx.states.size() != grid.size()) {
    throw ContractViolation("forward context is not sampled on the integration grid");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (forward_ctx.times[i] != grid[i]) {
      throw ContractViolation("forward context times differ from the integration grid at index " +
                              std::to_string(i));
    }
  }
  if (forward_ctx.has_control() && forward_ctx.control.size() != grid.size()) {
    throw ContractViolation("forward context control column has the wrong length");
  }
  check_finite(y_tf, grid.tf(), "terminal state");

  const std::size_t n = y_tf.size();
  const std::size_t m = forward_ctx.dimension();
  const bool with_u = forward_ctx.has_control();

  Trajectory out;
  out.times = grid.points();
  out.states.assign(grid.size(), StateVec{});
  StateVec y(y_tf.begin(), y_tf.end());
  out.states.back() = y;

  StateVec k1(n), k2(n), k3(n), k4(n), tmp(n), mid_state(m);
  auto field = [&](double t, const ContextPoint& ctx, std::span<const double> yy, std::span<double> dy) {
    rhs(t, ctx, yy, dy);
    check_finite(dy, t, "backward field value");
  };

  for (std::size_t i = grid.size() - 1; i > 0; --i) {
    const double t = out.times[i];
    const double h = t - out.times[i - 1];
    const auto& right = forward_ctx.states[i];
    const auto& left = forward_ctx.states[i - 1];
    for (std::size_t j = 0; j < m; ++j) {
      mid_state[j] = 0.5 * (left[j] + right[j]);
    }
    const ContextPoint c_right{right, with_u ? forward_ctx.control[i] : 0.0};
    const ContextPoint c_mid{mid_state, with_u ? 0.5 * (forward_ctx.control[i - 1] + forward_ctx.control[i]) : 0.0};
    const ContextPoint c_left{left, with_u ? forward_ctx.control[i - 1] : 0.0};

    field(t, c_right, y, k1);
    axpy(y, -0.5 * h, k1, tmp);
    field(t - 0.5 * h, c_mid, tmp, k2);
    axpy(y, -0.5 * h, k2, tmp);
    field(t - 0.5 * h, c_mid, tmp, k3);
    axpy(y, -h, k3, tmp);
    field(out.times[i - 1], c_left, tmp, k4);
    for (std::size_t j = 0; j < n; ++j) {
      y[j] -= h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    check_finite(y, out.times[i - 1], "backward state");
    enforce_sign(options, out.times[i - 1], y);
    out.states[i - 1] = y;
  }
  return out;
}

}  // namespace epivax::ode
