/**
 * @file ode.hpp
 * @brief Explicit Runge-Kutta integration on fixed time grids.
 *
 * Fixed-step classical RK4 is the production path. An embedded Dormand-Prince
 * 5(4) pair with its continuous extension for grid resampling is available
 * for cross-checks.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace epivax::ode {

using StateVec = std::vector<double>;

/** @brief Autonomous or time-dependent field: writes dy/dt into `dydt`. */
using VectorField = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/** @brief Sample of a forward trajectory handed to a backward (costate) field. */
struct ContextPoint {
  std::span<const double> state;
  double control = 0.0;
};

using BackwardField =
    std::function<void(double t, const ContextPoint& ctx, std::span<const double> y, std::span<double> dydt)>;

/**
 * @brief Uniform grid on [t0, tf] with n_points samples.
 *
 * Point i is t0 + i*(tf - t0)/(n - 1); the last point is exactly tf.
 */
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double t0, double tf, std::size_t n_points);

  /** Grid whose spacing is `step`, or the largest spacing <= step that divides [t0, tf] evenly. */
  [[nodiscard]] static TimeGrid with_step(double t0, double tf, double step);

  [[nodiscard]] double t0() const noexcept { return t0_; }
  [[nodiscard]] double tf() const noexcept { return tf_; }
  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] std::size_t intervals() const noexcept { return n_ - 1; }
  [[nodiscard]] double spacing() const noexcept { return (tf_ - t0_) / static_cast<double>(n_ - 1); }
  [[nodiscard]] double operator[](std::size_t i) const noexcept;
  [[nodiscard]] std::vector<double> points() const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double t0_ = 0.0;
  double tf_ = 1.0;
  std::size_t n_ = 2;
};

/** @brief Time samples with one state per sample and an optional control column. */
struct Trajectory {
  std::vector<double> times;
  std::vector<StateVec> states;
  std::vector<double> control;  // empty when no control is attached

  [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
  [[nodiscard]] std::size_t dimension() const noexcept { return states.empty() ? 0 : states.front().size(); }
  [[nodiscard]] bool has_control() const noexcept { return !control.empty(); }
  /** Column `component` across all samples. */
  [[nodiscard]] std::vector<double> component(std::size_t component) const;
};

enum class Method { rk4, dopri45 };

struct IntegratorOptions {
  Method method = Method::rk4;

  // Adaptive mode only.
  double rtol = 1e-8;
  double atol = 1e-10;
  int max_rejections = 50;
  std::size_t max_steps = 10'000'000;

  // Negative components with |y| <= negative_snap are set to 0 after each
  // accepted step; anything more negative raises IntegrationError.
  bool clamp_negative = false;
  double negative_snap = 1e-12;
};

/** @brief One classical RK4 step of size h from (t, y). Throws IntegrationError on non-finite field values. */
[[nodiscard]] StateVec rk4_step(const VectorField& rhs, double t, std::span<const double> y, double h);

/** @brief Integrate y' = rhs(t, y) from grid.t0() and sample exactly on the grid. */
[[nodiscard]] Trajectory integrate(const VectorField& rhs, const TimeGrid& grid, std::span<const double> y0,
                                   const IntegratorOptions& options = {});

/**
 * @brief Integrate y' = rhs(t, ctx(t), y) from grid.tf() down to grid.t0() with RK4.
 *
 * `forward_ctx` must be sampled on `grid`; between samples its states (and
 * control, when present) are interpolated linearly. The result is in
 * ascending time order and its last state equals `y_tf` exactly.
 */
[[nodiscard]] Trajectory integrate_backward(const BackwardField& rhs, const TimeGrid& grid,
                                            std::span<const double> y_tf, const Trajectory& forward_ctx,
                                            const IntegratorOptions& options = {});

}  // namespace epivax::ode
