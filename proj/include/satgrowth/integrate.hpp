#pragma once

// Fixed-step RK4 and adaptive Dormand-Prince 5(4) integration for autonomous
// systems.  The fixed-step path is bitwise deterministic for identical
// inputs; the adaptive path controls the local error against
// atol + rtol * |y| and reports accepted/rejected step counts.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "satgrowth/errors.hpp"

namespace satgrowth {

// dstate must be filled with the time derivative at state.  Autonomous: no
// explicit time dependence.
using RateFunction = std::function<void(std::span<const double>, std::span<double>)>;

struct AutonomousSystem {
  std::size_t dimension = 0;
  RateFunction rate;
  std::vector<std::string> labels;  // per-variable names; empty or size == dimension
};

enum class StepMethod { FixedRk4, AdaptiveRk45 };

struct IntegrationControl {
  StepMethod method = StepMethod::AdaptiveRk45;
  double fixed_step = 0.01;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  // When non-empty: strictly increasing sample times within [t0, t1]; the
  // trajectory is evaluated there (adaptive steps use cubic Hermite
  // interpolation).  When empty: every accepted step is recorded.
  std::vector<double> output_times;
  std::size_t max_steps = 50'000'000;
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;  // states[i] matches times[i]
  StepStats step_stats;
};

// Integration failure tagged with the time at which it occurred.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t)
      : std::runtime_error(what + " (at t = " + std::to_string(t) + ")"), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

namespace detail {

class RateEvaluator {
 public:
  RateEvaluator(const AutonomousSystem& system) : system_(system) {}

  void operator()(double t, const std::vector<double>& y, std::vector<double>& dy) {
    try {
      system_.rate(std::span<const double>(y), std::span<double>(dy));
    } catch (const DomainError& e) {
      throw IntegrationError(std::string("derivative evaluation failed: ") + e.what(), t);
    }
    for (double v : dy) {
      if (!std::isfinite(v)) {
        throw IntegrationError("derivative is not finite", t);
      }
    }
  }

 private:
  const AutonomousSystem& system_;
};

// Cubic Hermite interpolation on [t0, t0 + h] given endpoint values and
// derivatives.  Exact at both endpoints.
inline void hermite_eval(double theta, double h, const std::vector<double>& y0,
                         const std::vector<double>& f0, const std::vector<double>& y1,
                         const std::vector<double>& f1, std::vector<double>& out) {
  const double t2 = theta * theta;
  const double t3 = t2 * theta;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + theta;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  for (std::size_t i = 0; i < y0.size(); ++i) {
    out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
  }
}

inline void validate_integration_inputs(const AutonomousSystem& system,
                                        std::span<const double> initial_state, double t0,
                                        double t1, const IntegrationControl& control) {
  if (system.dimension == 0) throw DomainError("integrate: system dimension must be >= 1");
  if (!system.rate) throw DomainError("integrate: system has no rate function");
  if (!system.labels.empty() && system.labels.size() != system.dimension) {
    throw DomainError("integrate: labels must be empty or match the dimension");
  }
  if (initial_state.size() != system.dimension) {
    throw DomainError("integrate: initial state size does not match the dimension");
  }
  for (double v : initial_state) {
    if (!std::isfinite(v)) throw DomainError("integrate: initial state must be finite");
  }
  if (!std::isfinite(t0) || !std::isfinite(t1) || t1 <= t0) {
    throw DomainError("integrate: need finite t0 < t1");
  }
  if (control.method == StepMethod::FixedRk4 &&
      (!(control.fixed_step > 0.0) || !std::isfinite(control.fixed_step))) {
    throw DomainError("integrate: fixed_step must be positive and finite");
  }
  if (control.method == StepMethod::AdaptiveRk45 &&
      (!(control.rel_tol > 0.0) || !(control.abs_tol > 0.0))) {
    throw DomainError("integrate: tolerances must be positive");
  }
  double prev = -std::numeric_limits<double>::infinity();
  for (double t : control.output_times) {
    if (!std::isfinite(t) || t < t0 || t > t1) {
      throw DomainError("integrate: output times must lie within [t0, t1]");
    }
    if (t <= prev) throw DomainError("integrate: output times must be strictly increasing");
    prev = t;
  }
}

}  // namespace detail

inline Trajectory integrate(const AutonomousSystem& system,
                            std::span<const double> initial_state, double t0, double t1,
                            const IntegrationControl& control = {}) {
  detail::validate_integration_inputs(system, initial_state, t0, t1, control);

  const std::size_t n = system.dimension;
  detail::RateEvaluator rate(system);
  Trajectory traj;

  std::vector<double> y(initial_state.begin(), initial_state.end());
  std::vector<double> y_new(n), f0(n), f1(n), scratch(n), interpolated(n);

  const bool gridded = !control.output_times.empty();
  std::size_t next_output = 0;

  auto record = [&](double t, const std::vector<double>& state) {
    traj.times.push_back(t);
    traj.states.push_back(state);
  };

  // Emit any requested samples inside the step just completed, given
  // endpoint derivatives for Hermite interpolation.  t_hi is the step's
  // logical end time (exactly t1 on the final step), so grid points at the
  // boundary always land on the computed state rather than an interpolant.
  auto emit_through = [&](double t_lo, double t_hi, double h, const std::vector<double>& y_lo,
                          const std::vector<double>& f_lo, const std::vector<double>& y_hi,
                          const std::vector<double>& f_hi) {
    while (next_output < control.output_times.size()) {
      const double t_out = control.output_times[next_output];
      if (t_out > t_hi) break;
      if (t_out == t_hi) {
        record(t_out, y_hi);
      } else {
        const double theta = std::clamp((t_out - t_lo) / h, 0.0, 1.0);
        detail::hermite_eval(theta, h, y_lo, f_lo, y_hi, f_hi, interpolated);
        record(t_out, interpolated);
      }
      ++next_output;
    }
  };

  if (gridded) {
    // Samples exactly at t0 come straight from the initial state.
    while (next_output < control.output_times.size() &&
           control.output_times[next_output] <= t0) {
      record(control.output_times[next_output], y);
      ++next_output;
    }
  } else {
    record(t0, y);
  }

  if (control.method == StepMethod::FixedRk4) {
    const double span = t1 - t0;
    const std::size_t steps = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(span / control.fixed_step - 1e-9)));
    if (steps > control.max_steps) throw DomainError("integrate: step budget exceeded");
    const double h = span / static_cast<double>(steps);

    std::vector<double> k1(n), k2(n), k3(n), k4(n);
    rate(t0, y, k1);
    for (std::size_t s = 0; s < steps; ++s) {
      const double t = t0 + h * static_cast<double>(s);
      for (std::size_t i = 0; i < n; ++i) scratch[i] = y[i] + 0.5 * h * k1[i];
      rate(t, scratch, k2);
      for (std::size_t i = 0; i < n; ++i) scratch[i] = y[i] + 0.5 * h * k2[i];
      rate(t, scratch, k3);
      for (std::size_t i = 0; i < n; ++i) scratch[i] = y[i] + h * k3[i];
      rate(t, scratch, k4);
      for (std::size_t i = 0; i < n; ++i) {
        y_new[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
      const double t_next = (s + 1 == steps) ? t1 : t0 + h * static_cast<double>(s + 1);
      rate(t_next, y_new, f1);  // derivative at the new point; next step's k1
      traj.step_stats.accepted += 1;
      if (gridded) {
        emit_through(t, t_next, h, y, k1, y_new, f1);
      } else {
        record(t_next, y_new);
      }
      y.swap(y_new);
      k1.swap(f1);
    }
    return traj;
  }

  // Dormand-Prince 5(4) with FSAL.
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                          a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                          a65 = -5103.0 / 18656.0;
  static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                          b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
  // Difference between the 5th and embedded 4th order weights.
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);

  double t = t0;
  rate(t, y, k1);

  auto error_scale = [&](std::size_t i) {
    return control.abs_tol +
           control.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
  };

  // Starting step size: probe the derivative magnitude, then refine with one
  // explicit Euler trial (Hairer, Noersett, Wanner II.4).
  double h;
  {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = control.abs_tol + control.rel_tol * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sc);
      d1 = std::max(d1, std::abs(k1[i]) / sc);
    }
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * (d0 / d1);
    h0 = std::min(h0, t1 - t0);
    for (std::size_t i = 0; i < n; ++i) scratch[i] = y[i] + h0 * k1[i];
    rate(t + h0, scratch, f1);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = control.abs_tol + control.rel_tol * std::abs(y[i]);
      d2 = std::max(d2, std::abs(f1[i] - k1[i]) / sc);
    }
    d2 /= h0;
    const double dm = std::max(d1, d2);
    const double h1 = (dm <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                    : std::pow(0.01 / dm, 0.2);
    h = std::min({100.0 * h0, h1, t1 - t0});
  }

  bool previous_rejected = false;
  std::size_t total_steps = 0;

  while (t < t1) {
    if (++total_steps > control.max_steps) {
      throw IntegrationError("integrate: step budget exceeded", t);
    }
    if (!(h > 0.0) || t + h == t) {
      throw IntegrationError("integrate: step size underflow", t);
    }
    h = std::min(h, t1 - t);

    for (std::size_t i = 0; i < n; ++i) scratch[i] = y[i] + h * (a21 * k1[i]);
    rate(t, scratch, k2);
    for (std::size_t i = 0; i < n; ++i)
      scratch[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rate(t, scratch, k3);
    for (std::size_t i = 0; i < n; ++i)
      scratch[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rate(t, scratch, k4);
    for (std::size_t i = 0; i < n; ++i)
      scratch[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rate(t, scratch, k5);
    for (std::size_t i = 0; i < n; ++i)
      scratch[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                               a65 * k5[i]);
    rate(t, scratch, k6);
    for (std::size_t i = 0; i < n; ++i)
      y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rate(t + h, y_new, k7);

    double err_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                            e6 * k6[i] + e7 * k7[i]);
      const double ratio = e / error_scale(i);
      err_sq += ratio * ratio;
    }
    const double err = std::sqrt(err_sq / static_cast<double>(n));

    if (err <= 1.0) {
      const double t_next = (t + h >= t1) ? t1 : t + h;
      traj.step_stats.accepted += 1;
      if (gridded) {
        emit_through(t, t_next, h, y, k1, y_new, k7);
      } else {
        record(t_next, y_new);
      }
      t = t_next;
      y.swap(y_new);
      k1.swap(k7);
      double factor = (err == 0.0) ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (previous_rejected) factor = std::min(factor, 1.0);
      h *= factor;
      previous_rejected = false;
    } else {
      traj.step_stats.rejected += 1;
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
      previous_rejected = true;
    }
  }

  return traj;
}

}  // namespace satgrowth
