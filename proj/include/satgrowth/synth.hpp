#pragma once

// Synthetic observation series from a known solution, optionally with
// multiplicative lognormal noise.  Identical seeds produce identical series
// on every platform.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "satgrowth/errors.hpp"
#include "satgrowth/growth.hpp"
#include "satgrowth/random.hpp"
#include "satgrowth/timeseries.hpp"

namespace satgrowth {

// Samples closed_form on the grid; sigma_log > 0 multiplies each value by
// exp(sigma_log * z) with z standard normal.
inline TimeSeries generate_series(const SolutionSpec& spec, std::span<const double> t_grid,
                                  double sigma_log = 0.0, std::uint64_t seed = 0,
                                  SeriesLabel label = SeriesLabel::Other,
                                  std::string units = {}) {
  if (t_grid.empty()) throw DomainError("generate_series: empty time grid");
  if (!(sigma_log >= 0.0) || !std::isfinite(sigma_log)) {
    throw DomainError("generate_series: sigma_log must be >= 0 and finite");
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!std::isfinite(t_grid[i])) {
      throw DomainError("generate_series: non-finite grid time at index " +
                        std::to_string(i));
    }
    if (i > 0 && t_grid[i] <= t_grid[i - 1]) {
      throw DomainError("generate_series: grid must be strictly increasing (index " +
                        std::to_string(i) + ")");
    }
  }

  TimeSeries series;
  series.t.assign(t_grid.begin(), t_grid.end());
  series.values.resize(t_grid.size());
  series.label = label;
  series.t_origin = spec.t_origin;
  series.units = std::move(units);

  GaussianSampler normal(seed);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    double v = closed_form(spec, t_grid[i]);
    if (sigma_log > 0.0) v *= std::exp(sigma_log * normal());
    series.values[i] = v;
  }
  series.validate();
  return series;
}

// Uniform grid t0, t0 + dt, ... covering every multiple of dt that fits in
// [t0, t1] (with a small tolerance so representable endpoints are kept).
inline std::vector<double> uniform_grid(double t0, double t1, double dt) {
  if (!std::isfinite(t0) || !std::isfinite(t1) || !(dt > 0.0) || !std::isfinite(dt)) {
    throw DomainError("uniform_grid: need finite t0 <= t1 and dt > 0");
  }
  if (t1 < t0) throw DomainError("uniform_grid: t1 must be >= t0");
  const double q = (t1 - t0) / dt;
  const auto steps = static_cast<std::size_t>(std::floor(q * (1.0 + 1e-12) + 1e-9));
  std::vector<double> grid(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) grid[i] = t0 + dt * static_cast<double>(i);
  return grid;
}

}  // namespace satgrowth
