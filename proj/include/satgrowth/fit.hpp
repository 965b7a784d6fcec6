#pragma once

// Calibration of the saturating growth law against observed series.
//
// The fit runs damped least squares (Levenberg-Marquardt) on the residuals
// ln(model) - ln(observed) in the log-parameters (ln lambda, ln eta, ln c,
// optionally ln alpha): positivity falls out of the parameterization and the
// objective weights relative errors, which is what a curve spanning several
// decades needs.  Derivatives are analytic.  Deterministic multistart
// perturbs the seed guess; the winner is the converged start with the lowest
// objective (ties break toward the lowest start index).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "satgrowth/errors.hpp"
#include "satgrowth/growth.hpp"
#include "satgrowth/random.hpp"
#include "satgrowth/timeseries.hpp"

namespace satgrowth {

// Ordinary least squares line through (ln u, ln v) points.
struct LineFit {
  double slope;
  double intercept;  // of ln v against ln u
  double r_squared;
};

inline LineFit loglog_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) {
    throw DomainError("loglog_slope: need at least two points");
  }
  std::string bad;
  std::size_t bad_count = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& [u, v] = points[i];
    if (!(u > 0.0) || !(v > 0.0) || !std::isfinite(u) || !std::isfinite(v)) {
      ++bad_count;
      if (bad_count <= 8) {
        if (!bad.empty()) bad += ", ";
        bad += std::to_string(i);
      }
    }
  }
  if (bad_count > 0) {
    if (bad_count > 8) bad += ", +" + std::to_string(bad_count - 8) + " more";
    throw DomainError("loglog_slope: non-positive or non-finite points at indices " + bad);
  }

  const double n = static_cast<double>(points.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (const auto& [u, v] : points) {
    mean_x += std::log(u);
    mean_y += std::log(v);
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [u, v] : points) {
    const double dx = std::log(u) - mean_x;
    const double dy = std::log(v) - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) {
    throw DomainError("loglog_slope: all u values are identical; slope is undefined");
  }
  const double slope = sxy / sxx;
  const double intercept = mean_y - slope * mean_x;
  const double r2 = (syy == 0.0) ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return {slope, intercept, r2};
}

struct InitialGuess {
  GrowthParams params;
  double c;
};

namespace detail {

// Slope of ln(v) over the early part of the series, where growth is still
// near-exponential.
inline double early_log_slope(std::span<const double> t, std::span<const double> v,
                              std::size_t head) {
  double mean_t = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < head; ++i) {
    mean_t += t[i];
    mean_y += std::log(v[i]);
  }
  mean_t /= static_cast<double>(head);
  mean_y /= static_cast<double>(head);
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < head; ++i) {
    const double dt = t[i] - mean_t;
    stt += dt * dt;
    sty += dt * (std::log(v[i]) - mean_y);
  }
  return sty / stt;
}

inline InitialGuess guess_impl(const TimeSeries& series, double alpha) {
  const std::size_t n = series.size();
  const std::size_t head = std::max<std::size_t>(2, n / 3);
  const double slope = early_log_slope(series.t, series.values, head);
  // Decaying or flat starts still need a positive rate for the log
  // parameterization; the optimizer corrects from there.
  const double lambda = std::max(slope, 1e-6);
  const double max_v = *std::max_element(series.values.begin(), series.values.end());
  // Saturation guess just above the largest observation.
  const double eta = 0.9 * detail::checked_pow(max_v, -alpha, "initial_guess: max^(-alpha)");
  const double c = series.values.front() * std::exp(-lambda * series.t.front());
  return {GrowthParams{alpha, lambda, eta}, c};
}

}  // namespace detail

// Closed-form-free starting point for the optimizer: exponential rate from
// the early points, saturation just above the observed maximum, c from the
// first observation with the saturation term neglected.
inline InitialGuess initial_guess(const TimeSeries& series, double alpha = 1.0) {
  series.validate();
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("initial_guess: alpha must be positive and finite");
  }
  if (series.size() < 4) {
    throw DomainError("initial_guess: need at least four points");
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.values[i] <= 0.0) {
      throw DomainError("initial_guess: non-positive value at index " + std::to_string(i));
    }
  }
  return detail::guess_impl(series, alpha);
}

struct FitOptions {
  // Fixed saturation exponent; std::nullopt frees alpha within [0.1, 5].
  std::optional<double> alpha = 1.0;
  std::size_t starts = 16;
  std::uint64_t seed = 0;
  std::size_t max_iterations = 200;
  // Converged when the relative objective decrease drops below this.
  double objective_tolerance = 1e-12;
};

struct MultistartSummary {
  std::size_t starts = 0;
  std::size_t converged = 0;
  std::size_t best_start = 0;
  double best_objective = std::numeric_limits<double>::infinity();
};

// Weak directions of the objective around the optimum, judged from where the
// data sit relative to the fitted saturation value.
struct IdentifiabilityFlags {
  bool eta_weak = false;      // series never reaches half the fitted saturation
  bool lambda_c_weak = false;  // series starts already saturated
};

struct FitResult {
  GrowthParams params;
  double c;
  bool alpha_fixed;
  double residual_rms_log;            // sqrt(mean of squared log residuals)
  std::vector<double> residuals_log;  // ln(model) - ln(observed), per point
  std::size_t objective_evaluations;
  MultistartSummary multistart;
  IdentifiabilityFlags flags;
};

// Optimization failure; carries the best objective seen for diagnosis.
class FitError : public DomainError {
 public:
  FitError(const std::string& what, double best_objective, std::size_t starts)
      : DomainError(what + " (best objective " + std::to_string(best_objective) + " over " +
                    std::to_string(starts) + " starts)"),
        best_objective_(best_objective),
        starts_(starts) {}
  double best_objective() const { return best_objective_; }
  std::size_t starts() const { return starts_; }

 private:
  double best_objective_;
  std::size_t starts_;
};

namespace detail {

constexpr double kLnAlphaMin = -2.302585092994045684;  // ln 0.1
constexpr double kLnAlphaMax = 1.6094379124341003746;  // ln 5

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;

// theta holds (ln lambda, ln eta, ln c[, ln alpha]).
struct FitEval {
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> residuals;
  std::vector<Vec4> jacobian;  // d residual / d theta, one row per point
};

inline FitEval evaluate_fit(std::span<const double> t, std::span<const double> ln_v,
                            const Vec4& theta, bool alpha_free, double alpha_fixed) {
  const std::size_t n = t.size();
  const double lambda = std::exp(theta[0]);
  const double eta = std::exp(theta[1]);
  const double alpha = alpha_free ? std::exp(theta[3]) : alpha_fixed;

  FitEval eval;
  eval.residuals.resize(n);
  eval.jacobian.resize(n, Vec4{});

  double objective = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lt = lambda * t[i];
    // Decaying term c^(-alpha) * exp(-alpha*lambda*t), fused into one exp.
    const double g = std::exp(-alpha * (theta[2] + lt));
    const double b = eta + g;
    const double ln_b = std::log(b);
    const double r = -ln_b / alpha - ln_v[i];
    eval.residuals[i] = r;
    const double gb = g / b;
    eval.jacobian[i][0] = lt * gb;          // d r / d ln lambda
    eval.jacobian[i][1] = -eta / (alpha * b);  // d r / d ln eta
    eval.jacobian[i][2] = gb;               // d r / d ln c
    if (alpha_free) {
      eval.jacobian[i][3] = ln_b / alpha + gb * (theta[2] + lt);
    }
    objective += r * r;
  }
  eval.objective = std::isfinite(objective) ? objective
                                            : std::numeric_limits<double>::infinity();
  return eval;
}

// Gaussian elimination with partial pivoting on the leading m x m block.
inline bool solve_linear(Mat4 a, Vec4 b, std::size_t m, Vec4& x) {
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < m; ++row) {
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    }
    if (std::abs(a[pivot][col]) < 1e-300) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t row = col + 1; row < m; ++row) {
      const double f = a[row][col] / a[col][col];
      for (std::size_t k = col; k < m; ++k) a[row][k] -= f * a[col][k];
      b[row] -= f * b[col];
    }
  }
  x = Vec4{};
  for (std::size_t row = m; row-- > 0;) {
    double s = b[row];
    for (std::size_t k = row + 1; k < m; ++k) s -= a[row][k] * x[k];
    x[row] = s / a[row][row];
    if (!std::isfinite(x[row])) return false;
  }
  return true;
}

struct StartResult {
  Vec4 theta{};
  double objective = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  std::vector<double> residuals;
};

inline StartResult lm_minimize(std::span<const double> t, std::span<const double> ln_v,
                               Vec4 theta, bool alpha_free, double alpha_fixed,
                               const FitOptions& options) {
  const std::size_t m = alpha_free ? 4 : 3;
  StartResult out;

  FitEval current = evaluate_fit(t, ln_v, theta, alpha_free, alpha_fixed);
  out.evaluations = 1;
  if (!std::isfinite(current.objective)) {
    out.theta = theta;
    return out;  // hopeless start
  }

  auto normal_equations = [&](const FitEval& e, Mat4& a, Vec4& g) {
    a = Mat4{};
    g = Vec4{};
    for (std::size_t i = 0; i < e.residuals.size(); ++i) {
      for (std::size_t row = 0; row < m; ++row) {
        g[row] += e.jacobian[i][row] * e.residuals[i];
        for (std::size_t col = row; col < m; ++col) {
          a[row][col] += e.jacobian[i][row] * e.jacobian[i][col];
        }
      }
    }
    for (std::size_t row = 0; row < m; ++row) {
      for (std::size_t col = 0; col < row; ++col) a[row][col] = a[col][row];
    }
  };

  Mat4 a;
  Vec4 g;
  normal_equations(current, a, g);
  double mu = 0.0;
  for (std::size_t j = 0; j < m; ++j) mu = std::max(mu, a[j][j]);
  mu *= 1e-3;
  if (!(mu > 0.0)) mu = 1e-3;

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    out.iterations = iter + 1;

    Mat4 damped = a;
    for (std::size_t j = 0; j < m; ++j) {
      damped[j][j] += mu * std::max(a[j][j], 1e-12);
    }
    Vec4 neg_g;
    for (std::size_t j = 0; j < m; ++j) neg_g[j] = -g[j];
    Vec4 delta;
    const bool solved = solve_linear(damped, neg_g, m, delta);

    bool accepted = false;
    if (solved) {
      Vec4 trial = theta;
      for (std::size_t j = 0; j < m; ++j) trial[j] += delta[j];
      if (alpha_free) trial[3] = std::clamp(trial[3], kLnAlphaMin, kLnAlphaMax);

      FitEval next = evaluate_fit(t, ln_v, trial, alpha_free, alpha_fixed);
      out.evaluations += 1;
      if (next.objective < current.objective) {
        const double decrease =
            (current.objective - next.objective) / std::max(current.objective, 1e-300);
        theta = trial;
        current = std::move(next);
        normal_equations(current, a, g);
        mu = std::max(mu / 3.0, 1e-14);
        accepted = true;
        if (decrease < options.objective_tolerance || current.objective == 0.0) {
          out.converged = true;
          break;
        }
      }
    }
    if (!accepted) {
      mu *= 4.0;
      if (mu > 1e16) {
        // No improving step at any damping: stationary to machine precision.
        out.converged = true;
        break;
      }
    }
  }

  out.theta = theta;
  out.objective = current.objective;
  out.residuals = std::move(current.residuals);
  return out;
}

}  // namespace detail

inline FitResult fit_logistic(const TimeSeries& series, const FitOptions& options = {}) {
  series.validate();
  if (series.label == SeriesLabel::NetEarnings) {
    throw DomainError("fit_logistic: no growth model describes net earnings series");
  }
  const std::size_t n = series.size();
  const bool alpha_free = !options.alpha.has_value();
  const std::size_t min_points = alpha_free ? 4 : 3;
  if (n < min_points) {
    throw DomainError("fit_logistic: need at least " + std::to_string(min_points) +
                      " points for " + std::to_string(min_points) + " free parameters");
  }
  const double alpha0 = options.alpha.value_or(1.0);
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) {
    throw DomainError("fit_logistic: alpha must be positive and finite");
  }
  if (alpha_free && (alpha0 < 0.1 || alpha0 > 5.0)) {
    throw DomainError("fit_logistic: free alpha is constrained to [0.1, 5]");
  }
  const auto [min_it, max_it] =
      std::minmax_element(series.values.begin(), series.values.end());
  if (*min_it == *max_it) {
    throw DomainError("fit_logistic: constant series; growth parameters are undefined");
  }
  if (options.starts == 0) throw DomainError("fit_logistic: need at least one start");

  const InitialGuess guess = detail::guess_impl(series, alpha0);

  std::vector<double> ln_v(n);
  for (std::size_t i = 0; i < n; ++i) ln_v[i] = std::log(series.values[i]);

  detail::Vec4 theta_base{std::log(guess.params.lambda), std::log(guess.params.eta),
                          std::log(guess.c), std::log(alpha0)};

  std::vector<detail::StartResult> results;
  results.reserve(options.starts);
  std::size_t total_evaluations = 0;
  for (std::size_t k = 0; k < options.starts; ++k) {
    detail::Vec4 theta = theta_base;
    if (k > 0) {
      GaussianSampler normal(mix_seed(options.seed, k));
      theta[0] += 0.5 * normal();
      theta[1] += 0.5 * normal();
      theta[2] += 0.5 * normal();
      if (alpha_free) {
        theta[3] = std::clamp(theta[3] + 0.3 * normal(), detail::kLnAlphaMin,
                              detail::kLnAlphaMax);
      }
    }
    results.push_back(
        detail::lm_minimize(series.t, ln_v, theta, alpha_free, alpha0, options));
    total_evaluations += results.back().evaluations;
  }

  std::size_t best = options.starts;
  std::size_t converged_count = 0;
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (!results[k].converged) continue;
    ++converged_count;
    if (best == options.starts || results[k].objective < results[best].objective) {
      best = k;
    }
  }
  if (best == options.starts) {
    double best_seen = std::numeric_limits<double>::infinity();
    for (const auto& r : results) best_seen = std::min(best_seen, r.objective);
    throw FitError("fit_logistic: no start converged", best_seen, options.starts);
  }

  const detail::StartResult& winner = results[best];
  const double alpha_star = alpha_free ? std::exp(winner.theta[3]) : alpha0;
  GrowthParams params{alpha_star, std::exp(winner.theta[0]), std::exp(winner.theta[1])};
  const double c = std::exp(winner.theta[2]);

  IdentifiabilityFlags flags;
  const std::optional<double> phi_sat = saturation_value(params);
  if (phi_sat) {
    flags.eta_weak = *max_it < 0.5 * *phi_sat;
    flags.lambda_c_weak = series.values.front() > 0.9 * *phi_sat;
  } else {
    flags.eta_weak = true;
  }

  return FitResult{params,
                   c,
                   !alpha_free,
                   std::sqrt(winner.objective / static_cast<double>(n)),
                   winner.residuals,
                   total_evaluations,
                   MultistartSummary{options.starts, converged_count, best,
                                     winner.objective},
                   flags};
}

}  // namespace satgrowth
