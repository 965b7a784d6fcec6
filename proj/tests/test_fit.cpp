#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "satgrowth/fit.hpp"
#include "satgrowth/growth.hpp"
#include "satgrowth/phase.hpp"
#include "satgrowth/synth.hpp"
#include "satgrowth/timeseries.hpp"

using namespace satgrowth;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

TimeSeries series_from(const SolutionSpec& spec, double t0, double t1, double dt,
                       double sigma = 0.0, std::uint64_t seed = 0) {
  return generate_series(spec, uniform_grid(t0, t1, dt), sigma, seed);
}

double objective_of(const TimeSeries& series, const GrowthParams& p, double c) {
  const SolutionSpec s{p, c};
  double sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double r = std::log(closed_form(s, series.t[i])) - std::log(series.values[i]);
    sum += r * r;
  }
  return sum;
}

}  // namespace

TEST_CASE("time series validation", "[fit]") {
  TimeSeries s;
  s.t = {0.0, 1.0, 1.0};
  s.values = {1.0, 2.0, 3.0};
  REQUIRE_THROWS_AS(s.validate(), DomainError);
  s.t = {0.0, 1.0};
  REQUIRE_THROWS_AS(s.validate(), DomainError);  // length mismatch
  s.values = {1.0, -2.0};
  REQUIRE_THROWS_AS(s.validate(), DomainError);  // non-positive value
  s.label = SeriesLabel::NetEarnings;
  REQUIRE_NOTHROW(s.validate());  // earnings may cross zero
}

TEST_CASE("cumulative series", "[fit]") {
  TimeSeries s;
  s.t = {0.0, 1.0, 2.0};
  s.values = {1.0, 2.0, 3.0};
  s.label = SeriesLabel::AnnualRevenue;

  const TimeSeries c = cumulative(s);
  REQUIRE(c.values == std::vector<double>{1.0, 3.0, 6.0});
  REQUIRE(c.label == SeriesLabel::CumulativeRevenue);
  REQUIRE(c.t == s.t);

  SECTION("geometric series closed form") {
    TimeSeries g;
    const double ratio = 1.17;
    double term = 2.5;
    for (int i = 0; i < 40; ++i) {
      g.t.push_back(i);
      g.values.push_back(term);
      term *= ratio;
    }
    const TimeSeries gc = cumulative(g);
    for (int i = 0; i < 40; ++i) {
      const double expected = 2.5 * (std::pow(ratio, i + 1) - 1.0) / (ratio - 1.0);
      REQUIRE_THAT(gc.values[i], WithinRel(expected, 1e-12));
    }
  }
  SECTION("single point") {
    TimeSeries one;
    one.t = {3.0};
    one.values = {5.0};
    REQUIRE(cumulative(one).values == std::vector<double>{5.0});
  }
  SECTION("already cumulative input is rejected") {
    REQUIRE_THROWS_AS(cumulative(c), DomainError);
    TimeSeries h = s;
    h.label = SeriesLabel::Headcount;
    REQUIRE_THROWS_AS(cumulative(h), DomainError);
  }
  SECTION("empty input is rejected") {
    REQUIRE_THROWS_AS(cumulative(TimeSeries{}), DomainError);
  }
}

TEST_CASE("initial guess", "[fit]") {
  SECTION("recovers the rate of pure exponential data") {
    TimeSeries s;
    for (int i = 0; i < 30; ++i) {
      s.t.push_back(i);
      s.values.push_back(std::exp(0.2 * i));
    }
    const InitialGuess g = initial_guess(s, 1.0);
    REQUIRE_THAT(g.params.lambda, WithinRel(0.2, 0.02));
    REQUIRE_THAT(g.c, WithinRel(1.0, 0.01));
    REQUIRE(g.params.eta > 0.0);
  }
  SECTION("puts saturation above the data for a saturating series") {
    const GrowthParams p{1.0, 0.15, 5e-7};
    const SolutionSpec spec{p, constant_from_initial(p, 15.0, 0.0)};
    const TimeSeries s = series_from(spec, 0.0, 90.0, 1.0);
    REQUIRE(s.values.back() > 0.82 * 2e6);  // the series reaches deep saturation
    const InitialGuess g = initial_guess(s, 1.0);
    REQUIRE_THAT(g.params.eta, WithinRel(5e-7, 0.2));
    const double phi_sat_guess = *saturation_value(g.params);
    for (double v : s.values) REQUIRE(v < phi_sat_guess);
  }
  SECTION("input checks") {
    TimeSeries s;
    s.t = {0.0, 1.0, 2.0};
    s.values = {1.0, 2.0, 3.0};
    REQUIRE_THROWS_AS(initial_guess(s, 1.0), DomainError);  // too short
    s.t.push_back(3.0);
    s.values.push_back(4.0);
    REQUIRE_THROWS_AS(initial_guess(s, 0.0), DomainError);
    REQUIRE_THROWS_AS(initial_guess(s, -1.0), DomainError);
    TimeSeries earnings = s;
    earnings.label = SeriesLabel::NetEarnings;
    earnings.values[2] = -1.0;
    REQUIRE_THROWS_AS(initial_guess(earnings, 1.0), DomainError);
  }
}

TEST_CASE("log-log slope", "[fit]") {
  SECTION("exact power law") {
    std::vector<std::pair<double, double>> pts;
    for (int i = 1; i <= 30; ++i) {
      const double u = 0.01 * i;
      pts.emplace_back(u, 3.0 * u * u);
    }
    const LineFit fit = loglog_slope(pts);
    REQUIRE_THAT(fit.slope, WithinRel(2.0, 1e-12));
    REQUIRE_THAT(fit.intercept, WithinRel(std::log(3.0), 1e-12));
    REQUIRE(fit.r_squared >= 1.0 - 1e-12);
  }
  SECTION("coupled growth trajectories collapse at the predicted exponent") {
    const GrowthParams pr{1.0, 0.15, 5e-7};
    const GrowthParams ph{1.0, 0.09, 2e-6};
    const CoupledLogisticSystem system{pr, ph};
    const SolutionSpec sr{pr, constant_from_initial(pr, 15.0, 0.0)};
    const SolutionSpec sh{ph, constant_from_initial(ph, 300.0, 0.0)};
    std::vector<double> r_values, h_values;
    for (double t = 0.0; t <= 95.0; t += 1.0) {
      r_values.push_back(closed_form(sr, t));
      h_values.push_back(closed_form(sh, t));
    }
    const auto points = power_law_transform(r_values, h_values, system);
    const auto usable = usable_points(points);
    REQUIRE(usable.size() == points.size());  // nothing saturated on this range
    const LineFit fit = loglog_slope(usable);
    REQUIRE_THAT(fit.slope, WithinRel(beta_theoretical(system), 5e-3));
    REQUIRE(fit.r_squared > 0.999);
  }
  SECTION("errors") {
    std::vector<std::pair<double, double>> pts{{1.0, 2.0}};
    REQUIRE_THROWS_AS(loglog_slope(pts), DomainError);
    pts.emplace_back(-1.0, 3.0);
    REQUIRE_THROWS_WITH(loglog_slope(pts), Catch::Matchers::ContainsSubstring("indices 1"));
    pts[1] = {1.0, 4.0};  // duplicate u
    REQUIRE_THROWS_AS(loglog_slope(pts), DomainError);
  }
}

TEST_CASE("analytic fit gradients match finite differences", "[fit]") {
  const GrowthParams p{1.0, 0.15, 5e-7};
  const SolutionSpec spec{p, constant_from_initial(p, 15.0, 0.0)};
  const TimeSeries s = series_from(spec, 0.0, 95.0, 1.0, 0.05, 11);

  std::vector<double> ln_v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) ln_v[i] = std::log(s.values[i]);

  // A deliberately off-target point, alpha free.
  detail::Vec4 theta{std::log(0.2), std::log(8e-7), std::log(10.0), std::log(1.3)};
  const auto base = detail::evaluate_fit(s.t, ln_v, theta, true, 0.0);

  for (std::size_t j = 0; j < 4; ++j) {
    const double h = 1e-7;
    detail::Vec4 plus = theta, minus = theta;
    plus[j] += h;
    minus[j] -= h;
    const auto up = detail::evaluate_fit(s.t, ln_v, plus, true, 0.0);
    const auto down = detail::evaluate_fit(s.t, ln_v, minus, true, 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double fd = (up.residuals[i] - down.residuals[i]) / (2.0 * h);
      REQUIRE_THAT(base.jacobian[i][j], WithinAbs(fd, 1e-6 * std::max(1.0, std::abs(fd))));
    }
  }
}

TEST_CASE("fit recovers parameters from exact data", "[fit]") {
  const GrowthParams p{1.0, 0.15, 5e-7};
  const SolutionSpec spec{p, constant_from_initial(p, 15.0, 0.0)};
  const TimeSeries s = series_from(spec, 0.0, 95.0, 1.0);

  const FitResult fit = fit_logistic(s);
  REQUIRE_THAT(fit.params.lambda, WithinRel(0.15, 1e-3));
  REQUIRE_THAT(fit.params.eta, WithinRel(5e-7, 1e-2));
  REQUIRE(fit.params.alpha == 1.0);
  REQUIRE(fit.alpha_fixed);
  REQUIRE(fit.residual_rms_log < 1e-8);
  REQUIRE(fit.multistart.starts == 16);
  REQUIRE(fit.multistart.converged > 0);
  REQUIRE(fit.residuals_log.size() == s.size());
  REQUIRE_FALSE(fit.flags.eta_weak);
  REQUIRE_FALSE(fit.flags.lambda_c_weak);
}

TEST_CASE("fit recovers parameters from noisy data", "[fit]") {
  const GrowthParams p{1.0, 0.15, 5e-7};
  const SolutionSpec spec{p, constant_from_initial(p, 15.0, 0.0)};
  const TimeSeries s = series_from(spec, 0.0, 95.0, 1.0, 0.01, 7);

  const FitResult fit = fit_logistic(s);
  REQUIRE_THAT(fit.params.lambda, WithinRel(0.15, 0.05));
  REQUIRE_THAT(fit.params.eta, WithinRel(5e-7, 0.15));
  REQUIRE(fit.residual_rms_log < 0.02);
}

TEST_CASE("fit with a free exponent", "[fit]") {
  const GrowthParams p{1.5, 0.12, 4.4194173824159216e-8};  // saturation near 8e4
  const SolutionSpec spec{p, constant_from_initial(p, 10.0, 0.0)};
  const TimeSeries s = series_from(spec, 0.0, 80.0, 1.0);

  FitOptions options;
  options.alpha.reset();
  const FitResult fit = fit_logistic(s, options);
  REQUIRE_FALSE(fit.alpha_fixed);
  REQUIRE_THAT(fit.params.alpha, WithinRel(1.5, 0.02));
  REQUIRE_THAT(fit.params.lambda, WithinRel(0.12, 0.02));
  REQUIRE(fit.residual_rms_log < 1e-6);
}

TEST_CASE("plateau-only data pins eta and flags the rest", "[fit]") {
  TimeSeries s;
  const double plateau = 2e6;
  for (int i = 0; i < 20; ++i) {
    s.t.push_back(i);
    s.values.push_back(plateau * (1.0 + (i % 2 == 0 ? 1e-6 : -1e-6)));
  }
  const FitResult fit = fit_logistic(s);
  REQUIRE_THAT(1.0 / fit.params.eta, WithinRel(plateau, 1e-3));
  REQUIRE(fit.flags.lambda_c_weak);
}

TEST_CASE("fit input validation", "[fit]") {
  const GrowthParams p{1.0, 0.15, 5e-7};
  const SolutionSpec spec{p, constant_from_initial(p, 15.0, 0.0)};

  SECTION("constant series") {
    TimeSeries s;
    for (int i = 0; i < 10; ++i) {
      s.t.push_back(i);
      s.values.push_back(42.0);
    }
    REQUIRE_THROWS_AS(fit_logistic(s), DomainError);
  }
  SECTION("net earnings have no model") {
    TimeSeries s = series_from(spec, 0.0, 20.0, 1.0);
    s.label = SeriesLabel::NetEarnings;
    REQUIRE_THROWS_AS(fit_logistic(s), DomainError);
  }
  SECTION("minimum point counts") {
    TimeSeries s = series_from(spec, 0.0, 2.0, 1.0);
    REQUIRE(s.size() == 3);
    REQUIRE_NOTHROW(fit_logistic(s));
    FitOptions free_alpha;
    free_alpha.alpha.reset();
    REQUIRE_THROWS_AS(fit_logistic(s, free_alpha), DomainError);
    TimeSeries two = series_from(spec, 0.0, 1.0, 1.0);
    REQUIRE_THROWS_AS(fit_logistic(two), DomainError);
  }
  SECTION("alpha must be positive") {
    TimeSeries s = series_from(spec, 0.0, 20.0, 1.0);
    FitOptions options;
    options.alpha = -1.0;
    REQUIRE_THROWS_AS(fit_logistic(s, options), DomainError);
  }
}

TEST_CASE("fit never lands above its starting objective", "[fit]") {
  const GrowthParams p{1.0, 0.15, 5e-7};
  const SolutionSpec spec{p, constant_from_initial(p, 15.0, 0.0)};
  const TimeSeries s = series_from(spec, 0.0, 95.0, 1.0, 0.05, 3);

  const InitialGuess guess = initial_guess(s, 1.0);
  const double at_guess = objective_of(s, guess.params, guess.c);
  const FitResult fit = fit_logistic(s);
  REQUIRE(fit.multistart.best_objective <= at_guess * (1.0 + 1e-12));
}

TEST_CASE("refitting the fitted curve is a fixed point", "[fit]") {
  const GrowthParams p{1.0, 0.15, 5e-7};
  const SolutionSpec spec{p, constant_from_initial(p, 15.0, 0.0)};
  const TimeSeries noisy = series_from(spec, 0.0, 95.0, 1.0, 0.02, 21);

  const FitResult first = fit_logistic(noisy);
  const TimeSeries resampled =
      series_from(SolutionSpec{first.params, first.c}, 0.0, 95.0, 1.0);
  const FitResult second = fit_logistic(resampled);

  REQUIRE_THAT(second.params.lambda, WithinRel(first.params.lambda, 1e-6));
  REQUIRE_THAT(second.params.eta, WithinRel(first.params.eta, 1e-6));
  REQUIRE_THAT(second.c, WithinRel(first.c, 1e-6));
}

TEST_CASE("identical seeds give identical fits", "[fit]") {
  const GrowthParams p{1.0, 0.15, 5e-7};
  const SolutionSpec spec{p, constant_from_initial(p, 15.0, 0.0)};
  const TimeSeries s = series_from(spec, 0.0, 95.0, 1.0, 0.01, 5);

  FitOptions options;
  options.seed = 1234;
  const FitResult a = fit_logistic(s, options);
  const FitResult b = fit_logistic(s, options);
  REQUIRE(a.params.lambda == b.params.lambda);
  REQUIRE(a.params.eta == b.params.eta);
  REQUIRE(a.c == b.c);
  REQUIRE(a.residuals_log == b.residuals_log);
  REQUIRE(a.multistart.best_start == b.multistart.best_start);
  REQUIRE(a.objective_evaluations == b.objective_evaluations);
}

TEST_CASE("fits transform covariantly under a change of units", "[fit]") {
  const GrowthParams p{1.0, 0.15, 5e-7};
  const SolutionSpec spec{p, constant_from_initial(p, 15.0, 0.0)};
  const TimeSeries s = series_from(spec, 0.0, 95.0, 1.0, 0.01, 9);

  TimeSeries scaled = s;
  const double k = 100.0;
  for (double& v : scaled.values) v *= k;

  FitOptions options;
  options.seed = 2;
  const FitResult base = fit_logistic(s, options);
  const FitResult big = fit_logistic(scaled, options);

  REQUIRE_THAT(big.params.lambda, WithinRel(base.params.lambda, 1e-6));
  REQUIRE_THAT(big.params.eta, WithinRel(base.params.eta / k, 1e-6));
  REQUIRE_THAT(big.c, WithinRel(base.c * k, 1e-6));
  REQUIRE_THAT(big.residual_rms_log, WithinAbs(base.residual_rms_log, 1e-6));
}
