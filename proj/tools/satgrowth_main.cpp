// satgrowth: fit, forecast, and analyze saturating growth curves.
//
// Subcommands read CSV series and flags, print a JSON report to stdout, and
// optionally write tab-separated plot data.  Errors are single-line JSON on
// stderr; exit code 1 for domain/usage errors, 2 for I/O errors.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "satgrowth/satgrowth.hpp"

namespace {

using satgrowth::Json;

void emit_error(const std::string& kind, const std::string& message) {
  const Json payload{{"error", Json{{"kind", kind}, {"message", message}}}};
  std::cerr << payload.dump() << "\n";
}

void print_report(const Json& report) { std::cout << report.dump(2) << "\n"; }

std::vector<double> parse_numbers(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    const std::string field = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    double value = 0.0;
    if (!satgrowth::detail::parse_double(field, value)) {
      throw satgrowth::DomainError(flag + ": cannot parse '" + field + "' as a number");
    }
    out.push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

satgrowth::GrowthParams parse_triple(const std::string& text, const std::string& flag) {
  const std::vector<double> parts = parse_numbers(text, flag);
  if (parts.size() != 3) {
    throw satgrowth::DomainError(flag + " expects three values: alpha,lambda,eta");
  }
  return satgrowth::GrowthParams{parts[0], parts[1], parts[2]};
}

std::optional<double> parse_alpha(const std::string& text) {
  if (text == "free") return std::nullopt;
  double value = 0.0;
  if (!satgrowth::detail::parse_double(text, value)) {
    throw satgrowth::DomainError("--alpha expects a number or 'free', got '" + text +
                                 "'");
  }
  return value;
}

Json params_json(const satgrowth::GrowthParams& p, double c) {
  return Json{{"alpha", p.alpha}, {"lambda", p.lambda}, {"eta", p.eta}, {"c", c}};
}

struct CsvFlags {
  std::string t_column = "t";
  std::string value_column = "value";
  std::optional<double> t_origin;
  satgrowth::SeriesLabel label = satgrowth::SeriesLabel::Other;
  std::string units;
  bool cumulative = false;
};

void add_csv_flags(CLI::App* cmd, CsvFlags& flags) {
  cmd->add_option("--t-column", flags.t_column, "Header name of the time column");
  cmd->add_option("--value-column", flags.value_column,
                  "Header name of the value column");
  cmd->add_option("--t-origin", flags.t_origin,
                  "Calendar year treated as t = 0 (default: first row)");
  cmd->add_option("--label", flags.label, "Role of the series")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, satgrowth::SeriesLabel>{
              {"annual_revenue", satgrowth::SeriesLabel::AnnualRevenue},
              {"cumulative_revenue", satgrowth::SeriesLabel::CumulativeRevenue},
              {"headcount", satgrowth::SeriesLabel::Headcount},
              {"net_earnings", satgrowth::SeriesLabel::NetEarnings},
              {"other", satgrowth::SeriesLabel::Other}},
          CLI::ignore_case));
  cmd->add_option("--units", flags.units, "Unit tag recorded in the series");
  cmd->add_flag("--cumulative", flags.cumulative,
                "Apply the running-sum transform after loading");
}

satgrowth::TimeSeries load_series(const std::string& path, const CsvFlags& flags) {
  satgrowth::CsvOptions options;
  options.t_column = flags.t_column;
  options.value_column = flags.value_column;
  options.t_origin = flags.t_origin;
  options.label = flags.label;
  options.units = flags.units;
  satgrowth::TimeSeries series = satgrowth::load_csv(path, options);
  if (flags.cumulative) series = satgrowth::cumulative(series);
  return series;
}

Json file_inputs(const std::string& path, const satgrowth::TimeSeries& series) {
  return Json{{"file", path},
              {"checksum", satgrowth::file_checksum(path)},
              {"points", series.size()},
              {"label", satgrowth::to_string(series.label)},
              {"t_origin", series.t_origin}};
}

void write_fit_plot(const std::string& path, const satgrowth::TimeSeries& series,
                    const satgrowth::SolutionSpec& spec) {
  const std::vector<std::string> columns = {"t", "observed", "model"};
  std::vector<std::vector<std::optional<double>>> rows;
  rows.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    rows.push_back({series.t_origin + series.t[i], series.values[i],
                    satgrowth::closed_form(spec, series.t[i])});
  }
  satgrowth::write_plot_tsv(path, columns, rows);
}

struct FitFlags {
  std::string file;
  CsvFlags csv;
  std::string alpha_text = "1";
  std::size_t starts = 16;
  std::string plot;
};

void add_fit_flags(CLI::App* cmd, FitFlags& flags, bool file_required) {
  auto* file_opt = cmd->add_option("csv", flags.file, "Input series (CSV)");
  if (file_required) file_opt->required();
  add_csv_flags(cmd, flags.csv);
  cmd->add_option("--alpha", flags.alpha_text,
                  "Exponent: a number to hold fixed, or 'free' to fit it");
  cmd->add_option("--starts", flags.starts, "Number of multistart attempts");
  cmd->add_option("--plot", flags.plot, "Write (t, observed, model) TSV here");
}

struct FittedSeries {
  satgrowth::TimeSeries series;
  satgrowth::FitResult fit;
};

FittedSeries run_fit_common(const FitFlags& flags, std::uint64_t seed) {
  satgrowth::TimeSeries series = load_series(flags.file, flags.csv);
  satgrowth::FitOptions options;
  options.alpha = parse_alpha(flags.alpha_text);
  options.starts = flags.starts;
  options.seed = seed;
  satgrowth::FitResult fit = satgrowth::fit_logistic(series, options);
  if (!flags.plot.empty()) {
    write_fit_plot(flags.plot, series,
                   satgrowth::SolutionSpec{fit.params, fit.c, series.t_origin});
  }
  return FittedSeries{std::move(series), std::move(fit)};
}

int run_fit(const FitFlags& flags, std::uint64_t seed) {
  const FittedSeries fitted = run_fit_common(flags, seed);
  print_report(satgrowth::make_report("fit", file_inputs(flags.file, fitted.series),
                                      satgrowth::fit_result_json(fitted.fit), seed));
  return 0;
}

struct PredictFlags {
  FitFlags fit;
  std::optional<double> lambda;
  std::optional<double> eta;
  std::optional<double> c;
  std::optional<double> phi0;
};

int run_predict(const PredictFlags& flags, std::uint64_t seed) {
  Json result;
  Json inputs;
  if (!flags.fit.file.empty()) {
    const FittedSeries fitted = run_fit_common(flags.fit, seed);
    const satgrowth::SolutionSpec spec{fitted.fit.params, fitted.fit.c,
                                       fitted.series.t_origin};
    result = satgrowth::saturation_json(satgrowth::saturation_report(spec),
                                        satgrowth::equipartition_residual(spec));
    result["fit"] = satgrowth::fit_result_json(fitted.fit);
    inputs = file_inputs(flags.fit.file, fitted.series);
  } else {
    if (!flags.lambda || !flags.eta) {
      throw satgrowth::DomainError(
          "predict needs either a CSV file or explicit --lambda and --eta");
    }
    const std::optional<double> alpha = parse_alpha(flags.fit.alpha_text);
    if (!alpha) {
      throw satgrowth::DomainError("explicit parameters require a numeric --alpha");
    }
    const satgrowth::GrowthParams params{*alpha, *flags.lambda, *flags.eta};
    if (flags.c || flags.phi0) {
      const double c = flags.c ? *flags.c
                               : satgrowth::constant_from_initial(params, *flags.phi0);
      const satgrowth::SolutionSpec spec{params, c};
      result = satgrowth::saturation_json(satgrowth::saturation_report(spec),
                                          satgrowth::equipartition_residual(spec));
      inputs = Json{{"params", params_json(params, c)}};
    } else {
      result = satgrowth::saturation_json(satgrowth::saturation_report(params));
      inputs = Json{{"params", Json{{"alpha", params.alpha},
                                    {"lambda", params.lambda},
                                    {"eta", params.eta}}}};
    }
  }
  print_report(satgrowth::make_report("predict", inputs, result, seed));
  return 0;
}

struct StabilityFlags {
  std::string r_params;
  std::string h_params;
};

int run_stability(const StabilityFlags& flags, std::uint64_t seed) {
  const satgrowth::GrowthParams pr = parse_triple(flags.r_params, "--r-params");
  const satgrowth::GrowthParams ph = parse_triple(flags.h_params, "--h-params");
  const satgrowth::CoupledLogisticSystem system{pr, ph};
  const Json inputs{{"r_params", params_json(pr, 0.0)},
                    {"h_params", params_json(ph, 0.0)}};
  print_report(satgrowth::make_report(
      "stability", inputs, satgrowth::stability_json(satgrowth::stability_report(system)),
      seed));
  return 0;
}

struct PowerlawFlags {
  std::string r_file;
  std::string h_file;
  std::string r_params;
  std::string h_params;
  CsvFlags csv;
  std::string plot;
};

int run_powerlaw(const PowerlawFlags& flags, std::uint64_t seed) {
  const satgrowth::GrowthParams pr = parse_triple(flags.r_params, "--r-params");
  const satgrowth::GrowthParams ph = parse_triple(flags.h_params, "--h-params");
  const satgrowth::CoupledLogisticSystem system{pr, ph};

  const satgrowth::TimeSeries r = load_series(flags.r_file, flags.csv);
  const satgrowth::TimeSeries h = load_series(flags.h_file, flags.csv);
  if (r.size() != h.size()) {
    throw satgrowth::DomainError("the two series have different lengths (" +
                                 std::to_string(r.size()) + " vs " +
                                 std::to_string(h.size()) + ")");
  }
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double tol = 1e-9 * std::max(1.0, std::abs(r.t[i]));
    if (std::abs(r.t[i] - h.t[i]) > tol) {
      throw satgrowth::DomainError("time grids disagree at row " + std::to_string(i));
    }
  }

  const auto points = satgrowth::power_law_transform(r.values, h.values, system);
  const auto usable = satgrowth::usable_points(points);
  const satgrowth::LineFit line = satgrowth::loglog_slope(usable);
  const double beta = satgrowth::beta_theoretical(system);
  std::size_t saturated = 0;
  for (const auto& p : points) {
    if (p.saturated) ++saturated;
  }

  if (!flags.plot.empty()) {
    const std::vector<std::string> columns = {"u", "v", "model_v"};
    std::vector<std::vector<std::optional<double>>> rows;
    rows.reserve(points.size());
    for (const auto& p : points) {
      std::optional<double> model;
      if (!p.saturated) {
        model = std::exp(line.intercept) * std::pow(p.u, line.slope);
      }
      rows.push_back({p.u, p.v, model});
    }
    satgrowth::write_plot_tsv(flags.plot, columns, rows);
  }

  const Json inputs{
      {"r", Json{{"file", flags.r_file},
                 {"checksum", satgrowth::file_checksum(flags.r_file)},
                 {"params", params_json(pr, 0.0)}}},
      {"h", Json{{"file", flags.h_file},
                 {"checksum", satgrowth::file_checksum(flags.h_file)},
                 {"params", params_json(ph, 0.0)}}}};
  const Json result{{"type", "powerlaw_report"},
                    {"points", points.size()},
                    {"usable", usable.size()},
                    {"saturated", saturated},
                    {"line_fit", satgrowth::line_fit_json(line)},
                    {"beta_theoretical", beta},
                    {"slope_relative_error",
                     std::abs(line.slope - beta) / std::abs(beta)}};
  print_report(satgrowth::make_report("powerlaw", inputs, result, seed));
  return 0;
}

struct SimulateFlags {
  std::string params;
  std::string r_params;
  std::string h_params;
  std::string initial;
  double t0 = 0.0;
  double t1 = 0.0;
  std::string method = "rk45";
  double step = 0.01;
  double rtol = 1e-8;
  double atol = 1e-10;
  std::optional<double> sample_every;
  std::string plot;
};

int run_simulate(const SimulateFlags& flags, std::uint64_t seed) {
  const bool scalar = !flags.params.empty();
  const bool coupled = !flags.r_params.empty() || !flags.h_params.empty();
  if (scalar == coupled) {
    throw satgrowth::DomainError(
        "pass either --params (one variable) or --r-params with --h-params (two)");
  }

  satgrowth::AutonomousSystem system;
  Json inputs;
  if (scalar) {
    const satgrowth::GrowthParams p = parse_triple(flags.params, "--params");
    system = satgrowth::scalar_autonomous(p);
    inputs["params"] = params_json(p, 0.0);
  } else {
    if (flags.r_params.empty() || flags.h_params.empty()) {
      throw satgrowth::DomainError("--r-params and --h-params must be given together");
    }
    const satgrowth::GrowthParams pr = parse_triple(flags.r_params, "--r-params");
    const satgrowth::GrowthParams ph = parse_triple(flags.h_params, "--h-params");
    system = satgrowth::planar_autonomous(
        satgrowth::CoupledLogisticSystem{pr, ph});
    inputs["r_params"] = params_json(pr, 0.0);
    inputs["h_params"] = params_json(ph, 0.0);
  }

  const std::vector<double> initial = parse_numbers(flags.initial, "--initial");
  if (initial.size() != system.dimension) {
    throw satgrowth::DomainError("--initial needs " +
                                 std::to_string(system.dimension) + " value(s), got " +
                                 std::to_string(initial.size()));
  }

  satgrowth::IntegrationControl control;
  control.method = flags.method == "rk4" ? satgrowth::StepMethod::FixedRk4
                                         : satgrowth::StepMethod::AdaptiveRk45;
  control.fixed_step = flags.step;
  control.rel_tol = flags.rtol;
  control.abs_tol = flags.atol;
  if (flags.sample_every) {
    control.output_times =
        satgrowth::uniform_grid(flags.t0, flags.t1, *flags.sample_every);
  }

  const satgrowth::Trajectory traj =
      satgrowth::integrate(system, initial, flags.t0, flags.t1, control);

  if (!flags.plot.empty()) {
    std::vector<std::string> columns = {"t", "observed"};
    if (system.dimension == 1) {
      columns.push_back("model");
    } else {
      for (const std::string& label : system.labels) {
        columns.push_back("model:" + label);
      }
    }
    std::vector<std::vector<std::optional<double>>> rows;
    rows.reserve(traj.times.size());
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      std::vector<std::optional<double>> row = {traj.times[i], std::nullopt};
      for (double y : traj.states[i]) row.push_back(y);
      rows.push_back(std::move(row));
    }
    satgrowth::write_plot_tsv(flags.plot, columns, rows);
  }

  inputs["initial"] = initial;
  inputs["t0"] = flags.t0;
  inputs["t1"] = flags.t1;
  inputs["method"] = flags.method;

  const Json result{{"type", "simulation_report"},
                    {"dimension", system.dimension},
                    {"method", flags.method},
                    {"t0", flags.t0},
                    {"t1", flags.t1},
                    {"steps_accepted", traj.step_stats.accepted},
                    {"steps_rejected", traj.step_stats.rejected},
                    {"samples", traj.times.size()},
                    {"final_state", traj.states.back()}};
  print_report(satgrowth::make_report("simulate", inputs, result, seed));
  return 0;
}

struct GenerateFlags {
  double alpha = 1.0;
  std::optional<double> lambda;
  std::optional<double> eta;
  std::optional<double> c;
  std::optional<double> phi0;
  double t0 = 0.0;
  double t1 = 0.0;
  double step = 1.0;
  double sigma_log = 0.0;
  double t_origin = 0.0;
  std::string out;
};

int run_generate(const GenerateFlags& flags, std::uint64_t seed) {
  if (!flags.lambda || !flags.eta) {
    throw satgrowth::DomainError("generate requires --lambda and --eta");
  }
  if (flags.c.has_value() == flags.phi0.has_value()) {
    throw satgrowth::DomainError("generate requires exactly one of --c or --phi0");
  }
  const satgrowth::GrowthParams params{flags.alpha, *flags.lambda, *flags.eta};
  const double c = flags.c ? *flags.c
                           : satgrowth::constant_from_initial(params, *flags.phi0,
                                                              flags.t0);
  const satgrowth::SolutionSpec spec{params, c, flags.t_origin};
  const std::vector<double> grid =
      satgrowth::uniform_grid(flags.t0, flags.t1, flags.step);
  const satgrowth::TimeSeries series =
      satgrowth::generate_series(spec, grid, flags.sigma_log, seed);

  const std::vector<std::string> comments = {
      "generated by satgrowth " + std::string(satgrowth::kVersion),
      "seed " + std::to_string(seed),
      "sigma_log " + satgrowth::detail::format_double(flags.sigma_log),
      "alpha " + satgrowth::detail::format_double(params.alpha) + ", lambda " +
          satgrowth::detail::format_double(params.lambda) + ", eta " +
          satgrowth::detail::format_double(params.eta) + ", c " +
          satgrowth::detail::format_double(c),
  };
  satgrowth::save_csv(flags.out, series, comments);

  const Json inputs{{"t0", flags.t0}, {"t1", flags.t1}, {"step", flags.step}};
  const Json result{{"type", "generation_report"},
                    {"rows", series.size()},
                    {"sigma_log", flags.sigma_log},
                    {"file", flags.out},
                    {"t_origin", flags.t_origin},
                    {"params", params_json(params, c)}};
  print_report(satgrowth::make_report("generate", inputs, result, seed));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Saturating-growth modeling toolkit: calibrate a generalized "
               "logistic law, forecast its ceiling, and analyze the coupled "
               "two-variable dynamics."};
  app.require_subcommand(1);
  app.set_version_flag("--version", satgrowth::kVersion);

  std::uint64_t seed = 0;
  app.add_option("--seed", seed,
                 "Seed for noise and multistart (default: env SATGROWTH_SEED)")
      ->envname("SATGROWTH_SEED");

  FitFlags fit_flags;
  auto* fit_cmd = app.add_subcommand("fit", "Calibrate the growth law to a series");
  fit_cmd->fallthrough();
  add_fit_flags(fit_cmd, fit_flags, true);

  PredictFlags predict_flags;
  auto* predict_cmd = app.add_subcommand(
      "predict", "Report the saturation ceiling and the saturation-onset time");
  predict_cmd->fallthrough();
  add_fit_flags(predict_cmd, predict_flags.fit, false);
  predict_cmd->add_option("--lambda", predict_flags.lambda, "Growth rate");
  predict_cmd->add_option("--eta", predict_flags.eta, "Saturation parameter");
  auto* predict_c = predict_cmd->add_option("--c", predict_flags.c,
                                            "Integration constant");
  predict_cmd->add_option("--phi0", predict_flags.phi0, "Initial value at t = 0")
      ->excludes(predict_c);

  StabilityFlags stability_flags;
  auto* stability_cmd =
      app.add_subcommand("stability", "Classify the equilibrium of the coupled system");
  stability_cmd->fallthrough();
  stability_cmd
      ->add_option("--r-params", stability_flags.r_params, "alpha,lambda,eta for R")
      ->required();
  stability_cmd
      ->add_option("--h-params", stability_flags.h_params, "alpha,lambda,eta for H")
      ->required();

  PowerlawFlags powerlaw_flags;
  auto* powerlaw_cmd = app.add_subcommand(
      "powerlaw", "Check the power-law relation between two transformed series");
  powerlaw_cmd->fallthrough();
  powerlaw_cmd->add_option("r_csv", powerlaw_flags.r_file, "R series (CSV)")->required();
  powerlaw_cmd->add_option("h_csv", powerlaw_flags.h_file, "H series (CSV)")->required();
  powerlaw_cmd
      ->add_option("--r-params", powerlaw_flags.r_params, "alpha,lambda,eta for R")
      ->required();
  powerlaw_cmd
      ->add_option("--h-params", powerlaw_flags.h_params, "alpha,lambda,eta for H")
      ->required();
  add_csv_flags(powerlaw_cmd, powerlaw_flags.csv);
  powerlaw_cmd->add_option("--plot", powerlaw_flags.plot,
                           "Write (u, v, model_v) TSV here");

  SimulateFlags simulate_flags;
  auto* simulate_cmd =
      app.add_subcommand("simulate", "Integrate the growth law forward in time");
  simulate_cmd->fallthrough();
  simulate_cmd->add_option("--params", simulate_flags.params,
                           "alpha,lambda,eta for a single variable");
  simulate_cmd->add_option("--r-params", simulate_flags.r_params,
                           "alpha,lambda,eta for R (with --h-params)");
  simulate_cmd->add_option("--h-params", simulate_flags.h_params,
                           "alpha,lambda,eta for H (with --r-params)");
  simulate_cmd->add_option("--initial", simulate_flags.initial,
                           "Initial state, comma separated")
      ->required();
  simulate_cmd->add_option("--t0", simulate_flags.t0, "Start time");
  simulate_cmd->add_option("--t1", simulate_flags.t1, "End time")->required();
  simulate_cmd->add_option("--method", simulate_flags.method, "Stepper")
      ->check(CLI::IsMember({"rk4", "rk45"}));
  simulate_cmd->add_option("--step", simulate_flags.step, "Fixed step size (rk4)");
  simulate_cmd->add_option("--rtol", simulate_flags.rtol, "Relative tolerance (rk45)");
  simulate_cmd->add_option("--atol", simulate_flags.atol, "Absolute tolerance (rk45)");
  simulate_cmd->add_option("--sample-every", simulate_flags.sample_every,
                           "Emit states on a uniform grid with this spacing");
  simulate_cmd->add_option("--plot", simulate_flags.plot, "Write trajectory TSV here");

  GenerateFlags generate_flags;
  auto* generate_cmd =
      app.add_subcommand("generate", "Write a synthetic series as CSV");
  generate_cmd->fallthrough();
  generate_cmd->add_option("--alpha", generate_flags.alpha, "Exponent");
  generate_cmd->add_option("--lambda", generate_flags.lambda, "Growth rate");
  generate_cmd->add_option("--eta", generate_flags.eta, "Saturation parameter");
  auto* generate_c =
      generate_cmd->add_option("--c", generate_flags.c, "Integration constant");
  generate_cmd
      ->add_option("--phi0", generate_flags.phi0, "Initial value at t = --t0")
      ->excludes(generate_c);
  generate_cmd->add_option("--t0", generate_flags.t0, "First sample time");
  generate_cmd->add_option("--t1", generate_flags.t1, "Last sample time")->required();
  generate_cmd->add_option("--step", generate_flags.step, "Grid spacing");
  generate_cmd->add_option("--sigma-log", generate_flags.sigma_log,
                           "Multiplicative lognormal noise scale");
  generate_cmd->add_option("--t-origin", generate_flags.t_origin,
                           "Calendar year written as t = 0");
  generate_cmd->add_option("--out", generate_flags.out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    return 1;
  }

  try {
    if (*fit_cmd) return run_fit(fit_flags, seed);
    if (*predict_cmd) return run_predict(predict_flags, seed);
    if (*stability_cmd) return run_stability(stability_flags, seed);
    if (*powerlaw_cmd) return run_powerlaw(powerlaw_flags, seed);
    if (*simulate_cmd) return run_simulate(simulate_flags, seed);
    if (*generate_cmd) return run_generate(generate_flags, seed);
    emit_error("usage", "no subcommand selected");
    return 1;
  } catch (const satgrowth::IntegrationError& e) {
    emit_error("domain", e.what());
    return 1;
  } catch (const satgrowth::IoError& e) {
    emit_error("io", e.what());
    return 2;
  } catch (const satgrowth::DomainError& e) {
    emit_error("domain", e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 1;
  }
}
