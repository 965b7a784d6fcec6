#pragma once

// Machine-readable run reports.  Every command emits one JSON document with
// the same top-level shape:
//
//   { "tool_version": ..., "command": ..., "inputs": ..., "result": ...,
//     "seed": ... }
//
// result.type discriminates the payload.  validate_report checks a document
// against the published structure (schemas/report.schema.json mirrors it)
// and returns a list of problems, empty when the document conforms.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "satgrowth/fit.hpp"
#include "satgrowth/growth.hpp"
#include "satgrowth/phase.hpp"
#include "satgrowth/version.hpp"

namespace satgrowth {

using Json = nlohmann::json;

inline Json to_json(std::optional<double> v) {
  if (!v) return nullptr;
  return *v;
}

inline Json to_json(std::complex<double> z) {
  return Json{{"re", z.real()}, {"im", z.imag()}};
}

inline Json fit_result_json(const FitResult& fit) {
  std::vector<std::string> warnings = parameter_warnings(fit.params);
  if (fit.flags.eta_weak) {
    warnings.push_back(
        "eta weakly identified: the series stays below half the fitted saturation value");
  }
  if (fit.flags.lambda_c_weak) {
    warnings.push_back(
        "lambda and c weakly identified: the series starts near the fitted saturation value");
  }
  return Json{{"type", "fit_result"},
              {"alpha", fit.params.alpha},
              {"lambda", fit.params.lambda},
              {"eta", fit.params.eta},
              {"c", fit.c},
              {"alpha_fixed", fit.alpha_fixed},
              {"residual_rms_log", fit.residual_rms_log},
              {"objective_evaluations", fit.objective_evaluations},
              {"multistart",
               Json{{"starts", fit.multistart.starts},
                    {"converged", fit.multistart.converged},
                    {"best_start", fit.multistart.best_start},
                    {"best_objective", fit.multistart.best_objective}}},
              {"identifiability",
               Json{{"eta_weak", fit.flags.eta_weak},
                    {"lambda_c_weak", fit.flags.lambda_c_weak}}},
              {"warnings", warnings}};
}

inline Json saturation_json(const SaturationReport& report,
                            std::optional<double> equipartition = std::nullopt) {
  return Json{{"type", "saturation_report"},
              {"phi_sat", to_json(report.phi_sat)},
              {"t_nl", to_json(report.t_nl)},
              {"equipartition_residual", to_json(equipartition)}};
}

inline Json stability_json(const StabilityReport& report) {
  return Json{{"type", "stability_report"},
              {"equilibrium", Json{{"r", report.equilibrium.r}, {"h", report.equilibrium.h}}},
              {"jacobian", Json{{"a", report.coeffs.a},
                                {"b", report.coeffs.b},
                                {"c", report.coeffs.c},
                                {"d", report.coeffs.d}}},
              {"omega", Json::array({to_json(report.omega[0]), to_json(report.omega[1])})},
              {"classification", to_string(report.classification)}};
}

inline Json line_fit_json(const LineFit& fit) {
  return Json{{"slope", fit.slope}, {"intercept", fit.intercept},
              {"r_squared", fit.r_squared}};
}

inline Json make_report(const std::string& command, Json inputs, Json result,
                        std::uint64_t seed) {
  return Json{{"tool_version", kVersion},
              {"command", command},
              {"inputs", std::move(inputs)},
              {"result", std::move(result)},
              {"seed", seed}};
}

namespace detail {

inline bool is_number(const Json& j) { return j.is_number(); }
inline bool is_count(const Json& j) {
  return j.is_number_integer() && (j.is_number_unsigned() || j.get<std::int64_t>() >= 0);
}

struct ReportChecker {
  std::vector<std::string> problems;

  void complain(const std::string& path, const std::string& what) {
    problems.push_back(path + ": " + what);
  }

  const Json* want(const Json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) {
      complain(path + "." + key, "missing");
      return nullptr;
    }
    return &obj.at(key);
  }

  void want_number(const Json& obj, const std::string& path, const std::string& key,
                   bool nullable = false) {
    if (const Json* j = want(obj, path, key)) {
      if (nullable && j->is_null()) return;
      if (!is_number(*j)) complain(path + "." + key, "must be a number");
    }
  }

  void want_count(const Json& obj, const std::string& path, const std::string& key) {
    if (const Json* j = want(obj, path, key)) {
      if (!is_count(*j)) complain(path + "." + key, "must be a non-negative integer");
    }
  }

  void want_bool(const Json& obj, const std::string& path, const std::string& key) {
    if (const Json* j = want(obj, path, key)) {
      if (!j->is_boolean()) complain(path + "." + key, "must be a boolean");
    }
  }

  const Json* want_object(const Json& obj, const std::string& path, const std::string& key) {
    if (const Json* j = want(obj, path, key)) {
      if (j->is_object()) return j;
      complain(path + "." + key, "must be an object");
    }
    return nullptr;
  }

  void want_string(const Json& obj, const std::string& path, const std::string& key) {
    if (const Json* j = want(obj, path, key)) {
      if (!j->is_string()) complain(path + "." + key, "must be a string");
    }
  }

  void check_warnings(const Json& obj, const std::string& path) {
    if (!obj.contains("warnings")) return;
    const Json& w = obj.at("warnings");
    if (!w.is_array()) {
      complain(path + ".warnings", "must be an array");
      return;
    }
    for (const Json& item : w) {
      if (!item.is_string()) {
        complain(path + ".warnings", "entries must be strings");
        break;
      }
    }
  }

  void check_fit_result(const Json& r, const std::string& path) {
    for (const char* key : {"alpha", "lambda", "eta", "c", "residual_rms_log"}) {
      want_number(r, path, key);
    }
    want_bool(r, path, "alpha_fixed");
    want_count(r, path, "objective_evaluations");
    if (const Json* ms = want_object(r, path, "multistart")) {
      want_count(*ms, path + ".multistart", "starts");
      want_count(*ms, path + ".multistart", "converged");
      want_count(*ms, path + ".multistart", "best_start");
      want_number(*ms, path + ".multistart", "best_objective");
    }
    if (const Json* fl = want_object(r, path, "identifiability")) {
      want_bool(*fl, path + ".identifiability", "eta_weak");
      want_bool(*fl, path + ".identifiability", "lambda_c_weak");
    }
    check_warnings(r, path);
  }

  void check_saturation(const Json& r, const std::string& path) {
    want_number(r, path, "phi_sat", true);
    want_number(r, path, "t_nl", true);
    want_number(r, path, "equipartition_residual", true);
    if (r.contains("fit")) {
      if (r.at("fit").is_object()) {
        check_fit_result(r.at("fit"), path + ".fit");
      } else {
        complain(path + ".fit", "must be an object");
      }
    }
    check_warnings(r, path);
  }

  void check_stability(const Json& r, const std::string& path) {
    if (const Json* eq = want_object(r, path, "equilibrium")) {
      want_number(*eq, path + ".equilibrium", "r");
      want_number(*eq, path + ".equilibrium", "h");
    }
    if (const Json* jc = want_object(r, path, "jacobian")) {
      for (const char* key : {"a", "b", "c", "d"}) want_number(*jc, path + ".jacobian", key);
    }
    if (const Json* om = want(r, path, "omega")) {
      if (!om->is_array() || om->size() != 2) {
        complain(path + ".omega", "must be an array of two complex numbers");
      } else {
        for (const Json& z : *om) {
          if (!z.is_object() || !z.contains("re") || !z.contains("im") ||
              !is_number(z.at("re")) || !is_number(z.at("im"))) {
            complain(path + ".omega", "entries must be {re, im} objects");
            break;
          }
        }
      }
    }
    if (const Json* cl = want(r, path, "classification")) {
      static const char* names[] = {"stable node",   "unstable node", "saddle",
                                    "stable focus",  "unstable focus", "center",
                                    "degenerate"};
      bool ok = cl->is_string();
      if (ok) {
        ok = false;
        for (const char* n : names) {
          if (cl->get<std::string>() == n) ok = true;
        }
      }
      if (!ok) complain(path + ".classification", "must name a known equilibrium type");
    }
    check_warnings(r, path);
  }

  void check_powerlaw(const Json& r, const std::string& path) {
    want_count(r, path, "points");
    want_count(r, path, "usable");
    want_count(r, path, "saturated");
    if (const Json* lf = want_object(r, path, "line_fit")) {
      want_number(*lf, path + ".line_fit", "slope");
      want_number(*lf, path + ".line_fit", "intercept");
      want_number(*lf, path + ".line_fit", "r_squared");
    }
    want_number(r, path, "beta_theoretical");
    want_number(r, path, "slope_relative_error");
    check_warnings(r, path);
  }

  void check_simulation(const Json& r, const std::string& path) {
    want_count(r, path, "dimension");
    want_string(r, path, "method");
    want_number(r, path, "t0");
    want_number(r, path, "t1");
    want_count(r, path, "steps_accepted");
    want_count(r, path, "steps_rejected");
    want_count(r, path, "samples");
    if (const Json* fs = want(r, path, "final_state")) {
      if (!fs->is_array() || fs->empty()) {
        complain(path + ".final_state", "must be a non-empty array of numbers");
      } else {
        for (const Json& v : *fs) {
          if (!is_number(v)) {
            complain(path + ".final_state", "entries must be numbers");
            break;
          }
        }
      }
    }
    check_warnings(r, path);
  }

  void check_generation(const Json& r, const std::string& path) {
    want_count(r, path, "rows");
    want_number(r, path, "sigma_log");
    want_string(r, path, "file");
    want_number(r, path, "t_origin");
    if (const Json* pp = want_object(r, path, "params")) {
      for (const char* key : {"alpha", "lambda", "eta", "c"}) {
        want_number(*pp, path + ".params", key);
      }
    }
    check_warnings(r, path);
  }
};

}  // namespace detail

inline std::vector<std::string> validate_report(const Json& report) {
  detail::ReportChecker checker;
  if (!report.is_object()) {
    checker.complain("$", "report must be a JSON object");
    return checker.problems;
  }
  checker.want_string(report, "$", "tool_version");
  checker.want_string(report, "$", "command");
  checker.want_object(report, "$", "inputs");
  if (const Json* seed = checker.want(report, "$", "seed")) {
    if (!detail::is_count(*seed)) checker.complain("$.seed", "must be a non-negative integer");
  }

  static const std::pair<const char*, const char*> kCommandToType[] = {
      {"fit", "fit_result"},          {"predict", "saturation_report"},
      {"stability", "stability_report"}, {"powerlaw", "powerlaw_report"},
      {"simulate", "simulation_report"}, {"generate", "generation_report"},
  };

  std::string command;
  if (report.contains("command") && report.at("command").is_string()) {
    command = report.at("command").get<std::string>();
    bool known = false;
    for (const auto& [cmd, type] : kCommandToType) {
      if (command == cmd) known = true;
    }
    if (!known) checker.complain("$.command", "unknown command '" + command + "'");
  }

  const Json* result = checker.want_object(report, "$", "result");
  if (!result) return checker.problems;

  std::string type;
  if (const Json* t = checker.want(*result, "$.result", "type")) {
    if (t->is_string()) {
      type = t->get<std::string>();
    } else {
      checker.complain("$.result.type", "must be a string");
    }
  }
  if (!command.empty() && !type.empty()) {
    for (const auto& [cmd, expected] : kCommandToType) {
      if (command == cmd && type != expected) {
        checker.complain("$.result.type", "command '" + command + "' must produce '" +
                                              std::string(expected) + "', got '" + type + "'");
      }
    }
  }

  if (type == "fit_result") {
    checker.check_fit_result(*result, "$.result");
  } else if (type == "saturation_report") {
    checker.check_saturation(*result, "$.result");
  } else if (type == "stability_report") {
    checker.check_stability(*result, "$.result");
  } else if (type == "powerlaw_report") {
    checker.check_powerlaw(*result, "$.result");
  } else if (type == "simulation_report") {
    checker.check_simulation(*result, "$.result");
  } else if (type == "generation_report") {
    checker.check_generation(*result, "$.result");
  } else if (!type.empty()) {
    checker.complain("$.result.type", "unknown result type '" + type + "'");
  }

  return checker.problems;
}

}  // namespace satgrowth
