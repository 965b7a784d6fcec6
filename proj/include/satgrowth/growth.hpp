#pragma once

// Saturating growth law
//
//   dphi/dt = lambda * phi * (1 - eta * phi^alpha)
//
// and its closed-form solution
//
//   phi(t) = [ eta + c^(-alpha) * exp(-alpha * lambda * t) ]^(-1/alpha).
//
// For lambda > 0, eta > 0 the solution grows from near-exponential behaviour
// into a plateau at phi_sat = eta^(-1/alpha).  The crossover happens around
// the nonlinear timescale t_nl, where the two bracket terms are equal.
// alpha = 1 recovers the classic Verhulst logistic curve.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "satgrowth/errors.hpp"

namespace satgrowth {

namespace detail {

inline bool is_integral_value(double x) {
  return std::isfinite(x) && x == std::trunc(x);
}

inline bool is_odd_integral_value(double x) {
  return is_integral_value(x) && std::fmod(std::abs(x), 2.0) == 1.0;
}

// base^exponent restricted to real results.  Exact fast paths keep the
// common exponents free of libm rounding.
inline double checked_pow(double base, double exponent, const char* context) {
  if (exponent == 1.0) return base;
  if (exponent == 2.0) return base * base;
  if (exponent == -1.0) return 1.0 / base;
  if (base < 0.0 && !is_integral_value(exponent)) {
    throw DomainError(std::string(context) +
                      ": negative base with non-integer exponent has no real value");
  }
  return std::pow(base, exponent);
}

}  // namespace detail

// Parameters of the growth law.  eta has units of value^(-alpha); lambda of
// 1/time.  eta = 0 switches off saturation entirely.
struct GrowthParams {
  double alpha;
  double lambda;
  double eta;

  GrowthParams(double alpha_, double lambda_, double eta_)
      : alpha(alpha_), lambda(lambda_), eta(eta_) {
    if (!std::isfinite(alpha) || !std::isfinite(lambda) || !std::isfinite(eta)) {
      throw DomainError("GrowthParams: alpha, lambda, eta must be finite");
    }
    if (alpha == 0.0) throw DomainError("GrowthParams: alpha must be nonzero");
    if (eta < 0.0) throw DomainError("GrowthParams: eta must be >= 0");
  }
};

// Non-fatal interpretation caveats, suitable for verbatim display.
inline std::vector<std::string> parameter_warnings(const GrowthParams& p) {
  std::vector<std::string> w;
  if (p.alpha < 0.0) {
    w.push_back("alpha < 0: accepted, but the saturation interpretation assumes alpha > 0");
  }
  if (p.lambda <= 0.0) {
    w.push_back("lambda <= 0: no growth; saturation timescales are undefined or negative");
  }
  return w;
}

// A particular solution: parameters plus the integration constant c fixed by
// an initial condition.  c < 0 selects the branch that starts above the
// saturation value (only real for odd integer alpha); c = +infinity marks the
// degenerate solution pinned exactly at saturation.  t_origin records which
// calendar year t = 0 refers to; it does not affect the dynamics.
struct SolutionSpec {
  GrowthParams params;
  double c;
  double t_origin;

  explicit SolutionSpec(GrowthParams params_, double c_, double t_origin_ = 0.0)
      : params(params_), c(c_), t_origin(t_origin_) {
    if (std::isnan(c) || c == 0.0) {
      throw DomainError("SolutionSpec: c must be nonzero and not NaN");
    }
    if (!std::isfinite(t_origin)) {
      throw DomainError("SolutionSpec: t_origin must be finite");
    }
  }
};

// Right-hand side of the growth law at a given level.
inline double growth_rate(const GrowthParams& p, double phi) {
  if (!std::isfinite(phi)) throw DomainError("growth_rate: phi must be finite");
  const double phi_alpha = detail::checked_pow(phi, p.alpha, "growth_rate: phi^alpha");
  const double rate = p.lambda * phi * (1.0 - p.eta * phi_alpha);
  if (std::isnan(rate)) {
    throw DomainError("growth_rate: rate is undefined here (phi^alpha diverges)");
  }
  return rate;
}

// The two bracket terms of the closed form at time t: the constant
// saturation term eta and the decaying exponential term.  They are equal in
// magnitude at the nonlinear timescale.
struct BracketTerms {
  double saturation_term;
  double exponential_term;
};

inline BracketTerms bracket_terms(const SolutionSpec& s, double t) {
  if (!std::isfinite(t)) throw DomainError("bracket_terms: t must be finite");
  const GrowthParams& p = s.params;
  const double c_pow = detail::checked_pow(s.c, -p.alpha, "bracket_terms: c^(-alpha)");
  return {p.eta, c_pow * std::exp(-p.alpha * p.lambda * t)};
}

// Closed-form solution value at time t (measured from t_origin).
inline double closed_form(const SolutionSpec& s, double t) {
  if (!std::isfinite(t)) throw DomainError("closed_form: t must be finite");
  const GrowthParams& p = s.params;
  if (p.eta == 0.0) {
    // Pure exponential limit.
    return s.c * std::exp(p.lambda * t);
  }
  const BracketTerms terms = bracket_terms(s, t);
  const double bracket = terms.saturation_term + terms.exponential_term;
  if (std::isnan(bracket)) {
    throw DomainError("closed_form: bracket is undefined (exponential term overflows)");
  }
  if (bracket <= 0.0) {
    throw DomainError(
        "closed_form: bracket term eta + c^(-alpha)*exp(-alpha*lambda*t) is "
        "not positive; the solution is singular at this time");
  }
  return detail::checked_pow(bracket, -1.0 / p.alpha, "closed_form: bracket^(-1/alpha)");
}

// Integration constant from the initial condition phi(t0) = phi0.
// Returns +infinity when phi0 sits exactly at the saturation value (the
// constant solution).  phi0 above saturation needs c < 0, which is only real
// for odd integer alpha.
inline double constant_from_initial(const GrowthParams& p, double phi0, double t0 = 0.0) {
  if (!std::isfinite(phi0) || !std::isfinite(t0)) {
    throw DomainError("constant_from_initial: phi0 and t0 must be finite");
  }
  if (phi0 <= 0.0) throw DomainError("constant_from_initial: phi0 must be > 0");
  const double phi_pow =
      detail::checked_pow(phi0, -p.alpha, "constant_from_initial: phi0^(-alpha)");
  const double k = (phi_pow - p.eta) * std::exp(p.alpha * p.lambda * t0);
  if (std::isnan(k) || std::isinf(k)) {
    throw DomainError("constant_from_initial: c^(-alpha) is not finite");
  }
  if (k == 0.0) return std::numeric_limits<double>::infinity();
  if (k > 0.0) {
    return detail::checked_pow(k, -1.0 / p.alpha, "constant_from_initial: k^(-1/alpha)");
  }
  // phi0 above saturation: c^(-alpha) < 0.
  if (detail::is_odd_integral_value(p.alpha)) {
    return -detail::checked_pow(-k, -1.0 / p.alpha, "constant_from_initial: |k|^(-1/alpha)");
  }
  throw DomainError(
      "constant_from_initial: phi0 above the saturation value has no real "
      "integration constant unless alpha is an odd integer");
}

// Saturation value eta^(-1/alpha); empty when eta = 0 (unbounded growth).
inline std::optional<double> saturation_value(const GrowthParams& p) {
  if (p.eta == 0.0) return std::nullopt;
  return detail::checked_pow(p.eta, -1.0 / p.alpha, "saturation_value: eta^(-1/alpha)");
}

// Nonlinear timescale: the time at which both bracket terms have equal
// magnitude, t_nl = -ln|eta * c^alpha| / (alpha * lambda).  Empty when
// eta = 0 (growth never saturates).
inline std::optional<double> nonlinear_timescale(const SolutionSpec& s) {
  const GrowthParams& p = s.params;
  if (p.eta == 0.0) return std::nullopt;
  if (p.lambda == 0.0) {
    throw DomainError("nonlinear_timescale: lambda = 0 has no growth timescale");
  }
  const double c_pow =
      detail::checked_pow(std::abs(s.c), p.alpha, "nonlinear_timescale: |c|^alpha");
  const double m = p.eta * c_pow;
  if (m == 0.0) {
    throw DomainError("nonlinear_timescale: eta * c^alpha vanishes; timescale undefined");
  }
  if (!std::isfinite(m)) {
    throw DomainError("nonlinear_timescale: eta * c^alpha is not finite");
  }
  return -std::log(m) / (p.alpha * p.lambda);
}

// How far the solution at t_nl is from exact equipartition of the bracket,
// as a fraction of the saturation term.  Zero up to rounding for any spec
// with a defined timescale.
inline std::optional<double> equipartition_residual(const SolutionSpec& s) {
  const std::optional<double> t_nl = nonlinear_timescale(s);
  if (!t_nl) return std::nullopt;
  const BracketTerms terms = bracket_terms(s, *t_nl);
  return std::abs(std::abs(terms.exponential_term) - terms.saturation_term) /
         terms.saturation_term;
}

// Saturation value and crossover time for one solution.  Empty fields mean
// the quantity does not exist (unbounded growth).
struct SaturationReport {
  std::optional<double> phi_sat;
  std::optional<double> t_nl;
};

inline SaturationReport saturation_report(const SolutionSpec& s) {
  return {saturation_value(s.params), nonlinear_timescale(s)};
}

// Parameters-only variant: no integration constant, so no timescale.
inline SaturationReport saturation_report(const GrowthParams& p) {
  return {saturation_value(p), std::nullopt};
}

}  // namespace satgrowth
