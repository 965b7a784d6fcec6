#pragma once

// Phase-plane view of two growth variables R (revenue rate) and H
// (headcount) evolving under their own saturating growth laws:
//
//   dR/dt = rho(R, H),   dH/dt = sigma(R, H).
//
// The concrete system here is uncoupled (rho depends only on R, sigma only
// on H), which makes the equilibrium, Jacobian, and eigenstructure explicit
// and collapses the trajectories onto a power law v = kappa * u^beta in the
// transformed coordinates u, v.  The generic interface is a concept, so a
// genuinely coupled rho/sigma drops into the same integration entry point.

#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "satgrowth/errors.hpp"
#include "satgrowth/growth.hpp"
#include "satgrowth/integrate.hpp"

namespace satgrowth {

template <typename S>
concept PlanarGrowthSystem = requires(const S& s, double r, double h) {
  { s.rho(r, h) } -> std::convertible_to<double>;
  { s.sigma(r, h) } -> std::convertible_to<double>;
};

// Two saturating growth laws side by side, each variable blind to the other.
class CoupledLogisticSystem {
 public:
  CoupledLogisticSystem(GrowthParams revenue, GrowthParams headcount)
      : revenue_(revenue), headcount_(headcount) {}

  const GrowthParams& revenue_params() const { return revenue_; }
  const GrowthParams& headcount_params() const { return headcount_; }

  double rho(double r, double /*h*/) const { return growth_rate(revenue_, r); }
  double sigma(double /*r*/, double h) const { return growth_rate(headcount_, h); }

 private:
  GrowthParams revenue_;
  GrowthParams headcount_;
};

// Adapter into the generic integrator; state layout is (R, H).
template <PlanarGrowthSystem S>
AutonomousSystem planar_autonomous(const S& system) {
  return AutonomousSystem{
      2,
      [system](std::span<const double> y, std::span<double> dy) {
        dy[0] = system.rho(y[0], y[1]);
        dy[1] = system.sigma(y[0], y[1]);
      },
      {"R", "H"}};
}

// One growth law as a 1-D autonomous system.
inline AutonomousSystem scalar_autonomous(const GrowthParams& params,
                                          std::string label = "phi") {
  return AutonomousSystem{1,
                          [params](std::span<const double> y, std::span<double> dy) {
                            dy[0] = growth_rate(params, y[0]);
                          },
                          {std::move(label)}};
}

struct PhasePoint {
  double r;
  double h;
};

// The nontrivial fixed point (both variables at saturation); empty if either
// law is unbounded.
inline std::optional<PhasePoint> equilibrium(const CoupledLogisticSystem& system) {
  const std::optional<double> r0 = saturation_value(system.revenue_params());
  const std::optional<double> h0 = saturation_value(system.headcount_params());
  if (!r0 || !h0) return std::nullopt;
  return PhasePoint{*r0, *h0};
}

// Jacobian of (rho, sigma) at a point, row-major:
//   [ a  b ]   a = d rho/dR,   b = d rho/dH
//   [ c  d ]   c = d sigma/dR, d = d sigma/dH
// The off-diagonal entries vanish identically for the uncoupled system.
struct JacobianCoeffs {
  double a;
  double b;
  double c;
  double d;
};

inline JacobianCoeffs jacobian(const CoupledLogisticSystem& system, PhasePoint at) {
  if (!std::isfinite(at.r) || !std::isfinite(at.h)) {
    throw DomainError("jacobian: evaluation point must be finite");
  }
  const GrowthParams& pr = system.revenue_params();
  const GrowthParams& ph = system.headcount_params();
  // d/dphi [lambda phi (1 - eta phi^alpha)] = lambda (1 - eta (1+alpha) phi^alpha)
  const double ra = detail::checked_pow(at.r, pr.alpha, "jacobian: R^alpha");
  const double hd = detail::checked_pow(at.h, ph.alpha, "jacobian: H^alpha");
  const double a = pr.lambda * (1.0 - pr.eta * (1.0 + pr.alpha) * ra);
  const double d = ph.lambda * (1.0 - ph.eta * (1.0 + ph.alpha) * hd);
  if (!std::isfinite(a) || !std::isfinite(d)) {
    throw DomainError("jacobian: derivative diverges at this point");
  }
  return {a, 0.0, 0.0, d};
}

inline JacobianCoeffs jacobian(const CoupledLogisticSystem& system) {
  const std::optional<PhasePoint> eq = equilibrium(system);
  if (!eq) {
    throw DomainError("jacobian: system has no finite equilibrium (eta = 0)");
  }
  return jacobian(system, *eq);
}

// Eigenvalues of the Jacobian, ordered by descending real part, then
// ascending imaginary part.
inline std::array<std::complex<double>, 2> eigenvalues(const JacobianCoeffs& m) {
  const double tr = m.a + m.d;
  const double disc = (m.a - m.d) * (m.a - m.d) + 4.0 * m.b * m.c;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    return {std::complex<double>((tr + s) / 2.0, 0.0),
            std::complex<double>((tr - s) / 2.0, 0.0)};
  }
  const double s = std::sqrt(-disc) / 2.0;
  return {std::complex<double>(tr / 2.0, -s), std::complex<double>(tr / 2.0, s)};
}

enum class Classification {
  StableNode,
  UnstableNode,
  Saddle,
  StableFocus,
  UnstableFocus,
  Center,
  Degenerate,
};

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::StableNode: return "stable node";
    case Classification::UnstableNode: return "unstable node";
    case Classification::Saddle: return "saddle";
    case Classification::StableFocus: return "stable focus";
    case Classification::UnstableFocus: return "unstable focus";
    case Classification::Center: return "center";
    case Classification::Degenerate: return "degenerate";
  }
  return "degenerate";
}

// Linear classification by trace, determinant, and discriminant.  Boundary
// comparisons use a 1e-12 tolerance relative to the coefficient scale, with
// the degenerate (zero determinant) test taking precedence.
inline Classification classify_equilibrium(const JacobianCoeffs& m) {
  const double scale =
      std::max({std::abs(m.a), std::abs(m.b), std::abs(m.c), std::abs(m.d)});
  const double tr = m.a + m.d;
  const double det = m.a * m.d - m.b * m.c;
  const double disc = (m.a - m.d) * (m.a - m.d) + 4.0 * m.b * m.c;
  const double tol = 1e-12;
  if (std::abs(det) <= tol * scale * scale) return Classification::Degenerate;
  if (det < 0.0) return Classification::Saddle;
  if (disc < -tol * scale * scale) {
    if (std::abs(tr) <= tol * scale) return Classification::Center;
    return tr < 0.0 ? Classification::StableFocus : Classification::UnstableFocus;
  }
  return tr < 0.0 ? Classification::StableNode : Classification::UnstableNode;
}

// Exact flow of the linearized system: exp(Mt) applied to a perturbation.
// Uses the two-projector form when the eigenvalues are distinct and the
// defective expansion exp(wt) (I + (M - wI) t) when they collapse.
inline std::array<double, 2> linearized_flow(const JacobianCoeffs& m,
                                             std::array<double, 2> delta0, double t) {
  if (!std::isfinite(t)) throw DomainError("linearized_flow: t must be finite");
  if (!std::isfinite(delta0[0]) || !std::isfinite(delta0[1])) {
    throw DomainError("linearized_flow: perturbation must be finite");
  }
  if (t == 0.0) return delta0;
  if (m.b == 0.0 && m.c == 0.0) {
    return {delta0[0] * std::exp(m.a * t), delta0[1] * std::exp(m.d * t)};
  }

  const double scale =
      std::max({std::abs(m.a), std::abs(m.b), std::abs(m.c), std::abs(m.d)});
  const double disc = (m.a - m.d) * (m.a - m.d) + 4.0 * m.b * m.c;

  if (std::abs(disc) <= 1e-12 * scale * scale) {
    const double w = (m.a + m.d) / 2.0;
    const double ew = std::exp(w * t);
    const double n00 = m.a - w, n11 = m.d - w;
    return {ew * (delta0[0] + t * (n00 * delta0[0] + m.b * delta0[1])),
            ew * (delta0[1] + t * (m.c * delta0[0] + n11 * delta0[1]))};
  }

  using C = std::complex<double>;
  const auto w = eigenvalues(m);
  const C e1 = std::exp(w[0] * t);
  const C e2 = std::exp(w[1] * t);
  const C denom = w[0] - w[1];
  // exp(Mt) = e1 (M - w2 I)/(w1 - w2) + e2 (M - w1 I)/(w2 - w1)
  const C m00 = (e1 * (m.a - w[1]) - e2 * (m.a - w[0])) / denom;
  const C m01 = (e1 - e2) * m.b / denom;
  const C m10 = (e1 - e2) * m.c / denom;
  const C m11 = (e1 * (m.d - w[1]) - e2 * (m.d - w[0])) / denom;
  return {(m00 * delta0[0] + m01 * delta0[1]).real(),
          (m10 * delta0[0] + m11 * delta0[1]).real()};
}

struct StabilityReport {
  PhasePoint equilibrium;
  JacobianCoeffs coeffs;
  std::array<std::complex<double>, 2> omega;
  Classification classification;
};

inline StabilityReport stability_report(const CoupledLogisticSystem& system) {
  const std::optional<PhasePoint> eq = equilibrium(system);
  if (!eq) {
    throw DomainError(
        "stability_report: no finite equilibrium; both growth laws must saturate");
  }
  const JacobianCoeffs coeffs = jacobian(system, *eq);
  return {*eq, coeffs, eigenvalues(coeffs), classify_equilibrium(coeffs)};
}

// Coordinates in which the uncoupled trajectories become a pure power law
// v = kappa * u^beta:
//   u = H^(-alpha_h) - eta_h,   v = R^(-alpha_r) - eta_r.
// Points at or past saturation (u or v <= 0) are flagged; they carry no
// usable log-log information.
struct PowerLawPoint {
  double u;
  double v;
  bool saturated;
};

inline std::vector<PowerLawPoint> power_law_transform(std::span<const double> r_values,
                                                      std::span<const double> h_values,
                                                      const CoupledLogisticSystem& system) {
  if (r_values.size() != h_values.size()) {
    throw DomainError("power_law_transform: R and H series must have equal length");
  }
  const GrowthParams& pr = system.revenue_params();
  const GrowthParams& ph = system.headcount_params();
  std::vector<PowerLawPoint> out;
  out.reserve(r_values.size());
  for (std::size_t i = 0; i < r_values.size(); ++i) {
    const double r = r_values[i];
    const double h = h_values[i];
    if (!(r > 0.0) || !(h > 0.0) || !std::isfinite(r) || !std::isfinite(h)) {
      throw DomainError("power_law_transform: values must be positive and finite (index " +
                        std::to_string(i) + ")");
    }
    const double v =
        detail::checked_pow(r, -pr.alpha, "power_law_transform: R^(-alpha)") - pr.eta;
    const double u =
        detail::checked_pow(h, -ph.alpha, "power_law_transform: H^(-alpha)") - ph.eta;
    out.push_back({u, v, u <= 0.0 || v <= 0.0});
  }
  return out;
}

// Unsaturated points only, ready for loglog_slope.
inline std::vector<std::pair<double, double>> usable_points(
    std::span<const PowerLawPoint> points) {
  std::vector<std::pair<double, double>> out;
  for (const PowerLawPoint& p : points) {
    if (!p.saturated) out.emplace_back(p.u, p.v);
  }
  return out;
}

// Exponent of the collapsed power law, beta = (alpha_r lambda_r)/(alpha_h lambda_h).
inline double beta_theoretical(const CoupledLogisticSystem& system) {
  const GrowthParams& pr = system.revenue_params();
  const GrowthParams& ph = system.headcount_params();
  const double denom = ph.alpha * ph.lambda;
  if (denom == 0.0) {
    throw DomainError("beta_theoretical: headcount law has alpha*lambda = 0");
  }
  return (pr.alpha * pr.lambda) / denom;
}

// Prefactor kappa fixed by the two integration constants:
// kappa = c_r^(-alpha_r) * c_h^(alpha_h * beta).
inline double power_law_constant(const CoupledLogisticSystem& system, double c_r,
                                 double c_h) {
  const GrowthParams& pr = system.revenue_params();
  const GrowthParams& ph = system.headcount_params();
  const double beta = beta_theoretical(system);
  return detail::checked_pow(c_r, -pr.alpha, "power_law_constant: c_r^(-alpha)") *
         detail::checked_pow(c_h, ph.alpha * beta, "power_law_constant: c_h^(alpha*beta)");
}

}  // namespace satgrowth
