#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "htbif/coeff.hpp"
#include "htbif/errors.hpp"

namespace htbif {

/// Parameters of the diffusive Holling-Tanner system in the scaled variables
/// w = gamma * u, eps = 1/gamma.
///
///   -w'' = lambda w - eps a(x) w^2 - b w v/(1+w)
///   -v'' = mu v - d v^2 + eps c(x) w v/(1+w),   Neumann at x = 0, 1.
///
/// eps = 0 is the uncoupled limit system, whose positive v-state is mu/d.
struct ModelParams {
  double b = 1.0;
  double d = 1.0;
  double lambda = 25.0;
  double mu = 50.0;
  double eps = 0.0;
  CoeffFn coeff_a = CoeffFn::constant(1.0);
  CoeffFn coeff_c = CoeffFn::constant(1.0);

  /// b = d = 1, mu = 50, lambda = 25, a = c = 1: the kappa = 1 regime with
  /// comfortable margins on every window.
  static ModelParams desk_scale() { return ModelParams{}; }

  ModelParams with_lambda(double l) const {
    ModelParams p = *this;
    p.lambda = l;
    return p;
  }
  ModelParams with_mu(double m) const {
    ModelParams p = *this;
    p.mu = m;
    return p;
  }
  ModelParams with_eps(double e) const {
    ModelParams p = *this;
    p.eps = e;
    return p;
  }

  /// b mu / d, the right end of the lambda-range of the constant solution.
  double kinetic_scale() const noexcept { return b * mu / d; }

  double gamma() const {
    if (!(eps > 0.0)) throw DomainError("saturation rate is infinite at eps = 0");
    return 1.0 / eps;
  }

  /// Standing hypotheses: b, d > 0, eps >= 0, a and c not identically zero.
  void validate() const {
    if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("b must be positive");
    if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("d must be positive");
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw DomainError("eps must be non-negative");
    if (!std::isfinite(lambda) || !std::isfinite(mu))
      throw DomainError("lambda and mu must be finite");
    if (coeff_a.identically_zero()) throw DomainError("coefficient a must not vanish identically");
    if (coeff_c.identically_zero()) throw DomainError("coefficient c must not vanish identically");
  }

  /// Limit-problem range: mu > 0 and lambda in (0, b mu/d).
  void require_limit_range() const {
    if (!(b > 0.0) || !(d > 0.0)) throw DomainError("b and d must be positive");
    if (!(mu > 0.0)) throw DomainError("mu must be positive, got " + std::to_string(mu));
    if (!(lambda > 0.0) || !(lambda < kinetic_scale())) {
      std::ostringstream os;
      os.precision(17);
      os << "lambda = " << lambda << " outside (0, b mu/d) = (0, " << kinetic_scale()
         << "): no positive constant solution";
      throw DomainError(os.str());
    }
  }
};

/// Positive constant solution w0 = b mu/(d lambda) - 1.
inline double w0_const(const ModelParams& p) {
  p.require_limit_range();
  return p.kinetic_scale() / p.lambda - 1.0;
}

namespace detail {
inline void require_above_minus_one(double w) {
  if (!(w > -1.0)) throw DomainError("w = " + std::to_string(w) + " must exceed -1");
}
}  // namespace detail

/// f(w) = lambda w - (b mu/d) w/(1+w); the limit equation is -w'' = f(w).
inline double kinetic_f(double w, const ModelParams& p) {
  detail::require_above_minus_one(w);
  return p.lambda * w - p.kinetic_scale() * w / (1.0 + w);
}

inline double kinetic_df(double w, const ModelParams& p) {
  detail::require_above_minus_one(w);
  const double s = 1.0 + w;
  return p.lambda - p.kinetic_scale() / (s * s);
}

inline double kinetic_d2f(double w, const ModelParams& p) {
  detail::require_above_minus_one(w);
  const double s = 1.0 + w;
  return 2.0 * p.kinetic_scale() / (s * s * s);
}

inline double kinetic_d3f(double w, const ModelParams& p) {
  detail::require_above_minus_one(w);
  const double s2 = (1.0 + w) * (1.0 + w);
  return -6.0 * p.kinetic_scale() / (s2 * s2);
}

/// F(w) = (lambda/2) w^2 - (b mu/d)[w - ln(1+w)], with F' = f.
inline double potential_F(double w, const ModelParams& p) {
  detail::require_above_minus_one(w);
  return 0.5 * p.lambda * w * w - p.kinetic_scale() * (w - std::log1p(w));
}

struct PhaseState {
  double w = 0.0;
  double z = 0.0;
};

/// Total energy z^2/2 + F(w), conserved along w' = z, z' = -f(w).
inline double energy(const PhaseState& s, const ModelParams& p) {
  return 0.5 * s.z * s.z + potential_F(s.w, p);
}

namespace detail {

/// log1p(t) - t + t^2/2 without cancellation for small |t|.
inline double log1p_cubic_remainder(double t) {
  if (std::abs(t) < 0.1) {
    double term = t * t * t;
    double sum = 0.0;
    for (int k = 3; k < 40; ++k) {
      const double add = term / k;
      sum += (k % 2 == 1) ? add : -add;
      term *= t;
      if (std::abs(add) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::log1p(t) - t + 0.5 * t * t;
}

/// log1p(e)/e with its limit 1 at e = 0.
inline double log1p_ratio(double e) { return e == 0.0 ? 1.0 : std::log1p(e) / e; }

}  // namespace detail

/// F(w0 + u) - F(w0), evaluated without the cancellation of the direct
/// difference. Requires the limit range and w0 + u > -1.
inline double potential_offset(double u, const ModelParams& p) {
  const double w0 = w0_const(p);
  detail::require_above_minus_one(w0 + u);
  const double curvature = p.lambda * w0 / (1.0 + w0);  // F''(w0)
  const double t = u / (1.0 + w0);
  return 0.5 * curvature * u * u + p.kinetic_scale() * detail::log1p_cubic_remainder(t);
}

}  // namespace htbif
