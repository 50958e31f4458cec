#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "htbif/errors.hpp"
#include "htbif/model.hpp"
#include "htbif/profile.hpp"
#include "htbif/spectral.hpp"

namespace htbif {

// Local bifurcation of n-nodal solutions from (lambda_n^{+-}, w0):
//   lambda(s) = lambda_n^{+-} + eta_1 s + eta_2 s^2 + O(s^3),
//   w - w0    = s [cos(n pi x) + y_1 s + O(s^2)].

enum class Side { minus, plus };

inline const char* to_string(Side s) { return s == Side::minus ? "minus" : "plus"; }

inline Side parse_side(const std::string& s) {
  if (s == "minus") return Side::minus;
  if (s == "plus") return Side::plus;
  throw DomainError("side must be 'minus' or 'plus', got '" + s + "'");
}

/// lambda_n^- or lambda_n^+; requires mu > mu_n strictly.
inline double bifurcation_point(int n, Side side, const ModelParams& p) {
  if (n < 1) throw DomainError("bifurcation mode must be at least 1");
  if (!(p.mu > mu_threshold(n, p)))
    throw DomainError("mode " + std::to_string(n) + " needs mu > mu_" + std::to_string(n) +
                      " = " + std::to_string(mu_threshold(n, p)));
  const EigencurveRoot r = lambda_roots(n, p);
  return side == Side::minus ? r.lambda_minus : r.lambda_plus;
}

/// Second-order profile correction
///   y_1(x) = (lambda/2) (d lambda/(n pi b mu))^2 [cos(2 n pi x)/3 - 1]
/// at lambda = lambda_n^{side}.
inline double y1_value(int n, double lambda_star, const ModelParams& p, double x) {
  const double q = lambda_star / (n * std::numbers::pi * p.kinetic_scale());
  return 0.5 * lambda_star * q * q * (std::cos(2.0 * n * std::numbers::pi * x) / 3.0 - 1.0);
}

inline Profile y1_closed_form(int n, Side side, const ModelParams& p, std::size_t n_points) {
  const double ls = bifurcation_point(n, side, p);
  return Profile::sample(n_points, [&](double x) { return y1_value(n, ls, p, x); });
}

/// Closed-form integral of cos^2(n pi x) y_1(x) over [0,1]: -(5 lambda/24)(d lambda/(n pi b mu))^2.
inline double y1_weighted_integral(int n, Side side, const ModelParams& p) {
  const double ls = bifurcation_point(n, side, p);
  const double q = ls / (n * std::numbers::pi * p.kinetic_scale());
  return -5.0 * ls / 24.0 * q * q;
}

/// eta_2 from the solvability condition of the third-order equation,
///   (eta_2/2) tau0'(lambda*) = 2 lambda* r^2 Int(phi^2 y_1) - lambda* r^3 Int(phi^4),
/// with r = d lambda*/(b mu) and Int(cos^4) = 3/8.
inline double eta2_closed_form(int n, Side side, const ModelParams& p) {
  if (p.mu == mu_threshold(n, p))
    throw DegeneracyError("eta_2 is undefined at mu = mu_n (double root, tau0' = 0)");
  const double ls = bifurcation_point(n, side, p);
  const double r = ls / p.kinetic_scale();
  const double slope = tau0_slope(ls, p);
  if (slope == 0.0) throw DegeneracyError("tau0' vanishes at the bifurcation point");
  const double rhs = 2.0 * ls * r * r * y1_weighted_integral(n, side, p) - ls * r * r * r * 0.375;
  return 2.0 * rhs / slope;
}

}  // namespace htbif
