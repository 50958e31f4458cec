#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "htbif/errors.hpp"
#include "htbif/model.hpp"

namespace htbif {

// Eigencurves of the linearization at the constant solution w0:
//   tau_{0,l}(lambda) = (d/(b mu)) lambda^2 - lambda + (l pi)^2.

inline double tau0(int ell, double lambda, const ModelParams& p) {
  if (ell < 0) throw DomainError("mode number must be non-negative");
  if (!(p.mu > 0.0)) throw DomainError("mu must be positive");
  const double lp = ell * std::numbers::pi;
  return lambda * lambda / p.kinetic_scale() - lambda + lp * lp;
}

/// d tau_{0,l}/d lambda; independent of l.
inline double tau0_slope(double lambda, const ModelParams& p) {
  return 2.0 * lambda / p.kinetic_scale() - 1.0;
}

/// mu_kappa = (d/b)(2 kappa pi)^2; tau_{0,kappa} has real roots iff mu >= mu_kappa.
inline double mu_threshold(int kappa, const ModelParams& p) {
  if (kappa < 0) throw DomainError("kappa must be non-negative");
  const double k = 2.0 * kappa * std::numbers::pi;
  return p.d / p.b * k * k;
}

/// Largest kappa with mu_kappa < mu (0 when mu <= mu_1).
inline int regime_kappa(const ModelParams& p) {
  int k = 0;
  while (mu_threshold(k + 1, p) < p.mu) ++k;
  return k;
}

struct EigencurveRoot {
  int ell = 0;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  bool is_real = false;
  double mu = 0.0;
};

/// Real roots lambda_l^- <= lambda_l^+ of tau_{0,l}. The discriminant is
/// formed as (mu - mu_l)/mu so that it vanishes exactly at mu = mu_threshold(l).
inline EigencurveRoot lambda_roots(int ell, const ModelParams& p) {
  if (ell < 0) throw DomainError("mode number must be non-negative");
  if (!(p.mu > 0.0)) throw DomainError("mu must be positive");
  EigencurveRoot r;
  r.ell = ell;
  r.mu = p.mu;
  const double scale = p.kinetic_scale();
  const double disc = (p.mu - mu_threshold(ell, p)) / p.mu;
  if (disc < 0.0) return r;
  r.is_real = true;
  if (disc == 0.0) {
    r.lambda_minus = r.lambda_plus = 0.5 * scale;
    return r;
  }
  const double lp = ell * std::numbers::pi;
  r.lambda_plus = 0.5 * scale * (1.0 + std::sqrt(disc));
  // conjugate form: lambda^- = (product of roots)/lambda^+
  r.lambda_minus = scale * lp * lp / r.lambda_plus;
  return r;
}

inline int default_ell_max(const ModelParams& p) {
  return static_cast<int>(std::ceil(std::sqrt(p.kinetic_scale()) / std::numbers::pi)) + 2;
}

/// Number of negative eigenvalues of the linearization at w0.
inline int morse_index_w0(double lambda, const ModelParams& p, int ell_max = -1) {
  p.with_lambda(lambda).require_limit_range();
  if (ell_max < 0) ell_max = default_ell_max(p);
  int count = 0;
  for (int ell = 0; ell <= ell_max; ++ell)
    if (tau0(ell, lambda, p) < 0.0) ++count;
  return count;
}

/// Morse index of w0 over (0, b mu/d) as a step function of lambda.
/// Cell k is (breakpoints[k-1], breakpoints[k]) with the outer ends 0 and b mu/d.
struct MorseIndexTable {
  double mu = 0.0;
  std::vector<double> breakpoints;
  std::vector<int> indices;

  int index_at(double lambda) const {
    // The index only jumps strictly inside (lambda_l^-, lambda_l^+); at a
    // breakpoint the lower neighbouring value applies.
    std::size_t cell = 0;
    for (double bp : breakpoints)
      if (lambda > bp) ++cell;
    int at = indices[cell];
    for (std::size_t k = 0; k < breakpoints.size(); ++k)
      if (lambda == breakpoints[k]) at = std::min(indices[k], indices[k + 1]);
    return at;
  }
};

inline MorseIndexTable morse_table(const ModelParams& p) {
  if (!(p.mu > 0.0)) throw DomainError("mu must be positive");
  MorseIndexTable t;
  t.mu = p.mu;
  for (int ell = 1; ell <= default_ell_max(p); ++ell) {
    const EigencurveRoot r = lambda_roots(ell, p);
    if (!r.is_real || r.lambda_minus == r.lambda_plus) continue;
    t.breakpoints.push_back(r.lambda_minus);
    t.breakpoints.push_back(r.lambda_plus);
  }
  std::sort(t.breakpoints.begin(), t.breakpoints.end());
  const double scale = p.kinetic_scale();
  for (std::size_t k = 0; k <= t.breakpoints.size(); ++k) {
    const double lo = k == 0 ? 0.0 : t.breakpoints[k - 1];
    const double hi = k == t.breakpoints.size() ? scale : t.breakpoints[k];
    t.indices.push_back(morse_index_w0(0.5 * (lo + hi), p));
  }
  return t;
}

}  // namespace htbif
