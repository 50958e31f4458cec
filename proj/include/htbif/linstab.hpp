#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "htbif/errors.hpp"
#include "htbif/expansion.hpp"
#include "htbif/linalg.hpp"
#include "htbif/model.hpp"
#include "htbif/nodal.hpp"
#include "htbif/parallel.hpp"
#include "htbif/profile.hpp"
#include "htbif/spectral.hpp"

namespace htbif {

/// Lowest eigenvalues of -D^2 + V with Neumann conditions on [0,1].
struct Spectrum {
  std::vector<double> eigenvalues;
  Profile potential;
  std::size_t n_points = 0;
  int morse_index = 0;
};

/// Zero eigenvalues closer than this (scaled by 1 + |lambda|) are degenerate.
inline constexpr double kDegeneracyTol = 1e-6;

inline double degeneracy_threshold(double lambda) { return kDegeneracyTol * (1.0 + std::abs(lambda)); }

/// Centred differences with ghost-point Neumann closure. The boundary rows
/// carry -2/h^2 couplings; a diagonal similarity (weight 1/sqrt(2) at both
/// ends) makes the matrix symmetric with -sqrt(2)/h^2 there.
inline SymTridiagonal neumann_operator(const Profile& V) {
  const std::size_t n = V.size();
  const double h = V.step();
  const double ih2 = 1.0 / (h * h);
  SymTridiagonal T;
  T.diag.resize(n);
  T.off.assign(n - 1, -ih2);
  for (std::size_t i = 0; i < n; ++i) T.diag[i] = 2.0 * ih2 + V[i];
  T.off.front() = -std::numbers::sqrt2 * ih2;
  T.off.back() = -std::numbers::sqrt2 * ih2;
  return T;
}

inline Spectrum sturm_spectrum(const Profile& V, int m) {
  if (m < 1) throw DomainError("sturm_spectrum needs m >= 1");
  const SymTridiagonal T = neumann_operator(V);
  Spectrum s;
  s.eigenvalues = T.lowest(m);
  s.potential = V;
  s.n_points = V.size();
  s.morse_index = T.count_below(0.0);
  return s;
}

/// The m lowest eigenfunctions on the grid of V, each with unit max norm and
/// positive value at x = 0.
inline std::vector<Profile> eigenfunctions(const Profile& V, int m) {
  const SymTridiagonal T = neumann_operator(V);
  auto [values, vecs] = T.lowest_with_vectors(m);
  std::vector<Profile> out;
  for (auto& y : vecs) {
    y.front() *= std::numbers::sqrt2;
    y.back() *= std::numbers::sqrt2;
    double peak = 0.0;
    for (double v : y) peak = std::max(peak, std::abs(v));
    const double sgn = y.front() < 0.0 ? -1.0 : 1.0;
    for (double& v : y) v *= sgn / peak;
    out.emplace_back(std::move(y));
  }
  return out;
}

/// V(x) = -lambda + (b mu/d) / (1 + w(x))^2, the potential of the linearization at w.
inline Profile linearization_potential(const Profile& w, const ModelParams& p) {
  Profile V = w;
  for (std::size_t i = 0; i < w.size(); ++i) V[i] = -kinetic_df(w[i], p);
  return V;
}

inline Profile constant_potential(const ModelParams& p, std::size_t n_points = kDefaultPoints) {
  const double v = -kinetic_df(w0_const(p), p);
  return Profile::sample(n_points, [v](double) { return v; });
}

struct MorseReport {
  int index = 0;
  double tau_low = 0.0;   // eigenvalue n-1
  double tau_high = 0.0;  // eigenvalue n
  bool degenerate = false;
  Spectrum spectrum;
};

inline MorseReport morse_report(const Profile& w, int n, const ModelParams& p, int m = -1) {
  if (n < 0) throw DomainError("mode index must be non-negative");
  if (m < 0) m = n + 3;
  MorseReport r;
  r.spectrum = sturm_spectrum(linearization_potential(w, p), m);
  r.index = r.spectrum.morse_index;
  const auto& ev = r.spectrum.eigenvalues;
  r.tau_low = n >= 1 ? ev[static_cast<std::size_t>(n - 1)] : -std::numeric_limits<double>::infinity();
  r.tau_high = ev[static_cast<std::size_t>(n)];
  const double tol = degeneracy_threshold(p.lambda);
  r.degenerate = std::abs(r.tau_high) < tol || (n >= 1 && std::abs(r.tau_low) < tol);
  return r;
}

inline MorseReport morse_index_nodal(const NodalSolution& sol, const ModelParams& p) {
  if (sol.n < 1) throw DomainError("nodal solution must have n >= 1");
  return morse_report(sol.profile, sol.n, p);
}

/// Morse index of the constant state, computed from the discrete spectrum.
inline int morse_index_constant(const ModelParams& p, std::size_t n_points = kDefaultPoints) {
  return sturm_spectrum(constant_potential(p, n_points), default_ell_max(p) + 1).morse_index;
}

/// Lambda values in the open window (lambda_n^-, lambda_n^+) where an
/// eigenvalue n-1 or n along either nodal branch changes sign or has a local
/// minimum of |tau| below the degeneracy threshold.
inline std::vector<double> detect_singular_set(int n, const ModelParams& p, int n_lambda,
                                               std::size_t n_points = kDefaultPoints) {
  if (n_lambda < 3) throw DomainError("detect_singular_set needs n_lambda >= 3");
  if (!(p.mu > mu_threshold(n, p)))
    throw DomainError("singular set needs mu > mu_" + std::to_string(n));
  const EigencurveRoot roots = lambda_roots(n, p);
  const double width = roots.lambda_plus - roots.lambda_minus;
  struct Taus {
    double lambda;
    double t[4];  // lower: low, high; upper: low, high
  };
  auto compute = [&](std::size_t k) {
    Taus out{};
    out.lambda = roots.lambda_minus + width * static_cast<double>(k + 1) / (n_lambda + 1.0);
    const ModelParams q = p.with_lambda(out.lambda);
    const auto [lo, up] = nodal_pair(n, q, n_points);
    const MorseReport a = morse_index_nodal(lo, q);
    const MorseReport b = morse_index_nodal(up, q);
    out.t[0] = a.tau_low;
    out.t[1] = a.tau_high;
    out.t[2] = b.tau_low;
    out.t[3] = b.tau_high;
    return out;
  };
  auto results = parallel_map<Taus>(static_cast<std::size_t>(n_lambda), compute);
  std::vector<Taus> samples;
  for (std::size_t k = 0; k < results.values.size(); ++k)
    if (results.values[k]) samples.push_back(*results.values[k]);

  std::vector<double> found;
  for (int c = 0; c < 4; ++c) {
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const double tk = samples[k].t[c];
      const double tol = degeneracy_threshold(samples[k].lambda);
      if (k + 1 < samples.size()) {
        const double tn = samples[k + 1].t[c];
        if ((tk < 0.0) != (tn < 0.0) && tk != 0.0 && tn != 0.0) {
          const double l0 = samples[k].lambda, l1 = samples[k + 1].lambda;
          found.push_back(l0 + (l1 - l0) * tk / (tk - tn));
          continue;
        }
      }
      const bool left_ok = k == 0 || std::abs(samples[k - 1].t[c]) > std::abs(tk);
      const bool right_ok = k + 1 == samples.size() || std::abs(samples[k + 1].t[c]) > std::abs(tk);
      if (left_ok && right_ok && std::abs(tk) < tol) found.push_back(samples[k].lambda);
    }
  }
  std::sort(found.begin(), found.end());
  const double merge = width / (n_lambda + 1.0);
  std::vector<double> out;
  for (double l : found)
    if (out.empty() || l - out.back() > merge) out.push_back(l);
  return out;
}

/// Ratios (e_h - e_{h/2}) / (e_{h/2} - e_{h/4}) of the m lowest eigenvalues
/// on grids with n, 2n-1 and 4n-3 points.
inline std::vector<double> richardson_ratios(const std::function<Profile(std::size_t)>& potential,
                                             int m, std::size_t n_points) {
  const auto e1 = sturm_spectrum(potential(n_points), m).eigenvalues;
  const auto e2 = sturm_spectrum(potential(2 * n_points - 1), m).eigenvalues;
  const auto e3 = sturm_spectrum(potential(4 * n_points - 3), m).eigenvalues;
  std::vector<double> r;
  for (int k = 0; k < m; ++k) r.push_back((e1[k] - e2[k]) / (e2[k] - e3[k]));
  return r;
}

/// Projection amplitude s = 2 * Int (w - w0) cos(n pi x).
inline double projection_amplitude(const Profile& w, int n, double w0) {
  Profile u = w;
  for (std::size_t i = 0; i < w.size(); ++i)
    u[i] = (w[i] - w0) * std::cos(n * std::numbers::pi * w.x(i));
  return 2.0 * integrate(u);
}

struct ExpansionCheck {
  int n = 0;
  Side side = Side::minus;
  double eta1_estimate = 0.0;
  double eta2_estimate = 0.0;
  double eta3_estimate = 0.0;
  double eta2_closed_form = 0.0;
  double y1_l2_error = 0.0;
  double y1_amplitude = 0.0;  // |s| at which y1_l2_error was measured
  double s_max = 0.0;
  int points_used = 0;
};

/// Amplitude ladder for fit_expansion.
inline std::vector<double> expansion_ladder() {
  std::vector<double> s;
  for (int k = 1; k <= 10; ++k) s.push_back(0.005 * k);
  return s;
}

/// Fits lambda(s) - lambda_n^{side} = eta1 s + eta2 s^2 + eta3 s^3 over nodal
/// solutions of both branches near the bifurcation point.
inline ExpansionCheck fit_expansion(int n, Side side, const ModelParams& p,
                                    std::size_t n_points = kDefaultPoints,
                                    double y1_amplitude = 0.02) {
  const double lambda_star = bifurcation_point(n, side, p);
  const EigencurveRoot roots = lambda_roots(n, p);
  const double width = roots.lambda_plus - roots.lambda_minus;
  const double inward = side == Side::minus ? 1.0 : -1.0;

  ExpansionCheck out;
  out.n = n;
  out.side = side;
  out.eta2_closed_form = eta2_closed_form(n, side, p);

  struct Sample {
    double dlambda;
    double s;
    Profile w;
    double w0;
  };
  auto solve_at = [&](double dlambda) {
    const ModelParams q = p.with_lambda(lambda_star + inward * dlambda);
    const auto [lo, up] = nodal_pair(n, q, n_points);
    const double w0 = w0_const(q);
    return std::pair<Sample, Sample>{
        Sample{inward * dlambda, projection_amplitude(lo.profile, n, w0), lo.profile, w0},
        Sample{inward * dlambda, projection_amplitude(up.profile, n, w0), up.profile, w0}};
  };

  // The lambda offset reaching amplitude s is estimated from one probe, so
  // the ladder does not lean on the closed-form coefficient.
  const double probe = 1e-3 * width;
  const auto [probe_lo, probe_up] = solve_at(probe);
  const double s_probe = 0.5 * (std::abs(probe_lo.s) + std::abs(probe_up.s));
  if (!(s_probe > 0.0)) throw InsufficientDataError("probe solution has zero amplitude");
  const double scale = probe / (s_probe * s_probe);

  const std::vector<double> ladder = expansion_ladder();
  auto results = parallel_map<std::pair<Sample, Sample>>(
      ladder.size(), [&](std::size_t k) { return solve_at(scale * ladder[k] * ladder[k]); });
  std::vector<Sample> samples;
  for (auto& r : results.values)
    if (r) {
      samples.push_back(r->first);
      samples.push_back(r->second);
    }
  if (samples.size() < 10) {
    std::ostringstream os;
    os << "only " << samples.size() / 2 << " ladder points converged; need 5";
    throw InsufficientDataError(os.str());
  }

  Eigen::MatrixXd A(static_cast<Eigen::Index>(samples.size()), 3);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double s = samples[i].s;
    A(static_cast<Eigen::Index>(i), 0) = s;
    A(static_cast<Eigen::Index>(i), 1) = s * s;
    A(static_cast<Eigen::Index>(i), 2) = s * s * s;
    rhs(static_cast<Eigen::Index>(i)) = samples[i].dlambda;
    out.s_max = std::max(out.s_max, std::abs(s));
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(rhs);
  out.eta1_estimate = coef(0);
  out.eta2_estimate = coef(1);
  out.eta3_estimate = coef(2);
  out.points_used = static_cast<int>(samples.size());

  // Second-order profile check at the ladder amplitude closest to y1_amplitude.
  const Profile y1 = y1_closed_form(n, side, p, n_points);
  const double y1_norm = l2_norm(y1);
  double best_gap = std::numeric_limits<double>::infinity();
  for (const Sample& smp : samples) {
    const double gap = std::abs(std::abs(smp.s) - y1_amplitude);
    if (gap > best_gap + 1e-12) continue;
    Profile diff = smp.w;
    for (std::size_t i = 0; i < diff.size(); ++i) {
      const double phi = std::cos(n * std::numbers::pi * diff.x(i));
      diff[i] = (smp.w[i] - smp.w0 - smp.s * phi) / (smp.s * smp.s) - y1[i];
    }
    const double err = l2_norm(diff) / y1_norm;
    if (gap < best_gap - 1e-12)
      out.y1_l2_error = err;
    else
      out.y1_l2_error = std::max(out.y1_l2_error, err);
    best_gap = std::min(best_gap, gap);
    out.y1_amplitude = std::abs(smp.s);
  }
  return out;
}

}  // namespace htbif
