#pragma once

#include <gsl/gsl_poly.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "htbif/errors.hpp"
#include "htbif/linalg.hpp"
#include "htbif/linstab.hpp"
#include "htbif/model.hpp"
#include "htbif/nodal.hpp"
#include "htbif/parallel.hpp"
#include "htbif/profile.hpp"
#include "htbif/spectral.hpp"

namespace htbif {

// Coupled system on the grid, ghost-point Neumann closure:
//   G_w = -D^2 w - lambda w + eps a w^2 + b w v/(1+w)
//   G_v = -D^2 v - mu v + d v^2 - eps c w v/(1+w)

/// Where a coexistence state came from.
struct Origin {
  enum class Kind { constant, nodal, continued, guess };
  Kind kind = Kind::guess;
  int n = 0;
  Branch branch = Branch::lower;

  static Origin constant() { return {Kind::constant, 0, Branch::lower}; }
  static Origin nodal(int n, Branch b) { return {Kind::nodal, n, b}; }
  static Origin continued() { return {Kind::continued, 0, Branch::lower}; }
};

inline std::string to_string(const Origin& o) {
  switch (o.kind) {
    case Origin::Kind::constant:
      return "constant";
    case Origin::Kind::nodal:
      return "nodal(" + std::to_string(o.n) + "," + to_string(o.branch) + ")";
    case Origin::Kind::continued:
      return "continued";
    case Origin::Kind::guess:
      break;
  }
  return "guess";
}

struct CoexistenceState {
  ExtProfile w;
  ExtProfile v;
  double lambda = 0.0;
  double mu = 0.0;
  double eps = 0.0;
  double residual_sup = 0.0;
  int newton_iters = 0;
  Origin origin;
  std::vector<double> residual_history;

  Profile w_double() const { return Profile::convert(w); }
  Profile v_double() const { return Profile::convert(v); }
};

/// Residual pair in the arithmetic of the profiles.
template <class Real>
std::pair<BasicProfile<Real>, BasicProfile<Real>> residual(const BasicProfile<Real>& w,
                                                           const BasicProfile<Real>& v,
                                                           const ModelParams& p) {
  require_same_grid(w, v, "residual");
  const std::size_t n = w.size();
  const Real h = static_cast<Real>(1) / static_cast<Real>(n - 1);
  const Real ih2 = 1 / (h * h);
  const Real lambda = p.lambda, mu = p.mu, b = p.b, d = p.d, eps = p.eps;
  BasicProfile<Real> rw(n), rv(n);
  auto second = [&](const BasicProfile<Real>& u, std::size_t i) -> Real {
    const Real left = i == 0 ? u[1] : u[i - 1];
    const Real right = i == n - 1 ? u[n - 2] : u[i + 1];
    return (2 * u[i] - left - right) * ih2;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (!(w[i] > -1)) throw DomainError("residual needs w > -1 at every node");
    const double x = w.x(i);
    const Real a = static_cast<Real>(p.coeff_a(x));
    const Real c = static_cast<Real>(p.coeff_c(x));
    const Real sat = w[i] / (1 + w[i]);
    rw[i] = second(w, i) - lambda * w[i] + eps * a * w[i] * w[i] + b * sat * v[i];
    rv[i] = second(v, i) - mu * v[i] + d * v[i] * v[i] - eps * c * sat * v[i];
  }
  return {std::move(rw), std::move(rv)};
}

template <class Real>
double residual_sup_norm(const BasicProfile<Real>& w, const BasicProfile<Real>& v,
                         const ModelParams& p) {
  const auto [rw, rv] = residual(w, v, p);
  return static_cast<double>(std::max(sup_norm(rw), sup_norm(rv)));
}

/// Unknown index of w_i and v_i in the interleaved ordering.
inline std::size_t w_index(std::size_t i) { return 2 * i; }
inline std::size_t v_index(std::size_t i) { return 2 * i + 1; }

/// Analytic Jacobian of the residual, banded with two sub- and super-diagonals.
template <class Real>
BandMatrix jacobian(const BasicProfile<Real>& w, const BasicProfile<Real>& v,
                    const ModelParams& p) {
  require_same_grid(w, v, "jacobian");
  const std::size_t n = w.size();
  const double h = w.step();
  const double ih2 = 1.0 / (h * h);
  BandMatrix J(2 * n, 2, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = w.x(i);
    const double a = p.coeff_a(x), c = p.coeff_c(x);
    const double wi = static_cast<double>(w[i]), vi = static_cast<double>(v[i]);
    const double op = 1.0 + wi;
    const std::size_t r = w_index(i), s = v_index(i);
    J.add(r, r, 2.0 * ih2 - p.lambda + 2.0 * p.eps * a * wi + p.b * vi / (op * op));
    J.add(r, s, p.b * wi / op);
    J.add(s, s, 2.0 * ih2 - p.mu + 2.0 * p.d * vi - p.eps * c * wi / op);
    J.add(s, r, -p.eps * c * vi / (op * op));
    if (i == 0) {
      J.add(r, w_index(1), -2.0 * ih2);
      J.add(s, v_index(1), -2.0 * ih2);
    } else if (i == n - 1) {
      J.add(r, w_index(n - 2), -2.0 * ih2);
      J.add(s, v_index(n - 2), -2.0 * ih2);
    } else {
      J.add(r, w_index(i - 1), -ih2);
      J.add(r, w_index(i + 1), -ih2);
      J.add(s, v_index(i - 1), -ih2);
      J.add(s, v_index(i + 1), -ih2);
    }
  }
  return J;
}

struct NewtonOptions {
  double target = 1e-10;
  /// Accepted when the line search stalls at the rounding floor.
  double accept = 1e-9;
  int max_iters = 50;
  int max_halvings = 20;
  bool require_positive = true;
};

/// Damped Newton with Armijo backtracking on the squared residual. States
/// and residuals are carried in long double; the Jacobian is factored in double.
inline CoexistenceState newton_solve(const ExtProfile& w_guess, const ExtProfile& v_guess,
                                     const ModelParams& p, const NewtonOptions& opt = {}) {
  require_same_grid(w_guess, v_guess, "newton_solve");
  for (long double x : w_guess)
    if (!(x > -1)) throw DomainError("initial guess needs w > -1 at every node");
  const std::size_t n = w_guess.size();
  CoexistenceState st;
  st.w = w_guess;
  st.v = v_guess;
  st.lambda = p.lambda;
  st.mu = p.mu;
  st.eps = p.eps;

  auto sq_norm = [](const ExtProfile& a, const ExtProfile& b) {
    long double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * a[i] + b[i] * b[i];
    return s;
  };
  auto [rw, rv] = residual(st.w, st.v, p);
  long double phi = sq_norm(rw, rv);
  double sup = static_cast<double>(std::max(sup_norm(rw), sup_norm(rv)));
  st.residual_history.push_back(sup);

  bool converged = sup < opt.target;
  while (!converged && st.newton_iters < opt.max_iters) {
    std::vector<double> rhs(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      rhs[w_index(i)] = -static_cast<double>(rw[i]);
      rhs[v_index(i)] = -static_cast<double>(rv[i]);
    }
    const std::vector<double> step = jacobian(st.w, st.v, p).solve(rhs);
    ++st.newton_iters;

    long double t = 1;
    bool accepted = false;
    for (int k = 0; k <= opt.max_halvings; ++k, t *= 0.5L) {
      ExtProfile tw = st.w, tv = st.v;
      bool inside = true;
      for (std::size_t i = 0; i < n; ++i) {
        tw[i] += t * step[w_index(i)];
        tv[i] += t * step[v_index(i)];
        if (!(tw[i] > -1) || !std::isfinite(static_cast<double>(tv[i]))) inside = false;
      }
      if (!inside) continue;
      auto [trw, trv] = residual(tw, tv, p);
      const long double tphi = sq_norm(trw, trv);
      if (tphi <= (1 - 2e-4L * t) * phi) {
        st.w = std::move(tw);
        st.v = std::move(tv);
        rw = std::move(trw);
        rv = std::move(trv);
        phi = tphi;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (sup < opt.accept) break;
      std::ostringstream os;
      os << "line search failed after " << opt.max_halvings << " halvings (residual " << sup
         << ")";
      throw ConvergenceError(os.str());
    }
    sup = static_cast<double>(std::max(sup_norm(rw), sup_norm(rv)));
    st.residual_history.push_back(sup);
    converged = sup < opt.target;
  }
  st.residual_sup = sup;
  if (!(sup < opt.accept)) {
    std::ostringstream os;
    os << "Newton did not converge in " << opt.max_iters << " iterations (residual " << sup
       << ")";
    throw ConvergenceError(os.str());
  }
  if (opt.require_positive) {
    for (std::size_t i = 0; i < n; ++i)
      if (!(st.w[i] > 0) || !(st.v[i] > 0)) {
        std::ostringstream os;
        os << "state left the positive cone at x = " << st.w.x(i);
        throw PositivityError(os.str());
      }
  }
  return st;
}

inline CoexistenceState newton_solve(const Profile& w_guess, const Profile& v_guess,
                                     const ModelParams& p, const NewtonOptions& opt = {}) {
  return newton_solve(ExtProfile::convert(w_guess), ExtProfile::convert(v_guess), p, opt);
}

/// Refuses lambda whose w-block at eps = 0 has an eigenvalue within the
/// degeneracy threshold of zero.
inline void require_nondegenerate(const Profile& w, const ModelParams& p) {
  const Spectrum s = sturm_spectrum(linearization_potential(w, p), 1);
  const int k = s.morse_index;
  const Spectrum near = sturm_spectrum(s.potential, k + 1);
  const double tol = degeneracy_threshold(p.lambda);
  for (int j = std::max(0, k - 1); j <= k; ++j) {
    const double tau = near.eigenvalues[static_cast<std::size_t>(j)];
    if (std::abs(tau) < tol) {
      std::ostringstream os;
      os << "linearization is near-singular: eigenvalue " << j << " = " << tau
         << " (tolerance " << tol << ")";
      throw DegeneracyError(os.str());
    }
  }
}

/// Solves (-D^2 + q) y = rhs with the ghost-point Neumann closure.
inline Profile neumann_solve(const Profile& q, const Profile& rhs) {
  require_same_grid(q, rhs, "neumann_solve");
  const std::size_t n = q.size();
  const double ih2 = 1.0 / (q.step() * q.step());
  BandMatrix A(n, 1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    A.add(i, i, 2.0 * ih2 + q[i]);
    if (i == 0)
      A.add(0, 1, -2.0 * ih2);
    else if (i == n - 1)
      A.add(i, i - 1, -2.0 * ih2);
    else {
      A.add(i, i - 1, -ih2);
      A.add(i, i + 1, -ih2);
    }
  }
  return Profile(A.solve(rhs.values()));
}

/// First-order corrections (phi, psi) of W = w + eps phi, V = mu/d + eps psi
/// about a solution w of the eps = 0 problem:
///   (-D^2 + mu) psi = (mu/d) c w/(1+w)
///   (-D^2 - lambda + (b mu/d)/(1+w)^2) phi = -a w^2 - b w/(1+w) psi
inline std::pair<Profile, Profile> first_order_corrections(const Profile& w,
                                                           const ModelParams& p) {
  require_nondegenerate(w, p);
  const std::size_t n = w.size();
  Profile q_psi(n, p.mu), r_psi(n);
  for (std::size_t i = 0; i < n; ++i)
    r_psi[i] = p.mu / p.d * p.coeff_c(w.x(i)) * w[i] / (1.0 + w[i]);
  Profile psi = neumann_solve(q_psi, r_psi);
  Profile q_phi = linearization_potential(w, p), r_phi(n);
  for (std::size_t i = 0; i < n; ++i)
    r_phi[i] = -p.coeff_a(w.x(i)) * w[i] * w[i] - p.b * w[i] / (1.0 + w[i]) * psi[i];
  Profile phi = neumann_solve(q_phi, r_phi);
  return {std::move(phi), std::move(psi)};
}

/// Positive constant roots (w, v) of lambda - eps a w - b v/(1+w) = 0,
/// mu - d v + eps c w/(1+w) = 0 for constant a and c.
inline std::vector<std::pair<double, double>> constant_states(const ModelParams& p) {
  if (!p.coeff_a.is_constant() || !p.coeff_c.is_constant())
    throw DomainError("constant_states needs constant coefficients a and c");
  const double a = p.coeff_a.constant_value(), c = p.coeff_c.constant_value();
  const double ea = p.eps * a, ec = p.eps * c, K = p.kinetic_scale();
  // (lambda - eps a w)(1+w)^2 - K (1+w) - (b eps c/d) w = 0
  const double c3 = -ea;
  const double c2 = p.lambda - 2.0 * ea;
  const double c1 = 2.0 * p.lambda - ea - K - p.b * ec / p.d;
  const double c0 = p.lambda - K;
  double r[3];
  int count = 0;
  if (c3 != 0.0)
    count = gsl_poly_solve_cubic(c2 / c3, c1 / c3, c0 / c3, &r[0], &r[1], &r[2]);
  else if (c2 != 0.0)
    count = gsl_poly_solve_quadratic(c2, c1, c0, &r[0], &r[1]);
  else if (c1 != 0.0) {
    r[0] = -c0 / c1;
    count = 1;
  }
  auto v_of = [&](double w) { return (p.mu + ec * w / (1.0 + w)) / p.d; };
  auto eq1 = [&](double w, double v) { return p.lambda - ea * w - p.b * v / (1.0 + w); };
  auto eq2 = [&](double w, double v) { return p.mu - p.d * v + ec * w / (1.0 + w); };
  std::vector<std::pair<double, double>> out;
  for (int k = 0; k < count; ++k) {
    double w = r[k];
    if (!(w > 0.0)) continue;
    for (int it = 0; it < 8; ++it) {
      const double poly = ((c3 * w + c2) * w + c1) * w + c0;
      const double dpoly = (3.0 * c3 * w + 2.0 * c2) * w + c1;
      if (dpoly == 0.0) break;
      const double next = w - poly / dpoly;
      if (next == w) break;
      w = next;
    }
    const double v = v_of(w);
    if (!(w > 0.0) || !(v > 0.0)) continue;
    if (std::abs(eq1(w, v)) > 1e-12 || std::abs(eq2(w, v)) > 1e-12) continue;
    bool dup = false;
    for (auto& [ow, ov] : out) dup = dup || std::abs(ow - w) < 1e-12 * (1.0 + w);
    if (!dup) out.emplace_back(w, v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline ExtProfile constant_ext(std::size_t n, long double value) { return ExtProfile(n, value); }

/// Discrete eps = 0 states seeding the census: the constant state and the
/// n nodal pairs, each polished by Newton on the grid.
inline std::vector<CoexistenceState> unperturbed_states(int n, const ModelParams& p,
                                                        std::size_t n_points = kDefaultPoints) {
  const ModelParams q = p.with_eps(0.0);
  const long double vstar = static_cast<long double>(q.mu) / q.d;
  std::vector<std::pair<Profile, Origin>> seeds;
  seeds.emplace_back(Profile(n_points, w0_const(q)), Origin::constant());
  for (int j = 1; j <= n; ++j) {
    auto [lo, up] = nodal_pair(j, q, n_points);
    seeds.emplace_back(std::move(lo.profile), Origin::nodal(j, Branch::lower));
    seeds.emplace_back(std::move(up.profile), Origin::nodal(j, Branch::upper));
  }
  std::vector<CoexistenceState> out;
  for (auto& [w, origin] : seeds) {
    CoexistenceState s = newton_solve(ExtProfile::convert(w), constant_ext(n_points, vstar), q);
    s.origin = origin;
    out.push_back(std::move(s));
  }
  return out;
}

/// Census distinctness threshold in the sup norm over (w, v).
inline constexpr double kDistinctTol = 1e-6;

inline double state_distance(const CoexistenceState& a, const CoexistenceState& b) {
  return static_cast<double>(std::max(sup_distance(a.w, b.w), sup_distance(a.v, b.v)));
}

/// Crossings of W with the constant w0 of the eps = 0 problem.
inline int state_crossings(const CoexistenceState& s, const ModelParams& p) {
  return count_crossings(s.w, static_cast<long double>(w0_const(p)));
}

struct CensusResult {
  int n = 0;
  double lambda = 0.0;
  double mu = 0.0;
  double eps = 0.0;
  std::vector<CoexistenceState> states;
  std::vector<CoexistenceState> origins;
  int distinct_count = 0;
  int starts = 0;
  bool shortfall = false;
  bool crossings_preserved = true;
  std::vector<std::pair<std::string, std::string>> failures;  // (origin, message)
};

/// Checks that lambda lies in the window where exactly 2n+1 solutions exist at eps = 0.
inline void require_census_window(int n, const ModelParams& p) {
  if (n < 0) throw DomainError("census needs n >= 0");
  p.require_limit_range();
  const int kappa = regime_kappa(p);
  if (n > kappa) {
    std::ostringstream os;
    os << "census n = " << n << " exceeds kappa = " << kappa << " at mu = " << p.mu;
    throw DomainError(os.str());
  }
  const double margin = 1e-3 * (1.0 + p.lambda);
  for (int m = 1; m <= kappa + 1; ++m) {
    if (!(p.mu > mu_threshold(m, p))) break;
    const EigencurveRoot r = lambda_roots(m, p);
    if (std::abs(p.lambda - r.lambda_minus) < margin || std::abs(p.lambda - r.lambda_plus) < margin) {
      std::ostringstream os;
      os << "lambda = " << p.lambda << " is within " << margin << " of a bifurcation point of mode "
         << m;
      throw DomainError(os.str());
    }
    const bool inside = p.lambda > r.lambda_minus && p.lambda < r.lambda_plus;
    if (m <= n && !inside) {
      std::ostringstream os;
      os << "lambda = " << p.lambda << " outside (lambda_" << m << "^-, lambda_" << m
         << "^+) = (" << r.lambda_minus << ", " << r.lambda_plus << ")";
      throw DomainError(os.str());
    }
    if (m == n + 1 && inside) {
      std::ostringstream os;
      os << "lambda = " << p.lambda << " inside the mode-" << m << " window; census n = " << n
         << " would miss states";
      throw DomainError(os.str());
    }
  }
}

/// Continues the 2n+1 states of the eps = 0 problem to p.eps.
inline CensusResult census(int n, const ModelParams& p, std::size_t n_points = kDefaultPoints,
                           const NewtonOptions& opt = {}) {
  p.validate();
  require_census_window(n, p);
  CensusResult out;
  out.n = n;
  out.lambda = p.lambda;
  out.mu = p.mu;
  out.eps = p.eps;
  out.origins = unperturbed_states(n, p, n_points);
  out.starts = static_cast<int>(out.origins.size());
  const ModelParams q0 = p.with_eps(0.0);
  for (const CoexistenceState& o : out.origins) {
    if (o.origin.kind != Origin::Kind::nodal) continue;
    if (morse_report(o.w_double(), o.origin.n, q0).degenerate)
      throw DegeneracyError("origin " + to_string(o.origin) +
                            " has a near-zero eigenvalue: lambda is near a singular value");
  }

  auto results = parallel_map<CoexistenceState>(out.origins.size(), [&](std::size_t k) {
    const CoexistenceState& o = out.origins[k];
    if (p.eps == 0.0) return o;
    CoexistenceState s = newton_solve(o.w, o.v, p, opt);
    s.origin = o.origin;
    return s;
  });
  for (std::size_t k = 0; k < results.values.size(); ++k) {
    if (results.values[k]) {
      CoexistenceState& s = *results.values[k];
      // The constant origin has no zeros to preserve: with varying a or c
      // it picks up an O(eps) ripple that may cross w0.
      if (out.origins[k].origin.kind == Origin::Kind::nodal &&
          state_crossings(s, p) != state_crossings(out.origins[k], p))
        out.crossings_preserved = false;
      bool dup = false;
      for (const auto& kept : out.states) dup = dup || state_distance(kept, s) <= kDistinctTol;
      if (!dup) out.states.push_back(std::move(s));
      continue;
    }
    try {
      std::rethrow_exception(results.errors[k]);
    } catch (const std::exception& e) {
      out.failures.emplace_back(to_string(out.origins[k].origin), e.what());
    }
  }
  out.distinct_count = static_cast<int>(out.states.size());
  out.shortfall = out.distinct_count < out.starts;
  return out;
}

struct ContinuationResult {
  std::vector<CoexistenceState> states;
  bool broke_down = false;
  double last_good_eps = 0.0;
  double failed_eps = 0.0;
  std::string failure;
};

/// Linear eps-ladder from start.eps to eps_target, warm-starting each solve.
inline ContinuationResult continue_in_eps(const CoexistenceState& start, const ModelParams& p,
                                          double eps_target, int steps,
                                          const NewtonOptions& opt = {}) {
  if (steps < 1) throw DomainError("continuation needs at least one step");
  if (!(eps_target >= 0.0)) throw DomainError("eps_target must be non-negative");
  ContinuationResult out;
  out.states.push_back(start);
  out.last_good_eps = start.eps;
  if (eps_target == start.eps) return out;
  for (int k = 1; k <= steps; ++k) {
    const double eps = start.eps + (eps_target - start.eps) * k / steps;
    const CoexistenceState& prev = out.states.back();
    try {
      CoexistenceState s = newton_solve(prev.w, prev.v, p.with_eps(eps), opt);
      s.origin = Origin::continued();
      out.states.push_back(std::move(s));
      out.last_good_eps = eps;
    } catch (const Error& e) {
      out.broke_down = true;
      out.failed_eps = eps;
      out.failure = e.what();
      break;
    }
  }
  return out;
}

}  // namespace htbif
