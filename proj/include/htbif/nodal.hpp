#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "htbif/errors.hpp"
#include "htbif/expansion.hpp"
#include "htbif/model.hpp"
#include "htbif/parallel.hpp"
#include "htbif/profile.hpp"
#include "htbif/spectral.hpp"
#include "htbif/timemap.hpp"

namespace htbif {

enum class Branch { lower, upper };

inline const char* to_string(Branch b) { return b == Branch::lower ? "lower" : "upper"; }

/// A positive solution of -w'' = f(w), w'(0) = w'(1) = 0, crossing w0 n times.
struct NodalSolution {
  int n = 0;
  Branch branch = Branch::lower;
  double w_minus = 0.0;
  Profile profile;
  double lambda = 0.0;
  double mu = 0.0;
  double boundary_residual = 0.0;  // |w'(1)|
  int crossings = 0;
};

inline constexpr int kDefaultPoints = 2001;

/// Substeps of the fixed-step integrator per output grid interval, raised on
/// coarse grids so that [0,1] is always covered by at least kMinSteps steps.
inline constexpr int kSubsteps = 8;
inline constexpr std::size_t kMinSteps = 16000;

/// Energy drift tolerated along an integrated profile.
inline constexpr double kEnergyDriftTol = 1e-9;

namespace detail {

inline PhaseState rk4_step(PhaseState s, double h, const ModelParams& p) {
  auto rhs = [&](const PhaseState& q) { return PhaseState{q.z, -kinetic_f(q.w, p)}; };
  const PhaseState k1 = rhs(s);
  const PhaseState k2 = rhs({s.w + 0.5 * h * k1.w, s.z + 0.5 * h * k1.z});
  const PhaseState k3 = rhs({s.w + 0.5 * h * k2.w, s.z + 0.5 * h * k2.z});
  const PhaseState k4 = rhs({s.w + h * k3.w, s.z + h * k3.z});
  return {s.w + h / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w),
          s.z + h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z)};
}

}  // namespace detail

/// Orbit of w' = z, z' = -f(w) after time `duration`, using `steps` RK4 steps.
inline PhaseState integrate_orbit(PhaseState start, double duration, int steps,
                                  const ModelParams& p) {
  if (steps < 1) throw DomainError("integrate_orbit needs at least one step");
  const double h = duration / steps;
  PhaseState s = start;
  try {
    for (int k = 0; k < steps; ++k) s = detail::rk4_step(s, h, p);
  } catch (const DomainError& e) {
    throw IntegrationError(std::string("orbit left w > -1: ") + e.what());
  }
  return s;
}

/// Phase trajectory (w, z) of the Cauchy problem w(0) = w_start, w'(0) = 0,
/// sampled on the uniform grid of [0,1].
struct PhaseProfile {
  Profile w;
  Profile z;
};

inline PhaseProfile integrate_cauchy_phase(double w_start, const ModelParams& p,
                                           std::size_t n_points = kDefaultPoints) {
  if (n_points < 3) throw DomainError("n_points must be at least 3");
  const double w0 = w0_const(p);
  if (!(w_start > 0.0)) throw DomainError("w_start must be positive");
  if (w_start != w0 && !(w_start < homoclinic_extent(p)))
    throw DomainError("w_start must lie below the homoclinic extent");
  PhaseProfile out{Profile(n_points), Profile(n_points)};
  const double e0 = energy({w_start, 0.0}, p);
  const std::size_t intervals = n_points - 1;
  const int substeps =
      std::max<int>(kSubsteps, static_cast<int>((kMinSteps + intervals - 1) / intervals));
  const double h = 1.0 / static_cast<double>(intervals) / substeps;
  PhaseState s{w_start, 0.0};
  double drift = 0.0;
  out.w[0] = s.w;
  out.z[0] = s.z;
  try {
    for (std::size_t i = 1; i < n_points; ++i) {
      for (int k = 0; k < substeps; ++k) s = detail::rk4_step(s, h, p);
      out.w[i] = s.w;
      out.z[i] = s.z;
      drift = std::max(drift, std::abs(energy(s, p) - e0));
    }
  } catch (const DomainError& e) {
    throw IntegrationError(std::string("trajectory left w > -1: ") + e.what());
  }
  if (!(drift < kEnergyDriftTol)) {
    std::ostringstream os;
    os << "energy drift " << drift << " exceeds " << kEnergyDriftTol;
    throw IntegrationError(os.str());
  }
  return out;
}

inline Profile integrate_cauchy(double w_start, const ModelParams& p,
                                std::size_t n_points = kDefaultPoints) {
  return integrate_cauchy_phase(w_start, p, n_points).w;
}

/// Sup norm of -w'' - f(w), with w'' from the fourth-order centred stencil and
/// even reflection across both ends (exact for Neumann solutions of the
/// autonomous equation).
inline double bvp_residual(const Profile& w, const ModelParams& p) {
  const std::size_t n = w.size();
  if (n < 5) throw DomainError("bvp_residual needs at least 5 grid points");
  const long last = static_cast<long>(n) - 1;
  auto at = [&](long i) {
    if (i < 0) i = -i;
    if (i > last) i = 2 * last - i;
    return w[static_cast<std::size_t>(i)];
  };
  const double h = w.step();
  double worst = 0.0;
  for (long i = 0; i <= last; ++i) {
    const double d2 =
        (-at(i - 2) + 16.0 * at(i - 1) - 30.0 * at(i) + 16.0 * at(i + 1) - at(i + 2)) /
        (12.0 * h * h);
    worst = std::max(worst, std::abs(-d2 - kinetic_f(at(i), p)));
  }
  return worst;
}

/// Unique w_- in (0, w0) with n T(w_-) = 1.
inline double solve_amplitude(int n, const ModelParams& p, const QuadratureOptions& opt = {}) {
  if (n < 1) throw DomainError("nodal count must be at least 1");
  p.require_limit_range();
  const double w0 = w0_const(p);
  const double centre = time_map_center(p);
  if (!(n * centre < 1.0)) {
    std::ostringstream os;
    os.precision(10);
    os << "no (" << n << ", w0)-nodal solution: n*T(w0) = " << n * centre << " >= 1; ";
    if (!(p.mu > mu_threshold(n, p)))
      os << "requires mu > mu_" << n << " = " << mu_threshold(n, p);
    else {
      const EigencurveRoot r = lambda_roots(n, p);
      os << "requires lambda in (" << r.lambda_minus << ", " << r.lambda_plus << ")";
    }
    throw NoSolutionError(os.str());
  }
  const double delta = 1e-10 * w0;
  auto h = [&](double w) { return n * time_map(w, p, opt).T - 1.0; };
  // h decreases from +infinity near 0 to n*T(w0) - 1 < 0 at the centre;
  // the bracket grows toward the saddle from w0/2.
  double lo = 0.5 * w0;
  double hi = w0 - delta;
  while (!(h(lo) > 0.0)) {
    hi = lo;
    lo *= 0.5;
    if (lo < delta) throw NoSolutionError("time map does not exceed 1/n near the saddle");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double hm = h(mid);
    if (hm == 0.0) return mid;
    if (hm > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace detail {

/// Cubic Hermite evaluation of a phase profile at x in [0, 2], using the even
/// extension about x = 1. Returns (w, w').
inline std::pair<double, double> eval_even_extension(const PhaseProfile& ph, double x) {
  double sign = 1.0;
  if (x > 1.0) {
    x = 2.0 - x;
    sign = -1.0;
  }
  x = std::clamp(x, 0.0, 1.0);
  const std::size_t last = ph.w.size() - 1;
  const double pos = x * static_cast<double>(last);
  const double rounded = std::round(pos);
  if (std::abs(pos - rounded) < 1e-9) {
    const auto j = static_cast<std::size_t>(rounded);
    return {ph.w[j], sign * ph.z[j]};
  }
  const std::size_t j = std::min(static_cast<std::size_t>(pos), last - 1);
  const double h = ph.w.step();
  const double t = pos - static_cast<double>(j);
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double w = h00 * ph.w[j] + h10 * h * ph.z[j] + h01 * ph.w[j + 1] + h11 * h * ph.z[j + 1];
  const double dh00 = 6 * t2 - 6 * t, dh10 = 3 * t2 - 4 * t + 1;
  const double dh01 = -6 * t2 + 6 * t, dh11 = 3 * t2 - 2 * t;
  const double dw =
      (dh00 * ph.w[j] + dh01 * ph.w[j + 1]) / h + dh10 * ph.z[j] + dh11 * ph.z[j + 1];
  return {w, sign * dw};
}

}  // namespace detail

/// Residual tolerance for the shifted companion profile.
inline constexpr double kShiftResidualTol = 1e-7;

/// The two (n, w0)-nodal solutions at (lambda, mu): the lower one starts at
/// w_- < w0; the upper one is the lower profile, evenly extended about x = 1,
/// shifted left by 1/n, and starts at w_+ > w0.
inline std::pair<NodalSolution, NodalSolution> nodal_pair(int n, const ModelParams& p,
                                                          std::size_t n_points = kDefaultPoints,
                                                          const QuadratureOptions& opt = {}) {
  if (n_points < 3) throw DomainError("n_points must be at least 3");
  const double w_minus = solve_amplitude(n, p, opt);
  const double w0 = w0_const(p);
  // Coarse requests are computed and checked on a refinement by an integer
  // factor, then decimated.
  const std::size_t intervals = n_points - 1;
  const std::size_t factor = (kDefaultPoints - 1 + intervals - 1) / intervals;
  const std::size_t fine_points = factor > 1 ? intervals * factor + 1 : n_points;
  const PhaseProfile ph = integrate_cauchy_phase(w_minus, p, fine_points);

  NodalSolution lower;
  lower.n = n;
  lower.branch = Branch::lower;
  lower.w_minus = w_minus;
  lower.profile = ph.w;
  lower.lambda = p.lambda;
  lower.mu = p.mu;
  lower.boundary_residual = std::abs(ph.z.back());

  NodalSolution upper = lower;
  upper.branch = Branch::upper;
  const double shift = 1.0 / n;
  for (std::size_t i = 0; i < fine_points; ++i)
    upper.profile[i] = detail::eval_even_extension(ph, ph.w.x(i) + shift).first;
  upper.boundary_residual = std::abs(detail::eval_even_extension(ph, 1.0 + shift).second);

  const double res = bvp_residual(upper.profile, p);
  if (!(res < kShiftResidualTol)) {
    std::ostringstream os;
    os << "shifted companion fails the BVP check: residual " << res;
    throw IntegrationError(os.str());
  }
  if (factor > 1) {
    auto decimate = [&](const Profile& f) {
      Profile out(n_points);
      for (std::size_t i = 0; i < n_points; ++i) out[i] = f[i * factor];
      return out;
    };
    lower.profile = decimate(lower.profile);
    upper.profile = decimate(upper.profile);
  }
  lower.crossings = count_crossings(lower.profile, w0);
  upper.crossings = count_crossings(upper.profile, w0);
  if (!(upper.profile[0] > w0 && w0 > lower.profile[0]))
    throw IntegrationError("nodal pair does not straddle w0 at x = 0");
  return {std::move(lower), std::move(upper)};
}

/// One lambda-slice of the loop C_n. Both profiles share the same range
/// [w_-, w_+], so the loop is drawn with the value at x = 0.
struct LoopPoint {
  double lambda = 0.0;
  double w_minus_lower = 0.0;
  double sup_norm_lower = 0.0;
  double sup_norm_upper = 0.0;
  double w0 = 0.0;
  double w_start_upper = 0.0;  // upper(0) = w_+
  bool analytic_limit = false;
};

struct LoopTrace {
  int n = 0;
  double mu = 0.0;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  std::vector<LoopPoint> points;
  std::vector<std::pair<double, std::string>> failures;
};

/// Below this predicted amplitude the loop point is the analytic limit (lambda, w0).
inline constexpr double kLimitAmplitude = 1e-6;

inline LoopTrace trace_loop(int n, const ModelParams& p, int n_lambda,
                            std::size_t n_points = kDefaultPoints) {
  if (n_lambda < 1) throw DomainError("n_lambda must be positive");
  if (!(p.mu > mu_threshold(n, p)))
    throw DomainError("loop C_" + std::to_string(n) + " needs mu > mu_" + std::to_string(n));
  LoopTrace trace;
  trace.n = n;
  trace.mu = p.mu;
  const EigencurveRoot roots = lambda_roots(n, p);
  trace.lambda_minus = roots.lambda_minus;
  trace.lambda_plus = roots.lambda_plus;
  const double eta_minus = std::abs(eta2_closed_form(n, Side::minus, p));
  const double eta_plus = std::abs(eta2_closed_form(n, Side::plus, p));
  const double width = roots.lambda_plus - roots.lambda_minus;

  auto compute = [&](std::size_t k) {
    const double lambda =
        roots.lambda_minus + width * static_cast<double>(k + 1) / (n_lambda + 1.0);
    const ModelParams q = p.with_lambda(lambda);
    LoopPoint pt;
    pt.lambda = lambda;
    pt.w0 = w0_const(q);
    const double predicted =
        std::min(std::sqrt((lambda - roots.lambda_minus) / eta_minus),
                 std::sqrt((roots.lambda_plus - lambda) / eta_plus));
    if (predicted < kLimitAmplitude) {
      pt.analytic_limit = true;
      pt.w_minus_lower = pt.sup_norm_lower = pt.sup_norm_upper = pt.w_start_upper = pt.w0;
      return pt;
    }
    const auto [lo, up] = nodal_pair(n, q, n_points);
    pt.w_minus_lower = lo.w_minus;
    pt.sup_norm_lower = max_value(lo.profile);
    pt.sup_norm_upper = max_value(up.profile);
    pt.w_start_upper = up.profile[0];
    return pt;
  };
  auto results = parallel_map<LoopPoint>(static_cast<std::size_t>(n_lambda), compute);
  for (int k = 0; k < n_lambda; ++k) {
    if (results.values[k]) {
      trace.points.push_back(*results.values[k]);
      continue;
    }
    const double lambda = roots.lambda_minus + width * (k + 1) / (n_lambda + 1.0);
    try {
      std::rethrow_exception(results.errors[k]);
    } catch (const std::exception& e) {
      trace.failures.emplace_back(lambda, e.what());
    }
  }
  return trace;
}

}  // namespace htbif
