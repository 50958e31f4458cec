#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "htbif/errors.hpp"
#include "htbif/model.hpp"

namespace htbif {

// Phase plane of w' = z, z' = -f(w): a saddle at (0,0), a centre at (w0,0),
// and periodic orbits between the centre and the homoclinic loop at energy 0.
// A periodic orbit meets the w-axis at w_- in (0,w0) and w_+ in (w0,w_h).

struct TimeMapSample {
  double w_minus = 0.0;
  double w_plus = 0.0;
  double T = 0.0;
  double energy_level = 0.0;
};

struct QuadratureOptions {
  double rel_tol = 1e-10;
  unsigned max_depth = 14;
};

/// Inside w0 - w_- < kCenterBand * w0 the time map returns its centre limit.
inline constexpr double kCenterBand = 1e-8;

namespace detail {

/// Shrinks [lo, hi] around the sign change of g until the midpoint is no
/// longer representable between the ends. g(lo) < 0 < g(hi).
template <class G>
double bisect_increasing(G&& g, double lo, double hi) {
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Integral from the centre to the turning point w0 + u_end of
/// dw / sqrt(2 [F(w0+u_end) - F(w)]).
///
/// With w = w0 + sin(phi) u_end the potential gap equals cos^2(phi) G(phi)
/// where G stays positive on [0, pi/2], so the integrand |u_end|/sqrt(2G) is
/// bounded and smooth. G is assembled from pieces that avoid cancellation.
inline double half_swing(double u_end, const ModelParams& p, const QuadratureOptions& opt) {
  const double w0 = w0_const(p);
  const double scale = p.kinetic_scale();
  const double curvature = p.lambda * w0 / (1.0 + w0);
  const double t = u_end / (1.0 + w0);
  const double amp = std::abs(u_end);
  // Lower swing near the saddle: expand the gap about the turning point
  // w_- instead, with delta = w - w_- = |u_end| (1 - sin phi):
  //   gap = -f(w_-) delta - f'(w_-) delta^2/2 - K c3(delta/(1+w_-)).
  const double w_turn = w0 + u_end;
  const bool near_saddle = u_end < 0.0 && w_turn < 0.25 * w0 && kinetic_df(w_turn, p) < 0.0;
  const double f_turn = kinetic_f(w_turn, p);
  const double df_turn = kinetic_df(w_turn, p);
  auto saddle_integrand = [&](double phi) {
    const double half_gap = std::sin(0.25 * std::numbers::pi - 0.5 * phi);
    const double one_minus = 2.0 * half_gap * half_gap;  // 1 - sin(phi)
    const double delta = amp * one_minus;
    const double q = delta / (1.0 + w_turn);
    const double c3_over_delta = q == 0.0 ? 0.0 : log1p_cubic_remainder(q) / q / (1.0 + w_turn);
    const double G =
        amp * (-f_turn - 0.5 * df_turn * delta - scale * c3_over_delta) / (2.0 - one_minus);
    if (!(G > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return amp / std::sqrt(2.0 * G);
  };
  auto integrand = [&](double phi) {
    if (near_saddle) return saddle_integrand(phi);
    const double s = std::sin(phi);
    const double c = std::cos(phi);
    const double m = 1.0 / (1.0 + s);
    const double one_plus = 1.0 + s * t;  // (1+w)/(1+w0)
    const double e = t * m * c * c / one_plus;
    const double G = 0.5 * curvature * u_end * u_end +
                     scale * (t * m * (log1p_ratio(e) / one_plus - 1.0) + 0.5 * t * t);
    if (!(G > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return amp / std::sqrt(2.0 * G);
  };
  // Near the saddle the integrand peaks in a layer of width sqrt(w_-/w0)
  // below pi/2; panels shrink geometrically toward it.
  const double gap = 1.0 + u_end / w0;  // w_-/w0 on the lower swing
  int layers = 0;
  if (u_end < 0.0 && gap < 0.25) layers = static_cast<int>(std::ceil(-0.5 * std::log2(gap))) + 2;
  const double half_pi = 0.5 * std::numbers::pi;
  double value = 0.0;
  double error = 0.0;
  double lo = 0.0;
  for (int k = 1; k <= layers + 1; ++k) {
    const double hi = k <= layers ? half_pi - half_pi * std::ldexp(1.0, -k) : half_pi;
    // Each panel is mapped onto [-1, 1]: the library reports subinterval
    // errors in reference-interval units, which overstates them on narrow panels.
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double e = 0.0;
    double l1 = 0.0;
    value += half * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                        [&](double s) { return integrand(mid + half * s); }, -1.0, 1.0,
                        opt.max_depth, opt.rel_tol, &e, &l1);
    error += half * e;
    lo = hi;
  }
  if (!std::isfinite(value) || error > opt.rel_tol * std::abs(value)) {
    std::ostringstream os;
    os.precision(6);
    os << "time-map quadrature did not converge (estimate " << value << ", error " << error
       << ")";
    throw QuadratureError(os.str());
  }
  return value;
}

}  // namespace detail

/// w_h > w0 with F(w_h) = 0: the right end of the homoclinic loop.
inline double homoclinic_extent(const ModelParams& p) {
  const double w0 = w0_const(p);
  double step = std::max(w0, 1.0);
  double hi = w0 + step;
  while (potential_F(hi, p) <= 0.0) {
    step *= 2.0;
    hi = w0 + step;
  }
  return detail::bisect_increasing([&](double w) { return potential_F(w, p); }, w0, hi);
}

/// Turning point w_+ in (w0, w_h) on the orbit through (w_minus, 0).
inline double companion(double w_minus, const ModelParams& p) {
  const double w0 = w0_const(p);
  if (!(w_minus > 0.0 && w_minus < w0)) {
    std::ostringstream os;
    os.precision(17);
    os << "w_minus = " << w_minus << " outside (0, w0) = (0, " << w0 << ")";
    throw DomainError(os.str());
  }
  const double target = potential_offset(w_minus - w0, p);
  const double u_h = homoclinic_extent(p) - w0;
  const double u = detail::bisect_increasing(
      [&](double v) { return potential_offset(v, p) - target; }, 0.0, u_h);
  return w0 + u;
}

/// pi / sqrt(lambda (1 - d lambda/(b mu))) = pi / sqrt(F''(w0)).
inline double time_map_center(const ModelParams& p) {
  p.require_limit_range();
  return std::numbers::pi / std::sqrt(p.lambda * (1.0 - p.lambda / p.kinetic_scale()));
}

/// Half-period of the periodic orbit through (w_minus, 0).
inline TimeMapSample time_map(double w_minus, const ModelParams& p,
                              const QuadratureOptions& opt = {}) {
  const double w0 = w0_const(p);
  TimeMapSample s;
  s.w_minus = w_minus;
  s.w_plus = companion(w_minus, p);
  s.energy_level = potential_F(w_minus, p);
  if (w0 - w_minus < kCenterBand * w0) {
    s.T = time_map_center(p);
    return s;
  }
  s.T = detail::half_swing(w_minus - w0, p, opt) + detail::half_swing(s.w_plus - w0, p, opt);
  return s;
}

/// T sampled on `count` points spread uniformly over the open interval (0, w0).
inline std::vector<TimeMapSample> time_map_sweep(const ModelParams& p, int count,
                                                 const QuadratureOptions& opt = {}) {
  if (count < 1) throw DomainError("sample count must be positive");
  const double w0 = w0_const(p);
  std::vector<TimeMapSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 1; i <= count; ++i) out.push_back(time_map(w0 * i / (count + 1.0), p, opt));
  return out;
}

/// True iff T strictly decreases along the ascending grid.
inline bool monotone_check(const ModelParams& p, std::span<const double> grid,
                           const QuadratureOptions& opt = {}) {
  double prev = std::numeric_limits<double>::infinity();
  double prev_w = -std::numeric_limits<double>::infinity();
  for (double w : grid) {
    if (!(w > prev_w)) throw DomainError("monotone_check needs an ascending grid");
    const double T = time_map(w, p, opt).T;
    if (!(T < prev)) return false;
    prev = T;
    prev_w = w;
  }
  return true;
}

/// Pointwise certification of the two sufficient conditions for a monotone
/// time map: f'f''' - (5/3)(f'')^2 < 0 on (alpha, w_h] and
/// f f'' - 3 (f')^2 <= 0 on [0, alpha], where alpha is the zero of f'.
struct ABReport {
  double alpha = 0.0;
  bool a_condition_ok = false;
  bool b_condition_ok = false;
  /// Largest sampled value of either expression; negative when both hold strictly.
  double worst_margin = 0.0;
  double a_margin = 0.0;
  double b_margin = 0.0;
  /// f' changes sign exactly once on the samples, at alpha, with f''(alpha) > 0.
  bool single_critical_point = false;
  double w_h = 0.0;
  int samples = 0;
};

inline double a_expression(double w, const ModelParams& p) {
  const double f2 = kinetic_d2f(w, p);
  return kinetic_df(w, p) * kinetic_d3f(w, p) - 5.0 / 3.0 * f2 * f2;
}

inline double b_expression(double w, const ModelParams& p) {
  const double f1 = kinetic_df(w, p);
  return kinetic_f(w, p) * kinetic_d2f(w, p) - 3.0 * f1 * f1;
}

inline ABReport ab_certify(const ModelParams& p, int n_samples = 10000) {
  if (n_samples < 2) throw DomainError("ab_certify needs at least 2 samples");
  p.require_limit_range();
  ABReport r;
  r.alpha = std::sqrt(p.kinetic_scale() / p.lambda) - 1.0;
  r.w_h = homoclinic_extent(p);
  r.samples = n_samples;
  r.a_margin = -std::numeric_limits<double>::infinity();
  r.b_margin = -std::numeric_limits<double>::infinity();
  int sign_changes = 0;
  int last_sign = 0;
  for (int i = 0; i < n_samples; ++i) {
    const double w = r.w_h * i / (n_samples - 1.0);
    if (w > r.alpha)
      r.a_margin = std::max(r.a_margin, a_expression(w, p));
    else
      r.b_margin = std::max(r.b_margin, b_expression(w, p));
    const double df = kinetic_df(w, p);
    const int s = df > 0 ? 1 : (df < 0 ? -1 : 0);
    if (s != 0 && last_sign != 0 && s != last_sign) ++sign_changes;
    if (s != 0) last_sign = s;
  }
  r.a_condition_ok = r.a_margin < 0.0;
  r.b_condition_ok = r.b_margin <= 0.0;
  r.worst_margin = std::max(r.a_margin, r.b_margin);
  r.single_critical_point = sign_changes == 1 && kinetic_d2f(r.alpha, p) > 0.0 &&
                            r.alpha > 0.0 && r.alpha < r.w_h;
  return r;
}

}  // namespace htbif
