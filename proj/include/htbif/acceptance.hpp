#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "htbif/errors.hpp"
#include "htbif/expansion.hpp"
#include "htbif/linstab.hpp"
#include "htbif/model.hpp"
#include "htbif/nodal.hpp"
#include "htbif/perturbed.hpp"
#include "htbif/spectral.hpp"
#include "htbif/timemap.hpp"

namespace htbif::acceptance {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id = 0;
  std::string name;
  /// Wall-clock budget in seconds.
  double budget = 0.0;
  std::function<Outcome()> run;
};

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline std::string fix(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

/// Collects notes and failed checks for one criterion.
class Tally {
 public:
  void check(bool cond, const std::string& what) {
    ok_ = ok_ && cond;
    if (!cond) failed_.push_back(what);
  }
  void note(const std::string& s) { notes_.push_back(s); }

  Outcome done() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < notes_.size(); ++i) os << (i ? "; " : "") << notes_[i];
    if (!failed_.empty()) {
      os << " | failed:";
      for (const auto& f : failed_) os << ' ' << f;
    }
    return {ok_, os.str()};
  }

 private:
  bool ok_ = true;
  std::vector<std::string> notes_;
  std::vector<std::string> failed_;
};

}  // namespace detail

inline Outcome spectral_exactness() {
  const ModelParams p = ModelParams::desk_scale();
  const EigencurveRoot r = lambda_roots(1, p);
  detail::Tally L;
  const double tm = std::abs(tau0(1, r.lambda_minus, p));
  const double tp = std::abs(tau0(1, r.lambda_plus, p));
  const double sum = detail::rel(r.lambda_minus + r.lambda_plus, 50.0);
  const double prod = detail::rel(r.lambda_minus * r.lambda_plus, 50.0 * std::numbers::pi * std::numbers::pi);
  L.note("|tau(l-)|=" + detail::sci(tm) + " |tau(l+)|=" + detail::sci(tp));
  L.note("sum rel=" + detail::sci(sum) + " product rel=" + detail::sci(prod));
  L.check(r.is_real, "roots not real");
  L.check(tm < 1e-12 && tp < 1e-12, "tau");
  L.check(sum < 1e-12, "sum");
  L.check(prod < 1e-12, "product");
  return L.done();
}

inline Outcome threshold_coincidence() {
  detail::Tally L;
  for (int k = 1; k <= 3; ++k) {
    const ModelParams base = ModelParams::desk_scale();
    const ModelParams p = base.with_mu(mu_threshold(k, base));
    const EigencurveRoot r = lambda_roots(k, p);
    const double target = p.b * p.mu / (2.0 * p.d);
    const double err = std::max(detail::rel(r.lambda_minus, target), detail::rel(r.lambda_plus, target));
    L.note("k=" + std::to_string(k) + " rel=" + detail::sci(err));
    L.check(r.is_real && r.lambda_minus == r.lambda_plus, "k=" + std::to_string(k) + " not double");
    L.check(err < 1e-12, "k=" + std::to_string(k) + " value");
  }
  return L.done();
}

inline Outcome time_map_center_limit() {
  const ModelParams p = ModelParams::desk_scale();
  const double w0 = w0_const(p);
  const double T = time_map(w0 * (1.0 - 1e-6), p).T;
  const double centre = std::numbers::pi / std::sqrt(p.lambda * (1.0 - p.d * p.lambda / (p.b * p.mu)));
  const double err = std::abs(T - centre) / T;
  detail::Tally L;
  L.note("T=" + detail::fix(T) + " centre=" + detail::fix(centre) + " rel=" + detail::sci(err));
  L.check(err < 1e-5, "centre limit");
  return L.done();
}

inline Outcome time_map_monotone() {
  const ModelParams p = ModelParams::desk_scale();
  const double w0 = w0_const(p);
  std::vector<double> grid;
  for (int i = 1; i <= 200; ++i) grid.push_back(w0 * i / 201.0);
  const bool mono = monotone_check(p, grid);
  const double T_small = time_map(1e-6 * w0, p).T;
  const double T_centre = time_map_center(p);
  detail::Tally L;
  L.note(std::string("strictly decreasing on 200 points: ") + (mono ? "yes" : "no"));
  L.note("T(1e-6 w0)/T(w0)=" + detail::fix(T_small / T_centre) + " (needs > 5)");
  L.note("T(1e-10 w0)/T(w0)=" + detail::fix(time_map(1e-10 * w0, p).T / T_centre));
  L.check(mono, "monotonicity");
  L.check(T_small > 5.0 * T_centre, "divergence ratio");
  return L.done();
}

inline Outcome ab_certification() {
  const ABReport r = ab_certify(ModelParams::desk_scale(), 10000);
  detail::Tally L;
  L.note("A margin=" + detail::sci(r.a_margin) + " B margin=" + detail::sci(r.b_margin) +
         " alpha=" + detail::fix(r.alpha) + " w_h=" + detail::fix(r.w_h));
  L.check(r.a_margin < 0.0, "A");
  L.check(r.b_margin < 0.0, "B");
  L.check(r.single_critical_point, "critical point");
  return L.done();
}

inline Outcome exact_multiplicity() {
  const ModelParams p = ModelParams::desk_scale();
  detail::Tally L;
  const double w0 = w0_const(p);
  const auto [lo, up] = nodal_pair(1, p);
  const Profile constant(static_cast<std::size_t>(kDefaultPoints), w0);
  const std::vector<const Profile*> sols{&constant, &lo.profile, &up.profile};
  int distinct = 0;
  for (std::size_t i = 0; i < sols.size(); ++i) {
    bool dup = false;
    for (std::size_t j = 0; j < i; ++j) dup = dup || sup_distance(*sols[i], *sols[j]) < 1e-6;
    if (!dup) ++distinct;
    L.check(min_value(*sols[i]) > 0.0, "positivity");
  }
  const double r_const = bvp_residual(constant, p);
  const double r_lo = bvp_residual(lo.profile, p);
  const double r_up = bvp_residual(up.profile, p);
  L.note("solutions=" + std::to_string(distinct) + " residuals=" + detail::sci(r_const) + "," +
         detail::sci(r_lo) + "," + detail::sci(r_up));
  L.note("crossings=" + std::to_string(lo.crossings) + "," + std::to_string(up.crossings));
  L.check(distinct == 3, "count");
  L.check(r_const < 1e-6 && r_lo < 1e-6 && r_up < 1e-6, "residual");
  L.check(lo.crossings == 1 && up.crossings == 1, "crossings");
  const EigencurveRoot roots = lambda_roots(1, p);
  int refused = 0;
  for (double l : {0.5 * roots.lambda_minus, roots.lambda_minus - 0.1, roots.lambda_plus + 0.1,
                   0.5 * (roots.lambda_plus + p.kinetic_scale())}) {
    try {
      nodal_pair(1, p.with_lambda(l));
    } catch (const NoSolutionError&) {
      ++refused;
    }
  }
  L.note("outside-window refusals=" + std::to_string(refused) + "/4");
  L.check(refused == 4, "no-solution error");
  return L.done();
}

inline Outcome quadrature_ode_cross_oracle() {
  const ModelParams p = ModelParams::desk_scale();
  const double w0 = w0_const(p);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double wm = w0 * (k + 0.5) / 20.0;
    const TimeMapSample s = time_map(wm, p);
    const int steps = static_cast<int>(std::ceil(s.T / 1e-4));
    const PhaseState end = integrate_orbit({wm, 0.0}, s.T, steps, p);
    worst = std::max({worst, std::abs(end.w - s.w_plus), std::abs(end.z)});
  }
  detail::Tally L;
  L.note("worst landing error over 20 orbits=" + detail::sci(worst));
  L.check(worst < 1e-6, "landing");
  return L.done();
}

inline Outcome morse_indices() {
  const ModelParams p = ModelParams::desk_scale();
  detail::Tally L;
  const int m_const = morse_index_constant(p);
  const auto [lo, up] = nodal_pair(1, p);
  const int m_lo = morse_index_nodal(lo, p).index;
  const int m_up = morse_index_nodal(up, p).index;
  L.note("constant=" + std::to_string(m_const) + " lower=" + std::to_string(m_lo) +
         " upper=" + std::to_string(m_up));
  L.check(m_const == 2 && m_lo == 1 && m_up == 1, "indices");

  int mismatches = 0;
  const double K = p.kinetic_scale();
  for (int k = 1; k <= 50; ++k) {
    const ModelParams q = p.with_lambda(K * k / 51.0);
    if (morse_index_constant(q) != morse_index_w0(q.lambda, q)) ++mismatches;
  }
  L.note("staircase mismatches over 50 lambda=" + std::to_string(mismatches));
  L.check(mismatches == 0, "staircase");

  const auto ratios = richardson_ratios(
      [&](std::size_t n) { return linearization_potential(nodal_pair(1, p, n).first.profile, p); },
      3, kDefaultPoints);
  std::string rs;
  bool in_range = true;
  for (double r : ratios) {
    rs += (rs.empty() ? "" : ",") + detail::fix(r);
    in_range = in_range && r >= 3.5 && r <= 4.5;
  }
  L.note("Richardson ratios=" + rs);
  L.check(in_range, "Richardson");
  return L.done();
}

inline Outcome sign_sandwich() {
  const ModelParams p = ModelParams::desk_scale();
  const EigencurveRoot r = lambda_roots(1, p);
  auto results = parallel_map<std::pair<double, double>>(50, [&](std::size_t k) {
    const double l = r.lambda_minus + (r.lambda_plus - r.lambda_minus) * (k + 1.0) / 51.0;
    const ModelParams q = p.with_lambda(l);
    const auto [lo, up] = nodal_pair(1, q);
    const MorseReport a = morse_index_nodal(lo, q), b = morse_index_nodal(up, q);
    return std::pair{std::max(a.tau_low, b.tau_low), std::min(a.tau_high, b.tau_high)};
  });
  double worst_low = -1e300, worst_high = 1e300;
  int failed = 0;
  for (std::size_t k = 0; k < 50; ++k) {
    if (!results.values[k]) {
      ++failed;
      continue;
    }
    worst_low = std::max(worst_low, results.values[k]->first);
    worst_high = std::min(worst_high, results.values[k]->second);
  }
  detail::Tally L;
  L.note("max tau_0=" + detail::sci(worst_low) + " min tau_1=" + detail::sci(worst_high));
  L.check(failed == 0, "nodal solve failures");
  L.check(worst_low <= 1e-6, "tau_0");
  L.check(worst_high >= -1e-6, "tau_1");
  return L.done();
}

inline Outcome bifurcation_direction() {
  const ModelParams p = ModelParams::desk_scale();
  detail::Tally L;
  for (Side side : {Side::minus, Side::plus}) {
    const ExpansionCheck e = fit_expansion(1, side, p);
    const std::string tag = to_string(side);
    const double want = side == Side::minus ? 1.0 : -1.0;
    L.note(tag + ": eta1=" + detail::sci(e.eta1_estimate) + " eta2=" + detail::sci(e.eta2_estimate) +
           " closed=" + detail::sci(e.eta2_closed_form) + " y1 err=" + detail::sci(e.y1_l2_error));
    L.check(std::abs(e.eta1_estimate) < 1e-3 * std::abs(e.eta2_estimate) * 0.05, tag + " eta1");
    L.check(e.eta2_estimate * want > 0.0, tag + " eta2 sign");
    L.check(e.eta2_closed_form * want > 0.0, tag + " closed-form sign");
    L.check(e.y1_l2_error < 0.05, tag + " y1");
  }
  return L.done();
}

inline Outcome closed_form_integral() {
  const ModelParams p = ModelParams::desk_scale();
  detail::Tally L;
  for (Side side : {Side::minus, Side::plus}) {
    const Profile y1 = y1_closed_form(1, side, p, kDefaultPoints);
    const Profile c2 = Profile::sample(kDefaultPoints, [](double x) {
      const double c = std::cos(std::numbers::pi * x);
      return c * c;
    });
    const double numeric = inner(c2, y1);
    const double ls = bifurcation_point(1, side, p);
    const double q = p.d * ls / (std::numbers::pi * p.b * p.mu);
    const double closed = -5.0 * ls / 24.0 * q * q;
    const double err = detail::rel(numeric, closed);
    L.note(std::string(to_string(side)) + " rel=" + detail::sci(err));
    L.check(err < 1e-8, to_string(side));
  }
  return L.done();
}

inline Outcome perturbed_census() {
  const ModelParams p = ModelParams::desk_scale().with_eps(1e-3);
  detail::Tally L;
  const CensusResult c = census(1, p);
  double worst_res = 0.0;
  bool positive = true;
  for (const auto& s : c.states) {
    worst_res = std::max(worst_res, s.residual_sup);
    positive = positive && min_value(s.w) > 0 && min_value(s.v) > 0;
  }
  L.note("distinct=" + std::to_string(c.distinct_count) + " max residual=" + detail::sci(worst_res));
  L.check(c.distinct_count == 3, "count");
  L.check(c.failures.empty(), "start failures");
  L.check(worst_res < 1e-9, "residual");
  L.check(positive, "positivity");
  L.check(c.crossings_preserved, "crossings");

  // Expansion about the lower nodal origin.
  const CoexistenceState* origin = nullptr;
  for (const auto& o : c.origins)
    if (o.origin.kind == Origin::Kind::nodal && o.origin.branch == Branch::lower) origin = &o;
  if (!origin) {
    L.check(false, "no nodal origin");
    return L.done();
  }
  const Profile w1 = origin->w_double();
  const Profile phi = first_order_corrections(w1, p.with_eps(0.0)).first;
  std::vector<double> C, E;
  for (double eps : {1e-2, 5e-3, 2.5e-3}) {
    const CoexistenceState s = newton_solve(origin->w, origin->v, p.with_eps(eps));
    const Profile W = s.w_double();
    double dist = 0.0, err = 0.0;
    for (std::size_t i = 0; i < W.size(); ++i) {
      dist = std::max(dist, std::abs(W[i] - w1[i]));
      err = std::max(err, std::abs((W[i] - w1[i]) / eps - phi[i]));
    }
    C.push_back(dist / eps);
    E.push_back(err);
  }
  L.note("C(eps)=" + detail::fix(C[0]) + "," + detail::fix(C[1]) + "," + detail::fix(C[2]));
  L.note("first-order error=" + detail::sci(E[0]) + "," + detail::sci(E[1]) + "," + detail::sci(E[2]));
  L.check(detail::rel(C[1], C[0]) < 0.1 && detail::rel(C[2], C[1]) < 0.1, "C stability");
  const double r1 = E[0] / E[1], r2 = E[1] / E[2];
  L.note("halving ratios=" + detail::fix(r1) + "," + detail::fix(r2));
  L.check(r1 > 1.6 && r1 < 2.4 && r2 > 1.6 && r2 < 2.4, "linear decrease");
  return L.done();
}

inline Outcome correction_positivity() {
  const ModelParams p = ModelParams::desk_scale();
  const auto origins = unperturbed_states(1, p);
  detail::Tally L;
  for (const auto& o : origins) {
    if (o.origin.kind != Origin::Kind::nodal) continue;
    const Profile psi = first_order_corrections(o.w_double(), p).second;
    L.note(to_string(o.origin) + " min psi=" + detail::sci(min_value(psi)));
    L.check(min_value(psi) > 0.0, to_string(o.origin));
  }
  return L.done();
}

inline Outcome jacobian_check() {
  ModelParams p = ModelParams::desk_scale().with_eps(0.05);
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const std::size_t n = 401;
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const double aw = U(rng), av = U(rng), kw = 1 + trial % 4, kv = 1 + (trial + 1) % 3;
    ExtProfile w(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = w.x(i);
      w[i] = 1.0 + 0.5 * aw * std::cos(kw * std::numbers::pi * x) + 0.05 * U(rng);
      v[i] = 50.0 + 5.0 * av * std::cos(kv * std::numbers::pi * x) + 0.5 * U(rng);
    }
    std::vector<double> dir(2 * n);
    for (double& d : dir) d = U(rng);
    const std::vector<double> Jd = jacobian(w, v, p).multiply(dir);
    const long double h = 1e-6L;
    ExtProfile wp = w, vp = v, wm = w, vm = v;
    for (std::size_t i = 0; i < n; ++i) {
      wp[i] += h * dir[w_index(i)];
      wm[i] -= h * dir[w_index(i)];
      vp[i] += h * dir[v_index(i)];
      vm[i] -= h * dir[v_index(i)];
    }
    const auto [gwp, gvp] = residual(wp, vp, p);
    const auto [gwm, gvm] = residual(wm, vm, p);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fw = static_cast<double>((gwp[i] - gwm[i]) / (2 * h));
      const double fv = static_cast<double>((gvp[i] - gvm[i]) / (2 * h));
      num += std::pow(fw - Jd[w_index(i)], 2) + std::pow(fv - Jd[v_index(i)], 2);
      den += Jd[w_index(i)] * Jd[w_index(i)] + Jd[v_index(i)] * Jd[v_index(i)];
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  detail::Tally L;
  L.note("worst relative directional mismatch over 10 states=" + detail::sci(worst));
  L.check(worst < 1e-5, "jacobian");
  return L.done();
}

/// Criteria 1-14; the determinism criterion needs a second process and lives
/// with the acceptance driver.
inline std::vector<Criterion> criteria() {
  return {
      {1, "spectral exactness", 1.0, spectral_exactness},
      {2, "threshold coincidence", 1.0, threshold_coincidence},
      {3, "time-map centre limit", 1.0, time_map_center_limit},
      {4, "time-map monotonicity and divergence", 10.0, time_map_monotone},
      {5, "A-B certification", 1.0, ab_certification},
      {6, "exact multiplicity at kappa = 1", 5.0, exact_multiplicity},
      {7, "quadrature/ODE cross-oracle", 10.0, quadrature_ode_cross_oracle},
      {8, "Morse indices", 30.0, morse_indices},
      {9, "sign sandwich", 30.0, sign_sandwich},
      {10, "bifurcation direction", 60.0, bifurcation_direction},
      {11, "closed-form integral identity", 1.0, closed_form_integral},
      {12, "perturbed census", 60.0, perturbed_census},
      {13, "correction positivity", 5.0, correction_positivity},
      {14, "Jacobian check", 10.0, jacobian_check},
  };
}

inline Outcome run_guarded(const Criterion& c) {
  try {
    return c.run();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

inline std::string format_line(const Criterion& c, const Outcome& o) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] %2d %-38s ", o.passed ? "PASS" : "FAIL", c.id, c.name.c_str());
  return head + o.detail;
}

}  // namespace htbif::acceptance
