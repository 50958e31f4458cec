#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "htbif/errors.hpp"

namespace htbif {

/// Samples of a function on the closed uniform grid x_i = i/(n-1) of [0,1].
///
/// The grid always contains both endpoints. Odd sizes are preferred so that
/// x = 1/2 is a node, but this is not enforced.
template <class Real>
class BasicProfile {
 public:
  using value_type = Real;

  BasicProfile() = default;

  explicit BasicProfile(std::size_t n_points, Real fill = Real(0))
      : values_(n_points, fill) {
    check_size();
  }

  explicit BasicProfile(std::vector<Real> values) : values_(std::move(values)) {
    check_size();
  }

  template <class F>
  static BasicProfile sample(std::size_t n_points, F&& f) {
    BasicProfile out(n_points);
    for (std::size_t i = 0; i < n_points; ++i) out.values_[i] = static_cast<Real>(f(out.x(i)));
    return out;
  }

  template <class Other>
  static BasicProfile convert(const BasicProfile<Other>& other) {
    std::vector<Real> v(other.size());
    std::transform(other.begin(), other.end(), v.begin(),
                   [](Other x) { return static_cast<Real>(x); });
    return BasicProfile(std::move(v));
  }

  std::size_t size() const noexcept { return values_.size(); }
  double step() const noexcept { return 1.0 / static_cast<double>(values_.size() - 1); }
  double x(std::size_t i) const noexcept {
    return static_cast<double>(i) / static_cast<double>(values_.size() - 1);
  }

  Real& operator[](std::size_t i) { return values_[i]; }
  const Real& operator[](std::size_t i) const { return values_[i]; }
  Real front() const { return values_.front(); }
  Real back() const { return values_.back(); }

  std::span<Real> values() noexcept { return values_; }
  std::span<const Real> values() const noexcept { return values_; }
  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

 private:
  void check_size() const {
    if (values_.size() < 3)
      throw DomainError("profile needs at least 3 grid points, got " +
                        std::to_string(values_.size()));
  }

  std::vector<Real> values_;
};

using Profile = BasicProfile<double>;
/// Extended-precision profile used by the coupled Newton solver.
using ExtProfile = BasicProfile<long double>;

template <class Real>
void require_same_grid(const BasicProfile<Real>& a, const BasicProfile<Real>& b,
                       const char* what) {
  if (a.size() != b.size())
    throw GridMismatchError(std::string(what) + ": grids differ (" + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()) + " points)");
}

template <class Real>
Real sup_norm(const BasicProfile<Real>& p) {
  Real m = 0;
  for (Real v : p) m = std::max(m, std::abs(v));
  return m;
}

template <class Real>
Real sup_distance(const BasicProfile<Real>& a, const BasicProfile<Real>& b) {
  require_same_grid(a, b, "sup_distance");
  Real m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <class Real>
Real min_value(const BasicProfile<Real>& p) {
  return *std::min_element(p.begin(), p.end());
}

template <class Real>
Real max_value(const BasicProfile<Real>& p) {
  return *std::max_element(p.begin(), p.end());
}

/// Composite Simpson rule over [0,1]; falls back to the trapezoid rule on the
/// last interval when the number of intervals is odd.
inline double simpson(std::span<const double> f) {
  const std::size_t n = f.size();
  if (n < 3) throw DomainError("simpson needs at least 3 samples");
  const double h = 1.0 / static_cast<double>(n - 1);
  const std::size_t intervals = n - 1;
  const std::size_t even = intervals - intervals % 2;
  double s = 0.0;
  for (std::size_t i = 0; i + 2 <= even; i += 2) s += f[i] + 4.0 * f[i + 1] + f[i + 2];
  s *= h / 3.0;
  if (even != intervals) s += 0.5 * h * (f[n - 2] + f[n - 1]);
  return s;
}

inline double integrate(const Profile& p) { return simpson(p.values()); }

/// Integral over [0,1] of the pointwise product of two profiles.
inline double inner(const Profile& a, const Profile& b) {
  require_same_grid(a, b, "inner");
  std::vector<double> prod(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) prod[i] = a[i] * b[i];
  return simpson(prod);
}

inline double l2_norm(const Profile& p) { return std::sqrt(inner(p, p)); }

/// Number of sign changes of (p - level) along the grid. A node exactly at the
/// level takes the sign of the next node that is not.
template <class Real>
int count_crossings(const BasicProfile<Real>& p, Real level) {
  int crossings = 0;
  int last = 0;
  for (Real v : p) {
    const Real d = v - level;
    const int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (s == 0) continue;
    if (last != 0 && s != last) ++crossings;
    last = s;
  }
  return crossings;
}

}  // namespace htbif
