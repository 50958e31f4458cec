#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "htbif/errors.hpp"

namespace htbif {

/// Non-negative coefficient function on [0,1]: either a constant or a
/// piecewise-linear interpolant of samples.
class CoeffFn {
 public:
  CoeffFn() = default;

  static CoeffFn constant(double value) {
    if (!(value >= 0.0) || !std::isfinite(value))
      throw DomainError("coefficient constant must be finite and non-negative, got " +
                        std::to_string(value));
    CoeffFn c;
    c.xs_ = {0.0, 1.0};
    c.ys_ = {value, value};
    c.constant_ = true;
    return c;
  }

  static CoeffFn sampled(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
      throw DomainError("sampled coefficient needs at least two (x, value) pairs");
    if (xs.front() != 0.0 || xs.back() != 1.0)
      throw DomainError("sampled coefficient must start at x = 0 and end at x = 1");
    for (std::size_t i = 1; i < xs.size(); ++i)
      if (!(xs[i] > xs[i - 1]))
        throw DomainError("sampled coefficient abscissae must be strictly ascending");
    for (double y : ys)
      if (!(y >= 0.0) || !std::isfinite(y))
        throw DomainError("sampled coefficient values must be finite and non-negative");
    CoeffFn c;
    c.xs_ = std::move(xs);
    c.ys_ = std::move(ys);
    c.constant_ = std::all_of(c.ys_.begin(), c.ys_.end(),
                              [&](double y) { return y == c.ys_.front(); });
    return c;
  }

  double operator()(double x) const {
    if (constant_) return ys_.front();
    if (x <= 0.0) return ys_.front();
    if (x >= 1.0) return ys_.back();
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - xs_.begin());
    const double t = (x - xs_[j - 1]) / (xs_[j] - xs_[j - 1]);
    return ys_[j - 1] + t * (ys_[j] - ys_[j - 1]);
  }

  bool is_constant() const noexcept { return constant_; }
  double constant_value() const {
    if (!constant_) throw DomainError("coefficient is not constant");
    return ys_.front();
  }
  bool identically_zero() const noexcept {
    return std::all_of(ys_.begin(), ys_.end(), [](double y) { return y == 0.0; });
  }

  const std::vector<double>& xs() const noexcept { return xs_; }
  const std::vector<double>& ys() const noexcept { return ys_; }

 private:
  std::vector<double> xs_{0.0, 1.0};
  std::vector<double> ys_{1.0, 1.0};
  bool constant_ = true;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

/// Reads a two-column (x, value) CSV. A non-numeric first line is treated as
/// a header; a UTF-8 byte-order mark and CRLF line endings are accepted.
inline CoeffFn load_coeff_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open coefficient file '" + path + "'");
  std::vector<double> xs, ys;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (lineno == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto comma = view.find(',');
    double x = 0, y = 0;
    const bool ok = comma != std::string_view::npos &&
                    detail::parse_double(view.substr(0, comma), x) &&
                    detail::parse_double(view.substr(comma + 1), y);
    if (!ok) {
      if (xs.empty() && lineno == 1) continue;  // header
      throw IoError(path + ":" + std::to_string(lineno) + ": expected 'x,value'");
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  return CoeffFn::sampled(std::move(xs), std::move(ys));
}

/// Parses `const:<v>` or `csv:<path>`.
inline CoeffFn parse_coeff_spec(const std::string& spec) {
  if (spec.starts_with("const:")) {
    double v = 0;
    if (!detail::parse_double(std::string_view(spec).substr(6), v))
      throw DomainError("bad constant in coefficient spec '" + spec + "'");
    return CoeffFn::constant(v);
  }
  if (spec.starts_with("csv:")) return load_coeff_csv(spec.substr(4));
  throw DomainError("coefficient spec must be 'const:<v>' or 'csv:<path>', got '" + spec + "'");
}

}  // namespace htbif
