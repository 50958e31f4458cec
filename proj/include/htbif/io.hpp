#pragma once

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "htbif/errors.hpp"
#include "htbif/linstab.hpp"
#include "htbif/model.hpp"
#include "htbif/nodal.hpp"
#include "htbif/perturbed.hpp"

namespace htbif {

inline constexpr const char* kSchema = "htbif/1";

/// 17 significant digits, enough to round-trip a double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Headered CSV table of preformatted cells.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) throw Error("CSV row width does not match the header");
    rows_.push_back(std::move(cells));
  }

  template <class... Ts>
  void add(const Ts&... cells) {
    add_row({cell(cells)...});
  }

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void write(std::ostream& os) const {
    write_line(os, header_);
    for (const auto& r : rows_) write_line(os, r);
  }

  std::string str() const {
    std::ostringstream os;
    write(os);
    return os.str();
  }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parses the unquoted CSV produced by CsvTable.
inline CsvTable parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : l) {
      if (ch == ',') {
        cells.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur += ch;
      }
    }
    cells.push_back(cur);
    return cells;
  };
  if (!std::getline(is, line)) throw IoError("empty CSV input");
  CsvTable t(split(line));
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) t.add_row(split(line));
  }
  return t;
}

// JSON views of the domain types.

inline nlohmann::json profile_json(const Profile& p) {
  return nlohmann::json(std::vector<double>(p.begin(), p.end()));
}

inline nlohmann::json profile_json(const ExtProfile& p) {
  std::vector<double> v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v[i] = static_cast<double>(p[i]);
  return nlohmann::json(v);
}

inline nlohmann::json params_json(const ModelParams& p) {
  nlohmann::json j;
  j["b"] = p.b;
  j["d"] = p.d;
  j["lambda"] = p.lambda;
  j["mu"] = p.mu;
  j["eps"] = p.eps;
  auto coeff = [](const CoeffFn& c) -> nlohmann::json {
    if (c.is_constant()) return "const:" + format_double(c.constant_value());
    return {{"x", c.xs()}, {"y", c.ys()}};
  };
  j["a"] = coeff(p.coeff_a);
  j["c"] = coeff(p.coeff_c);
  return j;
}

inline nlohmann::json state_json(const CoexistenceState& s, bool with_profiles = true) {
  nlohmann::json j;
  j["origin"] = to_string(s.origin);
  j["lambda"] = s.lambda;
  j["mu"] = s.mu;
  j["eps"] = s.eps;
  j["residual_sup"] = s.residual_sup;
  j["newton_iters"] = s.newton_iters;
  j["n_points"] = s.w.size();
  j["w_min"] = static_cast<double>(min_value(s.w));
  j["w_max"] = static_cast<double>(max_value(s.w));
  j["v_min"] = static_cast<double>(min_value(s.v));
  j["v_max"] = static_cast<double>(max_value(s.v));
  if (with_profiles) {
    j["w"] = profile_json(s.w);
    j["v"] = profile_json(s.v);
  }
  return j;
}

inline nlohmann::json census_json(const CensusResult& c, const ModelParams& p,
                                  bool with_profiles = false) {
  nlohmann::json j;
  j["schema"] = kSchema;
  j["n"] = c.n;
  j["lambda"] = c.lambda;
  j["mu"] = c.mu;
  j["eps"] = c.eps;
  j["starts"] = c.starts;
  j["distinct_count"] = c.distinct_count;
  j["shortfall"] = c.shortfall;
  j["crossings_preserved"] = c.crossings_preserved;
  j["params"] = params_json(p);
  j["states"] = nlohmann::json::array();
  for (const auto& s : c.states) {
    nlohmann::json e = state_json(s, with_profiles);
    e["crossings"] = state_crossings(s, p);
    j["states"].push_back(std::move(e));
  }
  j["failures"] = nlohmann::json::array();
  for (const auto& [origin, msg] : c.failures)
    j["failures"].push_back({{"origin", origin}, {"error", msg}});
  return j;
}

inline nlohmann::json expansion_json(const ExpansionCheck& e, const ModelParams& p) {
  nlohmann::json j;
  j["schema"] = kSchema;
  j["n"] = e.n;
  j["side"] = to_string(e.side);
  j["lambda_star"] = bifurcation_point(e.n, e.side, p);
  j["eta1_estimate"] = e.eta1_estimate;
  j["eta2_estimate"] = e.eta2_estimate;
  j["eta3_estimate"] = e.eta3_estimate;
  j["eta2_closed_form"] = e.eta2_closed_form;
  j["y1_l2_error"] = e.y1_l2_error;
  j["y1_amplitude"] = e.y1_amplitude;
  j["s_max"] = e.s_max;
  j["points_used"] = e.points_used;
  j["params"] = params_json(p);
  return j;
}

// Bifurcation diagram.

struct DiagramInput {
  double b = 1.0;
  double d = 1.0;
  double mu = 50.0;
  std::vector<LoopTrace> loops;
  /// Vertical clip for the constant branch, which is unbounded as lambda -> 0.
  double ceiling = 0.0;
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace detail

/// Standalone SVG: lambda horizontally, w(0) vertically. The constant
/// branch w0 = b mu/(d lambda) - 1 is drawn over (0, b mu/d), clipped at the
/// ceiling; each loop is drawn closed through its two bifurcation points.
inline void emit_diagram(const DiagramInput& in, std::ostream& os) {
  const double K = in.b * in.mu / in.d;
  if (!(K > 0.0)) throw DomainError("diagram needs b mu/d > 0");
  double top = 0.0;
  for (const auto& L : in.loops)
    for (const auto& pt : L.points) top = std::max(top, pt.w_start_upper);
  double ceiling = in.ceiling;
  if (!(ceiling > 0.0)) ceiling = top > 0.0 ? 1.5 * top : 9.0;  // w0 at lambda = K/10

  const double W = 800, H = 500, left = 70, right = 20, upper = 20, lower = 50;
  auto X = [&](double l) { return left + (W - left - right) * l / K; };
  auto Y = [&](double w) { return H - lower - (H - upper - lower) * std::min(w, ceiling) / ceiling; };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W << ' ' << H
     << "\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << H - lower << "\" x2=\"" << W - right << "\" y2=\""
     << H - lower << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << upper << "\" x2=\"" << left << "\" y2=\""
     << H - lower << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">lambda (0 to "
     << detail::svg_num(K) << ")</text>\n";
  os << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
     << ")\" text-anchor=\"middle\">w(0), clipped at " << detail::svg_num(ceiling) << "</text>\n";

  // Constant branch, starting where it enters the ceiling.
  const double l_start = K / (1.0 + ceiling);
  os << "<polyline id=\"constant\" fill=\"none\" stroke=\"black\" points=\"";
  os << detail::svg_num(X(0.0)) << ',' << detail::svg_num(Y(ceiling));
  constexpr int kSegments = 400;
  for (int i = 0; i <= kSegments; ++i) {
    const double l = l_start + (K - l_start) * i / kSegments;
    os << ' ' << detail::svg_num(X(l)) << ',' << detail::svg_num(Y(K / l - 1.0));
  }
  os << "\"/>\n";

  const char* colours[] = {"#c0392b", "#2471a3", "#239b56", "#7d3c98", "#b9770e"};
  for (std::size_t k = 0; k < in.loops.size(); ++k) {
    const LoopTrace& L = in.loops[k];
    os << "<polygon id=\"loop-" << L.n << "\" fill=\"none\" stroke=\"" << colours[k % 5]
       << "\" points=\"";
    os << detail::svg_num(X(L.lambda_minus)) << ',' << detail::svg_num(Y(K / L.lambda_minus - 1.0));
    for (const auto& pt : L.points)
      os << ' ' << detail::svg_num(X(pt.lambda)) << ',' << detail::svg_num(Y(pt.w_minus_lower));
    os << ' ' << detail::svg_num(X(L.lambda_plus)) << ','
       << detail::svg_num(Y(K / L.lambda_plus - 1.0));
    for (auto it = L.points.rbegin(); it != L.points.rend(); ++it)
      os << ' ' << detail::svg_num(X(it->lambda)) << ',' << detail::svg_num(Y(it->w_start_upper));
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw IoError("write to '" + path + "' failed");
}

/// Throws IoError unless the directory that will hold `path` exists.
inline void require_writable_target(const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::absolute(fs::path(path)).parent_path();
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw IoError("output directory '" + dir.string() + "' does not exist");
}

}  // namespace htbif
