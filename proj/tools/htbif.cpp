// htbif: command-line front end for the Holling-Tanner bifurcation toolkit.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "htbif/acceptance.hpp"
#include "htbif/htbif.hpp"

namespace {

using namespace htbif;

/// A precondition failure attributed to specific flags.
struct FlagError : Error {
  FlagError(const std::string& flags, const std::string& what) : Error(flags + ": " + what) {}
};

struct Common {
  double b = 1.0;
  double d = 1.0;
  double lambda = 25.0;
  double mu = 0.0;
  double eps = 0.0;
  std::string a_spec = "const:1";
  std::string c_spec = "const:1";
  std::string output = "-";
  std::size_t n_points = kDefaultPoints;
  double rel_tol = 1e-10;
  double newton_tol = 1e-10;

  ModelParams params() const {
    ModelParams p;
    p.b = b;
    p.d = d;
    p.lambda = lambda;
    p.mu = mu;
    p.eps = eps;
    try {
      p.coeff_a = parse_coeff_spec(a_spec);
    } catch (const Error& e) {
      throw FlagError("--a", e.what());
    }
    try {
      p.coeff_c = parse_coeff_spec(c_spec);
    } catch (const Error& e) {
      throw FlagError("--c", e.what());
    }
    return p;
  }

  QuadratureOptions quadrature() const { return {rel_tol, 14}; }
};

void add_bd(CLI::App* sub, Common& c) {
  sub->add_option("--b", c.b, "predation coefficient b")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--d", c.d, "predator crowding coefficient d")->check(CLI::PositiveNumber)->capture_default_str();
}

void add_mu(CLI::App* sub, Common& c) {
  sub->add_option("--mu", c.mu, "predator growth rate mu")->required()->check(CLI::PositiveNumber);
}

void add_lambda(CLI::App* sub, Common& c) {
  sub->add_option("--lambda", c.lambda, "prey growth rate lambda")->check(CLI::PositiveNumber)->capture_default_str();
}

void add_points(CLI::App* sub, Common& c) {
  sub->add_option("--n-points", c.n_points, "grid points on [0,1]")
      ->check(CLI::Range(std::size_t{5}, std::size_t{1} << 22))
      ->capture_default_str();
}

void add_output(CLI::App* sub, Common& c) {
  sub->add_option("-o,--output", c.output, "output file, '-' for stdout")->capture_default_str();
}

void emit(const Common& c, const std::string& text) {
  if (c.output == "-") {
    std::cout << text;
    return;
  }
  write_text_file(c.output, text);
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void require_lambda_range(const ModelParams& p) {
  if (!(p.lambda < p.kinetic_scale())) {
    std::ostringstream os;
    os << "lambda = " << p.lambda << " must lie in (0, b mu/d) = (0, " << p.kinetic_scale() << ")";
    throw FlagError("--lambda", os.str());
  }
}

void require_mode(int n, const ModelParams& p) {
  if (n < 1) throw FlagError("--n", "mode must be at least 1");
  if (!(p.mu > mu_threshold(n, p))) {
    std::ostringstream os;
    os << "mode " << n << " needs mu > mu_" << n << " = " << format_double(mu_threshold(n, p));
    throw FlagError("--mu", os.str());
  }
}

void require_window(int n, const ModelParams& p) {
  require_mode(n, p);
  const EigencurveRoot r = lambda_roots(n, p);
  if (!(p.lambda > r.lambda_minus && p.lambda < r.lambda_plus)) {
    std::ostringstream os;
    os << "lambda = " << p.lambda << " outside the mode-" << n << " window ("
       << format_double(r.lambda_minus) << ", " << format_double(r.lambda_plus) << ")";
    throw FlagError("--lambda", os.str());
  }
}

int run_seed_check() {
  int passed = 0;
  const auto list = acceptance::criteria();
  for (const auto& c : list) {
    const acceptance::Outcome o = acceptance::run_guarded(c);
    if (o.passed) ++passed;
    std::cout << acceptance::format_line(c, o) << '\n';
  }
  std::cout << passed << "/" << list.size() << " criteria passed\n";
  return passed == static_cast<int>(list.size()) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady-state bifurcation toolkit for the diffusive Holling-Tanner system"};
  app.set_config("--config", "", "TOML/INI file, one [subcommand] section of option values (flags take precedence)");
  bool seed_check = false;
  app.add_flag("--seed-check", seed_check, "run the acceptance suite at desk scale and print a pass/fail table");
  app.require_subcommand(0, 1);

  Common c;
  int kappa_max = 3;
  int ell_max = -1;
  int n_lambda = 0;
  int count = 200;
  int n = 1;
  std::string side = "minus";
  std::string format = "csv";
  double ceiling = 0.0;

  auto* eig = app.add_subcommand("eigencurves", "tau_{0,l}(lambda) over (0, b mu/d), CSV");
  add_bd(eig, c);
  add_mu(eig, c);
  eig->add_option("--ell-max", ell_max, "highest mode (default: enough to cover the window)");
  eig->add_option("--n-lambda", n_lambda, "lambda samples (default 200)")->check(CLI::PositiveNumber);
  add_output(eig, c);

  auto* crit = app.add_subcommand("critical", "critical values mu_kappa, CSV");
  add_bd(crit, c);
  crit->add_option("--kappa-max", kappa_max, "largest kappa")->check(CLI::NonNegativeNumber)->capture_default_str();
  add_output(crit, c);

  auto* tm = app.add_subcommand("timemap", "time map T(w_-) on (0, w0), CSV");
  add_bd(tm, c);
  add_mu(tm, c);
  add_lambda(tm, c);
  tm->add_option("--count", count, "samples")->check(CLI::PositiveNumber)->capture_default_str();
  tm->add_option("--rel-tol", c.rel_tol, "quadrature relative tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  add_output(tm, c);

  auto* nod = app.add_subcommand("nodal", "the two (n, w0)-nodal solutions, CSV or JSON");
  add_bd(nod, c);
  add_mu(nod, c);
  add_lambda(nod, c);
  nod->add_option("--n", n, "number of crossings of w0")->check(CLI::PositiveNumber)->capture_default_str();
  add_points(nod, c);
  nod->add_option("--rel-tol", c.rel_tol, "quadrature relative tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  nod->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  add_output(nod, c);

  auto* dia = app.add_subcommand("diagram", "bifurcation diagram, SVG");
  add_bd(dia, c);
  add_mu(dia, c);
  dia->add_option("--n-lambda", n_lambda, "lambda samples per loop (default 60)")->check(CLI::PositiveNumber);
  dia->add_option("--ceiling", ceiling, "vertical clip for the constant branch")->check(CLI::PositiveNumber);
  add_points(dia, c);
  add_output(dia, c);

  auto* mor = app.add_subcommand("morse", "Morse indices across the mode-n window, CSV");
  add_bd(mor, c);
  add_mu(mor, c);
  mor->add_option("--n", n, "mode")->check(CLI::PositiveNumber)->capture_default_str();
  mor->add_option("--n-lambda", n_lambda, "lambda samples (default 50)")->check(CLI::PositiveNumber);
  add_points(mor, c);
  add_output(mor, c);

  auto* bif = app.add_subcommand("bifdir", "local bifurcation expansion check, JSON");
  add_bd(bif, c);
  add_mu(bif, c);
  bif->add_option("--n", n, "mode")->check(CLI::PositiveNumber)->capture_default_str();
  bif->add_option("--side", side, "minus or plus")->check(CLI::IsMember({"minus", "plus"}))->capture_default_str();
  add_points(bif, c);
  add_output(bif, c);

  auto add_perturbed = [&](CLI::App* sub) {
    add_bd(sub, c);
    add_mu(sub, c);
    add_lambda(sub, c);
    sub->add_option("--eps", c.eps, "saturation parameter eps = 1/gamma")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--n", n, "largest nodal count in the census")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--a", c.a_spec, "coefficient a: const:<v> or csv:<path>")->capture_default_str();
    sub->add_option("--c", c.c_spec, "coefficient c: const:<v> or csv:<path>")->capture_default_str();
    sub->add_option("--newton-tol", c.newton_tol, "Newton residual target")->check(CLI::PositiveNumber)->capture_default_str();
    add_points(sub, c);
    add_output(sub, c);
  };
  auto* per = app.add_subcommand("perturb", "coexistence states at eps > 0 with profiles, JSON");
  add_perturbed(per);
  auto* cen = app.add_subcommand("census", "coexistence-state census, JSON");
  add_perturbed(cen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "htbif: " << e.what() << "\n";
    return 1;
  }

  if (seed_check) return run_seed_check();
  if (app.get_subcommands().empty()) {
    std::cerr << "htbif: a subcommand or --seed-check is required (see --help)\n";
    return 1;
  }
  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();

  try {
    if (c.output != "-") {
      try {
        require_writable_target(c.output);
      } catch (const IoError& e) {
        throw FlagError("--output", e.what());
      }
    }
    ModelParams p = c.params();

    if (sub == crit) {
      CsvTable t({"kappa", "mu_kappa", "lambda_double_root"});
      for (int k = 0; k <= kappa_max; ++k) {
        const double m = mu_threshold(k, p);
        t.add(k, m, p.b * m / (2.0 * p.d));
      }
      emit(c, t.str());
    } else if (sub == eig) {
      const int lmax = ell_max >= 0 ? ell_max : default_ell_max(p);
      const int count_l = n_lambda > 0 ? n_lambda : 200;
      CsvTable t({"lambda", "ell", "tau"});
      for (int k = 1; k <= count_l; ++k) {
        const double l = p.kinetic_scale() * k / (count_l + 1.0);
        for (int ell = 0; ell <= lmax; ++ell) t.add(l, ell, tau0(ell, l, p));
      }
      emit(c, t.str());
    } else if (sub == tm) {
      require_lambda_range(p);
      CsvTable t({"w_minus", "w_plus", "T", "energy_level"});
      for (const auto& s : time_map_sweep(p, count, c.quadrature()))
        t.add(s.w_minus, s.w_plus, s.T, s.energy_level);
      emit(c, t.str());
    } else if (sub == nod) {
      require_lambda_range(p);
      require_window(n, p);
      const auto [lo, up] = nodal_pair(n, p, c.n_points, c.quadrature());
      if (format == "json") {
        nlohmann::json j;
        j["schema"] = kSchema;
        j["n"] = n;
        j["params"] = params_json(p);
        j["w0"] = w0_const(p);
        for (const auto* s : {&lo, &up}) {
          nlohmann::json e;
          e["branch"] = to_string(s->branch);
          e["w_start"] = s->profile[0];
          e["crossings"] = s->crossings;
          e["bvp_residual"] = bvp_residual(s->profile, p);
          e["w"] = profile_json(s->profile);
          j["solutions"].push_back(std::move(e));
        }
        emit(c, dump(j));
      } else {
        CsvTable t({"x", "w_lower", "w_upper"});
        for (std::size_t i = 0; i < lo.profile.size(); ++i)
          t.add(lo.profile.x(i), lo.profile[i], up.profile[i]);
        emit(c, t.str());
      }
    } else if (sub == dia) {
      DiagramInput in;
      in.b = p.b;
      in.d = p.d;
      in.mu = p.mu;
      in.ceiling = ceiling;
      const int kappa = regime_kappa(p);
      for (int k = 1; k <= kappa; ++k) {
        LoopTrace L = trace_loop(k, p, n_lambda > 0 ? n_lambda : 60, c.n_points);
        for (const auto& [l, msg] : L.failures)
          std::cerr << "htbif diagram: loop " << k << " skipped lambda = " << l << ": " << msg << "\n";
        in.loops.push_back(std::move(L));
      }
      std::ostringstream os;
      emit_diagram(in, os);
      emit(c, os.str());
    } else if (sub == mor) {
      require_mode(n, p);
      const EigencurveRoot r = lambda_roots(n, p);
      const int count_l = n_lambda > 0 ? n_lambda : 50;
      CsvTable t({"lambda", "branch", "morse_index", "tau_low", "tau_high"});
      for (int k = 1; k <= count_l; ++k) {
        const double l = r.lambda_minus + (r.lambda_plus - r.lambda_minus) * k / (count_l + 1.0);
        const ModelParams q = p.with_lambda(l);
        const MorseReport mc = morse_report(Profile(c.n_points, w0_const(q)), n, q);
        t.add(l, "constant", mc.index, mc.tau_low, mc.tau_high);
        const auto [lo, up] = nodal_pair(n, q, c.n_points);
        for (const auto* s : {&lo, &up}) {
          const MorseReport m = morse_index_nodal(*s, q);
          t.add(l, to_string(s->branch), m.index, m.tau_low, m.tau_high);
        }
      }
      emit(c, t.str());
    } else if (sub == bif) {
      require_mode(n, p);
      const ExpansionCheck e = fit_expansion(n, parse_side(side), p, c.n_points);
      emit(c, dump(expansion_json(e, p)));
    } else if (sub == per || sub == cen) {
      try {
        p.validate();
      } catch (const DomainError& e) {
        throw FlagError("--a/--c/--eps", e.what());
      }
      require_lambda_range(p);
      if (n >= 1) require_window(n, p);
      NewtonOptions opt;
      opt.target = c.newton_tol;
      opt.accept = std::max(opt.accept, c.newton_tol);
      const CensusResult r = census(n, p, c.n_points, opt);
      emit(c, dump(census_json(r, p, sub == per)));
    }
  } catch (const FlagError& e) {
    std::cerr << "htbif " << name << ": invalid " << e.what() << "\n";
    return 1;
  } catch (const NoSolutionError& e) {
    std::cerr << "htbif " << name << ": no solution (check --lambda, --mu, --n): " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "htbif " << name << ": precondition failed: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "htbif " << name << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
