// Walks the default configuration (b = d = 1, mu = 50, lambda = 25) through
// every stage of the toolkit and prints a short summary.

#include <cstdio>

#include "htbif/htbif.hpp"

int main() {
  using namespace htbif;
  const ModelParams p = ModelParams::desk_scale();

  std::printf("kappa = %d (mu_1 = %.6f, mu_2 = %.6f)\n", regime_kappa(p), mu_threshold(1, p),
              mu_threshold(2, p));
  const EigencurveRoot r = lambda_roots(1, p);
  std::printf("mode-1 window: (%.10f, %.10f)\n", r.lambda_minus, r.lambda_plus);

  const double w0 = w0_const(p);
  std::printf("w0 = %.6f, T(w0) = %.10f\n", w0, time_map_center(p));

  const auto [lo, up] = nodal_pair(1, p);
  std::printf("nodal pair: w(0) = %.10f and %.10f, residuals %.2e / %.2e\n", lo.profile[0],
              up.profile[0], bvp_residual(lo.profile, p), bvp_residual(up.profile, p));
  std::printf("Morse indices: constant %d, lower %d, upper %d\n", morse_index_constant(p),
              morse_index_nodal(lo, p).index, morse_index_nodal(up, p).index);

  for (Side s : {Side::minus, Side::plus})
    std::printf("eta_2 (%s) = %.6f\n", to_string(s), eta2_closed_form(1, s, p));

  const CensusResult c = census(1, p.with_eps(1e-3));
  std::printf("census at eps = 1e-3: %d distinct states\n", c.distinct_count);
  for (const auto& s : c.states)
    std::printf("  %-16s residual %.2e after %d Newton steps\n", to_string(s.origin).c_str(),
                s.residual_sup, s.newton_iters);
  return 0;
}
