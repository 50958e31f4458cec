#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "htbif/linstab.hpp"

using namespace htbif;

namespace {

constexpr double kPi = std::numbers::pi;

int sign_changes(const Profile& f) { return count_crossings(f, 0.0); }

}  // namespace

TEST(Linstab, ZeroPotentialMatchesContinuumAndDiscreteFormulas) {
  const std::size_t N = 2001;
  const Spectrum s = sturm_spectrum(Profile(N, 0.0), 6);
  ASSERT_EQ(s.eigenvalues.size(), 6u);
  EXPECT_NEAR(s.eigenvalues[0], 0.0, 1e-9);
  const double h = 1.0 / (N - 1.0);
  for (int l = 1; l < 6; ++l) {
    const double exact = (l * kPi) * (l * kPi);
    EXPECT_LT(std::abs(s.eigenvalues[l] - exact) / exact, 1e-4) << "l=" << l;
    // The ghost-point operator has the closed-form spectrum (4/h^2) sin^2(l pi h/2).
    const double discrete = 4.0 / (h * h) * std::pow(std::sin(l * kPi * h / 2.0), 2);
    EXPECT_NEAR(s.eigenvalues[l], discrete, 1e-9 * discrete) << "l=" << l;
  }
  EXPECT_EQ(sturm_spectrum(Profile(N, 1.0), 2).morse_index, 0);
}

TEST(Linstab, ConstantPotentialShiftsSpectrum) {
  const Spectrum a = sturm_spectrum(Profile(501, 0.0), 5);
  const Spectrum b = sturm_spectrum(Profile(501, -7.25), 5);
  for (int l = 0; l < 5; ++l) EXPECT_NEAR(b.eigenvalues[l], a.eigenvalues[l] - 7.25, 1e-9);
  EXPECT_EQ(b.morse_index, 1);
}

TEST(Linstab, ConstantSolutionSpectrumMatchesEigencurves) {
  for (double lambda : {10.0, 25.0, 40.0}) {
    const ModelParams p = ModelParams::desk_scale().with_lambda(lambda);
    const Spectrum s = sturm_spectrum(constant_potential(p), 5);
    for (int l = 0; l < 5; ++l) {
      const double t = tau0(l, lambda, p);
      EXPECT_NEAR(s.eigenvalues[l], t, 1e-4 * (1.0 + std::abs(t))) << "lambda=" << lambda;
    }
  }
}

TEST(Linstab, EigenvaluesStrictlyAscending) {
  const ModelParams p = ModelParams::desk_scale();
  const auto [lo, up] = nodal_pair(1, p);
  const Spectrum s = sturm_spectrum(linearization_potential(lo.profile, p), 8);
  for (std::size_t k = 1; k < s.eigenvalues.size(); ++k)
    EXPECT_GT(s.eigenvalues[k], s.eigenvalues[k - 1]);
}

TEST(Linstab, EigenfunctionNodeCounts) {
  const ModelParams p = ModelParams::desk_scale();
  const auto [lo, up] = nodal_pair(1, p);
  for (const Profile* w : {&lo.profile, &up.profile}) {
    const auto fs = eigenfunctions(linearization_potential(*w, p), 5);
    ASSERT_EQ(fs.size(), 5u);
    for (int l = 0; l < 5; ++l) EXPECT_EQ(sign_changes(fs[l]), l) << "l=" << l;
  }
  const auto flat = eigenfunctions(constant_potential(p), 5);
  for (int l = 0; l < 5; ++l) EXPECT_EQ(sign_changes(flat[l]), l);
}

TEST(Linstab, EigenfunctionsOfFlatPotentialAreCosines) {
  const auto fs = eigenfunctions(Profile(1001, 3.0), 4);
  for (int l = 0; l < 4; ++l)
    for (std::size_t i = 0; i < fs[l].size(); i += 50)
      EXPECT_NEAR(fs[l][i], std::cos(l * kPi * fs[l].x(i)), 1e-5) << "l=" << l;
}

TEST(Linstab, EigenvaluesConvergeAtSecondOrder) {
  const ModelParams p = ModelParams::desk_scale();
  const double wm = solve_amplitude(1, p);
  auto potential = [&](std::size_t n) {
    return linearization_potential(integrate_cauchy(wm, p, n), p);
  };
  for (double r : richardson_ratios(potential, 3, 201)) {
    EXPECT_GT(r, 3.5);
    EXPECT_LT(r, 4.5);
  }
}

TEST(Linstab, MorseIndicesNearLowerEnd) {
  const ModelParams base = ModelParams::desk_scale();
  const ModelParams p = base.with_lambda(lambda_roots(1, base).lambda_minus + 0.01);
  const auto [lo, up] = nodal_pair(1, p);
  const MorseReport a = morse_index_nodal(lo, p);
  const MorseReport b = morse_index_nodal(up, p);
  EXPECT_EQ(a.index, 1);
  EXPECT_EQ(b.index, 1);
  EXPECT_LT(a.tau_low, 0.0);
  EXPECT_GT(a.tau_high, 0.0);
  EXPECT_EQ(morse_index_constant(p), 2);
}

TEST(Linstab, MorseIndicesAtDefaultPoint) {
  const ModelParams p = ModelParams::desk_scale();
  const auto [lo, up] = nodal_pair(1, p);
  EXPECT_EQ(morse_index_nodal(lo, p).index, 1);
  EXPECT_EQ(morse_index_nodal(up, p).index, 1);
  EXPECT_FALSE(morse_index_nodal(lo, p).degenerate);
  EXPECT_EQ(morse_index_constant(p), 2);
}

TEST(Linstab, TwoNodeSolutionHasIndexTwo) {
  const ModelParams p = ModelParams::desk_scale().with_mu(200.0).with_lambda(100.0);
  const auto [lo, up] = nodal_pair(2, p);
  EXPECT_EQ(morse_index_nodal(lo, p).index, 2);
  EXPECT_EQ(morse_index_nodal(up, p).index, 2);
  EXPECT_EQ(morse_index_constant(p), 3);
}

TEST(Linstab, TransversalityAtWindowEnds) {
  const ModelParams p = ModelParams::desk_scale();
  const EigencurveRoot r = lambda_roots(1, p);
  const double expected = std::sqrt(1.0 - 4.0 * p.d * kPi * kPi / p.kinetic_scale());
  auto tau1 = [&](double lambda) {
    return sturm_spectrum(constant_potential(p.with_lambda(lambda)), 3).eigenvalues[1];
  };
  const double dl = 1e-3;
  for (auto [lambda, sign] : {std::pair{r.lambda_minus, -1.0}, std::pair{r.lambda_plus, 1.0}}) {
    EXPECT_LT(std::abs(tau1(lambda)), 1e-4);
    const double slope = (tau1(lambda + dl) - tau1(lambda - dl)) / (2 * dl);
    EXPECT_NEAR(slope, sign * expected, 1e-3);
  }
}

TEST(Linstab, SecondOrderProfileSolvesItsEquation) {
  const ModelParams p = ModelParams::desk_scale();
  for (Side side : {Side::minus, Side::plus}) {
    const double ls = bifurcation_point(1, side, p);
    const double r = ls / p.kinetic_scale();
    const double h = 1e-4;
    for (int k = 0; k <= 20; ++k) {
      const double x = k / 20.0;
      auto y = [&](double t) { return y1_value(1, ls, p, t); };
      const double d2 = (y(x + h) - 2 * y(x) + y(x - h)) / (h * h);
      const double lhs = -d2 - kPi * kPi * y(x);
      const double rhs = ls * r * r * std::pow(std::cos(kPi * x), 2);
      EXPECT_NEAR(lhs, rhs, 1e-6) << "x=" << x;
    }
    const Profile y1 = y1_closed_form(1, side, p, 2001);
    const std::size_t last = y1.size() - 1;
    const double slope_left = (-3 * y1[0] + 4 * y1[1] - y1[2]) / (2 * y1.step());
    const double slope_right = (3 * y1[last] - 4 * y1[last - 1] + y1[last - 2]) / (2 * y1.step());
    EXPECT_NEAR(slope_left, 0.0, 1e-6);
    EXPECT_NEAR(slope_right, 0.0, 1e-6);
  }
}

TEST(Linstab, SecondOrderProfileIntegrals) {
  const ModelParams p = ModelParams::desk_scale();
  for (Side side : {Side::minus, Side::plus}) {
    const Profile y1 = y1_closed_form(1, side, p, 2001);
    const double ls = bifurcation_point(1, side, p);
    const double q = ls / (kPi * p.kinetic_scale());
    Profile ortho = y1, weighted = y1;
    for (std::size_t i = 0; i < y1.size(); ++i) {
      const double c = std::cos(kPi * y1.x(i));
      ortho[i] = c * y1[i];
      weighted[i] = c * c * y1[i];
    }
    EXPECT_LT(std::abs(integrate(ortho)), 1e-10);
    EXPECT_NEAR(integrate(y1), -0.5 * ls * q * q, 1e-12);
    EXPECT_NEAR(integrate(weighted) / y1_weighted_integral(1, side, p), 1.0, 1e-8);
  }
}

TEST(Linstab, SecondCoefficientSignsAndGrowth) {
  const ModelParams p = ModelParams::desk_scale();
  EXPECT_GT(eta2_closed_form(1, Side::minus, p), 0.0);
  EXPECT_LT(eta2_closed_form(1, Side::plus, p), 0.0);
  const double mu1 = mu_threshold(1, p);
  double prev = 0.0;
  for (double gap : {10.0, 1.0, 0.1, 0.01}) {
    const double e = std::abs(eta2_closed_form(1, Side::minus, p.with_mu(mu1 + gap)));
    EXPECT_GT(e, prev);
    prev = e;
  }
  EXPECT_THROW(eta2_closed_form(1, Side::minus, p.with_mu(mu1)), DegeneracyError);
}

TEST(Linstab, ExpansionFitMatchesClosedForm) {
  const ModelParams p = ModelParams::desk_scale();
  for (Side side : {Side::minus, Side::plus}) {
    const ExpansionCheck c = fit_expansion(1, side, p, 1001);
    EXPECT_LT(std::abs(c.eta1_estimate), 1e-3 * std::abs(c.eta2_estimate) * 0.05);
    EXPECT_EQ(c.eta2_estimate > 0.0, c.eta2_closed_form > 0.0);
    EXPECT_NEAR(c.eta2_estimate / c.eta2_closed_form, 1.0, 0.05);
    EXPECT_LT(c.y1_l2_error, 0.05);
    EXPECT_EQ(c.points_used, 20);
  }
}

TEST(Linstab, ProjectionAmplitudeRecoversCosineCoefficient) {
  const Profile w = Profile::sample(2001, [](double x) { return 1.0 + 0.03 * std::cos(kPi * x); });
  EXPECT_NEAR(projection_amplitude(w, 1, 1.0), 0.03, 1e-12);
}

TEST(Linstab, SingularSetScanIsStableUnderRefinement) {
  const ModelParams p = ModelParams::desk_scale();
  const EigencurveRoot r = lambda_roots(1, p);
  const auto coarse = detect_singular_set(1, p, 24, 801);
  const auto fine = detect_singular_set(1, p, 48, 801);
  EXPECT_EQ(coarse.size(), fine.size());
  for (double l : fine) {
    EXPECT_GT(l, r.lambda_minus);
    EXPECT_LT(l, r.lambda_plus);
  }
  RecordProperty("singular_points", static_cast<int>(fine.size()));
}

TEST(Linstab, SingularSetNeedsWindow) {
  EXPECT_THROW(detect_singular_set(1, ModelParams::desk_scale().with_mu(30.0), 10), DomainError);
  EXPECT_THROW(detect_singular_set(1, ModelParams::desk_scale(), 2), DomainError);
}
