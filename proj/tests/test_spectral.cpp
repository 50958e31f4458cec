#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "htbif/spectral.hpp"

using namespace htbif;

namespace {

constexpr double kPi = std::numbers::pi;

// Textbook quadratic formula for (d/(b mu)) l^2 - l + (ell pi)^2 = 0.
std::pair<double, double> reference_roots(int ell, const ModelParams& p) {
  const double A = p.d / (p.b * p.mu), B = -1.0, C = (ell * kPi) * (ell * kPi);
  const double disc = B * B - 4 * A * C;
  return {(-B - std::sqrt(disc)) / (2 * A), (-B + std::sqrt(disc)) / (2 * A)};
}

// Count of ell with tau_{0,ell}(lambda) < 0, read off the root intervals.
int reference_index(double lambda, const ModelParams& p) {
  int count = lambda < p.b * p.mu / p.d ? 1 : 0;
  for (int ell = 1; ell < 50; ++ell) {
    if (p.mu <= p.d / p.b * (2 * ell * kPi) * (2 * ell * kPi)) break;
    const auto [lo, hi] = reference_roots(ell, p);
    if (lambda > lo && lambda < hi) ++count;
  }
  return count;
}

}  // namespace

TEST(Spectral, RootsMatchQuadraticFormula) {
  for (double mu : {40.0, 50.0, 120.0, 400.0}) {
    const ModelParams p = ModelParams::desk_scale().with_mu(mu);
    for (int ell = 1; ell <= 3; ++ell) {
      const EigencurveRoot r = lambda_roots(ell, p);
      if (mu <= mu_threshold(ell, p)) {
        EXPECT_FALSE(r.is_real) << "mu=" << mu << " ell=" << ell;
        continue;
      }
      const auto [lo, hi] = reference_roots(ell, p);
      EXPECT_NEAR(r.lambda_minus, lo, 1e-9 * hi);
      EXPECT_NEAR(r.lambda_plus, hi, 1e-9 * hi);
    }
  }
}

TEST(Spectral, RootsAreZerosAndSatisfyVieta) {
  const ModelParams p = ModelParams::desk_scale();
  const EigencurveRoot r = lambda_roots(1, p);
  ASSERT_TRUE(r.is_real);
  EXPECT_LT(std::abs(tau0(1, r.lambda_minus, p)), 1e-12);
  EXPECT_LT(std::abs(tau0(1, r.lambda_plus, p)), 1e-12);
  EXPECT_NEAR(r.lambda_minus + r.lambda_plus, 50.0, 1e-12 * 50.0);
  EXPECT_NEAR(r.lambda_minus * r.lambda_plus, 50.0 * kPi * kPi, 1e-12 * 50.0 * kPi * kPi);
}

TEST(Spectral, DoubleRootAtThreshold) {
  for (int k = 1; k <= 3; ++k) {
    const ModelParams base = ModelParams::desk_scale();
    const ModelParams p = base.with_mu(mu_threshold(k, base));
    const EigencurveRoot r = lambda_roots(k, p);
    EXPECT_TRUE(r.is_real);
    EXPECT_EQ(r.lambda_minus, r.lambda_plus);
    EXPECT_NEAR(r.lambda_minus, p.mu / 2.0, 1e-12 * p.mu);
  }
}

TEST(Spectral, ThresholdsAreIncreasingAndMatchFormula) {
  ModelParams p;
  p.b = 2.0;
  p.d = 0.5;
  for (int k = 0; k <= 5; ++k) {
    EXPECT_NEAR(mu_threshold(k, p), 0.25 * 4.0 * k * k * kPi * kPi, 1e-12 * (1 + k * k));
    if (k > 0) EXPECT_GT(mu_threshold(k, p), mu_threshold(k - 1, p));
  }
}

TEST(Spectral, RegimeKappa) {
  const ModelParams p = ModelParams::desk_scale();
  EXPECT_EQ(regime_kappa(p), 1);
  EXPECT_EQ(regime_kappa(p.with_mu(30.0)), 0);
  EXPECT_EQ(regime_kappa(p.with_mu(200.0)), 2);
  EXPECT_EQ(regime_kappa(p.with_mu(mu_threshold(2, p))), 1);
}

TEST(Spectral, EigencurveIdentityHoldsOnGrid) {
  const ModelParams p = ModelParams::desk_scale();
  for (int ell = 0; ell <= 4; ++ell)
    for (int k = 1; k < 100; ++k) {
      const double l = 50.0 * k / 100.0;
      const double lhs = l * (1.0 - p.d * l / (p.b * p.mu)) + tau0(ell, l, p);
      EXPECT_NEAR(lhs, (ell * kPi) * (ell * kPi), 1e-12 * (1 + ell * ell * 10.0));
    }
}

TEST(Spectral, SlopeAtRootsMatchesSquareRootFormula) {
  const ModelParams p = ModelParams::desk_scale();
  const EigencurveRoot r = lambda_roots(1, p);
  const double expected = std::sqrt(1.0 - 4.0 * p.d * kPi * kPi / (p.b * p.mu));
  EXPECT_NEAR(tau0_slope(r.lambda_plus, p), expected, 1e-12);
  EXPECT_NEAR(tau0_slope(r.lambda_minus, p), -expected, 1e-12);
}

TEST(Spectral, MorseStaircaseMatchesRootIntervals) {
  for (double mu : {30.0, 50.0, 200.0, 700.0}) {
    const ModelParams p = ModelParams::desk_scale().with_mu(mu);
    for (int k = 1; k < 400; ++k) {
      const double l = p.kinetic_scale() * k / 400.0;
      EXPECT_EQ(morse_index_w0(l, p), reference_index(l, p)) << "mu=" << mu << " lambda=" << l;
    }
  }
}

TEST(Spectral, MorseIndexIsTwoInsideFirstWindow) {
  const ModelParams p = ModelParams::desk_scale();
  const EigencurveRoot r = lambda_roots(1, p);
  EXPECT_EQ(morse_index_w0(r.lambda_minus + 0.01, p), 2);
  EXPECT_EQ(morse_index_w0(r.lambda_minus - 0.01, p), 1);
  EXPECT_EQ(morse_index_w0(25.0, p), 2);
}

TEST(Spectral, MorseTableAgreesWithDirectCount) {
  const ModelParams p = ModelParams::desk_scale().with_mu(400.0);
  const MorseIndexTable t = morse_table(p);
  EXPECT_EQ(t.breakpoints.size(), 6u);
  for (int k = 1; k < 997; ++k) {
    const double l = p.kinetic_scale() * k / 997.0;
    EXPECT_EQ(t.index_at(l), morse_index_w0(l, p));
  }
}

TEST(Spectral, RejectsBadInput) {
  const ModelParams p = ModelParams::desk_scale();
  EXPECT_THROW(tau0(-1, 1.0, p), DomainError);
  EXPECT_THROW(mu_threshold(-1, p), DomainError);
  EXPECT_THROW(morse_index_w0(60.0, p), DomainError);
}

TEST(Spectral, LowerRootsAreOrdered) {
  const ModelParams base = ModelParams::desk_scale();
  const ModelParams p = base.with_mu(mu_threshold(5, base) * 1.01);
  double prev = 0.0;
  for (int k = 1; k <= 5; ++k) {
    const EigencurveRoot r = lambda_roots(k, p);
    ASSERT_TRUE(r.is_real);
    EXPECT_GT(r.lambda_minus, prev);
    prev = r.lambda_minus;
  }
}

TEST(Spectral, WindowWidensWithMu) {
  const ModelParams p = ModelParams::desk_scale();
  EigencurveRoot prev = lambda_roots(1, p.with_mu(40.0));
  for (double mu = 45.0; mu <= 400.0; mu += 5.0) {
    const EigencurveRoot r = lambda_roots(1, p.with_mu(mu));
    EXPECT_LT(r.lambda_minus, prev.lambda_minus) << "mu=" << mu;
    EXPECT_GT(r.lambda_plus, prev.lambda_plus) << "mu=" << mu;
    prev = r;
  }
}

TEST(Spectral, LowerRootTendsToPureMode) {
  const ModelParams p = ModelParams::desk_scale();
  for (int k = 1; k <= 3; ++k) {
    const double mu = 1e4 * mu_threshold(k, p);
    const double target = (k * kPi) * (k * kPi);
    EXPECT_LT(std::abs(lambda_roots(k, p.with_mu(mu)).lambda_minus - target) / target, 1e-2);
  }
}

TEST(Spectral, SlopeSignsMatchFiniteDifferences) {
  const ModelParams p = ModelParams::desk_scale();
  const EigencurveRoot r = lambda_roots(1, p);
  const double h = 1e-6;
  for (double l : {r.lambda_minus, r.lambda_plus}) {
    const double fd = (tau0(1, l + h, p) - tau0(1, l - h, p)) / (2 * h);
    EXPECT_NEAR(fd, tau0_slope(l, p), 1e-6);
  }
}
