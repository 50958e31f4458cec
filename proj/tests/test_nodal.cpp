#include <gtest/gtest.h>

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>

#include "htbif/nodal.hpp"

using namespace htbif;

namespace {

// Adaptive Dormand-Prince shooting from (w_start, 0) to x = 1.
std::array<double, 2> shoot(double w_start, const ModelParams& p, double length = 1.0) {
  namespace odeint = boost::numeric::odeint;
  std::array<double, 2> y{w_start, 0.0};
  auto rhs = [&](const std::array<double, 2>& s, std::array<double, 2>& ds, double) {
    ds[0] = s[1];
    ds[1] = -kinetic_f(s[0], p);
  };
  odeint::integrate_adaptive(
      odeint::make_controlled<odeint::runge_kutta_dopri5<std::array<double, 2>>>(1e-13, 1e-13),
      rhs, y, 0.0, length, 1e-4);
  return y;
}

}  // namespace

TEST(Nodal, AmplitudeSolvesPeriodCondition) {
  const ModelParams p = ModelParams::desk_scale();
  const double wm = solve_amplitude(1, p);
  EXPECT_NEAR(time_map(wm, p).T, 1.0, 1e-9);
  EXPECT_NEAR(wm, 0.3038014538, 1e-8);
}

TEST(Nodal, IndependentShootingLandsOnNeumannEnd) {
  const ModelParams p = ModelParams::desk_scale();
  const double wm = solve_amplitude(1, p);
  const auto end = shoot(wm, p);
  EXPECT_LT(std::abs(end[1]), 1e-7);
  EXPECT_NEAR(end[0], companion(wm, p), 1e-7);
}

TEST(Nodal, PairSatisfiesBoundaryValueProblem) {
  const ModelParams p = ModelParams::desk_scale();
  const auto [lo, up] = nodal_pair(1, p);
  EXPECT_LT(bvp_residual(lo.profile, p), 1e-7);
  EXPECT_LT(bvp_residual(up.profile, p), 1e-7);
  EXPECT_LT(lo.boundary_residual, 1e-7);
  EXPECT_LT(up.boundary_residual, 1e-7);
  EXPECT_EQ(lo.crossings, 1);
  EXPECT_EQ(up.crossings, 1);
  EXPECT_LT(lo.profile[0], 1.0);
  EXPECT_GT(up.profile[0], 1.0);
}

TEST(Nodal, UpperIsReflectionOfLowerForSingleNode) {
  const ModelParams p = ModelParams::desk_scale();
  const auto [lo, up] = nodal_pair(1, p);
  const std::size_t last = lo.profile.size() - 1;
  for (std::size_t i = 0; i <= last; ++i)
    EXPECT_NEAR(up.profile[i], lo.profile[last - i], 1e-9);
}

TEST(Nodal, ProfilesMatchIndependentIntegrator) {
  const ModelParams p = ModelParams::desk_scale();
  const auto [lo, up] = nodal_pair(1, p, 201);
  for (std::size_t i : {std::size_t{0}, std::size_t{50}, std::size_t{100}, std::size_t{200}})
    EXPECT_NEAR(lo.profile[i], shoot(lo.w_minus, p, lo.profile.x(i))[0], 1e-8) << "i=" << i;
}

TEST(Nodal, TwoNodesAboveSecondThreshold) {
  const ModelParams p = ModelParams::desk_scale().with_mu(200.0).with_lambda(100.0);
  ASSERT_GT(p.mu, mu_threshold(2, p));
  const auto [lo, up] = nodal_pair(2, p);
  EXPECT_EQ(lo.crossings, 2);
  EXPECT_EQ(up.crossings, 2);
  EXPECT_LT(bvp_residual(lo.profile, p), 1e-6);
  EXPECT_LT(bvp_residual(up.profile, p), 1e-6);
  EXPECT_NEAR(lo.profile[1000], up.profile[0], 1e-6);
  EXPECT_NEAR(2.0 * time_map(lo.w_minus, p).T, 1.0, 1e-9);
}

TEST(Nodal, NoSolutionOutsideWindow) {
  const ModelParams p = ModelParams::desk_scale();
  const EigencurveRoot r = lambda_roots(1, p);
  EXPECT_THROW(nodal_pair(1, p.with_lambda(r.lambda_minus - 0.5)), NoSolutionError);
  EXPECT_THROW(nodal_pair(1, p.with_lambda(r.lambda_plus + 0.5)), NoSolutionError);
  EXPECT_THROW(nodal_pair(2, p), NoSolutionError);
  try {
    nodal_pair(2, p);
  } catch (const NoSolutionError& e) {
    EXPECT_NE(std::string(e.what()).find("mu_2"), std::string::npos);
  }
}

TEST(Nodal, AmplitudeShrinksTowardWindowEnds) {
  const ModelParams p = ModelParams::desk_scale();
  const EigencurveRoot r = lambda_roots(1, p);
  double prev_gap = 0.0;
  for (double off : {1.0, 0.1, 0.01}) {
    const ModelParams q = p.with_lambda(r.lambda_minus + off);
    const double gap = w0_const(q) - solve_amplitude(1, q);
    EXPECT_GT(gap, 0.0);
    if (prev_gap > 0.0) EXPECT_LT(gap, prev_gap);
    prev_gap = gap;
  }
}

TEST(Nodal, LoopTraceCoversWindow) {
  const ModelParams p = ModelParams::desk_scale();
  const LoopTrace t = trace_loop(1, p, 24, 801);
  EXPECT_TRUE(t.failures.empty());
  ASSERT_EQ(t.points.size(), 24u);
  for (const auto& pt : t.points) {
    EXPECT_GT(pt.lambda, t.lambda_minus);
    EXPECT_LT(pt.lambda, t.lambda_plus);
    EXPECT_LE(pt.w_minus_lower, pt.w0);
    EXPECT_GE(pt.w_start_upper, pt.w0);
    EXPECT_NEAR(pt.sup_norm_lower, pt.sup_norm_upper, 1e-9);
  }
}

TEST(Nodal, LoopTraceRejectsSubcriticalMu) {
  EXPECT_THROW(trace_loop(1, ModelParams::desk_scale().with_mu(30.0), 4), DomainError);
}
