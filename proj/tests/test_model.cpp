#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "htbif/coeff.hpp"
#include "htbif/model.hpp"
#include "htbif/profile.hpp"

using namespace htbif;

TEST(Model, ConstantStateMatchesFormula) {
  const ModelParams p = ModelParams::desk_scale();
  EXPECT_DOUBLE_EQ(w0_const(p), 1.0);
  EXPECT_NEAR(kinetic_f(w0_const(p), p), 0.0, 1e-14);
  EXPECT_NEAR(kinetic_f(w0_const(p.with_lambda(10.0)), p.with_lambda(10.0)), 0.0, 1e-13);
}

TEST(Model, ConstantStateLimits) {
  const ModelParams p = ModelParams::desk_scale();
  EXPECT_GT(w0_const(p.with_lambda(1e-6)), 1e6);
  EXPECT_LT(w0_const(p.with_lambda(50.0 - 1e-9)), 1e-9);
}

TEST(Model, DerivativesAgreeWithFiniteDifferences) {
  const ModelParams p = ModelParams::desk_scale();
  const double h = 1e-5;
  for (double w : {0.0, 0.2, 1.0, 1.6, 3.0}) {
    EXPECT_NEAR(kinetic_df(w, p), (kinetic_f(w + h, p) - kinetic_f(w - h, p)) / (2 * h), 1e-7);
    EXPECT_NEAR(kinetic_d2f(w, p), (kinetic_df(w + h, p) - kinetic_df(w - h, p)) / (2 * h), 1e-6);
    EXPECT_NEAR(kinetic_d3f(w, p), (kinetic_d2f(w + h, p) - kinetic_d2f(w - h, p)) / (2 * h), 1e-5);
    EXPECT_NEAR(kinetic_f(w, p), (potential_F(w + h, p) - potential_F(w - h, p)) / (2 * h), 1e-7);
  }
}

TEST(Model, PotentialOffsetMatchesDirectDifference) {
  const ModelParams p = ModelParams::desk_scale();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-0.95, 0.6);
  for (int k = 0; k < 200; ++k) {
    const double u = U(rng);
    const double direct = potential_F(1.0 + u, p) - potential_F(1.0, p);
    EXPECT_NEAR(potential_offset(u, p), direct, 1e-12 * (1.0 + std::abs(direct)));
  }
}

TEST(Model, PotentialOffsetIsAccurateForTinyOffsets) {
  const ModelParams p = ModelParams::desk_scale();
  // Two-term Taylor expansion about w0; F''(w0) = 12.5.
  const double u = 1e-7;
  const double expected = 0.5 * 12.5 * u * u + kinetic_d2f(1.0, p) * u * u * u / 6.0;
  EXPECT_NEAR(potential_offset(u, p) / expected, 1.0, 1e-12);
}

TEST(Model, EnergyIsConservedAlongExactSolutionAtCentre) {
  const ModelParams p = ModelParams::desk_scale();
  EXPECT_DOUBLE_EQ(energy({1.0, 0.0}, p), potential_F(1.0, p));
}

TEST(Model, ValidationNamesTheProblem) {
  ModelParams p;
  p.b = -1;
  EXPECT_THROW(p.validate(), DomainError);
  p = ModelParams{};
  p.coeff_a = CoeffFn::constant(0.0);
  EXPECT_THROW(p.validate(), DomainError);
  p = ModelParams{};
  EXPECT_THROW(p.with_lambda(60.0).require_limit_range(), DomainError);
  EXPECT_NO_THROW(p.require_limit_range());
  EXPECT_THROW(p.gamma(), DomainError);
  EXPECT_DOUBLE_EQ(p.with_eps(0.01).gamma(), 100.0);
}

TEST(Coeff, SpecParsing) {
  EXPECT_DOUBLE_EQ(parse_coeff_spec("const:2.5")(0.3), 2.5);
  EXPECT_TRUE(parse_coeff_spec("const:2.5").is_constant());
  EXPECT_THROW(parse_coeff_spec("const:abc"), DomainError);
  EXPECT_THROW(parse_coeff_spec("linear:1"), DomainError);
  EXPECT_THROW(parse_coeff_spec("csv:/nonexistent/file.csv"), IoError);
}

TEST(Coeff, CsvInterpolation) {
  const auto path = std::filesystem::temp_directory_path() / "htbif_coeff_test.csv";
  {
    std::ofstream f(path);
    f << "\xEF\xBB\xBFx,value\r\n0,1\r\n0.5,3\r\n1,2\r\n";
  }
  const CoeffFn c = parse_coeff_spec("csv:" + path.string());
  EXPECT_FALSE(c.is_constant());
  EXPECT_DOUBLE_EQ(c(0.0), 1.0);
  EXPECT_DOUBLE_EQ(c(0.25), 2.0);
  EXPECT_DOUBLE_EQ(c(0.75), 2.5);
  EXPECT_DOUBLE_EQ(c(1.0), 2.0);
  std::filesystem::remove(path);
}

TEST(Coeff, RejectsBadSamples) {
  EXPECT_THROW(CoeffFn::sampled({0.0, 0.5}, {1.0, 1.0}), DomainError);
  EXPECT_THROW(CoeffFn::sampled({0.0, 0.6, 0.5, 1.0}, {1, 1, 1, 1}), DomainError);
  EXPECT_THROW(CoeffFn::sampled({0.0, 1.0}, {1.0, -1.0}), DomainError);
  EXPECT_THROW(CoeffFn::constant(-1.0), DomainError);
}

TEST(Profile, SimpsonIntegratesCubicsExactly) {
  const Profile p = Profile::sample(11, [](double x) { return x * x * x - 2 * x + 1; });
  EXPECT_NEAR(integrate(p), 0.25 - 1.0 + 1.0, 1e-15);
}

TEST(Profile, CrossingsSkipExactZeros) {
  const Profile p(std::vector<double>{1.0, 0.0, -1.0, 0.0, -2.0, 1.0});
  EXPECT_EQ(count_crossings(p, 0.0), 2);
}

TEST(Profile, GridMismatchIsReported) {
  EXPECT_THROW(sup_distance(Profile(5), Profile(7)), GridMismatchError);
  EXPECT_THROW(Profile(2), DomainError);
}
