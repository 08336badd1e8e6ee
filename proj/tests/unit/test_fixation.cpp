#include <gtest/gtest.h>

#include <cmath>

#include "lambda_asg/errors.hpp"
#include "lambda_asg/fixation.hpp"
#include "lambda_asg/moran.hpp"

using namespace lambda_asg;

namespace {

const CoupledMeasure kQuarter({{0.5, 0.25, 1.0}});
const CoupledMeasure kWeak({{0.5, 0.05, 1.0}});
const CoupledMeasure kTwoAtoms({{0.3, 0.1, 0.5}, {0.6, 0.1, 0.5}});
const CoupledMeasure kNeutral({{0.3, 0.0, 0.6}, {0.6, 0.0, 0.4}});

double absorption_at(const CoupledMeasure& c, int N, double x) {
  MoranConfig cfg;
  cfg.N = N;
  cfg.coupling = c;
  cfg.initial_count = 0;
  return absorption_probability(cfg)[static_cast<std::size_t>(std::floor(x * N))];
}

}  // namespace

TEST(MomentTable, HandValues) {
  const auto t = build_moment_table(kQuarter, 3, 3);
  EXPECT_DOUBLE_EQ(t.tilde_mass, 0.5);
  EXPECT_NEAR(static_cast<double>(t.M[0][0]), 0.5, 1e-15);
  EXPECT_NEAR(static_cast<double>(t.q[0]), 0.5, 1e-15);
  EXPECT_NEAR(static_cast<double>(t.M[1][0]), 1.0 / 3, 1e-15);
  // E[W] with W = U/2: (1/2)·(1/2)·(2/3).
  EXPECT_NEAR(static_cast<double>(t.M[0][1]), 1.0 / 6, 1e-15);
  // q[1] = (1/2)·E[1 − 1/2 − V/4] = (1/2)(3/8).
  EXPECT_NEAR(static_cast<double>(t.q[1]), 3.0 / 16, 1e-15);
}

TEST(MomentTable, EntriesAreMonotone) {
  const auto t = build_moment_table(kTwoAtoms, 20, 20);
  for (int j = 0; j <= 20; ++j) {
    EXPECT_GE(t.q[j], 0);
    EXPECT_LE(t.q[j], 1);
    if (j > 0) EXPECT_LE(t.q[j], t.q[j - 1]);
    for (int k = 0; k <= 20; ++k) {
      EXPECT_GE(t.M[j][k], 0);
      EXPECT_LE(t.M[j][k], 1);
      if (j > 0) EXPECT_LE(t.M[j][k], t.M[j - 1][k]);
    }
  }
}

TEST(MomentTable, NeutralCouplingIsDegenerate) {
  const auto t = build_moment_table_unchecked(kNeutral, 5, 5);
  for (const auto& v : t.q) EXPECT_EQ(v, 0);
  EXPECT_THROW(build_moment_table(kNeutral, 5, 5), DegenerateSelection);
  EXPECT_THROW(build_moment_table(CoupledMeasure(), 2, 2), DegenerateSelection);
  EXPECT_THROW(build_moment_table(kQuarter, 80, 80), SizeLimit);
}

TEST(Polynomials, FirstTwo) {
  const auto seq = build_polynomials(build_moment_table(kQuarter, 4, 4), 5);
  ASSERT_EQ(seq.a[0].size(), 1u);
  EXPECT_EQ(seq.a[0][0], 1);
  EXPECT_NEAR(static_cast<double>(seq.a[1][1]), 1.0, 1e-30);
  EXPECT_NEAR(static_cast<double>(seq.a[1][0]), 0.0, 1e-30);
}

TEST(Polynomials, DiagonalProductAndNormalization) {
  const auto table = build_moment_table(kTwoAtoms, 29, 29);
  const auto seq = build_polynomials(table, 30);
  Real prod = 1;
  for (int n = 1; n <= 30; ++n) {
    prod *= table.q[n - 1] / table.M[n - 1][0];
    EXPECT_LT(abs(seq.a[n][n] - prod) / abs(prod), Real(1e-30));
    Real integral = 0;
    for (int r = 0; r < n; ++r) integral += seq.a[n - 1][r] / (r + 1);
    EXPECT_LT(abs(integral - Real(1) / n), Real(1e-30));
    EXPECT_LT(abs(seq.H(n, Real(1)) - 1), Real(1e-30));
  }
}

TEST(Polynomials, SatisfyDefiningIdentity) {
  for (const auto& c : {kQuarter, kWeak, kTwoAtoms}) {
    const auto seq = build_polynomials(build_moment_table(c, 29, 29), 30);
    EXPECT_LT(cond_griff_residual(seq, c, 21), 1e-9);
  }
}

TEST(Polynomials, NeedPositiveSelection) {
  const auto t = build_moment_table_unchecked(kNeutral, 5, 5);
  EXPECT_THROW(build_polynomials(t, 5), DegenerateSelection);
}

TEST(FixationProbability, Boundaries) {
  const auto seq = build_polynomials(build_moment_table(kWeak, 29, 29), 30);
  EXPECT_EQ(fixation_probability(seq, 0.0, 30).p, 0.0);
  EXPECT_NEAR(fixation_probability(seq, 1.0, 30).p, 1.0, 1e-9);
  EXPECT_THROW(fixation_probability(seq, 0.5, 2), NotConverged);
  EXPECT_THROW(fixation_probability(seq, 1.5, 30), ValidationError);
}

TEST(FixationProbability, MonotoneAndBelowDiagonal) {
  for (const auto& c : {kWeak, kTwoAtoms}) {
    const auto sol = solve_fixation(c);
    ASSERT_EQ(sol.p.size(), 101u);
    EXPECT_FALSE(sol.neutral);
    for (std::size_t i = 1; i < sol.p.size(); ++i) {
      EXPECT_GE(sol.p[i], sol.p[i - 1]);
      EXPECT_LE(sol.p[i], sol.x[i] + 1e-12);
    }
    EXPECT_LT(sol.harmonicity, 1e-6);
    EXPECT_LT(sol.cond_griff, 1e-9);
  }
}

TEST(FixationProbability, MatchesFiniteAbsorption) {
  for (const auto& c : {kWeak, kTwoAtoms}) {
    const auto seq = build_polynomials(build_moment_table(c, 29, 29), 30);
    for (double x : {0.1, 0.5, 0.9}) {
      EXPECT_NEAR(fixation_probability(seq, x, 30).p, absorption_at(c, 500, x), 2e-3) << x;
    }
  }
}

TEST(Harmonicity, ResidualShrinksWithDegree) {
  const auto seq = build_polynomials(build_moment_table(kWeak, 29, 29), 30);
  double prev = harmonicity_residual(seq, kWeak, 101, 10);
  for (int nmax : {20, 30}) {
    const double r = harmonicity_residual(seq, kWeak, 101, nmax);
    EXPECT_LT(r, 1.1 * prev) << nmax;
    prev = r;
  }
  EXPECT_LT(prev, 1e-6);
}

TEST(Neutral, RoutedToIdentity) {
  const auto sol = solve_fixation(kNeutral);
  EXPECT_TRUE(sol.neutral);
  ASSERT_FALSE(sol.warnings.empty());
  for (std::size_t i = 0; i < sol.x.size(); ++i) EXPECT_EQ(sol.p[i], sol.x[i]);
  EXPECT_EQ(p_neutral(0.0), 0.0);
  EXPECT_EQ(p_neutral(1.0), 1.0);
  EXPECT_NEAR(p_neutral(0.3), absorption_at(kNeutral, 200, 0.3), 1e-2);
}

TEST(Neutral, IdentityIsHarmonic) {
  // B x = ∫[x(x + y(1−x)) + (1−x)x(1−y) − x] dΛ = 0 when z = 0.
  for (double x = 0.0; x <= 1.0; x += 0.05) {
    const double bx = kNeutral.integrate([x](double y, double z) {
      return x * (x + y * (1 - x)) + (1 - x) * x * (1 - y - z) - x;
    });
    EXPECT_LT(std::abs(bx), 1e-14);
  }
}
