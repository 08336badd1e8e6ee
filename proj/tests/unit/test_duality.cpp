#include <gtest/gtest.h>

#include <cmath>

#include "lambda_asg/asg.hpp"
#include "lambda_asg/duality.hpp"
#include "lambda_asg/errors.hpp"
#include "lambda_asg/moran.hpp"

using namespace lambda_asg;

namespace {

const CoupledMeasure kSelective({{0.3, 0.2, 0.6}, {0.6, 0.1, 0.4}});
const CoupledMeasure kNeutral({{0.3, 0.0, 0.6}, {0.6, 0.0, 0.4}});

}  // namespace

TEST(SamplingFunction, Examples) {
  EXPECT_DOUBLE_EQ(sampling_function(4, 2, 2), 1.0 / 6);
  for (int i = 0; i <= 9; ++i) EXPECT_EQ(sampling_function(9, i, 0), 1.0);
  for (int n = 0; n <= 9; ++n) EXPECT_DOUBLE_EQ(sampling_function(9, 9, n), 1.0);
  EXPECT_EQ(sampling_function(9, 2, 3), 0.0);
  EXPECT_THROW(sampling_function(5, 6, 1), ValidationError);
}

TEST(SamplingFunction, ApproachesPowers) {
  for (int n = 1; n <= 6; ++n) {
    for (int N : {100, 1000, 10000}) {
      for (double x : {0.2, 0.5, 0.9}) {
        const int i = static_cast<int>(std::floor(x * N));
        // |C(i,n)/C(N,n) − xⁿ| ≤ n²/N covers both the floor and the finite-population terms.
        EXPECT_LE(std::abs(sampling_function(N, i, n) - std::pow(x, n)), n * n / static_cast<double>(N));
      }
    }
  }
}

TEST(SamplingFunction, Monotone) {
  const SamplingTable d(12);
  for (int i = 1; i <= 12; ++i) {
    for (int n = 1; n <= 12; ++n) {
      EXPECT_GE(d(i, n), d(i - 1, n));
      EXPECT_LE(d(i, n), d(i, n - 1));
    }
  }
}

TEST(GeneratorDuality, Examples) {
  EXPECT_LT(generator_duality_check(10, kNeutral), 1e-10);
  EXPECT_LT(generator_duality_check(10, kSelective), 1e-10);
  EXPECT_LT(generator_duality_check(60, kSelective), 1e-10);
  EXPECT_THROW(generator_duality_check(kDualityMatrixLimit + 1, kSelective), SizeLimit);
}

TEST(GeneratorDuality, DetectsWrongLineRates) {
  // A sampling table against a generator of a different coupling breaks the identity.
  MoranConfig cfg;
  cfg.N = 10;
  cfg.coupling = kSelective;
  const Eigen::MatrixXd b = generator_matrix(cfg).matrix();
  const Eigen::MatrixXd a = line_count_generator(10, kNeutral).matrix();
  const SamplingTable d(10);
  EXPECT_GT((b * d.values() - d.values() * a.transpose()).cwiseAbs().maxCoeff(), 1e-3);
  // The n = 0 column vanishes regardless.
  EXPECT_LT((b * d.values()).col(0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PathwiseDuality, Trivial) {
  const auto empty_sample = pathwise_duality_check(10, kSelective, 1.0, 0, 0.5, 200, 1);
  EXPECT_EQ(empty_sample.lhs, 1.0);
  EXPECT_EQ(empty_sample.rhs, 1.0);
  const auto all_minus = pathwise_duality_check(10, kSelective, 1.0, 3, 1.0, 200, 1);
  EXPECT_EQ(all_minus.lhs, 1.0);
  EXPECT_EQ(all_minus.rhs, 1.0);
}

TEST(PathwiseDuality, BothSidesAgree) {
  const auto rep = pathwise_duality_check(10, kSelective, 1.0, 2, 0.5, 100000, 2);
  EXPECT_LT(std::abs(rep.z), 4.0) << rep.lhs << " vs " << rep.rhs;
  EXPECT_EQ(rep.replicates, 100000);
}

TEST(PathwiseDuality, Reproducible) {
  const auto a = pathwise_duality_check(8, kSelective, 0.5, 2, 0.5, 2000, 3);
  const auto b = pathwise_duality_check(8, kSelective, 0.5, 2, 0.5, 2000, 3);
  EXPECT_EQ(a.lhs, b.lhs);
  EXPECT_EQ(a.rhs, b.rhs);
}

TEST(LimitDuality, GeneratorIdentity) {
  EXPECT_LT(limit_generator_duality(kSelective, 1, 101), 1e-14);
  EXPECT_LT(limit_generator_duality(kSelective, 12, 101), 1e-10);
  EXPECT_LT(limit_generator_duality(CoupledMeasure({{0.05, 0.9, 3.0}, {0.9, 0.1, 0.2}}), 12, 101), 1e-10);
  EXPECT_EQ(limit_generator_duality(CoupledMeasure(), 12, 11), 0.0);
  EXPECT_THROW(limit_generator_duality(kSelective, 13, 11), ValidationError);
}

TEST(LimitDuality, MomentsAtOne) {
  const auto rep = limit_moment_duality_check(kSelective, 1.0, 3, 1.0, 500, 4);
  EXPECT_EQ(rep.lhs, 1.0);
  EXPECT_EQ(rep.rhs, 1.0);
}

TEST(LimitDuality, MomentsAgree) {
  const auto rep = limit_moment_duality_check(kSelective, 0.5, 3, 1.0, 200000, 5);
  EXPECT_LT(std::abs(rep.z), 4.0) << rep.lhs << " vs " << rep.rhs;
}
