#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lambda_asg/numerics.hpp"
#include "lambda_asg/parallel.hpp"
#include "lambda_asg/rng.hpp"

using namespace lambda_asg;

namespace {

// Pearson statistic against a pmf, pooling cells with expected count < 5.
double chi_square(const std::vector<long>& counts, const std::vector<double>& pmf, long total,
                  int* dof) {
  double stat = 0.0, pooled_obs = 0.0, pooled_exp = 0.0;
  int cells = 0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    const double e = pmf[k] * static_cast<double>(total);
    if (e < 5.0) {
      pooled_obs += static_cast<double>(counts[k]);
      pooled_exp += e;
      continue;
    }
    stat += (counts[k] - e) * (counts[k] - e) / e;
    ++cells;
  }
  if (pooled_exp > 0.0) {
    stat += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++cells;
  }
  *dof = cells - 1;
  return stat;
}

// Loose upper quantile of chi-square: mean + 5 sd.
double chi_bound(int dof) { return dof + 5.0 * std::sqrt(2.0 * dof); }

void expect_binomial_law(std::int64_t n, double p, long draws, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<long> counts(static_cast<std::size_t>(n + 1), 0);
  for (long d = 0; d < draws; ++d) {
    const auto k = rng.binomial(n, p);
    ASSERT_GE(k, 0);
    ASSERT_LE(k, n);
    ++counts[static_cast<std::size_t>(k)];
  }
  int dof = 0;
  const double stat = chi_square(counts, binomial_pmf_vector(static_cast<int>(n), p), draws, &dof);
  EXPECT_LT(stat, chi_bound(dof)) << "n=" << n << " p=" << p;
}

}  // namespace

TEST(Rng, StreamsAreReproducible) {
  Rng a = Rng::for_stream(7, stream_tag("x"), 3);
  Rng b = Rng::for_stream(7, stream_tag("x"), 3);
  Rng c = Rng::for_stream(7, stream_tag("x"), 4);
  Rng d = Rng::for_stream(7, stream_tag("y"), 3);
  const auto va = a.next();
  EXPECT_EQ(va, b.next());
  EXPECT_NE(va, c.next());
  EXPECT_NE(va, d.next());
}

TEST(Rng, UniformMoments) {
  Rng rng(1);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    s2 += u * u;
  }
  EXPECT_NEAR(s / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(s2 / n, 1.0 / 3.0, 5e-3);
}

TEST(Rng, BelowIsUniform) {
  Rng rng(2);
  std::vector<long> counts(7, 0);
  const long draws = 70000;
  for (long i = 0; i < draws; ++i) ++counts[rng.below(7)];
  int dof = 0;
  const double stat = chi_square(counts, std::vector<double>(7, 1.0 / 7.0), draws, &dof);
  EXPECT_LT(stat, chi_bound(dof));
}

TEST(Rng, ExponentialMean) {
  Rng rng(3);
  const int n = 100000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += rng.exponential(2.5);
  EXPECT_NEAR(s / n, 0.4, 5.0 * 0.4 / std::sqrt(n));
}

TEST(Rng, BinomialSmallMeanMatchesPmf) { expect_binomial_law(20, 0.3, 100000, 11); }

TEST(Rng, BinomialLargeMeanMatchesPmf) { expect_binomial_law(1000, 0.4, 100000, 12); }

TEST(Rng, BinomialHighProbabilityMatchesPmf) { expect_binomial_law(400, 0.93, 100000, 13); }

TEST(Rng, BinomialEdges) {
  Rng rng(4);
  EXPECT_EQ(rng.binomial(0, 0.5), 0);
  EXPECT_EQ(rng.binomial(10, 0.0), 0);
  EXPECT_EQ(rng.binomial(10, 1.0), 10);
}

TEST(AliasTable, FrequenciesMatchWeights) {
  const std::vector<double> w = {0.5, 0.0, 2.0, 1.5};
  const AliasTable table(w);
  Rng rng(5);
  std::vector<long> counts(4, 0);
  const long draws = 100000;
  for (long i = 0; i < draws; ++i) ++counts[table.sample(rng)];
  EXPECT_EQ(counts[1], 0);
  EXPECT_NEAR(counts[0] / double(draws), 0.125, 0.005);
  EXPECT_NEAR(counts[2] / double(draws), 0.5, 0.006);
  EXPECT_NEAR(counts[3] / double(draws), 0.375, 0.006);
}

TEST(Numerics, ChooseAndPmf) {
  EXPECT_DOUBLE_EQ(choose(4, 2), 6.0);
  EXPECT_DOUBLE_EQ(choose(10, 0), 1.0);
  EXPECT_NEAR(binomial_pmf(3, 1, 0.5), 0.375, 1e-15);
  double total = 0.0;
  for (double v : binomial_pmf_vector(37, 0.21)) total += v;
  EXPECT_NEAR(total, 1.0, 1e-13);
}

TEST(Numerics, GaussLegendreIsExactForPolynomials) {
  const auto [nodes, weights] = gauss_legendre_unit<double>(16);
  double s = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * std::pow(nodes[i], 31);
  EXPECT_NEAR(s, 1.0 / 32.0, 1e-15);
}

TEST(Parallel, ResultsIndependentOfThreadCount) {
  auto run = [](int threads) {
    std::vector<double> out(1000);
    parallel_for(out.size(), [&](std::size_t r) {
      Rng rng = Rng::for_stream(9, stream_tag("p"), r);
      out[r] = rng.uniform();
    }, threads);
    return out;
  };
  EXPECT_EQ(run(1), run(3));
}

TEST(Parallel, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(10, [](std::size_t r) {
    if (r == 7) throw std::runtime_error("boom");
  }, 2), std::runtime_error);
}
