#include "lambda_asg/duality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "lambda_asg/asg.hpp"
#include "lambda_asg/errors.hpp"
#include "lambda_asg/limits.hpp"
#include "lambda_asg/moran.hpp"
#include "lambda_asg/parallel.hpp"

namespace lambda_asg {

namespace {

struct Moments {
  double mean = 0.0;
  double stderr_ = 0.0;
};

Moments summarize(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  const double n = static_cast<double>(v.size());
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.stderr_ = std::sqrt(ss / (n - 1) / n);
  }
  return m;
}

double z_score(double diff, double se) {
  if (se > 0.0) return diff / se;
  return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
}

}  // namespace

double sampling_function(int N, int i, int n) {
  if (N < 0 || i < 0 || i > N || n < 0 || n > N) {
    throw ValidationError("sampling_function needs 0 <= i, n <= N");
  }
  if (n > i) return 0.0;
  double s = 1.0;
  for (int k = 0; k < n; ++k) s *= static_cast<double>(i - k) / static_cast<double>(N - k);
  return s;
}

SamplingTable::SamplingTable(int N) : n_(N), values_(N + 1, N + 1) {
  if (N < 1) throw ValidationError("sampling table needs N >= 1");
  for (int i = 0; i <= N; ++i) {
    for (int n = 0; n <= N; ++n) values_(i, n) = sampling_function(N, i, n);
  }
}

double generator_duality_check(int N, const CoupledMeasure& coupling) {
  if (N > kDualityMatrixLimit) {
    throw SizeLimit("generator duality check limited to N <= " +
                    std::to_string(kDualityMatrixLimit));
  }
  MoranConfig cfg;
  cfg.N = N;
  cfg.coupling = coupling;
  cfg.initial_count = 0;
  const Eigen::MatrixXd b = generator_matrix(cfg).matrix();
  const Eigen::MatrixXd a = line_count_generator(N, coupling).matrix();
  const SamplingTable d(N);
  const Eigen::MatrixXd residual = b * d.values() - d.values() * a.transpose();
  return residual.cwiseAbs().maxCoeff();
}

DualityReport pathwise_duality_check(int N, const CoupledMeasure& coupling, double T, int n,
                                     double x, long replicates, std::uint64_t seed) {
  if (replicates < 1) throw ValidationError("replicates must be >= 1");
  if (n < 0 || n > N) throw ValidationError("sample size n must lie in [0, N]");
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("x must lie in [0, 1]");
  if (!(T > 0.0)) throw ValidationError("T must be > 0");
  const int minus0 = static_cast<int>(std::lround(x * N));
  const auto R = static_cast<std::size_t>(replicates);
  std::vector<double> lhs(R), rhs(R);
  parallel_for(R, [&](std::size_t r) {
    Rng rng = Rng::for_stream(seed, stream_tag("duality/pathwise"), r);
    const AsgRealization asg = generate_asg(N, coupling, T, rng);

    std::vector<int> perm(static_cast<std::size_t>(N));
    std::iota(perm.begin(), perm.end(), 0);
    // Partial Fisher–Yates for a uniform set of xN minus individuals.
    std::vector<Type> init(static_cast<std::size_t>(N), Type::plus);
    for (int k = 0; k < minus0; ++k) {
      const auto j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(N - k)));
      std::swap(perm[k], perm[j]);
      init[perm[k]] = Type::minus;
    }
    const auto final_types = propagate_forward(asg, init);
    const int minus_T = static_cast<int>(std::count(final_types.begin(), final_types.end(), Type::minus));
    lhs[r] = sampling_function(N, minus_T, n);

    std::iota(perm.begin(), perm.end(), 0);
    for (int k = 0; k < n; ++k) {
      const auto j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(N - k)));
      std::swap(perm[k], perm[j]);
    }
    const std::vector<int> sample(perm.begin(), perm.begin() + n);
    const auto ancestors = potential_ancestors(asg, sample, T, 0.0);
    rhs[r] = sampling_function(N, minus0, static_cast<int>(ancestors.size()));
  });
  const Moments l = summarize(lhs), h = summarize(rhs);
  std::vector<double> diff(R);
  for (std::size_t r = 0; r < R; ++r) diff[r] = lhs[r] - rhs[r];
  const Moments d = summarize(diff);

  DualityReport rep;
  rep.lhs = l.mean;
  rep.rhs = h.mean;
  rep.stderr_lhs = l.stderr_;
  rep.stderr_rhs = h.stderr_;
  rep.z = z_score(d.mean, d.stderr_);
  rep.replicates = replicates;
  rep.params = {{"N", N}, {"T", T}, {"n", n}, {"x", x}, {"paired_stderr", d.stderr_}};
  return rep;
}

DualityReport limit_moment_duality_check(const CoupledMeasure& coupling, double x, int n,
                                         double t, long replicates, std::uint64_t seed) {
  if (replicates < 1) throw ValidationError("replicates must be >= 1");
  if (n < 1) throw ValidationError("n must be >= 1");
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("x must lie in [0, 1]");
  if (!(t > 0.0)) throw ValidationError("t must be > 0");
  const auto R = static_cast<std::size_t>(replicates);

  const SdeSimulator sde(coupling);
  std::vector<double> lhs(R), rhs(R);
  parallel_for(R, [&](std::size_t r) {
    Rng rng = Rng::for_stream(seed, stream_tag("duality/limit/sde"), r);
    lhs[r] = std::pow(sde.final_value(x, t, rng), n);
  });

  // The chain caches rates per state, so each worker block gets its own copy.
  const std::size_t blocks = std::min<std::size_t>(R, 64);
  std::vector<LimitChainSimulator> chains(blocks, LimitChainSimulator(coupling));
  parallel_for(blocks, [&](std::size_t b) {
    for (std::size_t r = b; r < R; r += blocks) {
      Rng rng = Rng::for_stream(seed, stream_tag("duality/limit/chain"), r);
      rhs[r] = std::pow(x, static_cast<double>(chains[b].final_value(n, t, rng)));
    }
  });

  const Moments l = summarize(lhs), h = summarize(rhs);
  DualityReport rep;
  rep.lhs = l.mean;
  rep.rhs = h.mean;
  rep.stderr_lhs = l.stderr_;
  rep.stderr_rhs = h.stderr_;
  rep.z = z_score(l.mean - h.mean, std::hypot(l.stderr_, h.stderr_));
  rep.replicates = replicates;
  rep.params = {{"x", x}, {"n", n}, {"t", t}};
  return rep;
}

double limit_generator_duality(const CoupledMeasure& coupling, int n_max, int grid) {
  if (n_max < 1 || n_max > 12) throw ValidationError("n_max must lie in [1, 12]");
  if (grid < 2) throw ValidationError("grid must be >= 2");
  std::vector<LimitChainRates> rates;
  for (int n = 1; n <= n_max; ++n) rates.push_back(limit_chain_rates(coupling, n));
  double worst = 0.0;
  for (int g = 0; g < grid; ++g) {
    const double x = static_cast<double>(g) / (grid - 1);
    for (int n = 1; n <= n_max; ++n) {
      const double xn = std::pow(x, n);
      const double forward = coupling.integrate([&](double y, double z) {
        return x * std::pow(x + y * (1.0 - x), n) +
               (1.0 - x) * std::pow(x - (y + z) * x, n) - xn;
      });
      const auto& r = rates[n - 1];
      double backward = r.branch * (std::pow(x, n + 1) - xn);
      for (int k = 2; k <= n; ++k) backward += r.coalesce[k] * (std::pow(x, n - k + 1) - xn);
      worst = std::max(worst, std::abs(forward - backward));
    }
  }
  return worst;
}

}  // namespace lambda_asg
