#include "lambda_asg/moran.hpp"

#include <cmath>
#include <string>

#include "lambda_asg/errors.hpp"
#include "lambda_asg/numerics.hpp"

namespace lambda_asg {

void MoranConfig::validate() const {
  if (N < 2) throw ValidationError("N must be >= 2, got " + std::to_string(N));
  if (initial_count < 0 || initial_count > N) {
    throw ValidationError("initial_count must lie in [0, N], got " +
                          std::to_string(initial_count));
  }
}

JumpRates jump_rates(const MoranConfig& cfg, int count) {
  cfg.validate();
  if (count < 0 || count > cfg.N) throw ValidationError("count outside [0, N]");
  const int N = cfg.N;
  const int plus = N - count;
  const double x = static_cast<double>(count) / N;
  JumpRates r;
  r.up.assign(static_cast<std::size_t>(plus) + 1, 0.0);
  r.down.assign(static_cast<std::size_t>(count) + 1, 0.0);
  for (const auto& a : cfg.coupling.atoms()) {
    if (count > 0 && plus > 0 && a.y > 0.0) {
      const auto pmf = binomial_pmf_vector(plus, a.y);
      for (int k = 1; k <= plus; ++k) r.up[k] += x * a.mass * pmf[k];
    }
    const double s = a.y + a.z;
    if (count > 0 && plus > 0 && s > 0.0) {
      const auto pmf = binomial_pmf_vector(count, std::min(1.0, s));
      for (int k = 1; k <= count; ++k) r.down[k] += (1.0 - x) * a.mass * pmf[k];
    }
  }
  return r;
}

MoranSimulator::MoranSimulator(int N, const CoupledMeasure& coupling)
    : n_(N), rate_(coupling.total_mass()), atoms_(coupling.atoms().begin(), coupling.atoms().end()) {
  if (N < 2) throw ValidationError("N must be >= 2");
  std::vector<double> w;
  w.reserve(atoms_.size());
  for (const auto& a : atoms_) w.push_back(a.mass);
  alias_ = AliasTable(w);
}

int MoranSimulator::step(int count, Rng& rng) const {
  const auto& a = atoms_[alias_.sample(rng)];
  const bool minus_reproducer = rng.below(static_cast<std::uint64_t>(n_)) <
                                static_cast<std::uint64_t>(count);
  if (minus_reproducer) {
    return count + static_cast<int>(rng.binomial(n_ - count, a.y));
  }
  return count - static_cast<int>(rng.binomial(count, std::min(1.0, a.y + a.z)));
}

FrequencyPath MoranSimulator::path(int initial_count, double horizon, Rng& rng) const {
  FrequencyPath p;
  p.times.push_back(0.0);
  p.values.push_back(initial_count);
  if (rate_ <= 0.0 || atoms_.empty()) return p;
  int count = initial_count;
  double t = 0.0;
  while (count > 0 && count < n_) {
    t += rng.exponential(rate_);
    if (t > horizon) break;
    const int next = step(count, rng);
    if (next != count) {
      count = next;
      p.times.push_back(t);
      p.values.push_back(count);
    }
  }
  return p;
}

int MoranSimulator::final_count(int initial_count, double horizon, Rng& rng) const {
  if (rate_ <= 0.0 || atoms_.empty()) return initial_count;
  int count = initial_count;
  double t = 0.0;
  while (count > 0 && count < n_) {
    t += rng.exponential(rate_);
    if (t > horizon) break;
    count = step(count, rng);
  }
  return count;
}

int MoranSimulator::absorb(int initial_count, Rng& rng, double max_time) const {
  if (rate_ <= 0.0 || atoms_.empty()) return initial_count;
  int count = initial_count;
  double t = 0.0;
  while (count > 0 && count < n_) {
    t += rng.exponential(rate_);
    if (max_time > 0.0 && t > max_time) break;
    count = step(count, rng);
  }
  return count;
}

FrequencyPath simulate(const MoranConfig& cfg, double horizon, std::uint64_t seed) {
  cfg.validate();
  if (!(horizon > 0.0)) throw ValidationError("horizon must be > 0");
  Rng rng(seed);
  return MoranSimulator(cfg.N, cfg.coupling).path(cfg.initial_count, horizon, rng);
}

RateMatrix generator_matrix(const MoranConfig& cfg) {
  cfg.validate();
  if (cfg.N > kDenseStateLimit) {
    throw SizeLimit("dense generator limited to N <= " + std::to_string(kDenseStateLimit) +
                    ", got " + std::to_string(cfg.N));
  }
  const int N = cfg.N;
  RateMatrix q(N + 1);
  for (int i = 1; i < N; ++i) {
    const JumpRates r = jump_rates(cfg, i);
    for (std::size_t k = 1; k < r.up.size(); ++k) q(i, i + static_cast<int>(k)) += r.up[k];
    for (std::size_t k = 1; k < r.down.size(); ++k) q(i, i - static_cast<int>(k)) += r.down[k];
  }
  q.fill_diagonal();
  return q;
}

std::vector<double> absorption_probability(const MoranConfig& cfg) {
  const Eigen::VectorXd h = hitting_probability(generator_matrix(cfg));
  return {h.data(), h.data() + h.size()};
}

}  // namespace lambda_asg
