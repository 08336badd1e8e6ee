#pragma once

#include <cstdint>
#include <vector>

#include "lambda_asg/ctmc.hpp"
#include "lambda_asg/measures.hpp"
#include "lambda_asg/rng.hpp"

namespace lambda_asg {

struct MoranConfig {
  int N = 2;
  CoupledMeasure coupling;
  int initial_count = 1;  ///< number of minus individuals at time 0

  void validate() const;
};

/// up[k]: rate of count → count + k; down[k]: rate of count → count − k.
/// Index 0 is unused and always 0.
struct JumpRates {
  std::vector<double> up;
  std::vector<double> down;
};

JumpRates jump_rates(const MoranConfig& cfg, int count);

/// Piecewise-constant integer path; the value after each listed time holds
/// until the next one.
struct FrequencyPath {
  std::vector<double> times;
  std::vector<int> values;

  int final_value() const noexcept { return values.empty() ? 0 : values.back(); }
};

/// Event-driven sampler of the minus count. Holds the alias table so repeated
/// replicates share the setup.
class MoranSimulator {
 public:
  MoranSimulator(int N, const CoupledMeasure& coupling);

  int N() const noexcept { return n_; }
  double event_rate() const noexcept { return rate_; }

  /// Applies one reproduction event to `count` and returns the new count.
  int step(int count, Rng& rng) const;

  FrequencyPath path(int initial_count, double horizon, Rng& rng) const;
  int final_count(int initial_count, double horizon, Rng& rng) const;

  /// Runs until absorption, or until `max_time` when given (> 0).
  int absorb(int initial_count, Rng& rng, double max_time = 0.0) const;

 private:
  int n_;
  double rate_;
  std::vector<CoupledAtom> atoms_;
  AliasTable alias_;
};

FrequencyPath simulate(const MoranConfig& cfg, double horizon, std::uint64_t seed);

/// Dense (N+1)×(N+1) generator; throws SizeLimit above kDenseStateLimit.
RateMatrix generator_matrix(const MoranConfig& cfg);

/// h[i] = P(absorb at N | start at i). initial_count is ignored.
std::vector<double> absorption_probability(const MoranConfig& cfg);

}  // namespace lambda_asg
