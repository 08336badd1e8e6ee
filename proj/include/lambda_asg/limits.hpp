#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lambda_asg/asg.hpp"
#include "lambda_asg/measures.hpp"
#include "lambda_asg/rng.hpp"

namespace lambda_asg {

enum class SdeMode { event_driven, truncated };

struct SdeConfig {
  CoupledMeasure coupling;
  double x0 = 0.5;
  double horizon = 1.0;
  SdeMode mode = SdeMode::event_driven;
  double epsilon = 0.0;  ///< truncated mode keeps atoms with y² > epsilon

  void validate() const;
};

struct RealPath {
  std::vector<double> times;
  std::vector<double> values;

  double final_value() const noexcept { return values.empty() ? 0.0 : values.back(); }
};

/// Exact event-driven sampler of the minus frequency in the scaling limit:
/// at rate ‖Λ‖ pick (y, z) and u; Y += y(1−Y) if u ≤ Y, else Y −= (y+z)Y.
class SdeSimulator {
 public:
  explicit SdeSimulator(const CoupledMeasure& coupling);

  double event_rate() const noexcept { return rate_; }

  double jump(double value, Rng& rng) const;
  RealPath path(double x0, double horizon, Rng& rng) const;
  double final_value(double x0, double horizon, Rng& rng) const;

  /// Runs until Y leaves (eps, 1 − eps); true when it exits at the top.
  /// Gives up after `max_events` and classifies by Y ≥ 1/2.
  bool fixes(double x0, Rng& rng, double eps = 1e-9, long max_events = 10'000'000) const;

 private:
  double rate_;
  std::vector<CoupledAtom> atoms_;
  AliasTable alias_;
};

/// Resolves the driving measure for a config: the coupling itself in
/// event-driven mode, its restriction to {y² > epsilon} in truncated mode.
/// Warnings about dropped selective mass are appended to `warnings`.
CoupledMeasure sde_driving_measure(const SdeConfig& cfg, std::vector<std::string>* warnings = nullptr);

RealPath simulate_sde(const SdeConfig& cfg, std::uint64_t seed);

struct TruncationScheme {
  double alpha = 0.4;
  int N = 100;

  /// Atoms are kept when y² exceeds this.
  double threshold() const;
  void validate() const;
};

CoupledMeasure truncate_measure(const CoupledMeasure& coupling, const TruncationScheme& scheme);

/// Λ({y = 0, z > 0}): selective mass the truncation always removes.
double unreachable_selective_mass(const CoupledMeasure& coupling);

/// ∫(y² + z) dΛ.
double griffiths_mass(const CoupledMeasure& coupling);

struct LimitChainRates {
  std::vector<double> coalesce;  ///< index k: rate of m → m − k + 1, k = 2..m
  double branch = 0.0;           ///< rate of m → m + 1
};

LimitChainRates limit_chain_rates(const CoupledMeasure& coupling, long m);

inline constexpr long kDefaultStateCap = 1'000'000;

/// Sampler of the limit line-counting chain with per-state rates cached on
/// first visit.
class LimitChainSimulator {
 public:
  explicit LimitChainSimulator(const CoupledMeasure& coupling, long state_cap = kDefaultStateCap);

  IntPath path(long n0, double horizon, Rng& rng);
  long final_value(long n0, double horizon, Rng& rng);

 private:
  struct State {
    double total = 0.0;
    std::vector<long> targets;
    AliasTable alias;
  };
  const State& state(long m);

  CoupledMeasure coupling_;
  long cap_;
  std::vector<State> states_;
  std::vector<char> ready_;
};

IntPath simulate_limit_chain(const CoupledMeasure& coupling, long n0, double horizon,
                             std::uint64_t seed, long state_cap = kDefaultStateCap);

/// Two-sample Kolmogorov–Smirnov statistic; inputs must be sorted.
double ks_distance(const std::vector<double>& a, const std::vector<double>& b);

struct ConvergenceRow {
  int N = 0;
  double alpha = 0.0;
  double truncated_mass = 0.0;
  double ks = 0.0;
  double bootstrap_stderr = 0.0;
};

struct ConvergenceReport {
  double x0 = 0.5;
  double T = 1.0;
  long replicates = 0;
  int bootstrap = 0;
  std::vector<ConvergenceRow> rows;
  std::vector<std::string> warnings;

  /// ks[i+1] ≤ ks[i] + 2·max(stderr_i, stderr_{i+1}) for every step.
  bool nonincreasing_within_noise(double sigmas = 2.0) const;
};

/// For each scheme: truncated Moran at N from ⌊x0·N⌉ versus the SDE from x0,
/// KS distance of the time-T marginals and its bootstrap standard error.
ConvergenceReport convergence_study(const CoupledMeasure& coupling,
                                    const std::vector<TruncationScheme>& schemes, double T,
                                    double x0, long replicates, std::uint64_t seed,
                                    int bootstrap = 1000);

}  // namespace lambda_asg
