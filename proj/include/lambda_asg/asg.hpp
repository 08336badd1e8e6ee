#pragma once

#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "lambda_asg/ctmc.hpp"
#include "lambda_asg/measures.hpp"
#include "lambda_asg/rng.hpp"

namespace lambda_asg {

/// Realizations storing more outcome labels than this must go through the
/// on-disk event log.
inline constexpr std::size_t kAsgOutcomeCap = 10'000'000;

enum class Arrow : std::uint8_t { none = 0, neutral = 1, selective = 2 };
enum class Type : std::uint8_t { plus = 0, minus = 1 };

/// One reproduction event. Individuals are 0-based; outcome[reproducer] is
/// stored but has no effect.
struct AsgEvent {
  double t;
  std::uint32_t reproducer;
  double y;
  double z;
  std::span<const Arrow> outcome;
};

class AsgRealization {
 public:
  AsgRealization() = default;
  AsgRealization(int N, double horizon);

  int N() const noexcept { return n_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }

  AsgEvent event(std::size_t i) const noexcept {
    return {times_[i], reproducers_[i], ys_[i], zs_[i],
            std::span<const Arrow>(outcomes_.data() + i * static_cast<std::size_t>(n_),
                                   static_cast<std::size_t>(n_))};
  }

  /// Appends an event; times must be strictly increasing.
  void push_back(double t, std::uint32_t reproducer, double y, double z,
                 std::span<const Arrow> outcome);

 private:
  int n_ = 0;
  double horizon_ = 0.0;
  std::vector<double> times_;
  std::vector<std::uint32_t> reproducers_;
  std::vector<double> ys_;
  std::vector<double> zs_;
  std::vector<Arrow> outcomes_;
};

/// Draws events one at a time in time order.
class AsgEventGenerator {
 public:
  AsgEventGenerator(int N, const CoupledMeasure& coupling, double horizon, Rng rng);

  /// Fills the next event; false once the horizon is passed. The outcome span
  /// stays valid until the following call.
  bool next(AsgEvent& event);

  const Rng& rng() const noexcept { return rng_; }

 private:
  int n_;
  double horizon_;
  double rate_;
  double t_ = 0.0;
  std::vector<CoupledAtom> atoms_;
  AliasTable alias_;
  Rng rng_;
  std::vector<Arrow> outcome_;
};

AsgRealization generate_asg(int N, const CoupledMeasure& coupling, double horizon, Rng& rng);
AsgRealization generate_asg(int N, const CoupledMeasure& coupling, double horizon,
                            std::uint64_t seed);

/// Binary event log: 16-byte header ("ASG1", u32 N, f64 horizon) then one
/// record per event (f64 t, u32 reproducer, f64 y, f64 z, N outcome bytes),
/// little-endian. The reproducer is written 1-based.
void write_asg_log(const AsgRealization& asg, const std::string& path);

/// Generates straight to disk without holding the realization; returns the
/// number of events written.
std::size_t stream_asg_log(int N, const CoupledMeasure& coupling, double horizon,
                           std::uint64_t seed, const std::string& path);

class AsgLogReader {
 public:
  explicit AsgLogReader(const std::string& path);

  int N() const noexcept { return n_; }
  double horizon() const noexcept { return horizon_; }

  bool next(AsgEvent& event);

 private:
  std::ifstream in_;
  int n_ = 0;
  double horizon_ = 0.0;
  std::vector<Arrow> outcome_;
};

AsgRealization read_asg_log(const std::string& path);

/// Applies one event to a type vector: plus reproducers spread along neutral
/// and selective arrows, minus reproducers along neutral arrows only.
void apply_event(const AsgEvent& event, std::vector<Type>& types);

std::vector<Type> propagate_forward(const AsgRealization& asg, std::vector<Type> init);

/// Forward propagation straight from an event log.
std::vector<Type> propagate_forward_log(const std::string& path, std::vector<Type> init);

/// Potential ancestors at `to_time` of `sample` (taken at `from_time`),
/// sweeping events in (to_time, from_time] backwards. Returns sorted indices.
std::vector<int> potential_ancestors(const AsgRealization& asg, const std::vector<int>& sample,
                                     double from_time, double to_time);

struct ConsistencyReport {
  long realizations = 0;
  long checks = 0;
  long violations = 0;
};

/// For random realizations and random initial types: individual i is plus at
/// the horizon iff some potential ancestor of i at time 0 is plus.
ConsistencyReport check_type_ancestry(int N, const CoupledMeasure& coupling, double horizon,
                                      long replicates, std::uint64_t seed);

struct LineCountRates {
  std::vector<double> coalesce;  ///< index k: rate of n → n − k
  double branch = 0.0;           ///< rate of n → n + 1
};

LineCountRates line_count_rates(int N, const CoupledMeasure& coupling, int n);

/// Generator of the line-counting chain over n = 0..N, with an inert n = 0.
RateMatrix line_count_generator(int N, const CoupledMeasure& coupling);

struct IntPath {
  std::vector<double> times;
  std::vector<long> values;

  long final_value() const noexcept { return values.empty() ? 0 : values.back(); }
};

IntPath simulate_line_count(int N, const CoupledMeasure& coupling, int n0, double horizon,
                            std::uint64_t seed);
IntPath simulate_line_count(int N, const CoupledMeasure& coupling, int n0, double horizon,
                            Rng& rng);

}  // namespace lambda_asg
