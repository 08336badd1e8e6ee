#include "lambda_asg/asg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "lambda_asg/errors.hpp"
#include "lambda_asg/numerics.hpp"
#include "lambda_asg/parallel.hpp"

namespace lambda_asg {

namespace {

constexpr char kMagic[4] = {'A', 'S', 'G', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
bool get_le(std::istream& in, T& value) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) return false;
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  std::memcpy(&value, bytes, sizeof(T));
  return true;
}

void write_header(std::ostream& out, int N, double horizon) {
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(N));
  put_le<double>(out, horizon);
}

void write_record(std::ostream& out, const AsgEvent& e) {
  put_le<double>(out, e.t);
  put_le<std::uint32_t>(out, e.reproducer + 1);
  put_le<double>(out, e.y);
  put_le<double>(out, e.z);
  out.write(reinterpret_cast<const char*>(e.outcome.data()),
            static_cast<std::streamsize>(e.outcome.size()));
}

void check_asg_args(int N, double horizon) {
  if (N < 2) throw ValidationError("ASG needs N >= 2, got " + std::to_string(N));
  if (!(horizon > 0.0)) throw ValidationError("ASG horizon must be > 0");
}

}  // namespace

AsgRealization::AsgRealization(int N, double horizon) : n_(N), horizon_(horizon) {}

void AsgRealization::push_back(double t, std::uint32_t reproducer, double y, double z,
                               std::span<const Arrow> outcome) {
  if (!times_.empty() && !(t > times_.back())) {
    throw ValidationError("ASG event times must be strictly increasing");
  }
  if (outcome.size() != static_cast<std::size_t>(n_) ||
      reproducer >= static_cast<std::uint32_t>(n_)) {
    throw ValidationError("ASG event does not match population size");
  }
  times_.push_back(t);
  reproducers_.push_back(reproducer);
  ys_.push_back(y);
  zs_.push_back(z);
  outcomes_.insert(outcomes_.end(), outcome.begin(), outcome.end());
}

AsgEventGenerator::AsgEventGenerator(int N, const CoupledMeasure& coupling, double horizon,
                                     Rng rng)
    : n_(N),
      horizon_(horizon),
      rate_(coupling.total_mass()),
      atoms_(coupling.atoms().begin(), coupling.atoms().end()),
      rng_(rng),
      outcome_(static_cast<std::size_t>(N), Arrow::none) {
  check_asg_args(N, horizon);
  std::vector<double> w;
  for (const auto& a : atoms_) w.push_back(a.mass);
  alias_ = AliasTable(w);
}

bool AsgEventGenerator::next(AsgEvent& event) {
  if (rate_ <= 0.0 || atoms_.empty()) return false;
  t_ += rng_.exponential(rate_);
  if (t_ > horizon_) {
    t_ = horizon_;
    rate_ = 0.0;
    return false;
  }
  const auto& a = atoms_[alias_.sample(rng_)];
  const auto r = static_cast<std::uint32_t>(rng_.below(static_cast<std::uint64_t>(n_)));
  const double s = a.y + a.z;
  for (auto& o : outcome_) {
    const double u = rng_.uniform();
    o = u < a.y ? Arrow::neutral : (u < s ? Arrow::selective : Arrow::none);
  }
  event = {t_, r, a.y, a.z, outcome_};
  return true;
}

AsgRealization generate_asg(int N, const CoupledMeasure& coupling, double horizon, Rng& rng) {
  AsgEventGenerator gen(N, coupling, horizon, rng);
  AsgRealization asg(N, horizon);
  AsgEvent e{};
  std::size_t stored = 0;
  while (gen.next(e)) {
    stored += static_cast<std::size_t>(N);
    if (stored > kAsgOutcomeCap) {
      throw SizeLimit("ASG realization exceeds " + std::to_string(kAsgOutcomeCap) +
                      " stored outcomes; use stream_asg_log to write it to disk");
    }
    asg.push_back(e.t, e.reproducer, e.y, e.z, e.outcome);
  }
  rng = gen.rng();
  return asg;
}

AsgRealization generate_asg(int N, const CoupledMeasure& coupling, double horizon,
                            std::uint64_t seed) {
  Rng rng(seed);
  return generate_asg(N, coupling, horizon, rng);
}

void write_asg_log(const AsgRealization& asg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_header(out, asg.N(), asg.horizon());
  for (std::size_t i = 0; i < asg.size(); ++i) write_record(out, asg.event(i));
  if (!out) throw Error("write to " + path + " failed");
}

std::size_t stream_asg_log(int N, const CoupledMeasure& coupling, double horizon,
                           std::uint64_t seed, const std::string& path) {
  AsgEventGenerator gen(N, coupling, horizon, Rng(seed));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_header(out, N, horizon);
  AsgEvent e{};
  std::size_t count = 0;
  while (gen.next(e)) {
    write_record(out, e);
    ++count;
  }
  if (!out) throw Error("write to " + path + " failed");
  return count;
}

AsgLogReader::AsgLogReader(const std::string& path) : in_(path, std::ios::binary) {
  if (!in_) throw Error("cannot open " + path);
  char magic[4];
  std::uint32_t n = 0;
  if (!in_.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0 || !get_le(in_, n) ||
      !get_le(in_, horizon_)) {
    throw ValidationError(path + " is not an ASG1 event log");
  }
  n_ = static_cast<int>(n);
  outcome_.resize(n);
}

bool AsgLogReader::next(AsgEvent& event) {
  double t, y, z;
  std::uint32_t r;
  if (!get_le(in_, t)) return false;
  if (!get_le(in_, r) || !get_le(in_, y) || !get_le(in_, z) ||
      !in_.read(reinterpret_cast<char*>(outcome_.data()),
                static_cast<std::streamsize>(outcome_.size()))) {
    throw ValidationError("truncated ASG1 event record");
  }
  if (r < 1 || r > static_cast<std::uint32_t>(n_)) {
    throw ValidationError("ASG1 record has reproducer outside [1, N]");
  }
  for (auto o : outcome_) {
    if (static_cast<std::uint8_t>(o) > 2) throw ValidationError("ASG1 record has bad outcome code");
  }
  event = {t, r - 1, y, z, outcome_};
  return true;
}

AsgRealization read_asg_log(const std::string& path) {
  AsgLogReader reader(path);
  AsgRealization asg(reader.N(), reader.horizon());
  AsgEvent e{};
  while (reader.next(e)) asg.push_back(e.t, e.reproducer, e.y, e.z, e.outcome);
  return asg;
}

void apply_event(const AsgEvent& e, std::vector<Type>& types) {
  const Type parent = types[e.reproducer];
  for (std::size_t j = 0; j < types.size(); ++j) {
    if (j == e.reproducer) continue;
    const Arrow o = e.outcome[j];
    if (o == Arrow::neutral || (o == Arrow::selective && parent == Type::plus)) {
      types[j] = parent;
    }
  }
}

std::vector<Type> propagate_forward(const AsgRealization& asg, std::vector<Type> init) {
  if (init.size() != static_cast<std::size_t>(asg.N())) {
    throw ValidationError("initial type assignment must have length N");
  }
  for (std::size_t i = 0; i < asg.size(); ++i) apply_event(asg.event(i), init);
  return init;
}

std::vector<Type> propagate_forward_log(const std::string& path, std::vector<Type> init) {
  AsgLogReader reader(path);
  if (init.size() != static_cast<std::size_t>(reader.N())) {
    throw ValidationError("initial type assignment must have length N");
  }
  AsgEvent e{};
  while (reader.next(e)) apply_event(e, init);
  return init;
}

std::vector<int> potential_ancestors(const AsgRealization& asg, const std::vector<int>& sample,
                                     double from_time, double to_time) {
  const int N = asg.N();
  if (!(0.0 <= to_time && to_time <= from_time && from_time <= asg.horizon())) {
    throw ValidationError("potential_ancestors needs 0 <= to_time <= from_time <= horizon");
  }
  std::vector<char> in(static_cast<std::size_t>(N), 0);
  for (int i : sample) {
    if (i < 0 || i >= N) throw ValidationError("sample index outside [0, N)");
    in[i] = 1;
  }
  for (std::size_t idx = asg.size(); idx-- > 0;) {
    const AsgEvent e = asg.event(idx);
    if (e.t > from_time) continue;
    if (e.t <= to_time) break;
    bool touched = false;
    for (int j = 0; j < N; ++j) {
      if (!in[j] || j == static_cast<int>(e.reproducer)) continue;
      if (e.outcome[j] == Arrow::neutral) {
        in[j] = 0;
        touched = true;
      } else if (e.outcome[j] == Arrow::selective) {
        touched = true;
      }
    }
    if (touched) in[e.reproducer] = 1;
  }
  std::vector<int> out;
  for (int j = 0; j < N; ++j) {
    if (in[j]) out.push_back(j);
  }
  return out;
}

ConsistencyReport check_type_ancestry(int N, const CoupledMeasure& coupling, double horizon,
                                      long replicates, std::uint64_t seed) {
  if (replicates < 1) throw ValidationError("replicates must be >= 1");
  const auto R = static_cast<std::size_t>(replicates);
  std::vector<long> bad(R, 0);
  parallel_for(R, [&](std::size_t r) {
    Rng rng = Rng::for_stream(seed, stream_tag("asg/pathwise"), r);
    const AsgRealization asg = generate_asg(N, coupling, horizon, rng);
    std::vector<Type> init(static_cast<std::size_t>(N));
    for (auto& t : init) t = rng.below(2) ? Type::minus : Type::plus;
    const auto final_types = propagate_forward(asg, init);
    for (int i = 0; i < N; ++i) {
      const auto anc = potential_ancestors(asg, {i}, horizon, 0.0);
      const bool reach_plus = std::any_of(anc.begin(), anc.end(),
                                          [&](int j) { return init[j] == Type::plus; });
      if (reach_plus != (final_types[i] == Type::plus)) ++bad[r];
    }
  });
  ConsistencyReport rep;
  rep.realizations = replicates;
  rep.checks = replicates * N;
  for (long b : bad) rep.violations += b;
  return rep;
}

LineCountRates line_count_rates(int N, const CoupledMeasure& coupling, int n) {
  if (n < 1 || n > N) throw ValidationError("line count n must lie in [1, N]");
  LineCountRates r;
  r.coalesce.assign(static_cast<std::size_t>(n), 0.0);
  const double inside = static_cast<double>(n) / N;
  const double outside = 1.0 - inside;
  for (const auto& a : coupling.atoms()) {
    if (a.y > 0.0) {
      // Reproducer inside the set: k of the other n − 1 lines are absorbed.
      const auto mine = binomial_pmf_vector(n - 1, a.y);
      // Reproducer outside: k + 1 lines are hit and replaced by one.
      const auto other = binomial_pmf_vector(n, a.y);
      for (int k = 1; k <= n - 1; ++k) {
        r.coalesce[k] += a.mass * (inside * mine[k] + outside * other[k + 1]);
      }
    }
    if (outside > 0.0 && a.z > 0.0) {
      const double none_neutral = std::pow(1.0 - a.y, n);
      const double none_hit = std::pow(std::max(0.0, 1.0 - a.y - a.z), n);
      r.branch += a.mass * outside * (none_neutral - none_hit);
    }
  }
  return r;
}

RateMatrix line_count_generator(int N, const CoupledMeasure& coupling) {
  if (N > kDenseStateLimit) {
    throw SizeLimit("dense line-count generator limited to N <= 2000");
  }
  RateMatrix a(N + 1);
  for (int n = 1; n <= N; ++n) {
    const LineCountRates r = line_count_rates(N, coupling, n);
    for (int k = 1; k < n; ++k) a(n, n - k) += r.coalesce[k];
    if (n < N) a(n, n + 1) += r.branch;
  }
  a.fill_diagonal();
  return a;
}

IntPath simulate_line_count(int N, const CoupledMeasure& coupling, int n0, double horizon,
                            Rng& rng) {
  if (n0 < 1 || n0 > N) throw ValidationError("n0 must lie in [1, N]");
  if (!(horizon > 0.0)) throw ValidationError("horizon must be > 0");
  // Per-state jump laws, built on first visit.
  struct State {
    bool ready = false;
    double total = 0.0;
    std::vector<long> targets;
    AliasTable alias;
  };
  std::vector<State> states(static_cast<std::size_t>(N) + 1);
  auto prepare = [&](int n) -> State& {
    State& s = states[n];
    if (s.ready) return s;
    const LineCountRates r = line_count_rates(N, coupling, n);
    std::vector<double> w;
    for (int k = 1; k < n; ++k) {
      if (r.coalesce[k] > 0.0) {
        s.targets.push_back(n - k);
        w.push_back(r.coalesce[k]);
      }
    }
    if (r.branch > 0.0) {
      s.targets.push_back(n + 1);
      w.push_back(r.branch);
    }
    for (double v : w) s.total += v;
    s.alias = AliasTable(w);
    s.ready = true;
    return s;
  };
  IntPath p;
  p.times.push_back(0.0);
  p.values.push_back(n0);
  int n = n0;
  double t = 0.0;
  for (;;) {
    State& s = prepare(n);
    if (s.total <= 0.0) break;
    t += rng.exponential(s.total);
    if (t > horizon) break;
    n = static_cast<int>(s.targets[s.alias.sample(rng)]);
    p.times.push_back(t);
    p.values.push_back(n);
  }
  return p;
}

IntPath simulate_line_count(int N, const CoupledMeasure& coupling, int n0, double horizon,
                            std::uint64_t seed) {
  Rng rng(seed);
  return simulate_line_count(N, coupling, n0, horizon, rng);
}

}  // namespace lambda_asg
