#include "lambda_asg/limits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "lambda_asg/errors.hpp"
#include "lambda_asg/moran.hpp"
#include "lambda_asg/numerics.hpp"
#include "lambda_asg/parallel.hpp"

namespace lambda_asg {

namespace {

std::vector<double> atom_masses(std::span<const CoupledAtom> atoms) {
  std::vector<double> w;
  w.reserve(atoms.size());
  for (const auto& a : atoms) w.push_back(a.mass);
  return w;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void SdeConfig::validate() const {
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw ValidationError("x0 must lie in [0, 1]");
  if (!(horizon > 0.0)) throw ValidationError("horizon must be > 0");
  if (!std::isfinite(griffiths_mass(coupling))) {
    throw InfiniteMass("integral of (y^2 + z) against the coupling is not finite");
  }
  if (mode == SdeMode::event_driven && !std::isfinite(coupling.total_mass())) {
    throw InfiniteMass("event-driven SDE simulation needs a finite coupling mass");
  }
  if (mode == SdeMode::truncated && !(epsilon > 0.0)) {
    throw ValidationError("truncated SDE mode needs epsilon > 0");
  }
}

SdeSimulator::SdeSimulator(const CoupledMeasure& coupling)
    : rate_(coupling.total_mass()),
      atoms_(coupling.atoms().begin(), coupling.atoms().end()),
      alias_(atom_masses(coupling.atoms())) {
  if (!std::isfinite(rate_)) throw InfiniteMass("SDE simulation needs a finite coupling mass");
}

double SdeSimulator::jump(double value, Rng& rng) const {
  const auto& a = atoms_[alias_.sample(rng)];
  const double u = rng.uniform_pos();
  if (u <= value) return value + a.y * (1.0 - value);
  return value - std::min(1.0, a.y + a.z) * value;
}

RealPath SdeSimulator::path(double x0, double horizon, Rng& rng) const {
  RealPath p;
  p.times.push_back(0.0);
  p.values.push_back(x0);
  if (rate_ <= 0.0 || atoms_.empty()) return p;
  double y = x0;
  double t = 0.0;
  while (y > 0.0 && y < 1.0) {
    t += rng.exponential(rate_);
    if (t > horizon) break;
    const double next = jump(y, rng);
    if (next != y) {
      y = next;
      p.times.push_back(t);
      p.values.push_back(y);
    }
  }
  return p;
}

double SdeSimulator::final_value(double x0, double horizon, Rng& rng) const {
  if (rate_ <= 0.0 || atoms_.empty()) return x0;
  double y = x0;
  double t = 0.0;
  while (y > 0.0 && y < 1.0) {
    t += rng.exponential(rate_);
    if (t > horizon) break;
    y = jump(y, rng);
  }
  return y;
}

bool SdeSimulator::fixes(double x0, Rng& rng, double eps, long max_events) const {
  double y = x0;
  if (rate_ <= 0.0 || atoms_.empty()) return y >= 0.5;
  for (long i = 0; i < max_events && y > eps && y < 1.0 - eps; ++i) y = jump(y, rng);
  return y >= 0.5;
}

CoupledMeasure sde_driving_measure(const SdeConfig& cfg, std::vector<std::string>* warnings) {
  cfg.validate();
  if (cfg.mode == SdeMode::event_driven) return cfg.coupling;
  std::vector<CoupledAtom> kept;
  for (const auto& a : cfg.coupling.atoms()) {
    if (a.y * a.y > cfg.epsilon) kept.push_back(a);
  }
  const double lost = unreachable_selective_mass(cfg.coupling);
  if (warnings && lost > 0.0) {
    warnings->push_back("truncation to y^2 > " + fmt(cfg.epsilon) + " drops selective mass " +
                        fmt(lost) + " carried by atoms with y = 0");
  }
  return CoupledMeasure(std::move(kept));
}

RealPath simulate_sde(const SdeConfig& cfg, std::uint64_t seed) {
  const CoupledMeasure driving = sde_driving_measure(cfg);
  Rng rng(seed);
  return SdeSimulator(driving).path(cfg.x0, cfg.horizon, rng);
}

double TruncationScheme::threshold() const { return std::pow(static_cast<double>(N), -alpha); }

void TruncationScheme::validate() const {
  if (!(alpha > 0.0 && alpha < 0.5)) throw ValidationError("alpha must lie in (0, 1/2)");
  if (N < 2) throw ValidationError("truncation N must be >= 2");
}

CoupledMeasure truncate_measure(const CoupledMeasure& coupling, const TruncationScheme& scheme) {
  scheme.validate();
  const double cut = scheme.threshold();
  std::vector<CoupledAtom> kept;
  for (const auto& a : coupling.atoms()) {
    if (a.y * a.y > cut) kept.push_back(a);
  }
  return CoupledMeasure(std::move(kept));
}

double unreachable_selective_mass(const CoupledMeasure& coupling) {
  double s = 0.0;
  for (const auto& a : coupling.atoms()) {
    if (a.y == 0.0 && a.z > 0.0) s += a.mass;
  }
  return s;
}

double griffiths_mass(const CoupledMeasure& coupling) {
  return coupling.integrate([](double y, double z) { return y * y + z; });
}

LimitChainRates limit_chain_rates(const CoupledMeasure& coupling, long m) {
  if (m < 1) throw ValidationError("limit chain state must be >= 1");
  LimitChainRates r;
  r.coalesce.assign(static_cast<std::size_t>(m) + 1, 0.0);
  for (const auto& a : coupling.atoms()) {
    if (a.y > 0.0 && m >= 2) {
      const auto pmf = binomial_pmf_vector(m, a.y);
      for (long k = 2; k <= m; ++k) r.coalesce[k] += a.mass * pmf[k];
    }
    if (a.z > 0.0) {
      const double md = static_cast<double>(m);
      r.branch += a.mass * (std::pow(1.0 - a.y, md) -
                            std::pow(std::max(0.0, 1.0 - a.y - a.z), md));
    }
  }
  return r;
}

LimitChainSimulator::LimitChainSimulator(const CoupledMeasure& coupling, long state_cap)
    : coupling_(coupling), cap_(state_cap) {
  if (cap_ < 1) throw ValidationError("state cap must be >= 1");
}

const LimitChainSimulator::State& LimitChainSimulator::state(long m) {
  if (static_cast<std::size_t>(m) >= ready_.size()) {
    states_.resize(static_cast<std::size_t>(m) + 1);
    ready_.resize(static_cast<std::size_t>(m) + 1, 0);
  }
  State& s = states_[m];
  if (ready_[m]) return s;
  const LimitChainRates r = limit_chain_rates(coupling_, m);
  std::vector<double> w;
  for (long k = 2; k <= m; ++k) {
    if (r.coalesce[k] > 0.0) {
      s.targets.push_back(m - k + 1);
      w.push_back(r.coalesce[k]);
    }
  }
  if (r.branch > 0.0) {
    s.targets.push_back(m + 1);
    w.push_back(r.branch);
  }
  s.total = std::accumulate(w.begin(), w.end(), 0.0);
  s.alias = AliasTable(w);
  ready_[m] = 1;
  return s;
}

IntPath LimitChainSimulator::path(long n0, double horizon, Rng& rng) {
  if (n0 < 1) throw ValidationError("n0 must be >= 1");
  IntPath p;
  p.times.push_back(0.0);
  p.values.push_back(n0);
  long m = n0;
  double t = 0.0;
  for (;;) {
    const State& s = state(m);
    if (s.total <= 0.0) break;
    t += rng.exponential(s.total);
    if (t > horizon) break;
    m = s.targets[s.alias.sample(rng)];
    if (m > cap_) {
      throw StateCapReached("limit chain exceeded the state cap " + std::to_string(cap_) +
                            " at time " + fmt(t));
    }
    p.times.push_back(t);
    p.values.push_back(m);
  }
  return p;
}

long LimitChainSimulator::final_value(long n0, double horizon, Rng& rng) {
  if (n0 < 1) throw ValidationError("n0 must be >= 1");
  long m = n0;
  double t = 0.0;
  for (;;) {
    const State& s = state(m);
    if (s.total <= 0.0) return m;
    t += rng.exponential(s.total);
    if (t > horizon) return m;
    m = s.targets[s.alias.sample(rng)];
    if (m > cap_) {
      throw StateCapReached("limit chain exceeded the state cap " + std::to_string(cap_) +
                            " at time " + fmt(t));
    }
  }
}

IntPath simulate_limit_chain(const CoupledMeasure& coupling, long n0, double horizon,
                             std::uint64_t seed, long state_cap) {
  if (!(horizon > 0.0)) throw ValidationError("horizon must be > 0");
  Rng rng(seed);
  LimitChainSimulator sim(coupling, state_cap);
  return sim.path(n0, horizon, rng);
}

namespace {

// KS statistic between two sorted samples carrying integer weights.
double weighted_ks(const std::vector<double>& a, const std::vector<std::uint32_t>* wa,
                   const std::vector<double>& b, const std::vector<std::uint32_t>* wb) {
  const double ta = wa ? std::accumulate(wa->begin(), wa->end(), 0.0) : a.size();
  const double tb = wb ? std::accumulate(wb->begin(), wb->end(), 0.0) : b.size();
  std::size_t i = 0, j = 0;
  double ca = 0.0, cb = 0.0, d = 0.0;
  while (i < a.size() || j < b.size()) {
    double v;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) {
      v = a[i];
    } else {
      v = b[j];
    }
    while (i < a.size() && a[i] == v) ca += wa ? (*wa)[i++] : (++i, 1.0);
    while (j < b.size() && b[j] == v) cb += wb ? (*wb)[j++] : (++j, 1.0);
    d = std::max(d, std::abs(ca / ta - cb / tb));
  }
  return d;
}

}  // namespace

double ks_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw ValidationError("ks_distance needs nonempty samples");
  return weighted_ks(a, nullptr, b, nullptr);
}

bool ConvergenceReport::nonincreasing_within_noise(double sigmas) const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double noise = std::max(rows[i].bootstrap_stderr, rows[i - 1].bootstrap_stderr);
    if (rows[i].ks > rows[i - 1].ks + sigmas * noise) return false;
  }
  return true;
}

ConvergenceReport convergence_study(const CoupledMeasure& coupling,
                                    const std::vector<TruncationScheme>& schemes, double T,
                                    double x0, long replicates, std::uint64_t seed,
                                    int bootstrap) {
  if (replicates < 1) throw ValidationError("replicates must be >= 1");
  if (!(T > 0.0)) throw ValidationError("T must be > 0");
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw ValidationError("x0 must lie in [0, 1]");
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    schemes[i].validate();
    if (i > 0 && schemes[i].N <= schemes[i - 1].N) {
      throw ValidationError("convergence schemes must have increasing N");
    }
  }
  ConvergenceReport report;
  report.x0 = x0;
  report.T = T;
  report.replicates = replicates;
  report.bootstrap = bootstrap;
  if (const double lost = unreachable_selective_mass(coupling); lost > 0.0) {
    report.warnings.push_back("truncation removes selective mass " + fmt(lost) +
                              " on y = 0 at every N; the limit keeps it");
  }

  const auto R = static_cast<std::size_t>(replicates);
  const SdeSimulator sde(coupling);
  std::vector<double> limit(R);
  parallel_for(R, [&](std::size_t r) {
    Rng rng = Rng::for_stream(seed, stream_tag("convergence/sde"), r);
    limit[r] = sde.final_value(x0, T, rng);
  });
  std::sort(limit.begin(), limit.end());

  for (const auto& scheme : schemes) {
    const CoupledMeasure truncated = truncate_measure(coupling, scheme);
    const MoranSimulator moran(scheme.N, truncated);
    const int start = static_cast<int>(std::lround(x0 * scheme.N));
    const std::uint64_t stream = stream_tag("convergence/moran") ^ static_cast<std::uint64_t>(scheme.N);
    std::vector<double> finite(R);
    parallel_for(R, [&](std::size_t r) {
      Rng rng = Rng::for_stream(seed, stream, r);
      finite[r] = static_cast<double>(moran.final_count(start, T, rng)) / scheme.N;
    });
    std::sort(finite.begin(), finite.end());

    ConvergenceRow row;
    row.N = scheme.N;
    row.alpha = scheme.alpha;
    row.truncated_mass = truncated.total_mass();
    row.ks = ks_distance(finite, limit);

    if (bootstrap > 1) {
      std::vector<double> stats(static_cast<std::size_t>(bootstrap));
      const std::uint64_t bstream = stream_tag("convergence/bootstrap") ^ static_cast<std::uint64_t>(scheme.N);
      parallel_for(stats.size(), [&](std::size_t b) {
        Rng rng = Rng::for_stream(seed, bstream, b);
        std::vector<std::uint32_t> wa(R, 0), wb(R, 0);
        for (std::size_t k = 0; k < R; ++k) ++wa[rng.below(R)];
        for (std::size_t k = 0; k < R; ++k) ++wb[rng.below(R)];
        stats[b] = weighted_ks(finite, &wa, limit, &wb);
      });
      const double mean = std::accumulate(stats.begin(), stats.end(), 0.0) / bootstrap;
      double ss = 0.0;
      for (double s : stats) ss += (s - mean) * (s - mean);
      row.bootstrap_stderr = std::sqrt(ss / (bootstrap - 1));
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace lambda_asg
