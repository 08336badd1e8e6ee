#include "lambda_asg/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "lambda_asg/asg.hpp"
#include "lambda_asg/errors.hpp"
#include "lambda_asg/fixation.hpp"
#include "lambda_asg/limits.hpp"
#include "lambda_asg/moran.hpp"
#include "lambda_asg/parallel.hpp"

#ifndef LAMBDA_ASG_VERSION
#define LAMBDA_ASG_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace lambda_asg {

namespace {

constexpr const char* kStreamRule =
    "replicate r of stream s under master seed S uses xoshiro256** seeded by splitmix64 "
    "from splitmix64(splitmix64(splitmix64(S) ^ s) ^ splitmix64(~r)); s = FNV-1a of the "
    "stream name";

// ---------------------------------------------------------------------------
// Parameter access with field-qualified errors.

class Params {
 public:
  explicit Params(const json& node) : node_(node) {
    if (!node_.is_null() && !node_.is_object()) throw ConfigError("config field 'params' must be an object");
  }

  bool has(const std::string& key) const { return node_.is_object() && node_.contains(key); }

  long integer(const std::string& key, std::optional<long> fallback, long lo,
               long hi = std::numeric_limits<long>::max()) const {
    if (!has(key)) {
      if (!fallback) throw ConfigError("config field 'params." + key + "' is required");
      return *fallback;
    }
    const json& v = node_.at(key);
    if (!v.is_number_integer() && !(v.is_number_float() && std::floor(v.get<double>()) == v.get<double>())) {
      throw ConfigError("config field 'params." + key + "' must be an integer");
    }
    const long value = v.is_number_integer() ? v.get<long>() : static_cast<long>(v.get<double>());
    if (value < lo || value > hi) {
      throw ConfigError("config field 'params." + key + "' = " + std::to_string(value) +
                        " outside [" + std::to_string(lo) + ", " +
                        (hi == std::numeric_limits<long>::max() ? std::string("inf") : std::to_string(hi)) + "]");
    }
    return value;
  }

  double real(const std::string& key, std::optional<double> fallback, double lo, double hi,
              bool open_lo = false) const {
    if (!has(key)) {
      if (!fallback) throw ConfigError("config field 'params." + key + "' is required");
      return *fallback;
    }
    const json& v = node_.at(key);
    if (!v.is_number()) throw ConfigError("config field 'params." + key + "' must be a number");
    const double value = v.get<double>();
    if (!std::isfinite(value) || value < lo || value > hi || (open_lo && value == lo)) {
      throw ConfigError("config field 'params." + key + "' = " + format_real(value) +
                        " outside " + (open_lo ? "(" : "[") + format_real(lo) + ", " +
                        format_real(hi) + "]");
    }
    return value;
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_boolean()) throw ConfigError("config field 'params." + key + "' must be a boolean");
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_string()) throw ConfigError("config field 'params." + key + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<long> integers(const std::string& key, std::vector<long> fallback, long lo) const {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_array() || v.empty()) {
      throw ConfigError("config field 'params." + key + "' must be a nonempty array of integers");
    }
    std::vector<long> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer() || v[i].get<long>() < lo) {
        throw ConfigError("config field 'params." + key + "[" + std::to_string(i) +
                          "]' must be an integer >= " + std::to_string(lo));
      }
      out.push_back(v[i].get<long>());
    }
    return out;
  }

 private:
  const json& node_;
};

// ---------------------------------------------------------------------------
// Output helpers.

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir_ / name).string());
    files_.push_back(name);
    return out;
  }

  void write_json(const std::string& name, const json& j) {
    auto out = open(name);
    out << j.dump(2) << '\n';
  }

  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

struct Context {
  const json& config;
  Params params;
  std::uint64_t seed;
  Outputs& out;
  std::ostream& log;
  std::vector<std::string> warnings;
  bool acceptance_failed = false;
  std::string failure;
};

json coupling_json(const CoupledMeasure& c) {
  json atoms = json::array();
  for (const auto& a : c.atoms()) atoms.push_back({a.y, a.z, a.mass});
  json j = {{"atoms", atoms}};
  if (c.origin_mass() > 0.0) j["origin_mass"] = c.origin_mass();
  return j;
}

json measure_json(const FiniteMeasure1D& m) {
  json atoms = json::array();
  for (const auto& a : m.atoms()) atoms.push_back({a.location, a.mass});
  return {{"atoms", atoms}};
}

void write_coupling_csv(Outputs& out, const CoupledMeasure& c) {
  auto f = out.open("coupling.csv");
  f << "y,z,mass\r\n";
  if (c.origin_mass() > 0.0) f << "0,0," << format_real(c.origin_mass()) << "\r\n";
  for (const auto& a : c.atoms()) {
    f << format_real(a.y) << ',' << format_real(a.z) << ',' << format_real(a.mass) << "\r\n";
  }
}

// ---------------------------------------------------------------------------
// Experiments.

void run_moran_sim(Context& ctx) {
  const auto& p = ctx.params;
  const CoupledMeasure coupling = resolve_coupling(ctx.config);
  const int N = static_cast<int>(p.integer("N", std::nullopt, 2, 1'000'000));
  int start;
  if (p.has("initial_count")) {
    start = static_cast<int>(p.integer("initial_count", std::nullopt, 0, N));
  } else {
    start = static_cast<int>(std::lround(p.real("x0", 0.5, 0.0, 1.0) * N));
  }
  const double horizon = p.real("horizon", std::nullopt, 0.0, 1e12, true);
  const long R = p.integer("replicates", 1, 1);
  const MoranSimulator sim(N, coupling);
  std::vector<FrequencyPath> paths(static_cast<std::size_t>(R));
  parallel_for(paths.size(), [&](std::size_t r) {
    Rng rng = Rng::for_stream(ctx.seed, stream_tag("moran_sim"), r);
    paths[r] = sim.path(start, horizon, rng);
  });
  {
    auto f = ctx.out.open("paths.csv");
    f << "replicate,time,count\r\n";
    for (std::size_t r = 0; r < paths.size(); ++r) {
      for (std::size_t k = 0; k < paths[r].times.size(); ++k) {
        f << r << ',' << format_real(paths[r].times[k]) << ',' << paths[r].values[k] << "\r\n";
      }
    }
  }
  long at_top = 0, at_zero = 0;
  double sum = 0.0;
  for (const auto& path : paths) {
    const int v = path.final_value();
    at_top += v == N;
    at_zero += v == 0;
    sum += v;
  }
  json summary = {{"N", N},
                  {"initial_count", start},
                  {"horizon", horizon},
                  {"replicates", R},
                  {"mean_final_count", sum / static_cast<double>(R)},
                  {"fraction_absorbed_at_N", static_cast<double>(at_top) / R},
                  {"fraction_absorbed_at_0", static_cast<double>(at_zero) / R}};
  if (p.flag("absorption", false)) {
    MoranConfig cfg{N, coupling, start};
    const auto h = absorption_probability(cfg);
    auto f = ctx.out.open("absorption.csv");
    f << "i,h\r\n";
    for (std::size_t i = 0; i < h.size(); ++i) f << i << ',' << format_real(h[i]) << "\r\n";
    summary["absorption_at_initial"] = h[start];
  }
  ctx.out.write_json("summary.json", summary);
}

void run_asg_pathwise(Context& ctx) {
  const auto& p = ctx.params;
  const CoupledMeasure coupling = resolve_coupling(ctx.config);
  const int N = static_cast<int>(p.integer("N", std::nullopt, 2, 10'000));
  const double horizon = p.real("horizon", std::nullopt, 0.0, 1e9, true);
  const long R = p.integer("replicates", 1000, 1);
  const ConsistencyReport rep = check_type_ancestry(N, coupling, horizon, R, ctx.seed);
  ctx.out.write_json("pathwise.json", {{"N", N},
                                       {"horizon", horizon},
                                       {"realizations", rep.realizations},
                                       {"checks", rep.checks},
                                       {"violations", rep.violations}});
  if (rep.violations > 0) {
    ctx.acceptance_failed = true;
    ctx.failure = std::to_string(rep.violations) + " type/ancestry violations";
  }
}

void run_duality_matrix(Context& ctx) {
  const auto& p = ctx.params;
  const CoupledMeasure coupling = resolve_coupling(ctx.config);
  const int N = static_cast<int>(p.integer("N", std::nullopt, 2, kDualityMatrixLimit));
  const double tol = p.real("tolerance", 1e-10, 0.0, 1.0, true);
  const double residual = generator_duality_check(N, coupling);
  const bool pass = residual < tol;
  ctx.out.write_json("residual.json",
                     {{"N", N}, {"residual", residual}, {"tolerance", tol}, {"pass", pass}});
  if (!pass) {
    ctx.acceptance_failed = true;
    ctx.failure = "generator duality residual " + format_real(residual) + " >= " + format_real(tol);
  }
}

void run_duality_pathwise(Context& ctx) {
  const auto& p = ctx.params;
  const CoupledMeasure coupling = resolve_coupling(ctx.config);
  const int N = static_cast<int>(p.integer("N", std::nullopt, 2, 10'000));
  const double T = p.real("T", p.has("horizon") ? p.real("horizon", 1.0, 0.0, 1e9, true) : 1.0,
                          0.0, 1e9, true);
  const int n = static_cast<int>(p.integer("n", 2, 0, N));
  const double x = p.real("x", 0.5, 0.0, 1.0);
  const long R = p.integer("replicates", 100'000, 1);
  const DualityReport rep = pathwise_duality_check(N, coupling, T, n, x, R, ctx.seed);
  ctx.out.write_json("report.json", to_json(rep));
  if (!(std::abs(rep.z) < 4.0)) {
    ctx.acceptance_failed = true;
    ctx.failure = "pathwise duality |z| = " + format_real(std::abs(rep.z)) + " >= 4";
  }
}

void run_sde_sim(Context& ctx) {
  const auto& p = ctx.params;
  SdeConfig cfg;
  cfg.coupling = resolve_coupling(ctx.config);
  cfg.x0 = p.real("x0", 0.5, 0.0, 1.0);
  cfg.horizon = p.real("horizon", std::nullopt, 0.0, 1e12, true);
  const std::string mode = p.text("mode", "event_driven");
  if (mode == "event_driven") {
    cfg.mode = SdeMode::event_driven;
  } else if (mode == "truncated") {
    cfg.mode = SdeMode::truncated;
    cfg.epsilon = p.real("epsilon", std::nullopt, 0.0, 1.0, true);
  } else {
    throw ConfigError("config field 'params.mode' must be 'event_driven' or 'truncated'");
  }
  const long R = p.integer("replicates", 1, 1);
  const long keep = p.integer("paths", 0, 0);
  const CoupledMeasure driving = sde_driving_measure(cfg, &ctx.warnings);
  const SdeSimulator sim(driving);
  std::vector<RealPath> paths(static_cast<std::size_t>(R));
  parallel_for(paths.size(), [&](std::size_t r) {
    Rng rng = Rng::for_stream(ctx.seed, stream_tag("sde_sim"), r);
    paths[r] = sim.path(cfg.x0, cfg.horizon, rng);
  });
  std::vector<double> finals;
  finals.reserve(paths.size());
  for (const auto& path : paths) finals.push_back(path.final_value());
  {
    auto f = ctx.out.open("final.csv");
    f << "replicate,y\r\n";
    for (std::size_t r = 0; r < finals.size(); ++r) f << r << ',' << format_real(finals[r]) << "\r\n";
  }
  if (keep > 0) {
    auto f = ctx.out.open("paths.csv");
    f << "replicate,time,y\r\n";
    for (std::size_t r = 0; r < paths.size() && static_cast<long>(r) < keep; ++r) {
      for (std::size_t k = 0; k < paths[r].times.size(); ++k) {
        f << r << ',' << format_real(paths[r].times[k]) << ',' << format_real(paths[r].values[k])
          << "\r\n";
      }
    }
  }
  const double mean = std::accumulate(finals.begin(), finals.end(), 0.0) / R;
  double ss = 0.0;
  for (double v : finals) ss += (v - mean) * (v - mean);
  const double se = R > 1 ? std::sqrt(ss / (R - 1) / R) : 0.0;
  ctx.out.write_json("summary.json", {{"x0", cfg.x0},
                                      {"horizon", cfg.horizon},
                                      {"mode", mode},
                                      {"replicates", R},
                                      {"event_rate", driving.total_mass()},
                                      {"mean", mean},
                                      {"stderr", se}});
}

void run_convergence(Context& ctx) {
  const auto& p = ctx.params;
  const CoupledMeasure coupling = resolve_coupling(ctx.config);
  const auto Ns = p.integers(p.has("N_list") ? "N_list" : "N", {50, 100, 200, 400, 800}, 2);
  const double alpha = p.real("alpha", 0.4, 0.0, 0.5, true);
  if (alpha >= 0.5) throw ConfigError("config field 'params.alpha' must be < 0.5");
  const double T = p.real("T", p.has("horizon") ? p.real("horizon", 1.0, 0.0, 1e9, true) : 1.0,
                          0.0, 1e9, true);
  const double x0 = p.real("x0", 0.5, 0.0, 1.0);
  const long R = p.integer("replicates", 100'000, 2);
  const int B = static_cast<int>(p.integer("bootstrap", 1000, 0, 100'000));
  std::vector<TruncationScheme> schemes;
  for (long N : Ns) schemes.push_back({alpha, static_cast<int>(N)});
  const ConvergenceReport rep = convergence_study(coupling, schemes, T, x0, R, ctx.seed, B);
  ctx.warnings.insert(ctx.warnings.end(), rep.warnings.begin(), rep.warnings.end());
  json rows = json::array();
  {
    auto f = ctx.out.open("convergence.csv");
    f << "N,alpha,truncated_mass,ks,bootstrap_stderr\r\n";
    for (const auto& row : rep.rows) {
      f << row.N << ',' << format_real(row.alpha) << ',' << format_real(row.truncated_mass) << ','
        << format_real(row.ks) << ',' << format_real(row.bootstrap_stderr) << "\r\n";
      rows.push_back({{"N", row.N},
                      {"alpha", row.alpha},
                      {"truncated_mass", row.truncated_mass},
                      {"ks", row.ks},
                      {"bootstrap_stderr", row.bootstrap_stderr}});
    }
  }
  ctx.out.write_json("report.json", {{"x0", x0},
                                     {"T", T},
                                     {"replicates", R},
                                     {"bootstrap", B},
                                     {"rows", rows},
                                     {"nonincreasing_within_2se", rep.nonincreasing_within_noise(2.0)},
                                     {"warnings", rep.warnings}});
}

void run_limit_duality(Context& ctx) {
  const auto& p = ctx.params;
  const CoupledMeasure coupling = resolve_coupling(ctx.config);
  const int n_max = static_cast<int>(p.integer("n_max", 12, 1, 12));
  const int grid = static_cast<int>(p.integer("grid", 101, 2, 1'000'000));
  const double tol = p.real("tolerance", 1e-10, 0.0, 1.0, true);
  const double residual = limit_generator_duality(coupling, n_max, grid);
  json out = {{"n_max", n_max}, {"grid", grid}, {"residual", residual}, {"tolerance", tol},
              {"pass", residual < tol}};
  if (!(residual < tol)) {
    ctx.acceptance_failed = true;
    ctx.failure = "limit generator duality residual " + format_real(residual);
  }
  ctx.out.write_json("residual.json", out);
  if (p.has("replicates")) {
    const long R = p.integer("replicates", std::nullopt, 1);
    const double x = p.real("x", 0.5, 0.0, 1.0);
    const int n = static_cast<int>(p.integer("n", 1, 1, 1'000'000));
    const double t = p.real("t", 1.0, 0.0, 1e9, true);
    const DualityReport rep = limit_moment_duality_check(coupling, x, n, t, R, ctx.seed);
    ctx.out.write_json("moment.json", to_json(rep));
    if (!(std::abs(rep.z) < 4.0)) {
      ctx.acceptance_failed = true;
      ctx.failure = "moment duality |z| = " + format_real(std::abs(rep.z)) + " >= 4";
    }
  }
}

void run_fixation(Context& ctx) {
  const auto& p = ctx.params;
  const CoupledMeasure coupling = resolve_coupling(ctx.config);
  FixationOptions opts;
  opts.nmax = static_cast<int>(p.integer("nmax", kDefaultNmax, 1, kMomentNodes - 1));
  opts.grid = static_cast<int>(p.integer("grid", 101, 2, 100'000));
  opts.adaptive = p.flag("adaptive", false);
  opts.max_nmax = static_cast<int>(p.integer("max_nmax", 60, opts.nmax, kMomentNodes - 1));
  const FixationSolution sol = solve_fixation(coupling, opts);
  ctx.warnings.insert(ctx.warnings.end(), sol.warnings.begin(), sol.warnings.end());
  for (const auto& w : sol.warnings) ctx.log << "warning: " << w << '\n';
  {
    auto f = ctx.out.open("fixation.csv");
    f << "x,p,last_term,residual\r\n";
    for (std::size_t i = 0; i < sol.x.size(); ++i) {
      f << format_real(sol.x[i]) << ',' << format_real(sol.p[i]) << ','
        << format_real(sol.last_term[i]) << ',' << format_real(sol.residual[i]) << "\r\n";
    }
  }
  json coeffs = json::array();
  for (const auto& row : sol.poly.a) {
    json r = json::array();
    for (const auto& c : row) r.push_back(static_cast<double>(c));
    coeffs.push_back(r);
  }
  ctx.out.write_json("polynomials.json", {{"neutral", sol.neutral},
                                          {"nmax", sol.nmax},
                                          {"harmonicity_residual", sol.harmonicity},
                                          {"cond_griff_residual", sol.cond_griff},
                                          {"a", coeffs}});
}

void run_coupling_report(Context& ctx) {
  const json& measures = ctx.config.at("measures");
  json report;
  CoupledMeasure coupling;
  if (measures.contains("coupling")) {
    coupling = parse_coupling(measures.at("coupling"), "measures.coupling");
  } else {
    const auto lm = parse_measure(measures.at("lambda_minus"), "measures.lambda_minus");
    const auto lp = parse_measure(measures.at("lambda_plus"), "measures.lambda_plus");
    const NormalizationRecord rec = normalize_pair(lm, lp);
    coupling = quantile_coupling(rec.mu_minus, rec.mu_plus).scaled(rec.rate_scale);
    report["c"] = rec.c;
    report["rate_scale"] = rec.rate_scale;
    report["marginal_error"] = marginal_error(coupling, lm, lp, rec.c > 0.0);
    report["expected_gap_from_marginals"] =
        lp.integrate([](double v) { return v; }) - lm.integrate([](double v) { return v; });
  }
  report["transport_cost"] = transport_cost(coupling);
  report["expected_gap"] = coupling.integrate([](double, double z) { return z; });
  report["total_mass"] = coupling.total_mass() + coupling.origin_mass();
  report["griffiths_mass"] = griffiths_mass(coupling);
  report["coupling"] = coupling_json(coupling);
  write_coupling_csv(ctx.out, coupling);
  ctx.out.write_json("report.json", report);
}

using Runner = std::function<void(Context&)>;

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table = {
      {"moran_sim", run_moran_sim},
      {"asg_pathwise", run_asg_pathwise},
      {"duality_matrix", run_duality_matrix},
      {"duality_pathwise", run_duality_pathwise},
      {"sde_sim", run_sde_sim},
      {"convergence", run_convergence},
      {"limit_duality", run_limit_duality},
      {"fixation", run_fixation},
      {"coupling_report", run_coupling_report},
  };
  return table;
}

std::string valid_names() {
  std::string s;
  for (const auto& n : experiment_names()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

void validate_measures_shape(const json& config) {
  if (!config.contains("measures") || !config.at("measures").is_object()) {
    throw ConfigError("config field 'measures' is required and must be an object");
  }
  const json& m = config.at("measures");
  const bool pair = m.contains("lambda_minus") || m.contains("lambda_plus");
  const bool direct = m.contains("coupling");
  if (pair == direct) {
    throw ConfigError(
        "config field 'measures' needs exactly one of {lambda_minus + lambda_plus} or {coupling}");
  }
  if (pair && !(m.contains("lambda_minus") && m.contains("lambda_plus"))) {
    throw ConfigError("config field 'measures' needs both lambda_minus and lambda_plus");
  }
}

std::uint64_t config_seed(const json& config) {
  if (!config.contains("seed")) return 0;
  const json& s = config.at("seed");
  if (s.is_number_unsigned()) return s.get<std::uint64_t>();
  if (s.is_number_integer() && s.get<long long>() >= 0) return static_cast<std::uint64_t>(s.get<long long>());
  throw ConfigError("config field 'seed' must be a nonnegative integer");
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "moran_sim", "asg_pathwise", "duality_matrix", "duality_pathwise", "sde_sim",
      "convergence", "limit_duality", "fixation", "coupling_report"};
  return names;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": JSON syntax error: " + e.what());
  }
}

FiniteMeasure1D parse_measure(const json& node, const std::string& field) {
  if (!node.is_object()) throw ConfigError("config field '" + field + "' must be an object");
  if (node.contains("atoms")) {
    const json& atoms = node.at("atoms");
    if (!atoms.is_array()) throw ConfigError("config field '" + field + ".atoms' must be an array");
    std::vector<Atom1D> out;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const json& a = atoms[i];
      if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
        throw ConfigError("config field '" + field + ".atoms[" + std::to_string(i) +
                          "]' must be [location, mass]");
      }
      out.push_back({a[0].get<double>(), a[1].get<double>()});
    }
    try {
      return FiniteMeasure1D(std::move(out));
    } catch (const InvalidMeasure& e) {
      throw InvalidMeasure("config field '" + field + "': " + e.what());
    }
  }
  if (node.contains("density")) {
    const json& d = node.at("density");
    const std::string f = field + ".density";
    if (!d.is_object()) throw ConfigError("config field '" + f + "' must be an object");
    if (d.value("kind", std::string()) != "beta") {
      throw ConfigError("config field '" + f + ".kind' must be \"beta\"");
    }
    if (!d.contains("params") || !d.at("params").is_array() || d.at("params").size() != 2 ||
        !d.at("params")[0].is_number() || !d.at("params")[1].is_number()) {
      throw ConfigError("config field '" + f + ".params' must be [a, b]");
    }
    const int grid = d.contains("grid") ? d.at("grid").get<int>() : 256;
    const double mass = d.contains("mass") ? d.at("mass").get<double>() : 1.0;
    try {
      return FiniteMeasure1D::from_beta_density(d.at("params")[0].get<double>(),
                                                d.at("params")[1].get<double>(), grid, mass);
    } catch (const InvalidMeasure& e) {
      throw InvalidMeasure("config field '" + f + "': " + e.what());
    }
  }
  throw ConfigError("config field '" + field + "' needs 'atoms' or 'density'");
}

CoupledMeasure parse_coupling(const json& node, const std::string& field) {
  if (!node.is_object() || !node.contains("atoms") || !node.at("atoms").is_array()) {
    throw ConfigError("config field '" + field + "' must be {\"atoms\": [[y, z, mass], ...]}");
  }
  const json& atoms = node.at("atoms");
  std::vector<CoupledAtom> out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const json& a = atoms[i];
    if (!a.is_array() || a.size() != 3 || !a[0].is_number() || !a[1].is_number() ||
        !a[2].is_number()) {
      throw ConfigError("config field '" + field + ".atoms[" + std::to_string(i) +
                        "]' must be [y, z, mass]");
    }
    out.push_back({a[0].get<double>(), a[1].get<double>(), a[2].get<double>()});
  }
  try {
    return CoupledMeasure(std::move(out));
  } catch (const InvalidMeasure& e) {
    throw InvalidMeasure("config field '" + field + "': " + e.what());
  }
}

CoupledMeasure resolve_coupling(const json& config) {
  validate_measures_shape(config);
  const json& m = config.at("measures");
  if (m.contains("coupling")) return parse_coupling(m.at("coupling"), "measures.coupling");
  return selective_coupling(parse_measure(m.at("lambda_minus"), "measures.lambda_minus"),
                            parse_measure(m.at("lambda_plus"), "measures.lambda_plus"));
}

json to_json(const DualityReport& r) {
  json params = json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  return {{"lhs", r.lhs},         {"rhs", r.rhs}, {"stderr_lhs", r.stderr_lhs},
          {"stderr_rhs", r.stderr_rhs}, {"z", r.z},     {"replicates", r.replicates},
          {"params", params}};
}

int run_experiment(const json& config, const RunOptions& opts, std::ostream& log) {
  const auto started = std::chrono::steady_clock::now();
  std::string name;
  try {
    if (!config.is_object()) throw ConfigError("config must be a JSON object");
    if (!config.contains("experiment") || !config.at("experiment").is_string()) {
      throw ConfigError("config field 'experiment' is required; valid names: " + valid_names());
    }
    name = config.at("experiment").get<std::string>();
    const auto it = runners().find(name);
    if (it == runners().end()) {
      throw ConfigError("unknown experiment '" + name + "'; valid names: " + valid_names());
    }
    validate_measures_shape(config);
    const std::uint64_t seed = opts.seed ? *opts.seed : config_seed(config);
    std::string dir = "output";
    if (opts.output_dir) {
      dir = *opts.output_dir;
    } else if (config.contains("output_dir")) {
      if (!config.at("output_dir").is_string()) throw ConfigError("config field 'output_dir' must be a string");
      dir = config.at("output_dir").get<std::string>();
    }
    const json empty = json::object();
    const json& params = config.contains("params") ? config.at("params") : empty;

    set_default_threads(opts.threads);
    Outputs out{fs::path(dir)};
    Context ctx{config, Params(params), seed, out, log, {}, false, {}};
    int code = kExitOk;
    std::string error;
    try {
      it->second(ctx);
    } catch (const ValidationError& e) {
      code = kExitValidation;
      error = e.what();
    } catch (const NumericalError& e) {
      code = kExitNumerical;
      error = e.what();
    } catch (const json::exception& e) {
      code = kExitValidation;
      error = std::string("config error: ") + e.what();
    }
    if (code == kExitOk && ctx.acceptance_failed) {
      code = kExitNumerical;
      error = ctx.failure;
    }
    for (const auto& w : ctx.warnings) log << "warning: " << w << '\n';
    if (!error.empty()) log << "error: " << error << '\n';

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json manifest = {{"experiment", name},
                     {"config", config},
                     {"seed", seed},
                     {"stream_rule", kStreamRule},
                     {"threads", default_threads()},
                     {"library_version", LAMBDA_ASG_VERSION},
                     {"started_at", utc_now()},
                     {"wall_time_seconds", wall},
                     {"outputs", out.files()},
                     {"warnings", ctx.warnings},
                     {"exit_code", code}};
    if (!error.empty()) manifest["error"] = error;
    {
      std::ofstream mf(out.dir() / "manifest.json", std::ios::binary);
      mf << manifest.dump(2) << '\n';
    }
    return code;
  } catch (const ValidationError& e) {
    log << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    log << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const json::exception& e) {
    log << "error: config error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

int run_experiment_file(const std::string& path, const RunOptions& opts, std::ostream& log) {
  json config;
  try {
    config = load_config(path);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return run_experiment(config, opts, log);
}

json check_measures(const json& config) {
  json report = {{"valid", true}, {"problems", json::array()}};
  auto fail = [&](const std::string& why) {
    report["valid"] = false;
    report["problems"].push_back(why);
  };
  try {
    validate_measures_shape(config);
  } catch (const Error& e) {
    fail(e.what());
    return report;
  }
  const json& m = config.at("measures");
  try {
    if (m.contains("coupling")) {
      report["kind"] = "coupling";
      const CoupledMeasure c = parse_coupling(m.at("coupling"), "measures.coupling");
      report["coupling"] = coupling_json(c);
      report["atoms"] = c.size();
      return report;
    }
    report["kind"] = "pair";
    const auto lm = parse_measure(m.at("lambda_minus"), "measures.lambda_minus");
    const auto lp = parse_measure(m.at("lambda_plus"), "measures.lambda_plus");
    report["lambda_minus"] = measure_json(lm);
    report["lambda_plus"] = measure_json(lp);
    const OrderCheck order = check_stochastic_order(lm, lp);
    report["order"] = {{"holds", order.holds}, {"witness", order.witness},
                       {"violation", order.violation}};
    if (!order.holds) {
      fail("stochastic order fails: lambda_minus[x,1] exceeds lambda_plus[x,1] by " +
           format_real(order.violation) + " at x = " + format_real(order.witness));
      return report;
    }
    const NormalizationRecord rec = normalize_pair(lm, lp);
    report["normalization"] = {{"c", rec.c}, {"rate_scale", rec.rate_scale},
                               {"mu_minus", measure_json(rec.mu_minus)},
                               {"mu_plus", measure_json(rec.mu_plus)}};
    const CoupledMeasure q = quantile_coupling(rec.mu_minus, rec.mu_plus);
    report["coupling"] = coupling_json(q.scaled(rec.rate_scale));
    report["atoms"] = q.size() + (q.origin_mass() > 0.0 ? 1 : 0);
    report["transport_cost"] = transport_cost(q.scaled(rec.rate_scale));
  } catch (const Error& e) {
    fail(e.what());
  } catch (const json::exception& e) {
    fail(std::string("config error: ") + e.what());
  }
  return report;
}

int check_config_file(const std::string& path, std::ostream& out) {
  json config;
  try {
    config = load_config(path);
  } catch (const Error& e) {
    out << json({{"valid", false}, {"problems", {e.what()}}}).dump(2) << '\n';
    return kExitValidation;
  }
  const json report = check_measures(config);
  out << report.dump(2) << '\n';
  return report.at("valid").get<bool>() ? kExitOk : kExitValidation;
}

}  // namespace lambda_asg
