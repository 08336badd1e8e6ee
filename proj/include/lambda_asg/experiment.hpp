#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lambda_asg/duality.hpp"
#include "lambda_asg/measures.hpp"

namespace lambda_asg {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

const std::vector<std::string>& experiment_names();

/// Parses a JSON config file; syntax errors carry line and column.
json load_config(const std::string& path);

/// Measure from {"atoms": [[loc, mass], ...]} or
/// {"density": {"kind": "beta", "params": [a, b], "grid": n, "mass": m}}.
FiniteMeasure1D parse_measure(const json& node, const std::string& field);

/// Coupling from {"atoms": [[y, z, mass], ...]}.
CoupledMeasure parse_coupling(const json& node, const std::string& field);

/// The coupling a config describes: given directly, or the quantile coupling
/// of its lambda_minus / lambda_plus pair.
CoupledMeasure resolve_coupling(const json& config);

struct RunOptions {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

/// Runs one experiment and writes its artifacts plus manifest.json.
/// Returns kExitOk, kExitValidation or kExitNumerical.
int run_experiment(const json& config, const RunOptions& opts, std::ostream& log);
int run_experiment_file(const std::string& path, const RunOptions& opts, std::ostream& log);

/// Validation report for the measures in a config; never throws on bad
/// measures (they are reported as invalid).
json check_measures(const json& config);
int check_config_file(const std::string& path, std::ostream& out);

json to_json(const DualityReport& report);

/// %.17g, the round-trip format used for every CSV real.
std::string format_real(double v);

}  // namespace lambda_asg
