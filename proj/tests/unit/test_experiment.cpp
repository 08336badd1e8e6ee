#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lambda_asg/errors.hpp"
#include "lambda_asg/experiment.hpp"

using namespace lambda_asg;
namespace fs = std::filesystem;

namespace {

const json kPair = {{"lambda_minus", {{"atoms", {{0.25, 0.5}, {0.5, 0.5}}}}},
                    {"lambda_plus", {{"atoms", {{0.5, 1.0 / 3}, {0.75, 1.0 / 3}, {1.0, 1.0 / 3}}}}}};
const json kCoupling = {{"coupling", {{"atoms", {{0.3, 0.2, 0.6}, {0.6, 0.1, 0.4}}}}}};

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(LAMBDA_ASG_TEST_TMP) / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

struct Run {
  int code;
  std::string log;
  fs::path dir;
};

Run run(const json& cfg, const std::string& name, int threads = 1,
        std::optional<std::uint64_t> seed = std::nullopt) {
  RunOptions opts;
  const fs::path dir = fresh_dir(name);
  opts.output_dir = dir.string();
  opts.threads = threads;
  opts.seed = seed;
  std::ostringstream log;
  const int code = run_experiment(cfg, opts, log);
  return {code, log.str(), dir};
}

}  // namespace

TEST(Experiment, UnknownNameListsValidOnes) {
  const auto r = run({{"experiment", "bogus"}, {"measures", kCoupling}}, "bogus");
  EXPECT_EQ(r.code, kExitValidation);
  for (const auto& name : experiment_names()) EXPECT_NE(r.log.find(name), std::string::npos) << name;
}

TEST(Experiment, DualityMatrix) {
  const auto r = run({{"experiment", "duality_matrix"}, {"measures", kCoupling}, {"params", {{"N", 10}}}},
                     "duality_matrix");
  ASSERT_EQ(r.code, kExitOk) << r.log;
  const auto res = read_json(r.dir / "residual.json");
  EXPECT_LT(res.at("residual").get<double>(), 1e-10);
  const auto manifest = read_json(r.dir / "manifest.json");
  EXPECT_EQ(manifest.at("experiment"), "duality_matrix");
  EXPECT_EQ(manifest.at("exit_code"), 0);
  EXPECT_TRUE(manifest.contains("library_version"));
  EXPECT_TRUE(manifest.contains("stream_rule"));
}

TEST(Experiment, FixationNeutralRoute) {
  const json neutral = {{"coupling", {{"atoms", {{0.4, 0.0, 1.0}}}}}};
  const auto r = run({{"experiment", "fixation"}, {"measures", neutral}, {"params", {{"grid", 11}}}},
                     "fixation_neutral");
  ASSERT_EQ(r.code, kExitOk) << r.log;
  EXPECT_NE(r.log.find("warning"), std::string::npos);
  const std::string csv = slurp(r.dir / "fixation.csv");
  EXPECT_EQ(csv.rfind("x,p,last_term,residual\r\n", 0), 0u);
  EXPECT_NE(csv.find("\r\n0.5,0.5,"), std::string::npos);
  EXPECT_FALSE(read_json(r.dir / "manifest.json").at("warnings").empty());
}

TEST(Experiment, FixationFromPair) {
  const auto r = run({{"experiment", "fixation"}, {"measures", {{"coupling", {{"atoms", {{0.5, 0.05, 1.0}}}}}}}},
                     "fixation_pair");
  ASSERT_EQ(r.code, kExitOk) << r.log;
  const auto poly = read_json(r.dir / "polynomials.json");
  EXPECT_LT(poly.at("harmonicity_residual").get<double>(), 1e-6);
  EXPECT_LT(poly.at("cond_griff_residual").get<double>(), 1e-9);
}

TEST(Experiment, MoranSimWithAbsorption) {
  const auto r = run({{"experiment", "moran_sim"},
                      {"measures", kPair},
                      {"params", {{"N", 20}, {"initial_count", 10}, {"horizon", 2.0},
                                  {"replicates", 5}, {"absorption", true}}}},
                     "moran_sim");
  ASSERT_EQ(r.code, kExitOk) << r.log;
  EXPECT_TRUE(fs::exists(r.dir / "paths.csv"));
  EXPECT_TRUE(fs::exists(r.dir / "absorption.csv"));
  const auto summary = read_json(r.dir / "summary.json");
  EXPECT_EQ(summary.at("replicates"), 5);
}

TEST(Experiment, EveryRunnerProducesArtifacts) {
  const std::vector<std::pair<json, std::vector<std::string>>> cases = {
      {{{"experiment", "asg_pathwise"}, {"params", {{"N", 6}, {"horizon", 1.0}, {"replicates", 50}}}},
       {"pathwise.json"}},
      {{{"experiment", "duality_pathwise"}, {"params", {{"N", 6}, {"replicates", 2000}}}},
       {"report.json"}},
      {{{"experiment", "sde_sim"}, {"params", {{"horizon", 1.0}, {"replicates", 20}, {"paths", 2}}}},
       {"final.csv", "paths.csv", "summary.json"}},
      {{{"experiment", "convergence"},
        {"params", {{"N_list", {20, 40}}, {"replicates", 500}, {"bootstrap", 20}}}},
       {"convergence.csv", "report.json"}},
      {{{"experiment", "limit_duality"}, {"params", {{"replicates", 2000}, {"n", 2}}}},
       {"residual.json", "moment.json"}},
      {{{"experiment", "coupling_report"}}, {"coupling.csv", "report.json"}},
  };
  for (auto [cfg, files] : cases) {
    cfg["measures"] = kCoupling;
    const std::string name = cfg.at("experiment").get<std::string>();
    const auto r = run(cfg, "all_" + name);
    EXPECT_EQ(r.code, kExitOk) << name << ": " << r.log;
    for (const auto& f : files) EXPECT_TRUE(fs::exists(r.dir / f)) << name << "/" << f;
    EXPECT_TRUE(fs::exists(r.dir / "manifest.json")) << name;
  }
}

TEST(Experiment, ValidationAndNumericalExitCodes) {
  const json reversed = {{"lambda_minus", kPair.at("lambda_plus")}, {"lambda_plus", kPair.at("lambda_minus")}};
  EXPECT_EQ(run({{"experiment", "duality_matrix"}, {"measures", reversed}, {"params", {{"N", 5}}}},
                "reversed").code,
            kExitValidation);
  EXPECT_EQ(run({{"experiment", "duality_matrix"}, {"measures", kCoupling}, {"params", {{"N", 301}}}},
                "too_big").code,
            kExitValidation);
  EXPECT_EQ(run({{"experiment", "duality_matrix"}, {"measures", kCoupling}}, "missing_N").code,
            kExitValidation);
  const json zero = {{"coupling", {{"atoms", json::array()}}}};
  EXPECT_EQ(run({{"experiment", "moran_sim"}, {"measures", zero},
                 {"params", {{"N", 10}, {"horizon", 1.0}, {"absorption", true}}}},
                "singular").code,
            kExitNumerical);
}

TEST(Experiment, OutputsIndependentOfThreadCount) {
  const json cfg = {{"experiment", "duality_pathwise"}, {"measures", kCoupling},
                    {"params", {{"N", 8}, {"n", 2}, {"replicates", 3000}}}};
  const auto a = run(cfg, "threads_1", 1, 5);
  const auto b = run(cfg, "threads_3", 3, 5);
  ASSERT_EQ(a.code, kExitOk);
  ASSERT_EQ(b.code, kExitOk);
  EXPECT_EQ(slurp(a.dir / "report.json"), slurp(b.dir / "report.json"));
}

TEST(LoadConfig, ReportsLineAndColumn) {
  const fs::path dir = fresh_dir("bad_config");
  fs::create_directories(dir);
  { std::ofstream(dir / "bad.json") << "{\n  \"experiment\": \"fixation\",\n  oops\n}\n"; }
  try {
    load_config((dir / "bad.json").string());
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_config((dir / "missing.json").string()), ConfigError);
}

TEST(CheckMeasures, Examples) {
  const auto ok = check_measures({{"measures", kPair}});
  EXPECT_TRUE(ok.at("valid").get<bool>());
  EXPECT_EQ(ok.at("atoms"), 4);
  EXPECT_NEAR(ok.at("transport_cost").get<double>(), 5.0 / 32, 1e-15);

  const json reversed = {{"lambda_minus", kPair.at("lambda_plus")}, {"lambda_plus", kPair.at("lambda_minus")}};
  const auto bad = check_measures({{"measures", reversed}});
  EXPECT_FALSE(bad.at("valid").get<bool>());
  EXPECT_DOUBLE_EQ(bad.at("order").at("witness").get<double>(), 0.75);

  const auto off = check_measures({{"measures", {{"coupling", {{"atoms", {{0.7, 0.5, 1.0}}}}}}}});
  EXPECT_FALSE(off.at("valid").get<bool>());
  EXPECT_NE(off.at("problems").dump().find("simplex violation"), std::string::npos);
}

TEST(CheckMeasures, BetaDensityInput) {
  const json cfg = {{"measures",
                     {{"lambda_minus", {{"density", {{"kind", "beta"}, {"params", {2.0, 5.0}}, {"grid", 64}}}}},
                      {"lambda_plus", {{"density", {{"kind", "beta"}, {"params", {2.0, 2.0}}, {"grid", 64}}}}}}}};
  const auto rep = check_measures(cfg);
  EXPECT_TRUE(rep.at("valid").get<bool>()) << rep.dump();
}

TEST(FormatReal, RoundTrips) {
  for (double v : {0.1, 1.0 / 3, 1e-17, 12345.678}) EXPECT_EQ(std::stod(format_real(v)), v);
}
