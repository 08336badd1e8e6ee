#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "lambda_asg/experiment.hpp"

namespace {

int threads_from_env() {
  const char* env = std::getenv("LAMBDA_ASG_THREADS");
  if (!env || !*env) return 1;
  try {
    const int t = std::stoi(env);
    return t > 0 ? t : 1;
  } catch (const std::exception&) {
    std::cerr << "warning: ignoring LAMBDA_ASG_THREADS=" << env << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and exact oracles for the Lambda-asymmetric Moran model"};
  app.require_subcommand(1);

  std::string run_config;
  std::string output_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", run_config, "Experiment config (JSON)")->required();
  auto* out_opt = run->add_option("--output-dir", output_dir, "Directory for result files");
  auto* seed_opt = run->add_option("--seed", seed, "Master seed; overrides the config");
  auto* threads_opt = run->add_option("--threads", threads, "Worker threads (default: LAMBDA_ASG_THREADS or 1)")
                          ->check(CLI::PositiveNumber);

  std::string check_config;
  auto* check = app.add_subcommand("check", "Validate the measures of a JSON config");
  check->add_option("config", check_config, "Experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lambda_asg::kExitValidation;
  }

  if (*run) {
    lambda_asg::RunOptions opts;
    if (*out_opt) opts.output_dir = output_dir;
    if (*seed_opt) opts.seed = seed;
    opts.threads = *threads_opt ? threads : threads_from_env();
    return lambda_asg::run_experiment_file(run_config, opts, std::cerr);
  }
  return lambda_asg::check_config_file(check_config, std::cout);
}
