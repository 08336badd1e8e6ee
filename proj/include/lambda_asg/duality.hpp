#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>

#include "lambda_asg/measures.hpp"

namespace lambda_asg {

/// C(i, n) / C(N, n) in product form.
double sampling_function(int N, int i, int n);

class SamplingTable {
 public:
  explicit SamplingTable(int N);

  int N() const noexcept { return n_; }
  double operator()(int i, int n) const { return values_(i, n); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

 private:
  int n_;
  Eigen::MatrixXd values_;
};

inline constexpr int kDualityMatrixLimit = 300;

/// max |B·D − D·Aᵀ| with B the frequency generator, A the padded line-count
/// generator and D the sampling table.
double generator_duality_check(int N, const CoupledMeasure& coupling);

struct DualityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double stderr_lhs = 0.0;
  double stderr_rhs = 0.0;
  double z = 0.0;
  long replicates = 0;
  std::map<std::string, double> params;
};

/// Both sides of E_x[S₀(X_T, n)] = E_n[S₀(x, A_T)] estimated on the same ASG
/// realizations. The z-score uses the paired-difference standard error.
DualityReport pathwise_duality_check(int N, const CoupledMeasure& coupling, double T, int n,
                                     double x, long replicates, std::uint64_t seed);

/// E_x[Y_tⁿ] from the SDE against E_n[x^{A_t}] from the limit chain, with
/// independent samples on each side.
DualityReport limit_moment_duality_check(const CoupledMeasure& coupling, double x, int n,
                                         double t, long replicates, std::uint64_t seed);

/// Closed-form generator duality over n = 1..n_max on `grid` equally spaced
/// points of [0, 1]: max |B xⁿ − A x^{·}(n)|.
double limit_generator_duality(const CoupledMeasure& coupling, int n_max, int grid);

}  // namespace lambda_asg
