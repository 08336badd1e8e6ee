#pragma once

#include <Eigen/Dense>
#include <vector>

namespace lambda_asg {

/// Largest N for the dense (N+1)-state oracles.
inline constexpr int kDenseStateLimit = 2000;

/// Dense generator of a finite-state continuous-time Markov chain.
class RateMatrix {
 public:
  RateMatrix() = default;
  explicit RateMatrix(Eigen::Index states) : q_(Eigen::MatrixXd::Zero(states, states)) {}
  explicit RateMatrix(Eigen::MatrixXd q) : q_(std::move(q)) {}

  Eigen::Index states() const noexcept { return q_.rows(); }
  double& operator()(Eigen::Index i, Eigen::Index j) { return q_(i, j); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return q_(i, j); }
  const Eigen::MatrixXd& matrix() const noexcept { return q_; }

  /// Sets each diagonal entry to minus the off-diagonal row sum.
  void fill_diagonal();

  /// max_i |Σ_j Q[i][j]|.
  double max_row_sum() const;

  /// Law at time t from `initial` by uniformization, truncated once the
  /// Poisson tail drops below `tol`.
  Eigen::VectorXd transient(const Eigen::VectorXd& initial, double t,
                            double tol = 1e-14) const;

  /// States from which none of `targets` can be reached.
  std::vector<Eigen::Index> cannot_reach(const std::vector<Eigen::Index>& targets) const;

 private:
  Eigen::MatrixXd q_;
};

/// Probability of hitting state `hi` before `lo` (both absorbing), for every
/// start state. Requires lo = 0, hi = states − 1 and a chain whose interior
/// states all reach the boundary; throws SingularSystem otherwise.
Eigen::VectorXd hitting_probability(const RateMatrix& q);

}  // namespace lambda_asg
