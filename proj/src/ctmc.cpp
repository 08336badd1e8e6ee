#include "lambda_asg/ctmc.hpp"

#include <cmath>
#include <deque>
#include <string>

#include "lambda_asg/errors.hpp"

namespace lambda_asg {

void RateMatrix::fill_diagonal() {
  for (Eigen::Index i = 0; i < q_.rows(); ++i) {
    q_(i, i) = 0.0;
    q_(i, i) = -q_.row(i).sum();
  }
}

double RateMatrix::max_row_sum() const {
  if (q_.size() == 0) return 0.0;
  return q_.rowwise().sum().cwiseAbs().maxCoeff();
}

Eigen::VectorXd RateMatrix::transient(const Eigen::VectorXd& initial, double t,
                                      double tol) const {
  const double rate = q_.diagonal().cwiseAbs().maxCoeff();
  if (rate == 0.0 || t == 0.0) return initial;
  const Eigen::MatrixXd p =
      Eigen::MatrixXd::Identity(q_.rows(), q_.cols()) + q_ / rate;
  const double lambda = rate * t;
  // Poisson weights in log space so large λ·t does not underflow at k = 0.
  Eigen::RowVectorXd term = initial.transpose();
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(initial.size());
  double cumulative = 0.0;
  for (long k = 0;; ++k) {
    const double w = std::exp(-lambda + k * std::log(lambda) - std::lgamma(k + 1.0));
    out += w * term;
    cumulative += w;
    if (k > lambda && 1.0 - cumulative < tol) break;
    if (k > 100000 + 10 * static_cast<long>(lambda)) break;
    term = term * p;
  }
  return out.transpose();
}

std::vector<Eigen::Index> RateMatrix::cannot_reach(
    const std::vector<Eigen::Index>& targets) const {
  const Eigen::Index n = q_.rows();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::deque<Eigen::Index> queue;
  for (auto t : targets) {
    seen[t] = 1;
    queue.push_back(t);
  }
  while (!queue.empty()) {
    const Eigen::Index j = queue.front();
    queue.pop_front();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!seen[i] && i != j && q_(i, j) > 0.0) {
        seen[i] = 1;
        queue.push_back(i);
      }
    }
  }
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!seen[i]) out.push_back(i);
  }
  return out;
}

Eigen::VectorXd hitting_probability(const RateMatrix& q) {
  const Eigen::Index n = q.states();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
  if (n == 0) return h;
  h(n - 1) = 1.0;
  if (n <= 2) return h;

  const auto stuck = q.cannot_reach({0, n - 1});
  if (!stuck.empty()) {
    std::string msg = "interior system is singular; states that cannot reach the boundary:";
    for (std::size_t i = 0; i < stuck.size() && i < 20; ++i) {
      msg += " " + std::to_string(stuck[i]);
    }
    if (stuck.size() > 20) msg += " ... (" + std::to_string(stuck.size()) + " total)";
    throw SingularSystem(msg);
  }

  const Eigen::Index m = n - 2;
  const Eigen::MatrixXd a = q.matrix().block(1, 1, m, m);
  const Eigen::VectorXd b = -q.matrix().block(1, n - 1, m, 1);
  const Eigen::VectorXd interior = a.partialPivLu().solve(b);
  h.segment(1, m) = interior;
  return h;
}

}  // namespace lambda_asg
