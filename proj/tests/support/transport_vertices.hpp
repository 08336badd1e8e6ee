#pragma once

// Brute-force vertex enumeration of the transportation polytope
//   {P ≥ 0 : Σ_j P[i][j] = a_i, Σ_i P[i][j] = b_j}
// for small supports. Every vertex is a basic feasible solution supported on
// at most m + n − 1 cells, so trying every cell subset of that size and
// solving the marginal equations finds them all.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "lambda_asg/measures.hpp"

namespace test_support {

struct VertexCoupling {
  std::vector<std::vector<double>> plan;  // plan[i][j]: mass moved from a_i to b_j
  double cost = 0.0;                      // Σ plan · (b_j − a_i)²
};

inline std::vector<VertexCoupling> transport_vertices(const lambda_asg::FiniteMeasure1D& a,
                                                      const lambda_asg::FiniteMeasure1D& b) {
  const int m = static_cast<int>(a.size());
  const int n = static_cast<int>(b.size());
  const int cells = m * n;
  const int basis = m + n - 1;
  std::vector<VertexCoupling> out;
  std::vector<int> pick(static_cast<std::size_t>(cells), 0);
  std::fill(pick.begin(), pick.begin() + std::min(basis, cells), 1);
  std::sort(pick.begin(), pick.end());
  do {
    std::vector<int> support;
    for (int c = 0; c < cells; ++c) {
      if (pick[c]) support.push_back(c);
    }
    const int k = static_cast<int>(support.size());
    Eigen::MatrixXd eq = Eigen::MatrixXd::Zero(m + n, k);
    Eigen::VectorXd rhs(m + n);
    for (int i = 0; i < m; ++i) rhs(i) = a.atoms()[i].mass;
    for (int j = 0; j < n; ++j) rhs(m + j) = b.atoms()[j].mass;
    for (int s = 0; s < k; ++s) {
      eq(support[s] / n, s) = 1.0;
      eq(m + support[s] % n, s) = 1.0;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(eq);
    if (lu.rank() < k) continue;
    const Eigen::VectorXd x = lu.solve(rhs);
    if ((eq * x - rhs).cwiseAbs().maxCoeff() > 1e-12) continue;
    if (x.minCoeff() < -1e-13) continue;
    VertexCoupling v;
    v.plan.assign(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int s = 0; s < k; ++s) {
      const int i = support[s] / n, j = support[s] % n;
      const double gap = b.atoms()[j].location - a.atoms()[i].location;
      v.plan[i][j] = std::max(0.0, x(s));
      v.cost += v.plan[i][j] * gap * gap;
    }
    out.push_back(std::move(v));
  } while (std::next_permutation(pick.begin(), pick.end()));
  return out;
}

}  // namespace test_support
