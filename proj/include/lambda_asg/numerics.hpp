#pragma once

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <cmath>
#include <limits>
#include <cstdint>
#include <utility>
#include <vector>

namespace lambda_asg {

/// log(n!), tabulated for n < 4096.
double log_factorial(std::int64_t n);

/// log C(n, k).
inline double log_choose(std::int64_t n, std::int64_t k) {
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

/// C(n, k) as a double. Multiplicative form up to n = 60, log-gamma beyond.
inline double choose(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0.0;
  if (n > 60) return std::exp(log_choose(n, k));
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::int64_t i = 1; i <= k; ++i) {
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(c);
}

/// P(Binomial(n, p) = k), with 0^0 = 1 at the endpoints.
inline double binomial_pmf(std::int64_t n, std::int64_t k, double p) {
  if (k < 0 || k > n) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  const double rest = static_cast<double>(n - k);
  if (n <= 60) {
    return choose(n, k) * std::pow(p, kd) * std::pow(1.0 - p, rest);
  }
  return std::exp(log_choose(n, k) + kd * std::log(p) + rest * std::log1p(-p));
}

/// Full Binomial(n, p) pmf vector, indices 0..n.
std::vector<double> binomial_pmf_vector(std::int64_t n, double p);

/// Gauss–Legendre rule on [0, 1] with `n` nodes; exact for polynomials of
/// degree 2n−1. Newton iteration on the Legendre three-term recurrence.
template <typename Real>
std::pair<std::vector<Real>, std::vector<Real>> gauss_legendre_unit(int n) {
  using std::abs;
  using std::cos;
  std::vector<Real> nodes(n), weights(n);
  const Real pi = boost::math::constants::pi<Real>();
  const Real tolerance = std::numeric_limits<Real>::epsilon() * 4;
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    Real x = cos(pi * (Real(i) + Real(3) / Real(4)) / (Real(n) + Real(1) / Real(2)));
    Real dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      Real p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        Real p2 = ((Real(2 * k - 1)) * x * p1 - Real(k - 1) * p0) / Real(k);
        p0 = p1;
        p1 = p2;
      }
      dp = Real(n) * (x * p1 - p0) / (x * x - Real(1));
      const Real step = p1 / dp;
      x -= step;
      if (abs(step) < tolerance) break;
    }
    Real p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      Real p2 = ((Real(2 * k - 1)) * x * p1 - Real(k - 1) * p0) / Real(k);
      p0 = p1;
      p1 = p2;
    }
    dp = Real(n) * (x * p1 - p0) / (x * x - Real(1));
    const Real w = Real(2) / ((Real(1) - x * x) * dp * dp);
    // map [-1, 1] -> [0, 1]
    nodes[i] = (Real(1) - x) / Real(2);
    nodes[n - 1 - i] = (Real(1) + x) / Real(2);
    weights[i] = w / Real(2);
    weights[n - 1 - i] = w / Real(2);
  }
  return {std::move(nodes), std::move(weights)};
}

}  // namespace lambda_asg
