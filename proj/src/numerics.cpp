#include "lambda_asg/numerics.hpp"

#include <array>

namespace lambda_asg {

double log_factorial(std::int64_t n) {
  constexpr std::int64_t kTable = 4096;
  static const auto table = [] {
    std::array<double, kTable> t{};
    for (std::int64_t i = 0; i < kTable; ++i) t[i] = std::lgamma(static_cast<double>(i) + 1);
    return t;
  }();
  if (n < kTable) return table[static_cast<std::size_t>(n)];
  return std::lgamma(static_cast<double>(n) + 1);
}

std::vector<double> binomial_pmf_vector(std::int64_t n, double p) {
  std::vector<double> pmf(static_cast<std::size_t>(n + 1), 0.0);
  if (p <= 0.0) {
    pmf.front() = 1.0;
    return pmf;
  }
  if (p >= 1.0) {
    pmf.back() = 1.0;
    return pmf;
  }
  for (std::int64_t k = 0; k <= n; ++k) pmf[k] = binomial_pmf(n, k, p);
  return pmf;
}

}  // namespace lambda_asg
