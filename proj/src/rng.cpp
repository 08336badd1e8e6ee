#include "lambda_asg/rng.hpp"

#include <cmath>
#include <numeric>

namespace lambda_asg {

Rng::Rng(std::uint64_t seed) noexcept {
  std::uint64_t x = seed;
  for (auto& word : s_) {
    x = splitmix64(x);
    word = x;
  }
  // xoshiro must not start from the all-zero state.
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

Rng Rng::for_stream(std::uint64_t seed, std::uint64_t stream,
                    std::uint64_t replicate) noexcept {
  const std::uint64_t key =
      splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ splitmix64(~replicate));
  return Rng(key);
}

std::uint64_t Rng::below(std::uint64_t n) noexcept {
  // Lemire's nearly-divisionless rejection.
  unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::exponential(double rate) noexcept {
  return -std::log(uniform_pos()) / rate;
}

std::int64_t Rng::binomial(std::int64_t n, double p) noexcept {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  const bool flip = p > 0.5;
  const double pp = flip ? 1.0 - p : p;
  const std::int64_t k = static_cast<double>(n) * pp < 30.0
                             ? binomial_inversion(n, pp)
                             : binomial_btrd(n, pp);
  return flip ? n - k : k;
}

std::int64_t Rng::binomial_inversion(std::int64_t n, double p) noexcept {
  const double q = 1.0 - p;
  const double s = p / q;
  const double a = static_cast<double>(n + 1) * s;
  const double r0 = std::pow(q, static_cast<double>(n));
  for (;;) {
    double r = r0;
    double u = uniform();
    std::int64_t x = 0;
    while (u > r) {
      u -= r;
      ++x;
      if (x > n) break;  // round-off ran past the support; redraw
      r *= a / static_cast<double>(x) - s;
    }
    if (x <= n) return x;
  }
}

namespace {

// Stirling-series remainder log(k!) - [(k+1/2)log(k+1) - (k+1) + log(2π)/2].
double stirling_tail(std::int64_t k) {
  static constexpr double table[] = {
      0.08106146679532726, 0.04134069595540929, 0.02767792568499834,
      0.02079067210376509, 0.01664469118982119, 0.01387612882307075,
      0.01189670994589177, 0.01041126526197209, 0.009255462182712733,
      0.008330563433362871};
  if (k <= 9) return table[k];
  const double kp1 = static_cast<double>(k + 1);
  const double kp1sq = kp1 * kp1;
  return (1.0 / 12 - (1.0 / 360 - 1.0 / 1260 / kp1sq) / kp1sq) / kp1;
}

}  // namespace

// Hörmann (1993), "The generation of binomial random variates", algorithm BTRD.
std::int64_t Rng::binomial_btrd(std::int64_t n, double p) noexcept {
  const double nd = static_cast<double>(n);
  const double spq = std::sqrt(nd * p * (1.0 - p));
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = nd * p + 0.5;
  const double v_r = 0.92 - 4.2 / b;
  const double r = p / (1.0 - p);
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double m = std::floor((nd + 1) * p);
  const double npq = spq * spq;
  const double nr = (nd + 1) * r;

  for (;;) {
    double u;
    double v = uniform();
    if (v <= 0.86 * v_r) {
      u = v / v_r - 0.43;
      const double k = std::floor((2 * a / (0.5 - std::abs(u)) + b) * u + c);
      if (k >= 0 && k <= nd) return static_cast<std::int64_t>(k);
      continue;
    }
    if (v >= v_r) {
      u = uniform() - 0.5;
    } else {
      u = v / v_r - 0.93;
      u = std::copysign(0.5, u) - u;
      v = uniform() * v_r;
    }
    const double us = 0.5 - std::abs(u);
    const double kd = std::floor((2 * a / us + b) * u + c);
    if (kd < 0 || kd > nd) continue;
    v = v * alpha / (a / (us * us) + b);
    const double km = std::abs(kd - m);
    if (km <= 15) {
      double f = 1.0;
      if (m < kd) {
        for (double i = m + 1; i <= kd; ++i) f *= nr / i - r;
      } else if (m > kd) {
        for (double i = kd + 1; i <= m; ++i) v *= nr / i - r;
      }
      if (v <= f) return static_cast<std::int64_t>(kd);
      continue;
    }
    v = std::log(v);
    const double rho =
        (km / npq) * (((km / 3.0 + 0.625) * km + 1.0 / 6.0) / npq + 0.5);
    const double t = -km * km / (2 * npq);
    if (v < t - rho) return static_cast<std::int64_t>(kd);
    if (v > t + rho) continue;
    const auto k = static_cast<std::int64_t>(kd);
    const auto mi = static_cast<std::int64_t>(m);
    const double nm = nd - m + 1;
    const double h = (m + 0.5) * std::log((m + 1) / (r * nm)) +
                     stirling_tail(mi) + stirling_tail(n - mi);
    const double nk = nd - kd + 1;
    if (v <= h + (nd + 1) * std::log(nm / nk) +
                 (kd + 0.5) * std::log(nk * r / (kd + 1)) - stirling_tail(k) -
                 stirling_tail(n - k)) {
      return k;
    }
  }
}

AliasTable::AliasTable(std::span<const double> weights) {
  const std::size_t n = weights.size();
  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  if (n == 0) return;
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> scaled(n);
  std::vector<std::size_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * static_cast<double>(n) / total;
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (std::size_t i : large) {
    prob_[i] = 1.0;
    alias_[i] = i;
  }
  for (std::size_t i : small) {
    prob_[i] = 1.0;
    alias_[i] = i;
  }
}

}  // namespace lambda_asg
