#include "lambda_asg/fixation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lambda_asg/errors.hpp"
#include "lambda_asg/numerics.hpp"

namespace lambda_asg {

namespace {

const std::pair<std::vector<Real>, std::vector<Real>>& nodes() {
  static const auto rule = gauss_legendre_unit<Real>(kMomentNodes);
  return rule;
}

Real horner(const std::vector<Real>& c, const Real& x) {
  Real s = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
  return s;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Stays within the degree the quadrature integrates exactly.
void check_table_size(int jmax, int kmax) {
  if (jmax < 0 || kmax < 0) throw ValidationError("moment table bounds must be >= 0");
  if (jmax + kmax + 1 > 2 * kMomentNodes - 1) {
    throw SizeLimit("moment table needs jmax + kmax <= " + std::to_string(2 * kMomentNodes - 2));
  }
}

}  // namespace

MomentTable build_moment_table_unchecked(const CoupledMeasure& coupling, int jmax, int kmax) {
  check_table_size(jmax, kmax);
  MomentTable t;
  t.jmax = jmax;
  t.kmax = kmax;
  t.M.assign(static_cast<std::size_t>(jmax) + 1, std::vector<Real>(static_cast<std::size_t>(kmax) + 1, Real(0)));
  t.q.assign(static_cast<std::size_t>(jmax) + 1, Real(0));
  t.tilde_mass = coupling.integrate([](double y, double z) { return y * y + z; });
  if (!(t.tilde_mass > 0.0)) {
    throw DegenerateSelection("size-biased measure (y^2 + z) Lambda has zero mass");
  }
  const Real total = t.tilde_mass;
  const auto& [u, w] = nodes();
  for (const auto& atom : coupling.atoms()) {
    const Real y = atom.y, mass = atom.mass;
    if (atom.y > 0.0) {
      // w̃ · y²/(z + y²) reduces to mass · y² / ‖Λ̃‖.
      const Real weight = mass * y * y / total;
      for (std::size_t g = 0; g < u.size(); ++g) {
        const Real wv = u[g] * y;
        const Real base = 2 * u[g] * w[g] * weight;
        Real one_minus_pow = 1;
        for (int j = 0; j <= jmax; ++j) {
          Real term = base * one_minus_pow;
          for (int k = 0; k <= kmax; ++k) {
            t.M[j][k] += term;
            term *= wv;
          }
          one_minus_pow *= 1 - wv;
        }
      }
    }
    if (atom.z > 0.0) {
      // w̃ · z/(z + y²) · [(1−y)^{j+1} − (1−y−z)^{j+1}] / (z(j+1)).
      const Real weight = mass / total;
      const Real a = 1 - y;
      const Real b = std::max(0.0, 1.0 - atom.y - atom.z);
      Real pa = a, pb = b;
      for (int j = 0; j <= jmax; ++j) {
        t.q[j] += weight * (pa - pb) / (j + 1);
        pa *= a;
        pb *= b;
      }
    }
  }
  return t;
}

MomentTable build_moment_table(const CoupledMeasure& coupling, int jmax, int kmax) {
  MomentTable t = build_moment_table_unchecked(coupling, jmax, kmax);
  for (int j = 0; j <= jmax; ++j) {
    if (t.q[j] <= 0) {
      throw DegenerateSelection("q[" + std::to_string(j) +
                                "] = 0: the coupling carries no selective gap");
    }
  }
  return t;
}

Real PolySeq::h(int n, const Real& x) const { return horner(a.at(n), x); }

Real PolySeq::H(int n, const Real& x) const {
  const auto& c = a.at(n - 1);
  Real s = 0;
  for (std::size_t r = c.size(); r-- > 0;) s = s * x + c[r] / Real(r + 1);
  return Real(n) * s * x;
}

PolySeq build_polynomials(const MomentTable& table, int nmax) {
  if (nmax < 0) throw ValidationError("nmax must be >= 0");
  if (nmax > 0 && (table.jmax < nmax - 1 || table.kmax < nmax - 1)) {
    throw ValidationError("moment table too small for nmax = " + std::to_string(nmax));
  }
  for (int j = 0; j < nmax; ++j) {
    if (table.q[j] <= 0) {
      throw DegenerateSelection("q[" + std::to_string(j) + "] = 0; use the neutral route");
    }
  }
  PolySeq seq;
  seq.nmax = nmax;
  seq.a.push_back({Real(1)});
  const auto& M = table.M;
  const auto& q = table.q;
  for (int n = 1; n <= nmax; ++n) {
    std::vector<Real> cur(static_cast<std::size_t>(n) + 1, Real(0));
    const auto& prev = seq.a[n - 1];
    cur[n] = q[n - 1] / M[n - 1][0] * prev[n - 1];
    for (int j = n - 2; j >= 0; --j) {
      const Real pivot = Real(j + 1) * M[j][0] / (Real(n) * q[j]);
      if (abs(pivot) < Real(1e-13)) {
        throw NearSingular("recursion pivot " + fmt(static_cast<double>(pivot)) + " at n = " +
                           std::to_string(n) + ", j = " + std::to_string(j));
      }
      Real rhs = Real(n) * q[j] * prev[j];
      for (int r = j + 2; r <= n; ++r) rhs -= Real(choose(r, j)) * M[j][r - j - 1] * cur[r];
      cur[j + 1] = rhs / (Real(j + 1) * M[j][0]);
    }
    Real norm = Real(1) / (n + 1);
    for (int r = 1; r <= n; ++r) norm -= cur[r] / (r + 1);
    cur[0] = norm;
    seq.a.push_back(std::move(cur));
  }
  return seq;
}

Real fixation_series(const PolySeq& seq, const Real& x, int nmax) {
  if (nmax > seq.nmax) throw ValidationError("polynomials built only to n = " + std::to_string(seq.nmax));
  Real s = 0, coef = 1;
  for (int n = 1; n <= nmax; ++n) {
    coef *= Real(2) / n;
    s += coef * seq.H(n, x);
  }
  return s / (exp(Real(2)) - 1);
}

FixationValue fixation_probability(const PolySeq& seq, double x, int nmax, bool check) {
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("x must lie in [0, 1]");
  if (nmax < 1 || nmax > seq.nmax) {
    throw ValidationError("nmax must lie in [1, " + std::to_string(seq.nmax) + "]");
  }
  const Real xr = x;
  const Real norm = exp(Real(2)) - 1;
  Real s = 0, coef = 1, last = 0;
  for (int n = 1; n <= nmax; ++n) {
    coef *= Real(2) / n;
    last = coef * seq.H(n, xr);
    s += last;
  }
  FixationValue v;
  v.p = static_cast<double>(s / norm);
  v.last_term = static_cast<double>(abs(last) / norm);
  if (check && v.last_term > 1e-10 * std::abs(v.p)) {
    throw NotConverged("fixation series not converged at x = " + fmt(x) + " with nmax = " +
                       std::to_string(nmax) + ": last term " + fmt(v.last_term) +
                       " vs p = " + fmt(v.p));
  }
  return v;
}

double generator_at(const PolySeq& seq, const CoupledMeasure& coupling, double x, int nmax) {
  const Real xr = x;
  const Real px = fixation_series(seq, xr, nmax);
  Real bp = 0;
  for (const auto& atom : coupling.atoms()) {
    const Real y = atom.y;
    const Real s = std::min(1.0, atom.y + atom.z);
    bp += Real(atom.mass) * (xr * fixation_series(seq, xr + y * (1 - xr), nmax) +
                             (1 - xr) * fixation_series(seq, xr * (1 - s), nmax) - px);
  }
  return static_cast<double>(bp);
}

double harmonicity_residual(const PolySeq& seq, const CoupledMeasure& coupling, int grid,
                            int nmax) {
  if (grid < 2) throw ValidationError("grid must be >= 2");
  double worst = 0.0;
  for (int g = 0; g < grid; ++g) {
    const double x = static_cast<double>(g) / (grid - 1);
    worst = std::max(worst, std::abs(generator_at(seq, coupling, x, nmax)));
  }
  return worst;
}

double cond_griff_residual(const PolySeq& seq, const CoupledMeasure& coupling, int grid) {
  if (grid < 2) throw ValidationError("grid must be >= 2");
  const double total = coupling.integrate([](double y, double z) { return y * y + z; });
  if (!(total > 0.0)) throw DegenerateSelection("size-biased measure has zero mass");
  const auto& [u, w] = nodes();
  Real worst = 0;
  for (int n = 1; n <= seq.nmax; ++n) {
    for (int g = 0; g < grid; ++g) {
      const Real x = Real(g) / (grid - 1);
      Real lhs = 0, rhs = 0;
      for (const auto& atom : coupling.atoms()) {
        const Real y = atom.y, z = atom.z;
        const Real mass = Real(atom.mass) / total;
        if (atom.y > 0.0) {
          Real integral = 0;
          for (std::size_t k = 0; k < u.size(); ++k) {
            const Real wv = u[k] * y;
            const Real lo = x * (1 - wv);
            integral += w[k] * 2 * u[k] * (seq.h(n, lo + wv) - seq.h(n, lo)) / wv;
          }
          lhs += mass * y * y * integral;
        }
        if (atom.z > 0.0) {
          Real integral = 0;
          for (std::size_t k = 0; k < u.size(); ++k) {
            integral += w[k] * seq.h(n - 1, x * (1 - y - z * u[k]));
          }
          rhs += mass * z * integral;
        }
      }
      worst = std::max(worst, Real(abs(lhs - Real(n) * rhs)));
    }
  }
  return static_cast<double>(worst);
}

FixationSolution solve_fixation(const CoupledMeasure& coupling, const FixationOptions& opts) {
  if (opts.nmax < 1) throw ValidationError("nmax must be >= 1");
  if (opts.grid < 2) throw ValidationError("grid must be >= 2");
  FixationSolution sol;
  sol.nmax = opts.nmax;
  for (int g = 0; g < opts.grid; ++g) sol.x.push_back(static_cast<double>(g) / (opts.grid - 1));

  auto neutral = [&](const std::string& why) {
    sol.neutral = true;
    sol.warnings.push_back(why + "; using the neutral fixation probability p(x) = x");
    for (double x : sol.x) {
      sol.p.push_back(p_neutral(x));
      sol.last_term.push_back(0.0);
      sol.residual.push_back(0.0);
    }
    sol.harmonicity = 0.0;
    sol.cond_griff = 0.0;
    return sol;
  };
  if (coupling.is_neutral()) return neutral("coupling has no selective gap (z = 0 everywhere)");

  const int cap = std::min(opts.max_nmax, kMomentNodes - 1);
  int nmax = opts.nmax;
  for (;;) {
    const MomentTable table = build_moment_table_unchecked(coupling, nmax - 1, nmax - 1);
    if (std::any_of(table.q.begin(), table.q.end(), [](const Real& v) { return v <= 0; })) {
      return neutral("moment q[j] vanishes");
    }
    sol.poly = build_polynomials(table, nmax);
    sol.nmax = nmax;
    sol.p.clear();
    sol.last_term.clear();
    bool converged = true;
    double worst_x = 0.0, worst_ratio = 0.0;
    for (double x : sol.x) {
      const FixationValue v = fixation_probability(sol.poly, x, nmax, false);
      sol.p.push_back(v.p);
      sol.last_term.push_back(v.last_term);
      if (v.last_term > 1e-10 * std::abs(v.p)) {
        converged = false;
        const double ratio = v.last_term / std::max(std::abs(v.p), 1e-300);
        if (ratio > worst_ratio) {
          worst_ratio = ratio;
          worst_x = x;
        }
      }
    }
    if (converged || !opts.check_convergence) break;
    if (opts.adaptive && nmax < cap) {
      nmax = std::min(cap, nmax + 10);
      continue;
    }
    throw NotConverged("fixation series not converged with nmax = " + std::to_string(nmax) +
                       ": last term / p = " + fmt(worst_ratio) + " at x = " + fmt(worst_x));
  }
  sol.harmonicity = 0.0;
  for (double x : sol.x) {
    sol.residual.push_back(generator_at(sol.poly, coupling, x, sol.nmax));
    sol.harmonicity = std::max(sol.harmonicity, std::abs(sol.residual.back()));
  }
  sol.cond_griff = cond_griff_residual(sol.poly, coupling, 21);
  return sol;
}

}  // namespace lambda_asg
