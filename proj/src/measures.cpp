#include "lambda_asg/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>

#include "lambda_asg/errors.hpp"
#include "lambda_asg/numerics.hpp"

namespace lambda_asg {

namespace {

constexpr double kSimplexSlack = 1e-12;

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

FiniteMeasure1D::FiniteMeasure1D(std::vector<Atom1D> atoms) {
  for (const auto& a : atoms) {
    if (!std::isfinite(a.location) || a.location < 0.0 || a.location > 1.0) {
      throw InvalidMeasure("atom location " + fmt_double(a.location) +
                           " outside [0, 1]");
    }
    if (!std::isfinite(a.mass) || a.mass < 0.0) {
      throw InvalidMeasure("atom mass " + fmt_double(a.mass) +
                           " must be finite and nonnegative");
    }
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom1D& l, const Atom1D& r) { return l.location < r.location; });
  for (const auto& a : atoms) {
    if (!atoms_.empty() && atoms_.back().location == a.location) {
      atoms_.back().mass += a.mass;
    } else {
      atoms_.push_back(a);
    }
  }
  std::erase_if(atoms_, [](const Atom1D& a) { return a.mass < kMassFloor; });
  for (const auto& a : atoms_) total_mass_ += a.mass;
}

FiniteMeasure1D FiniteMeasure1D::dirac(double location, double mass) {
  return FiniteMeasure1D({{location, mass}});
}

FiniteMeasure1D FiniteMeasure1D::from_beta_density(double a, double b, int grid,
                                                   double mass) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidMeasure("beta parameters must be > 0");
  if (grid < 1) throw InvalidMeasure("density grid must be >= 1");
  if (!(mass > 0.0)) throw InvalidMeasure("density mass must be > 0");
  static const auto rule = gauss_legendre_unit<double>(16);
  const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  std::vector<Atom1D> atoms;
  atoms.reserve(static_cast<std::size_t>(grid));
  double total = 0.0;
  const double width = 1.0 / grid;
  for (int i = 0; i < grid; ++i) {
    const double lo = i * width;
    double cell = 0.0;
    for (std::size_t k = 0; k < rule.first.size(); ++k) {
      const double x = lo + width * rule.first[k];
      cell += rule.second[k] *
              std::exp((a - 1) * std::log(x) + (b - 1) * std::log1p(-x) - log_beta);
    }
    cell *= width;
    atoms.push_back({lo + 0.5 * width, cell});
    total += cell;
  }
  for (auto& atom : atoms) atom.mass *= mass / total;
  return FiniteMeasure1D(std::move(atoms));
}

double FiniteMeasure1D::tail_mass(double x) const noexcept {
  const auto it = std::lower_bound(
      atoms_.begin(), atoms_.end(), x,
      [](const Atom1D& a, double v) { return a.location < v; });
  double s = 0.0;
  for (auto i = it; i != atoms_.end(); ++i) s += i->mass;
  return s;
}

FiniteMeasure1D FiniteMeasure1D::scaled(double factor) const {
  std::vector<Atom1D> out(atoms_.begin(), atoms_.end());
  for (auto& a : out) a.mass *= factor;
  return FiniteMeasure1D(std::move(out));
}

FiniteMeasure1D FiniteMeasure1D::operator+(const FiniteMeasure1D& other) const {
  std::vector<Atom1D> out(atoms_.begin(), atoms_.end());
  out.insert(out.end(), other.atoms_.begin(), other.atoms_.end());
  return FiniteMeasure1D(std::move(out));
}

bool FiniteMeasure1D::is_probability(double tol) const noexcept {
  return std::abs(total_mass_ - 1.0) <= tol;
}

CoupledMeasure::CoupledMeasure(std::vector<CoupledAtom> atoms, double origin_mass)
    : origin_mass_(origin_mass) {
  if (!std::isfinite(origin_mass) || origin_mass < 0.0) {
    throw InvalidMeasure("origin mass must be finite and nonnegative");
  }
  for (auto& a : atoms) {
    if (!std::isfinite(a.y) || !std::isfinite(a.z) || a.y < 0.0 || a.z < 0.0 ||
        a.y + a.z > 1.0 + kSimplexSlack) {
      throw InvalidMeasure("simplex violation: atom (y=" + fmt_double(a.y) +
                           ", z=" + fmt_double(a.z) + ") needs y, z >= 0 and y + z <= 1");
    }
    if (!std::isfinite(a.mass) || a.mass < 0.0) {
      throw InvalidMeasure("coupled atom mass " + fmt_double(a.mass) +
                           " must be finite and nonnegative");
    }
    if (a.y > 1.0) a.y = 1.0;
    if (a.y + a.z > 1.0) a.z = 1.0 - a.y;
  }
  std::sort(atoms.begin(), atoms.end(), [](const CoupledAtom& l, const CoupledAtom& r) {
    return l.y != r.y ? l.y < r.y : l.z < r.z;
  });
  for (const auto& a : atoms) {
    if (a.y == 0.0 && a.z == 0.0) {
      origin_mass_ += a.mass;
    } else if (!atoms_.empty() && atoms_.back().y == a.y && atoms_.back().z == a.z) {
      atoms_.back().mass += a.mass;
    } else {
      atoms_.push_back(a);
    }
  }
  std::erase_if(atoms_, [](const CoupledAtom& a) { return a.mass < kMassFloor; });
  if (origin_mass_ < kMassFloor) origin_mass_ = 0.0;
  for (const auto& a : atoms_) total_mass_ += a.mass;
}

FiniteMeasure1D CoupledMeasure::y_marginal() const {
  std::vector<Atom1D> out;
  out.reserve(atoms_.size() + 1);
  if (origin_mass_ > 0.0) out.push_back({0.0, origin_mass_});
  for (const auto& a : atoms_) out.push_back({a.y, a.mass});
  return FiniteMeasure1D(std::move(out));
}

FiniteMeasure1D CoupledMeasure::sum_marginal() const {
  std::vector<Atom1D> out;
  out.reserve(atoms_.size() + 1);
  if (origin_mass_ > 0.0) out.push_back({0.0, origin_mass_});
  for (const auto& a : atoms_) out.push_back({std::min(1.0, a.y + a.z), a.mass});
  return FiniteMeasure1D(std::move(out));
}

CoupledMeasure CoupledMeasure::scaled(double factor) const {
  std::vector<CoupledAtom> out(atoms_.begin(), atoms_.end());
  for (auto& a : out) a.mass *= factor;
  return CoupledMeasure(std::move(out), origin_mass_ * factor);
}

bool CoupledMeasure::is_neutral() const noexcept {
  return std::all_of(atoms_.begin(), atoms_.end(),
                     [](const CoupledAtom& a) { return a.z == 0.0; });
}

OrderCheck check_stochastic_order(const FiniteMeasure1D& a, const FiniteMeasure1D& b) {
  std::vector<double> points{0.0};
  for (const auto& atom : a.atoms()) points.push_back(atom.location);
  for (const auto& atom : b.atoms()) points.push_back(atom.location);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  // Sweep the points from the right, accumulating tail masses.
  OrderCheck result;
  result.violation = -std::numeric_limits<double>::infinity();
  auto ia = a.atoms().size();
  auto ib = b.atoms().size();
  double tail_a = 0.0, tail_b = 0.0;
  for (auto p = points.rbegin(); p != points.rend(); ++p) {
    while (ia > 0 && a.atoms()[ia - 1].location >= *p) tail_a += a.atoms()[--ia].mass;
    while (ib > 0 && b.atoms()[ib - 1].location >= *p) tail_b += b.atoms()[--ib].mass;
    const double diff = tail_a - tail_b;
    if (diff > result.violation) {
      result.violation = diff;
      result.witness = *p;
    }
  }
  result.holds = result.violation <= kOrderTolerance;
  return result;
}

CoupledMeasure quantile_coupling(const FiniteMeasure1D& a, const FiniteMeasure1D& b) {
  const double ma = a.total_mass();
  const double mb = b.total_mass();
  if (std::abs(ma - mb) > 1e-12 * std::max({1.0, ma, mb})) {
    throw ValidationError(
        "quantile_coupling needs measures of equal total mass (got " + fmt_double(ma) +
        " and " + fmt_double(mb) + "); apply normalize_pair first");
  }
  const OrderCheck order = check_stochastic_order(a, b);
  if (!order.holds) {
    throw OrderViolation("measures are not stochastically ordered: tail masses differ by " +
                             fmt_double(order.violation) + " at x = " +
                             fmt_double(order.witness),
                         order.witness);
  }

  const auto& aa = a.atoms();
  const auto& bb = b.atoms();
  std::vector<CoupledAtom> out;
  out.reserve(aa.size() + bb.size());
  if (aa.empty() || bb.empty()) return CoupledMeasure();

  // Cumulative breakpoints of both CDFs; the last one on each side is pinned
  // to the common total so rounding cannot leave a sliver unmatched.
  const double total = std::max(ma, mb);
  std::size_t i = 0, j = 0;
  double cum_a = aa.size() == 1 ? total : aa[0].mass;
  double cum_b = bb.size() == 1 ? total : bb[0].mass;
  double u = 0.0;
  for (;;) {
    const double next = std::min(cum_a, cum_b);
    const double m = next - u;
    if (m > 0.0) {
      const double ya = aa[i].location;
      const double yb = bb[j].location;
      // yb < ya only inside the order tolerance
      out.push_back(yb >= ya ? CoupledAtom{ya, yb - ya, m} : CoupledAtom{yb, 0.0, m});
      u = next;
    }
    const bool adv_a = cum_a <= next && i + 1 < aa.size();
    const bool adv_b = cum_b <= next && j + 1 < bb.size();
    if (!adv_a && !adv_b) break;
    if (adv_a) {
      ++i;
      cum_a = i + 1 == aa.size() ? total : cum_a + aa[i].mass;
    }
    if (adv_b) {
      ++j;
      cum_b = j + 1 == bb.size() ? total : cum_b + bb[j].mass;
    }
  }
  return CoupledMeasure(std::move(out));
}

NormalizationRecord normalize_pair(const FiniteMeasure1D& lambda_minus,
                                   const FiniteMeasure1D& lambda_plus) {
  const double plus_mass = lambda_plus.total_mass();
  if (!(plus_mass > 0.0)) throw ZeroMass("lambda_plus has zero total mass");
  const OrderCheck order = check_stochastic_order(lambda_minus, lambda_plus);
  if (!order.holds) {
    throw OrderViolation("lambda_minus[x,1] exceeds lambda_plus[x,1] by " +
                             fmt_double(order.violation) + " at x = " +
                             fmt_double(order.witness),
                         order.witness);
  }
  NormalizationRecord rec;
  rec.rate_scale = plus_mass;
  rec.c = std::max(0.0, 1.0 - lambda_minus.total_mass() / plus_mass);
  rec.mu_plus = lambda_plus.scaled(1.0 / plus_mass);
  rec.mu_minus = lambda_minus.scaled(1.0 / plus_mass);
  if (rec.c > 0.0) rec.mu_minus = rec.mu_minus + FiniteMeasure1D::dirac(0.0, rec.c);
  return rec;
}

CoupledMeasure selective_coupling(const FiniteMeasure1D& lambda_minus,
                                  const FiniteMeasure1D& lambda_plus) {
  const NormalizationRecord rec = normalize_pair(lambda_minus, lambda_plus);
  return quantile_coupling(rec.mu_minus, rec.mu_plus).scaled(rec.rate_scale);
}

double transport_cost(const CoupledMeasure& coupling) {
  return coupling.integrate([](double, double z) { return z * z; });
}

double marginal_error(const CoupledMeasure& coupling, const FiniteMeasure1D& lambda_minus,
                      const FiniteMeasure1D& lambda_plus, bool ignore_origin) {
  // y + z may differ from the declared location by rounding, so atoms closer
  // than kOrderTolerance are treated as one location.
  auto diff = [ignore_origin](const FiniteMeasure1D& got, const FiniteMeasure1D& want) {
    std::vector<std::pair<double, double>> signed_atoms;
    for (const auto& a : got.atoms()) signed_atoms.emplace_back(a.location, a.mass);
    for (const auto& a : want.atoms()) signed_atoms.emplace_back(a.location, -a.mass);
    std::sort(signed_atoms.begin(), signed_atoms.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < signed_atoms.size();) {
      const double start = signed_atoms[i].first;
      double d = 0.0;
      for (; i < signed_atoms.size() && signed_atoms[i].first - start <= kOrderTolerance; ++i) {
        d += signed_atoms[i].second;
      }
      if (ignore_origin && start <= kOrderTolerance) continue;
      worst = std::max(worst, std::abs(d));
    }
    return worst;
  };
  return std::max(diff(coupling.y_marginal(), lambda_minus),
                  diff(coupling.sum_marginal(), lambda_plus));
}

}  // namespace lambda_asg
