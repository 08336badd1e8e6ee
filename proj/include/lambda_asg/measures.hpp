#pragma once

#include <span>
#include <vector>

namespace lambda_asg {

/// Atoms lighter than this are dropped after every construction.
inline constexpr double kMassFloor = 1e-15;
/// Absolute tolerance of the stochastic-order comparison.
inline constexpr double kOrderTolerance = 1e-12;

struct Atom1D {
  double location;
  double mass;
};

/// Finite measure on [0, 1] held as sorted, merged atoms.
class FiniteMeasure1D {
 public:
  FiniteMeasure1D() = default;
  explicit FiniteMeasure1D(std::vector<Atom1D> atoms);

  static FiniteMeasure1D dirac(double location, double mass = 1.0);

  /// Bins a Beta(a, b) density onto `grid` equal cells (atom at each cell
  /// midpoint, cell mass by 16-node Gauss–Legendre), rescaled to `mass`.
  static FiniteMeasure1D from_beta_density(double a, double b, int grid = 256,
                                           double mass = 1.0);

  std::span<const Atom1D> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }
  double total_mass() const noexcept { return total_mass_; }

  /// Λ[x, 1].
  double tail_mass(double x) const noexcept;

  template <typename F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.mass * f(a.location);
    return s;
  }

  FiniteMeasure1D scaled(double factor) const;
  FiniteMeasure1D operator+(const FiniteMeasure1D& other) const;

  bool is_probability(double tol = 1e-12) const noexcept;

 private:
  std::vector<Atom1D> atoms_;
  double total_mass_ = 0.0;
};

struct CoupledAtom {
  double y;  ///< neutral strength
  double z;  ///< selective gap
  double mass;
};

/// Finite measure on the simplex {(y, z) : y, z ≥ 0, y + z ≤ 1}.
///
/// Atoms at the origin change nothing in any rate or arrow law; they are
/// stripped from the atom list and kept only as `origin_mass()` so the
/// marginals stay exact.
class CoupledMeasure {
 public:
  CoupledMeasure() = default;
  explicit CoupledMeasure(std::vector<CoupledAtom> atoms, double origin_mass = 0.0);

  std::span<const CoupledAtom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }

  /// Mass of the atoms that generate events (excludes the origin).
  double total_mass() const noexcept { return total_mass_; }
  double origin_mass() const noexcept { return origin_mass_; }

  /// Law of y (origin mass included at 0).
  FiniteMeasure1D y_marginal() const;
  /// Push-forward under (y, z) ↦ y + z (origin mass included at 0).
  FiniteMeasure1D sum_marginal() const;

  CoupledMeasure scaled(double factor) const;

  /// Σ mass · f(y, z), origin included as f(0, 0).
  template <typename F>
  double integrate(F&& f) const {
    double s = origin_mass_ > 0.0 ? origin_mass_ * f(0.0, 0.0) : 0.0;
    for (const auto& a : atoms_) s += a.mass * f(a.y, a.z);
    return s;
  }

  /// True when no atom carries a selective gap.
  bool is_neutral() const noexcept;

 private:
  std::vector<CoupledAtom> atoms_;
  double total_mass_ = 0.0;
  double origin_mass_ = 0.0;
};

struct OrderCheck {
  bool holds = true;
  double witness = 0.0;    ///< x with the largest a[x,1] − b[x,1]
  double violation = 0.0;  ///< that largest difference (≤ 0 when holds)
};

/// Tail comparison a[x,1] ≤ b[x,1] + 1e-12 at x = 0 and every atom location.
OrderCheck check_stochastic_order(const FiniteMeasure1D& a, const FiniteMeasure1D& b);

inline bool stochastic_order_leq(const FiniteMeasure1D& a, const FiniteMeasure1D& b) {
  return check_stochastic_order(a, b).holds;
}

/// Law of (F_a⁻¹(U), F_b⁻¹(U) − F_a⁻¹(U)) for equal-mass measures a ≤ b.
/// Throws OrderViolation when a ≤ b fails.
CoupledMeasure quantile_coupling(const FiniteMeasure1D& a, const FiniteMeasure1D& b);

struct NormalizationRecord {
  FiniteMeasure1D mu_plus;
  FiniteMeasure1D mu_minus;
  double c = 0.0;
  double rate_scale = 1.0;
};

/// Reduces an ordered pair of finite measures to probability measures plus a
/// time change: μ⊕ = Λ⊕/‖Λ⊕‖, μ⊖ = Λ⊖/‖Λ⊕‖ + c·δ₀, c = 1 − ‖Λ⊖‖/‖Λ⊕‖.
NormalizationRecord normalize_pair(const FiniteMeasure1D& lambda_minus,
                                   const FiniteMeasure1D& lambda_plus);

/// normalize_pair, quantile coupling of (μ⊖, μ⊕), rescaled by ‖Λ⊕‖.
CoupledMeasure selective_coupling(const FiniteMeasure1D& lambda_minus,
                                  const FiniteMeasure1D& lambda_plus);

/// Σ mass · z², the quadratic transport cost of the coupling.
double transport_cost(const CoupledMeasure& coupling);

/// Largest per-location mass discrepancy between the coupling's marginals and
/// the declared pair (normalized so that atoms at 0 are ignored when the pair
/// was only finite-measure ordered).
double marginal_error(const CoupledMeasure& coupling, const FiniteMeasure1D& lambda_minus,
                      const FiniteMeasure1D& lambda_plus, bool ignore_origin = false);

}  // namespace lambda_asg
