#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <string>
#include <vector>

#include "lambda_asg/measures.hpp"

namespace lambda_asg {

/// Working precision of the polynomial recursion. The coefficients alternate
/// in sign and grow far past 1/eps of a double.
using Real = boost::multiprecision::cpp_bin_float_50;

inline constexpr int kDefaultNmax = 30;
inline constexpr int kMomentNodes = 64;

struct MomentTable {
  int jmax = 0;
  int kmax = 0;
  std::vector<std::vector<Real>> M;  ///< M[j][k] = E[(1−W)ʲ Wᵏ Y²/(Z+Y²)]
  std::vector<Real> q;               ///< q[j] = E[(1−Y−ZV)ʲ Z/(Z+Y²)]
  double tilde_mass = 0.0;           ///< ∫(y² + z) dΛ
};

/// Expectations under the size-biased law (y² + z)Λ / ‖·‖, with U of density
/// 2u, V uniform, W = UY.
MomentTable build_moment_table(const CoupledMeasure& coupling, int jmax, int kmax);

/// Same table without the q[j] > 0 check; used to detect the neutral case.
MomentTable build_moment_table_unchecked(const CoupledMeasure& coupling, int jmax, int kmax);

/// Coefficients a[n][r] of h_n(x) = Σ_r a[n][r] xʳ, n = 0..nmax.
struct PolySeq {
  int nmax = 0;
  std::vector<std::vector<Real>> a;

  Real h(int n, const Real& x) const;
  /// H_n(x) = ∫₀ˣ n·h_{n−1}(u) du, n ≥ 1.
  Real H(int n, const Real& x) const;
};

PolySeq build_polynomials(const MomentTable& table, int nmax);

struct FixationValue {
  double p = 0.0;
  double last_term = 0.0;
};

/// p(x) = (e²−1)⁻¹ Σ_{n=1}^{nmax} 2ⁿ/n! H_n(x). With `check`, throws
/// NotConverged when the last term exceeds 1e-10·|p|.
FixationValue fixation_probability(const PolySeq& seq, double x, int nmax, bool check = true);

/// Series value in working precision, no convergence check.
Real fixation_series(const PolySeq& seq, const Real& x, int nmax);

inline double p_neutral(double x) { return x; }

/// B p(x) = ∫[x p(x+y(1−x)) + (1−x) p(x(1−y−z)) − p(x)] dΛ for the truncated series.
double generator_at(const PolySeq& seq, const CoupledMeasure& coupling, double x, int nmax);

/// max over `grid` equally spaced x of |B p(x)| with p the truncated series.
double harmonicity_residual(const PolySeq& seq, const CoupledMeasure& coupling, int grid,
                            int nmax);

/// max over n = 1..nmax and `grid` points of the defining identity of h_n,
///   E[(h_n(x(1−W)+W) − h_n(x(1−W)))/W · Y²/(Z+Y²)] = n E[h_{n−1}(x(1−Y−ZV)) Z/(Z+Y²)],
/// evaluated by quadrature directly from the coupling atoms.
double cond_griff_residual(const PolySeq& seq, const CoupledMeasure& coupling, int grid);

struct FixationOptions {
  int nmax = kDefaultNmax;
  int grid = 101;
  bool check_convergence = true;
  /// When set, nmax is raised (up to max_nmax) until the series converges.
  bool adaptive = false;
  int max_nmax = 60;
};

struct FixationSolution {
  bool neutral = false;
  int nmax = 0;
  std::vector<double> x;
  std::vector<double> p;
  std::vector<double> last_term;
  std::vector<double> residual;  ///< B p(x) at each grid point
  double harmonicity = 0.0;
  double cond_griff = 0.0;
  PolySeq poly;
  std::vector<std::string> warnings;
};

/// Full pipeline on a grid of x values; routes couplings without selection to
/// p_neutral.
FixationSolution solve_fixation(const CoupledMeasure& coupling, const FixationOptions& opts = {});

}  // namespace lambda_asg
