#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>

#include "qobs/qtensor.hpp"

namespace qobs {

/// m d^-s.
struct InversePower {
  double s = 1.0;
  double m = 1.0;
};

/// -k ln d + c.
struct Logarithmic {
  double k = 1.0;
  double c = 0.0;
};

/// Relative entropy of the maximum-entropy orientation distribution with second moment Q + I/3.
struct BallMajumdar {
  int quad_polar = 64;
  int quad_azimuth = 128;
  double offset = 1.0;
};

using PotentialFamily = std::variant<InversePower, Logarithmic, BallMajumdar>;

struct PotentialSpec {
  PotentialFamily family = InversePower{};
  /// Soft-min temperature replacing lambda_1 in the distance-based families; 0 means exact.
  double smoothing_tau = 0.0;

  void validate() const;
  std::string family_name() const;
  bool is_distance_based() const { return !std::holds_alternative<BallMajumdar>(family); }
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Eigenvalue gap below which lambda_1 counts as repeated.
inline constexpr double kDegenerateGap = 1e-8;

/// Potential value; +infinity for tensors not strictly inside the physical set.
double value(const PotentialSpec& spec, const QTensor& Q);

/// Gradient in the 5-coefficient basis. Throws DegenerateEigenvalue for the exact
/// distance-based families when lambda_1 is repeated.
QTensor gradient(const PotentialSpec& spec, const QTensor& Q);

/// Profile phi(d) of a distance-based family and its first two derivatives.
struct Profile {
  double value;
  double d1;
  double d2;
};
Profile distance_profile(const PotentialFamily& family, double d);

/// Smallest-eigenvalue surrogate: exact lambda_1 for tau = 0, soft-min otherwise.
/// weights receives d(lambda_tau)/d(lambda_i).
double soft_min(const std::array<double, 3>& lambdas, double tau, std::array<double, 3>* weights = nullptr);

// ---------------------------------------------------------------------------
// Ball-Majumdar
// ---------------------------------------------------------------------------

/// Result of the dual maximization sup_L { L:Q - ln Z(L) - (penalty/2)|L|^2 }.
struct BmDual {
  double value = 0.0;        ///< supremum, without offset
  Coeffs multiplier;         ///< maximizing L (gradient of the value w.r.t. Q)
  int iterations = 0;
  double residual = 0.0;
};

/// Optional warm start for the dual multiplier, expressed in the eigenvalue plane.
struct BmHint {
  double t0 = 0.0;
  double t1 = 0.0;
  bool valid = false;
};

struct BmSolveOptions {
  double tol = 1e-10;
  int max_iters = 100;
  double penalty = 0.0;  ///< quadratic penalty on L; 0 gives the plain potential
};

/// Damped Newton on the dual problem. Throws ConvergenceError after max_iters.
BmDual bm_dual(const BallMajumdar& spec, const QTensor& Q, const BmSolveOptions& opt = {}, BmHint* hint = nullptr);

/// bm_dual(...).value + offset, +infinity outside the open physical set.
double bm_value(const BallMajumdar& spec, const QTensor& Q);

/// ln Z(L) for a traceless L given by its eigenvalues, with the matching first moments.
struct BmPartition {
  double log_z;
  std::array<double, 3> moments;  ///< E[(m.n_i)^2] - 1/3
};
BmPartition bm_partition(const BallMajumdar& spec, const std::array<double, 3>& multiplier_eigenvalues);

/// Distance below which the quadrature no longer resolves the potential reliably.
double bm_resolution_floor(const BallMajumdar& spec);

// ---------------------------------------------------------------------------
// Hypothesis checkers
// ---------------------------------------------------------------------------

struct HypothesisReport {
  std::string family;
  std::string check;  ///< "growth", "gradient", "hessian", "convexity"
  std::size_t samples = 0;
  double d_min = 0.0;  ///< smallest sampled distance

  // growth
  std::optional<double> m_s, M_s;
  std::optional<double> k0, K0, m0, M0;
  // constants
  std::optional<double> C_s, C_0, c_s, c_0;
  /// smallest sampled Hessian quadratic form (convexity corollary)
  std::optional<double> min_quadratic_form;
  /// worst midpoint-convexity slack
  std::optional<double> worst_slack;

  bool bounded = true;
  std::optional<QTensor> witness;
  std::string note;
};

HypothesisReport check_growth(const PotentialSpec& spec, std::size_t samples, std::uint64_t seed);
/// Ratio controlled by the gradient hypothesis at one point: |Df|^s / f^(s+1) for
/// inverse-power potentials, |Df| exp(-f / k0) otherwise.
double gradient_ratio(const PotentialSpec& spec, const QTensor& Q, double k0);

HypothesisReport check_gradient_bound(const PotentialSpec& spec, std::size_t samples, std::uint64_t seed);
HypothesisReport check_hessian_bound(const PotentialSpec& spec, std::size_t samples, std::uint64_t seed);

/// Worst (most negative) value of (f(Q1)+f(Q2))/2 - f((Q1+Q2)/2) over random interior pairs.
double convexity_midpoint_check(const PotentialSpec& spec, std::size_t triples, std::uint64_t seed);

}  // namespace qobs
