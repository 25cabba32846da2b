#pragma once

#include <string>

namespace qobs {

/// Lower end of the coercive range of the divergence coefficient.
inline constexpr double kMinA = -0.6;

enum class PBranch {
  Zero,      ///< A = 0, exponent unbounded
  Endpoint,  ///< supremum at omega = 1
  Interior,  ///< supremum at an interior critical omega
  Origin,    ///< supremum at omega = 0
};

const char* to_string(PBranch b);

struct ExponentTable {
  double A = 0.0;
  double pA = 0.0;
  double sA = 0.0;
  double qMax = 0.0;
  PBranch branch = PBranch::Zero;
};

/// Breakpoints of the piecewise formula.
double p_breakpoint_low();   ///< sqrt(18/5)
double p_breakpoint_high();  ///< 3/5 + sqrt(18/5)

/// Integrability bound for a fixed mixing weight omega; +inf for A = 0.
double p_of_A_omega(double A, double omega);

/// Closed-form supremum over admissible omega.
ExponentTable p_of_A(double A);

/// Each branch of the closed form evaluated directly, regardless of which one applies.
double p_branch_value(double A, PBranch branch);

/// Numerical supremum of p_of_A_omega: grid scan plus golden-section refinement.
double p_sup_oracle(double A, int grid = 100000);

double s_of_A(double A);
double q_max(double A);

/// A dimension bound, or the statement that the contact set is empty.
struct DimensionBound {
  double value = 0.0;
  bool contact_set_empty = false;
};

DimensionBound dim_bound_basic(double s, double A);
DimensionBound dim_bound_improved_power(double s, double A);
double dim_bound_improved_log(double k0, double K0, double A);

/// (2 M_s / m_s)^(1/s).
double lambda_s(double m_s, double M_s, double s);
/// exp(1 + (M0 - m0) / k0).
double lambda_0(double k0, double m0, double M0);

struct CoercivityReport {
  bool coercive = false;
  /// L1 + L3, 2 L1 - L3, L1 + 5/3 L2 + 1/6 L3.
  double margins[3] = {0.0, 0.0, 0.0};
};

CoercivityReport coercivity_check(double L1, double L2, double L3);

}  // namespace qobs
