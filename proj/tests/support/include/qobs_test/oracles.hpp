#pragma once

// Reference implementations used only by tests. They deliberately avoid the
// library's closed forms.

#include <array>

#include <Eigen/Core>

namespace qobs_test {

struct JacobiResult {
  std::array<double, 3> values;   // ascending
  Eigen::Matrix3d vectors;        // columns paired with values
  int sweeps;
};

/// Cyclic Jacobi rotations on a symmetric 3x3 matrix.
JacobiResult jacobi_eigen(const Eigen::Matrix3d& a, double tol = 1e-15, int max_sweeps = 100);

/// Largest singular value via power iteration on M^T M.
double spectral_norm_power(const Eigen::Matrix3d& m, int iterations = 500);

/// p(A, w) from the rewritten quadratic-root form, evaluated independently.
double p_new_form(double A, double w);

}  // namespace qobs_test
