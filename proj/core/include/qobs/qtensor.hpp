#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace qobs {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Coeffs = Eigen::Matrix<double, 5, 1>;

/// Largest possible distance to the obstacle, attained at Q = 0.
inline constexpr double kMaxDistance = 0.40824829046386301637;  // sqrt(6)/6
inline constexpr double kSqrt6Half = 1.22474487139158904910;    // sqrt(6)/2
inline constexpr double kDefaultClassifyTol = 1e-9;

/// Traceless symmetric 3x3 tensor stored in an orthonormal 5-coefficient basis:
///   (e1e1 - e2e2)/sqrt2, (2e3e3 - e1e1 - e2e2)/sqrt6,
///   (e1e2 + e2e1)/sqrt2, (e1e3 + e3e1)/sqrt2, (e2e3 + e3e2)/sqrt2.
/// The Frobenius inner product equals the coefficient dot product.
class QTensor {
 public:
  QTensor() : c_(Coeffs::Zero()) {}
  explicit QTensor(const Coeffs& c) : c_(c) {}

  /// Orthogonal projection of an arbitrary 3x3 matrix onto the traceless symmetric subspace.
  static QTensor from_matrix(const Mat3& m);
  static QTensor diagonal(double a, double b, double c);
  /// S (n n^T - I/3), with n normalized.
  static QTensor uniaxial(double S, const Vec3& n);
  static QTensor basis(int i);

  Mat3 matrix() const;
  const Coeffs& coeffs() const { return c_; }
  Coeffs& coeffs() { return c_; }
  double operator[](int i) const { return c_[i]; }
  double& operator[](int i) { return c_[i]; }

  double norm() const { return c_.norm(); }
  double squared_norm() const { return c_.squaredNorm(); }
  double dot(const QTensor& o) const { return c_.dot(o.c_); }
  bool is_finite() const { return c_.allFinite(); }
  double determinant() const { return matrix().determinant(); }

  /// R Q R^T.
  QTensor rotated(const Mat3& R) const { return from_matrix(R * matrix() * R.transpose()); }

  QTensor& operator+=(const QTensor& o) { c_ += o.c_; return *this; }
  QTensor& operator-=(const QTensor& o) { c_ -= o.c_; return *this; }
  QTensor& operator*=(double s) { c_ *= s; return *this; }
  friend QTensor operator+(QTensor a, const QTensor& b) { return a += b; }
  friend QTensor operator-(QTensor a, const QTensor& b) { return a -= b; }
  friend QTensor operator-(const QTensor& a) { return QTensor(-a.c_); }
  friend QTensor operator*(double s, QTensor a) { return a *= s; }
  friend QTensor operator*(QTensor a, double s) { return a *= s; }
  friend QTensor operator/(QTensor a, double s) { return a *= 1.0 / s; }
  friend bool operator==(const QTensor& a, const QTensor& b) { return a.c_ == b.c_; }

 private:
  Coeffs c_;
};

/// Ascending eigenvalues with a matching orthonormal right-handed frame.
struct Spectrum {
  std::array<double, 3> lambdas{};
  std::array<Vec3, 3> frame{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};

  QTensor reconstruct() const;
};

enum class Region { Interior, Boundary, Outside };

const char* to_string(Region r);

/// Closed-form symmetric 3x3 eigensolver. Eigenvectors are normalized so that their
/// first non-negligible component is positive. Q = 0 yields the identity frame.
Spectrum eigen(const QTensor& Q);

/// Only the sorted eigenvalues.
std::array<double, 3> eigenvalues(const QTensor& Q);

Region classify(const QTensor& Q, double tol = kDefaultClassifyTol);

/// (sqrt6/2)(lambda_1 + 1/3) without any region check; negative outside.
double obstacle_gap(const QTensor& Q);
double obstacle_gap(const std::array<double, 3>& lambdas);

/// Frobenius distance to the complement of the physical set. Outside raises DomainError.
double distance(const QTensor& Q);

/// Closest point on the obstacle boundary.
QTensor nearest_obstacle_point(const QTensor& Q);

/// Multi-start Nelder-Mead minimization of |Q - P| over boundary points P.
double brute_force_distance(const QTensor& Q, int restarts, std::uint64_t seed);

/// (2/3)|M|^2 - ||M||_2^2.
double norm2_slack(const QTensor& M);

/// (5/3)(|M|^2 + |N|^2 + |P|^2) - sum_i (M_i1 + N_i2 + P_i3)^2.
double div_slack(const QTensor& M, const QTensor& N, const QTensor& P);

/// |d(Q1) - d(Q2)| / |Q1 - Q2|, or 0 when the inputs coincide.
double lipschitz_witness(const QTensor& Q1, const QTensor& Q2);

}  // namespace qobs
