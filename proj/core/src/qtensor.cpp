#include "qobs/qtensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Geometry>

#include "nelder_mead.hpp"
#include "qobs/errors.hpp"
#include "qobs/sampling.hpp"

namespace qobs {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt6 = 0.40824829046386301637;
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kThird = 1.0 / 3.0;

Vec3 any_orthogonal(const Vec3& v) {
  // Cross with the coordinate axis least aligned with v.
  int k = 0;
  if (std::abs(v[1]) < std::abs(v[k])) k = 1;
  if (std::abs(v[2]) < std::abs(v[k])) k = 2;
  return v.cross(Vec3::Unit(k)).normalized();
}

void fix_sign(Vec3& v) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v[i]) > 1e-12) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

/// Eigenvector of symmetric A for eigenvalue mu, assumed well separated from the others.
Vec3 isolated_eigenvector(const Mat3& A, double mu) {
  const Mat3 B = A - mu * Mat3::Identity();
  const Vec3 r0 = B.row(0), r1 = B.row(1), r2 = B.row(2);
  const std::array<Vec3, 3> c{r0.cross(r1), r0.cross(r2), r1.cross(r2)};
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (c[i].squaredNorm() > c[best].squaredNorm()) best = i;
  const double n2 = c[best].squaredNorm();
  if (n2 == 0.0) return Vec3::UnitX();
  return c[best] / std::sqrt(n2);
}

}  // namespace

QTensor QTensor::from_matrix(const Mat3& m) {
  const Mat3 s = 0.5 * (m + m.transpose());
  Coeffs c;
  c[0] = (s(0, 0) - s(1, 1)) * kInvSqrt2;
  c[1] = (2.0 * s(2, 2) - s(0, 0) - s(1, 1)) * kInvSqrt6;
  c[2] = kSqrt2 * s(0, 1);
  c[3] = kSqrt2 * s(0, 2);
  c[4] = kSqrt2 * s(1, 2);
  return QTensor(c);
}

QTensor QTensor::diagonal(double a, double b, double c) {
  return from_matrix(Vec3(a, b, c).asDiagonal());
}

QTensor QTensor::uniaxial(double S, const Vec3& n) {
  const Vec3 u = n.normalized();
  return from_matrix(S * (u * u.transpose() - kThird * Mat3::Identity()));
}

QTensor QTensor::basis(int i) {
  Coeffs c = Coeffs::Zero();
  c[i] = 1.0;
  return QTensor(c);
}

Mat3 QTensor::matrix() const {
  Mat3 m;
  const double a = c_[0] * kInvSqrt2, b = c_[1] * kInvSqrt6;
  m(0, 0) = a - b;
  m(1, 1) = -a - b;
  m(2, 2) = 2.0 * b;
  m(0, 1) = m(1, 0) = c_[2] * kInvSqrt2;
  m(0, 2) = m(2, 0) = c_[3] * kInvSqrt2;
  m(1, 2) = m(2, 1) = c_[4] * kInvSqrt2;
  return m;
}

QTensor Spectrum::reconstruct() const {
  Mat3 m = Mat3::Zero();
  for (int i = 0; i < 3; ++i) m += lambdas[i] * frame[i] * frame[i].transpose();
  return QTensor::from_matrix(m);
}

const char* to_string(Region r) {
  switch (r) {
    case Region::Interior: return "interior";
    case Region::Boundary: return "boundary";
    case Region::Outside: return "outside";
  }
  return "unknown";
}

Spectrum eigen(const QTensor& Q) {
  if (!Q.is_finite()) throw InvalidInput("eigen: non-finite tensor");
  Spectrum sp;
  const double scale = Q.norm();
  if (scale == 0.0) return sp;

  // Normalized traceless A has tr(A^2) = 1, so the trigonometric roots are
  // (2/sqrt6) cos(phi + 2 pi k / 3) with cos(3 phi) = 3 sqrt6 det(A).
  const Mat3 A = (Q / scale).matrix();
  const double r = std::clamp(3.0 * std::sqrt(6.0) * A.determinant(), -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double amp = 2.0 * kInvSqrt6;
  const double hi = amp * std::cos(phi);
  const double lo = amp * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double mid = -hi - lo;

  // The root farther from the middle one is well separated; the other two are
  // resolved by a 2x2 rotation in the orthogonal complement.
  const bool low_isolated = (mid - lo) >= (hi - mid);
  const double mu = low_isolated ? lo : hi;
  const Vec3 v = isolated_eigenvector(A, mu);
  const double mu_refined = v.dot(A * v);

  const Vec3 u = any_orthogonal(v);
  const Vec3 w = v.cross(u);
  const double a = u.dot(A * u), b = u.dot(A * w), c = w.dot(A * w);
  const double theta = 0.5 * std::atan2(2.0 * b, a - c);
  const double ct = std::cos(theta), st = std::sin(theta);
  const Vec3 p1 = ct * u + st * w;
  const Vec3 p2 = -st * u + ct * w;
  const double e1 = p1.dot(A * p1), e2 = p2.dot(A * p2);

  std::array<std::pair<double, Vec3>, 3> pairs{
      std::pair{mu_refined, v}, std::pair{e1, p1}, std::pair{e2, p2}};
  std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  for (int i = 0; i < 3; ++i) {
    sp.lambdas[i] = pairs[i].first * scale;
    sp.frame[i] = pairs[i].second;
    fix_sign(sp.frame[i]);
  }
  return sp;
}

std::array<double, 3> eigenvalues(const QTensor& Q) { return eigen(Q).lambdas; }

Region classify(const QTensor& Q, double tol) {
  if (!(tol >= 0.0)) throw InvalidInput("classify: tolerance must be non-negative");
  const auto l = eigenvalues(Q);
  const double lo = -kThird, hi = 2.0 * kThird;
  if (l[0] > lo + tol && l[2] < hi - tol) return Region::Interior;
  if (l[0] >= lo - tol && l[2] <= hi + tol && std::abs(l[0] - lo) <= tol) return Region::Boundary;
  return Region::Outside;
}

double obstacle_gap(const std::array<double, 3>& lambdas) { return kSqrt6Half * (lambdas[0] + kThird); }

double obstacle_gap(const QTensor& Q) { return obstacle_gap(eigenvalues(Q)); }

double distance(const QTensor& Q) {
  if (classify(Q) == Region::Outside) throw DomainError("distance: tensor lies outside the physical set");
  return std::max(0.0, obstacle_gap(Q));
}

QTensor nearest_obstacle_point(const QTensor& Q) {
  if (classify(Q) == Region::Outside)
    throw DomainError("nearest_obstacle_point: tensor lies outside the physical set");
  const Spectrum sp = eigen(Q);
  const double shift = std::max(0.0, sp.lambdas[0] + kThird);
  const std::array<double, 3> mu{-kThird, sp.lambdas[1] + 0.5 * shift, sp.lambdas[2] + 0.5 * shift};
  Mat3 m = Mat3::Zero();
  for (int i = 0; i < 3; ++i) m += mu[i] * sp.frame[i] * sp.frame[i].transpose();
  return QTensor::from_matrix(m);
}

double brute_force_distance(const QTensor& Q, int restarts, std::uint64_t seed) {
  if (restarts < 1) throw InvalidInput("brute_force_distance: restarts must be >= 1");
  if (classify(Q) == Region::Outside)
    throw DomainError("brute_force_distance: tensor lies outside the physical set");

  const Mat3 target = Q.matrix();
  // Boundary point R diag(-1/3, t, 1/3 - t) R^T, R = exp(rotation vector), t = -1/3 + sin^2(u).
  auto objective = [&](const std::array<double, 4>& x) {
    const Vec3 rv(x[0], x[1], x[2]);
    const double angle = rv.norm();
    const Mat3 R = angle > 0 ? Eigen::AngleAxisd(angle, rv / angle).toRotationMatrix() : Mat3::Identity();
    const double s = std::sin(x[3]);
    const double t = -kThird + s * s;
    const Mat3 P = R * Vec3(-kThird, t, kThird - t).asDiagonal() * R.transpose();
    return (target - P).norm();
  };

  Rng rng(seed);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < restarts; ++k) {
    const Eigen::AngleAxisd aa(random_rotation(rng));
    const Vec3 rv = aa.angle() * aa.axis();
    std::array<double, 4> x{rv[0], rv[1], rv[2], uniform(rng, 0.0, std::numbers::pi)};
    detail::NelderMeadOptions opt;
    auto res = detail::nelder_mead(objective, x, opt);
    // A second pass from the converged point guards against premature collapse.
    opt.initial_step = 1e-3;
    res = detail::nelder_mead(objective, res.x, opt);
    best = std::min(best, res.f);
  }
  return best;
}

double norm2_slack(const QTensor& M) {
  const auto l = eigenvalues(M);
  const double spectral = std::max(std::abs(l[0]), std::abs(l[2]));
  return (2.0 / 3.0) * M.squared_norm() - spectral * spectral;
}

double div_slack(const QTensor& M, const QTensor& N, const QTensor& P) {
  const Mat3 m = M.matrix(), n = N.matrix(), p = P.matrix();
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double v = m(i, 0) + n(i, 1) + p(i, 2);
    sum += v * v;
  }
  return (5.0 / 3.0) * (M.squared_norm() + N.squared_norm() + P.squared_norm()) - sum;
}

double lipschitz_witness(const QTensor& Q1, const QTensor& Q2) {
  const double gap = (Q1 - Q2).norm();
  const double d1 = distance(Q1), d2 = distance(Q2);
  if (gap == 0.0) return 0.0;
  return std::abs(d1 - d2) / gap;
}

}  // namespace qobs
