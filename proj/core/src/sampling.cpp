#include "qobs/sampling.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

namespace qobs {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

Mat3 random_rotation(Rng& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

QTensor with_eigenvalues(const std::array<double, 3>& lambdas, const Mat3& R) {
  const Vec3 l(lambdas[0], lambdas[1], lambdas[2]);
  return QTensor::from_matrix(R * l.asDiagonal() * R.transpose());
}

QTensor random_interior(Rng& rng) {
  double u1 = uniform(rng, 0.0, 1.0), u2 = uniform(rng, 0.0, 1.0);
  if (u1 > u2) std::swap(u1, u2);
  const double t = 1.0 / 3.0;
  return with_eigenvalues({-t + u1, -t + (u2 - u1), -t + (1.0 - u2)}, random_rotation(rng));
}

QTensor random_at_distance(Rng& rng, double d) {
  const double l1 = -1.0 / 3.0 + d / kSqrt6Half;
  const double l2 = uniform(rng, l1, -0.5 * l1);
  return with_eigenvalues({l1, l2, -l1 - l2}, random_rotation(rng));
}

QTensor random_boundary(Rng& rng) { return random_at_distance(rng, 0.0); }

QTensor random_traceless(Rng& rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Coeffs c;
  for (int i = 0; i < 5; ++i) c[i] = g(rng);
  return QTensor(c);
}

QTensor random_direction(Rng& rng) {
  QTensor t = random_traceless(rng);
  while (t.norm() == 0.0) t = random_traceless(rng);
  return t / t.norm();
}

}  // namespace qobs
