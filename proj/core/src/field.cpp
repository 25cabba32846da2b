#include "qobs/field.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qobs/errors.hpp"
#include "qobs/sampling.hpp"

namespace qobs {

Grid::Grid(int n_) : n(n_) {
  if (n < 4) throw InvalidInput("grid needs at least 4 interior nodes per axis");
}

QTensor BoundaryData::at(const Vec3& x) const {
  if (kind == Kind::ConstantTensor) return tensor;
  if (director == Director::Constant) return QTensor::uniaxial(S, n);
  const Vec3 ax = axis.normalized();
  const Vec3 e1 = (n - n.dot(ax) * ax).normalized();
  const Vec3 e2 = ax.cross(e1);
  const double theta = 2.0 * std::numbers::pi * x.dot(ax) / pitch;
  return QTensor::uniaxial(S, std::cos(theta) * e1 + std::sin(theta) * e2);
}

void BoundaryData::validate() const {
  if (kind == Kind::ConstantTensor) {
    if (!tensor.is_finite()) throw InvalidInput("boundary tensor is not finite");
    return;
  }
  if (!(S > -0.5 && S < 1.0)) throw InvalidInput("uniaxial order parameter must lie in (-1/2, 1)");
  if (!(n.allFinite() && n.norm() > 1e-12)) throw InvalidInput("director must be a nonzero vector");
  if (director == Director::Twist) {
    if (!(axis.allFinite() && axis.norm() > 1e-12)) throw InvalidInput("twist axis must be a nonzero vector");
    if ((n - n.dot(axis.normalized()) * axis.normalized()).norm() < 1e-9 * n.norm())
      throw InvalidInput("twist reference director is parallel to the axis");
    if (!(std::isfinite(pitch) && pitch != 0.0)) throw InvalidInput("twist pitch must be finite and nonzero");
  }
}

QField::QField(const Grid& grid) : grid_(grid), values_(grid.node_count(), Coeffs::Zero()) {}

QField make_boundary(const BoundaryData& data, const Grid& grid) {
  data.validate();
  QField f(grid);
  const int s = grid.side();
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j)
      for (int k = 0; k < s; ++k)
        if (grid.on_boundary(i, j, k)) f.set(i, j, k, data.at(grid.position(i, j, k)));
  f.check_boundary();
  return f;
}

QField QField::make(const Grid& grid, const BoundaryData& data, InitKind init, std::uint64_t seed, double noise) {
  QField f = make_boundary(data, grid);
  if (init == InitKind::Zero) return f;
  Rng rng(seed);
  for (int i = 1; i <= grid.n; ++i)
    for (int j = 1; j <= grid.n; ++j)
      for (int k = 1; k <= grid.n; ++k) {
        QTensor q = data.at(grid.position(i, j, k));
        if (init == InitKind::Random) q += random_traceless(rng, noise);
        f.set(i, j, k, q);
      }
  return f;
}

bool QField::interior_finite() const {
  for (int i = 1; i <= n(); ++i)
    for (int j = 1; j <= n(); ++j)
      for (int k = 1; k <= n(); ++k)
        if (!(*this)(i, j, k).allFinite()) return false;
  return true;
}

void QField::check_boundary(double margin) const {
  const int s = grid_.side();
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j)
      for (int k = 0; k < s; ++k) {
        if (!grid_.on_boundary(i, j, k)) continue;
        const QTensor q = at(i, j, k);
        if (!q.is_finite()) throw InvalidInput("boundary value is not finite");
        const auto l = eigenvalues(q);
        if (l[0] <= -1.0 / 3.0 + margin || l[2] >= 2.0 / 3.0 - margin)
          throw InvalidInput("boundary value at node (" + std::to_string(i) + "," + std::to_string(j) + "," +
                             std::to_string(k) + ") is within the obstacle margin");
      }
}

void QField::copy_boundary_from(const QField& other) {
  if (other.n() != n()) throw InvalidInput("grid mismatch");
  const int s = grid_.side();
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j)
      for (int k = 0; k < s; ++k)
        if (grid_.on_boundary(i, j, k)) (*this)(i, j, k) = other(i, j, k);
}

double QField::max_difference(const QField& other) const {
  if (other.n() != n()) throw InvalidInput("grid mismatch");
  double m = 0.0;
  for (int i = 1; i <= n(); ++i)
    for (int j = 1; j <= n(); ++j)
      for (int k = 1; k <= n(); ++k) m = std::max(m, ((*this)(i, j, k) - other(i, j, k)).norm());
  return m;
}

}  // namespace qobs
