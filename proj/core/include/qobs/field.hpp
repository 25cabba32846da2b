#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qobs/qtensor.hpp"

namespace qobs {

/// Uniform grid on the unit cube: n interior nodes per axis, spacing 1/(n+1).
/// Node (i,j,k) with 0 <= i,j,k <= n+1 sits at (i,j,k) h; indices 0 and n+1 form
/// the Dirichlet layer.
struct Grid {
  int n = 8;

  explicit Grid(int n_ = 8);

  double h() const { return 1.0 / (n + 1); }
  int side() const { return n + 2; }
  std::size_t node_count() const { return static_cast<std::size_t>(side()) * side() * side(); }
  std::size_t interior_count() const { return static_cast<std::size_t>(n) * n * n; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * side() + j) * side() + k;
  }
  bool on_boundary(int i, int j, int k) const {
    return i == 0 || j == 0 || k == 0 || i == n + 1 || j == n + 1 || k == n + 1;
  }
  Vec3 position(int i, int j, int k) const { return Vec3(i, j, k) * h(); }
  /// Interior node whose coordinates all lie in [margin, 1 - margin].
  bool in_window(int i, int j, int k, double margin) const {
    auto inside = [&](int t) { return t >= 1 && t <= n && t * h() >= margin - 1e-12 && t * h() <= 1.0 - margin + 1e-12; };
    return inside(i) && inside(j) && inside(k);
  }
};

/// Uniaxial director pattern or constant tensor prescribed on the boundary.
struct BoundaryData {
  enum class Kind { Uniaxial, ConstantTensor };
  enum class Director { Constant, Twist };

  Kind kind = Kind::Uniaxial;
  double S = 0.5;
  Director director = Director::Constant;
  Vec3 n = Vec3::UnitZ();      ///< constant director, or twist reference direction
  Vec3 axis = Vec3::UnitZ();   ///< twist axis
  double pitch = 4.0;          ///< length of one full director turn
  QTensor tensor;              ///< ConstantTensor value

  /// Value prescribed at a point of the closed cube.
  QTensor at(const Vec3& x) const;
  void validate() const;
};

/// Minimum eigenvalue margin of every boundary value to the edges of [-1/3, 2/3].
inline constexpr double kBoundaryMargin = 0.05;

enum class InitKind { Zero, Boundary, Random };

/// Q-tensor field on a grid, boundary layer included.
class QField {
 public:
  QField() : QField(Grid(4)) {}
  explicit QField(const Grid& grid);

  /// Field with the boundary layer filled from data and the interior set by init:
  /// zero, the boundary formula extended inside, or that extension plus seeded noise.
  static QField make(const Grid& grid, const BoundaryData& data, InitKind init = InitKind::Zero,
                     std::uint64_t seed = 0, double noise = 0.02);

  const Grid& grid() const { return grid_; }
  int n() const { return grid_.n; }

  QTensor at(int i, int j, int k) const { return QTensor(values_[grid_.index(i, j, k)]); }
  Coeffs& operator()(int i, int j, int k) { return values_[grid_.index(i, j, k)]; }
  const Coeffs& operator()(int i, int j, int k) const { return values_[grid_.index(i, j, k)]; }
  void set(int i, int j, int k, const QTensor& q) { values_[grid_.index(i, j, k)] = q.coeffs(); }

  std::vector<Coeffs>& data() { return values_; }
  const std::vector<Coeffs>& data() const { return values_; }

  bool interior_finite() const;
  /// Throws InvalidInput if a boundary value lies within margin of [-1/3, 2/3].
  void check_boundary(double margin = kBoundaryMargin) const;

  /// Copies only the boundary layer from other (same grid).
  void copy_boundary_from(const QField& other);

  /// Maximum coefficient-norm difference over interior nodes.
  double max_difference(const QField& other) const;

 private:
  Grid grid_;
  std::vector<Coeffs> values_;
};

/// Field whose boundary layer holds the prescribed data and whose interior is zero.
/// Throws InvalidInput when a boundary value violates the eigenvalue margin.
QField make_boundary(const BoundaryData& data, const Grid& grid);

}  // namespace qobs
