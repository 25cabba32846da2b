#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qobs/field.hpp"
#include "qobs/potentials.hpp"

namespace qobs {

inline constexpr double kDefaultWindowMargin = 0.25;

/// Obstacle distance of a node value; 0 for values that left the physical set.
double node_distance(const QTensor& Q);

/// h^3 times the number of window nodes with distance <= a.
double level_set_measure(const QField& field, double a, double margin = kDefaultWindowMargin);

/// h^3 times the number of window nodes.
double window_volume(const Grid& grid, double margin = kDefaultWindowMargin);

/// (sqrt6/6) 2^-j for j = 2..10.
std::vector<double> default_levels();

/// Optional theory input for scaling_fit: the measured exponent is compared to s q/2
/// with q at its supremum 6 p(A).
struct ScalingTheory {
  double A = 0.0;
  PotentialSpec spec;
};

struct ScalingReport {
  std::vector<double> levels;    ///< descending
  std::vector<double> measures;  ///< |{d <= a} within the window| per level
  double margin = kDefaultWindowMargin;
  std::size_t fitted_levels = 0;
  /// Least-squares slope of log measure against log a; NaN with fewer than 3 positive levels.
  double beta = 0.0;
  /// Root-mean-square residual of the fit in log space.
  double residual = 0.0;
  double log_constant = 0.0;
  bool empty_at_all_levels = false;
  /// s q_max / 2 for inverse-power potentials (infinite at A = 0).
  std::optional<double> target;
  std::optional<bool> meets_target;
};

/// pre: at least 3 levels, all positive.
ScalingReport scaling_fit(const QField& field, std::vector<double> levels, double margin = kDefaultWindowMargin,
                          const std::optional<ScalingTheory>& theory = std::nullopt);

struct DistanceWitness {
  double value = kMaxDistance;
  int i = -1, j = -1, k = -1;
};

/// Smallest obstacle distance over window nodes, with the first node attaining it.
DistanceWitness min_distance(const QField& field, double margin = kDefaultWindowMargin);

/// (1/r) h^3 sum of |grad Q|^2 over cells whose centers lie in the ball of radius r
/// around center, clipped to the cube (a half ball when the center is on a face).
double dirichlet_density(const QField& field, const Vec3& center, double r);

/// (h^3 sum |grad Q|^q)^(1/q) over cells whose centers lie in the window.
double grad_lq_norm(const QField& field, double q, double margin = kDefaultWindowMargin);

/// Largest |Q(x) - Q(y)| / |x - y|^alpha over seeded random pairs of distinct interior nodes.
double holder_seminorm(const QField& field, double alpha, std::size_t pairs, std::uint64_t seed);

/// Field with d(Q(x)) = min(|x - center|, sqrt6/6): oblate uniaxial about e3 with
/// smallest eigenvalue -1/3 + 2d/sqrt6. Fills the boundary layer as well.
QField synthetic_radial_field(const Grid& grid, const Vec3& center);

}  // namespace qobs
