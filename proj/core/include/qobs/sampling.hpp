#pragma once

#include <array>
#include <random>

#include "qobs/qtensor.hpp"

namespace qobs {

using Rng = std::mt19937_64;

/// Haar-distributed rotation from a uniformly random unit quaternion.
Mat3 random_rotation(Rng& rng);

/// R diag(lambdas) R^T.
QTensor with_eigenvalues(const std::array<double, 3>& lambdas, const Mat3& R);

/// Interior tensor: eigenvalues -1/3 + w with w ~ Dirichlet(1,1,1), random frame.
QTensor random_interior(Rng& rng);

/// Random tensor whose distance to the obstacle is exactly d (0 <= d <= sqrt6/6).
QTensor random_at_distance(Rng& rng, double d);

/// Uniformly random point on the obstacle boundary.
QTensor random_boundary(Rng& rng);

/// Gaussian coefficients with the given standard deviation.
QTensor random_traceless(Rng& rng, double scale = 1.0);

/// Unit-norm tensor with a uniformly random direction in coefficient space.
QTensor random_direction(Rng& rng);

double uniform(Rng& rng, double lo, double hi);
double log_uniform(Rng& rng, double lo, double hi);

}  // namespace qobs
