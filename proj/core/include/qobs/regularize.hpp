#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "qobs/potentials.hpp"

namespace qobs {

enum class EnvelopeMethod { Tangent, Moreau };

const char* to_string(EnvelopeMethod m);
EnvelopeMethod envelope_method_from_string(const std::string& s);

struct RegularizationOptions {
  /// Quasi-Monte Carlo nodes of the mollifier (tangent method); must be even.
  int mollifier_nodes = 4096;
  std::uint64_t mollifier_seed = 0x51ed270b27ae4f1dULL;
  /// Safety factor on the Lipschitz bound of the envelope.
  double omega_safety = 1.1;
  /// Radii below this are treated as lost in rounding and mollification is skipped.
  double min_radius = 1e-12;
  /// Angular resolution of the sublevel boundary table (Ball-Majumdar tangent method).
  int boundary_angles = 720;
};

struct ValueGrad {
  double value;
  QTensor gradient;
};

/// Globally finite convex under-approximation of a singular potential.
/// Immutable after construction; evaluation is safe from many threads.
class RegularizedPotential {
 public:
  RegularizedPotential(PotentialSpec base, double epsilon, EnvelopeMethod method = EnvelopeMethod::Moreau,
                       RegularizationOptions options = {});

  const PotentialSpec& base() const { return base_; }
  double epsilon() const { return epsilon_; }
  EnvelopeMethod method() const { return method_; }
  const RegularizationOptions& options() const { return options_; }

  /// Distance at which the potential equals 1/epsilon. For Ball-Majumdar this is the
  /// smaller of the prolate and oblate uniaxial thresholds.
  double sublevel_threshold() const { return d_eps_; }
  /// Ball-Majumdar uniaxial thresholds (S_oblate < 0 < S_prolate); empty otherwise.
  std::pair<double, double> uniaxial_thresholds() const { return uniaxial_; }

  /// Lipschitz constant used for the mollification radius.
  double omega() const { return omega_; }
  /// False when the mollification radius underflowed and the bare envelope is used.
  bool mollification_active() const { return mollify_; }

  /// Supremum of the tangent planes of the base potential over its sublevel set.
  double tangent_envelope(const QTensor& Q) const;
  ValueGrad tangent_envelope_with_gradient(const QTensor& Q) const;

  double value(const QTensor& Q) const;
  QTensor gradient(const QTensor& Q) const;
  /// Value and gradient together; hint warm-starts the Ball-Majumdar Moreau solve.
  ValueGrad evaluate(const QTensor& Q, BmHint* hint = nullptr) const;

  /// True when the gradient has a kink where lambda_1 is repeated (unmollified tangent
  /// envelope of a distance-based family).
  bool kinked_at_repeated_min() const;
  /// Like evaluate, but the gradient direction spreads over the eigenvectors with
  /// soft-min weights of temperature tau. Identical to evaluate when there is no kink.
  ValueGrad evaluate_soft(const QTensor& Q, double tau) const;

 private:
  struct BoundaryPoint {
    double t0, t1;     // multiplier in the eigenvalue plane
    double log_z;
  };

  ValueGrad moreau_distance_based(const QTensor& Q) const;
  ValueGrad moreau_bm(const QTensor& Q, BmHint* hint) const;
  ValueGrad tangent_distance_based(const QTensor& Q) const;
  ValueGrad tangent_bm(const QTensor& Q) const;
  BoundaryPoint boundary_point(double angle) const;

  PotentialSpec base_;
  double epsilon_;
  EnvelopeMethod method_;
  RegularizationOptions options_;
  double d_eps_ = 0.0;
  std::pair<double, double> uniaxial_{0.0, 0.0};
  double omega_ = 0.0;
  bool mollify_ = false;
  std::vector<Coeffs> nodes_;
  std::vector<double> weights_;
  std::vector<BoundaryPoint> boundary_;
};

}  // namespace qobs
