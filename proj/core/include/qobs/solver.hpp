#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "qobs/field.hpp"
#include "qobs/regularize.hpp"

namespace qobs {

/// (L1/2)|grad Q|^2 + (L2/2)|div Q|^2 + (L3/2) Q_ij,k Q_ik,j.
struct ElasticModel {
  double L1 = 1.0;
  double L2 = 0.0;
  double L3 = 0.0;

  /// L1 = 1, L2 = A, L3 = 0.
  static ElasticModel reduced(double A) { return {1.0, A, 0.0}; }
};

struct BulkModel {
  PotentialSpec spec;
  /// Regularization parameter; 0 evaluates the singular potential itself (energy only).
  double epsilon = 1e-2;
  EnvelopeMethod method = EnvelopeMethod::Moreau;
  RegularizationOptions options;
};

struct StepRule {
  bool barzilai_borwein = true;
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 60;
};

struct SolverConfig {
  double A = 0.0;
  /// When set, replaces the reduced model built from A.
  std::optional<ElasticModel> general;
  /// No bulk term when empty.
  std::optional<BulkModel> bulk;
  int max_iters = 20000;
  /// Bound on the largest per-node gradient norm divided by the cell volume h^3.
  double grad_tol = 1e-6;
  StepRule step;
  /// Strictly decreasing; used by epsilon_continuation in place of bulk->epsilon.
  std::vector<double> epsilon_schedule;
  std::uint64_t seed = 0;
  /// 0 uses every hardware thread. Results do not depend on this value.
  int threads = 0;
  /// Level of the guard retraction applied to nodes that leave the physical set.
  double guard_level = 1e-6;

  ElasticModel elastic() const { return general ? *general : ElasticModel::reduced(A); }
  /// Throws InvalidInput on non-coercive elastic constants or bad tolerances.
  void validate() const;
};

struct EnergyBreakdown {
  double total = 0.0;
  double elastic = 0.0;
  double bulk = 0.0;
};

struct EvalStats {
  /// Nodes whose smallest eigenvalue was repeated and took the soft-min gradient path.
  std::size_t degenerate_nodes = 0;
};

/// Discrete energy on a fixed grid. Elastic terms use forward differences on the
/// (n+1)^3 cells between nodes 0..n+1, the bulk term sums over interior nodes, and
/// every cell or node carries weight h^3. Sums run in a fixed order, so results do
/// not depend on the thread count.
class Objective {
 public:
  Objective(const Grid& grid, const ElasticModel& elastic, std::optional<BulkModel> bulk, int threads = 0);

  const Grid& grid() const { return grid_; }
  const RegularizedPotential* potential() const { return reg_.get(); }
  bool uses_hints() const;

  EnergyBreakdown energy(const QField& f) const;
  /// Energy plus its exact gradient with respect to the interior coefficients (boundary
  /// entries of grad are zero). hints has one entry per node when given.
  EnergyBreakdown evaluate(const QField& f, QField* grad, std::vector<BmHint>* hints = nullptr,
                           EvalStats* stats = nullptr) const;

 private:
  double bulk_value(const QTensor& q, BmHint* hint) const;
  ValueGrad bulk_value_grad(const QTensor& q, BmHint* hint, bool* degenerate) const;

  Grid grid_;
  ElasticModel el_;
  std::optional<BulkModel> bulk_;
  std::shared_ptr<const RegularizedPotential> reg_;
  int threads_;
};

EnergyBreakdown energy(const QField& field, const SolverConfig& cfg);
QField energy_gradient(const QField& field, const SolverConfig& cfg);

struct TraceRow {
  int iter = 0;
  double total = 0.0;
  double elastic = 0.0;
  double bulk = 0.0;
  double grad_norm = 0.0;
};

struct MinimizeResult {
  QField field;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  EnergyBreakdown energy;
  std::vector<TraceRow> trace;
  /// Nodes pushed back by the guard retraction over the whole run.
  std::size_t guard_retractions = 0;
  std::size_t degenerate_nodes = 0;
};

/// Largest per-node gradient norm divided by h^3.
double residual_norm(const QField& grad);

/// Barzilai-Borwein descent with Armijo backtracking on a prepared objective.
/// Throws StagnationError when backtracking cannot find an acceptable step.
MinimizeResult minimize(const QField& field0, const SolverConfig& cfg, const Objective& objective);
/// Same with the objective built from cfg (bulk at cfg.bulk->epsilon).
MinimizeResult minimize(const QField& field0, const SolverConfig& cfg);

struct ContinuationStage {
  double epsilon = 0.0;
  MinimizeResult result;
  /// Differences to the previous stage over the interior window; 0 for the first stage.
  double l2_increment = 0.0;
  double h1_increment = 0.0;
};

/// Warm-started solves along cfg.epsilon_schedule.
std::vector<ContinuationStage> epsilon_continuation(const QField& field0, const SolverConfig& cfg,
                                                    double window_margin = 0.25);

/// Discrete L2 norm and H1 seminorm of a - b over the window [margin, 1-margin]^3.
double window_l2_difference(const QField& a, const QField& b, double margin);
double window_h1_difference(const QField& a, const QField& b, double margin);

}  // namespace qobs
