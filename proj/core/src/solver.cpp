#include "qobs/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "parallel.hpp"
#include "qobs/errors.hpp"
#include "qobs/exponents.hpp"

namespace qobs {

namespace {

using Mat35 = Eigen::Matrix<double, 3, 5>;
using detail::CompensatedSum;

// W[j](i, m) = (B_m)_ij, so that sum_j W[j] D_j is the divergence of the tensor whose
// k-th partial derivative has coefficients D_k.
const std::array<Mat35, 3>& column_maps() {
  static const std::array<Mat35, 3> maps = [] {
    std::array<Mat35, 3> w;
    for (int m = 0; m < 5; ++m) {
      const Mat3 b = QTensor::basis(m).matrix();
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) w[j](i, m) = b(i, j);
    }
    return w;
  }();
  return maps;
}

struct CellTerms {
  double density;
  std::array<Coeffs, 3> flux;  // d density / d D_k
};

CellTerms cell_terms(const ElasticModel& el, const std::array<Coeffs, 3>& D, bool want_flux) {
  const auto& W = column_maps();
  CellTerms out;
  double dens = 0.0;
  for (int k = 0; k < 3; ++k) dens += D[k].squaredNorm();
  dens *= 0.5 * el.L1;
  if (want_flux)
    for (int k = 0; k < 3; ++k) out.flux[k] = el.L1 * D[k];

  if (el.L2 != 0.0 || el.L3 != 0.0) {
    std::array<std::array<Vec3, 3>, 3> u;  // u[j][k] = W_j D_k
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) u[j][k] = W[j] * D[k];
    if (el.L2 != 0.0) {
      const Vec3 v = u[0][0] + u[1][1] + u[2][2];
      dens += 0.5 * el.L2 * v.squaredNorm();
      if (want_flux)
        for (int k = 0; k < 3; ++k) out.flux[k] += el.L2 * (W[k].transpose() * v);
    }
    if (el.L3 != 0.0) {
      double t = 0.0;
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) t += u[j][k].dot(u[k][j]);
      dens += 0.5 * el.L3 * t;
      if (want_flux)
        for (int k = 0; k < 3; ++k) {
          Coeffs acc = Coeffs::Zero();
          for (int j = 0; j < 3; ++j) acc += W[j].transpose() * u[k][j];
          out.flux[k] += el.L3 * acc;
        }
    }
  }
  out.density = dens;
  return out;
}

bool repeated_min(const QTensor& q) {
  const auto l = eigenvalues(q);
  return l[1] - l[0] < kDegenerateGap;
}

constexpr double kSoftTau = 1e-6;

}  // namespace

void SolverConfig::validate() const {
  if (!std::isfinite(A)) throw InvalidInput("solver: A must be finite");
  const ElasticModel el = elastic();
  if (!std::isfinite(el.L1) || !std::isfinite(el.L2) || !std::isfinite(el.L3))
    throw InvalidInput("solver: elastic constants must be finite");
  if (!coercivity_check(el.L1, el.L2, el.L3).coercive) {
    std::ostringstream os;
    os << "solver: elastic constants (" << el.L1 << ", " << el.L2 << ", " << el.L3 << ") are not coercive";
    throw InvalidInput(os.str());
  }
  if (!(grad_tol > 0.0)) throw InvalidInput("solver: grad_tol must be > 0");
  if (max_iters < 0) throw InvalidInput("solver: max_iters must be >= 0");
  if (!(step.armijo > 0.0 && step.armijo < 1.0)) throw InvalidInput("solver: Armijo slope must lie in (0, 1)");
  if (!(step.shrink > 0.0 && step.shrink < 1.0)) throw InvalidInput("solver: shrink factor must lie in (0, 1)");
  if (step.max_backtracks < 1) throw InvalidInput("solver: max_backtracks must be >= 1");
  if (!(guard_level > 0.0 && guard_level < kMaxDistance)) throw InvalidInput("solver: guard_level must lie in (0, sqrt6/6)");
  if (threads < 0) throw InvalidInput("solver: threads must be >= 0");
  if (bulk) {
    bulk->spec.validate();
    if (!(bulk->epsilon >= 0.0) || !std::isfinite(bulk->epsilon))
      throw InvalidInput("solver: epsilon must be finite and >= 0");
  }
  for (std::size_t i = 0; i < epsilon_schedule.size(); ++i) {
    if (!(epsilon_schedule[i] > 0.0) || !std::isfinite(epsilon_schedule[i]))
      throw InvalidInput("solver: epsilon schedule entries must be finite and > 0");
    if (i > 0 && !(epsilon_schedule[i] < epsilon_schedule[i - 1]))
      throw InvalidInput("solver: epsilon schedule must be strictly decreasing");
  }
}

// ---------------------------------------------------------------------------
// Objective
// ---------------------------------------------------------------------------

Objective::Objective(const Grid& grid, const ElasticModel& elastic, std::optional<BulkModel> bulk, int threads)
    : grid_(grid), el_(elastic), bulk_(std::move(bulk)), threads_(detail::resolve_threads(threads)) {
  if (bulk_ && bulk_->epsilon > 0.0)
    reg_ = std::make_shared<const RegularizedPotential>(bulk_->spec, bulk_->epsilon, bulk_->method, bulk_->options);
}

bool Objective::uses_hints() const {
  return reg_ && reg_->method() == EnvelopeMethod::Moreau && !reg_->base().is_distance_based();
}

double Objective::bulk_value(const QTensor& q, BmHint* hint) const {
  if (reg_) {
    if (hint && uses_hints()) return reg_->evaluate(q, hint).value;
    return reg_->value(q);
  }
  return qobs::value(bulk_->spec, q);
}

ValueGrad Objective::bulk_value_grad(const QTensor& q, BmHint* hint, bool* degenerate) const {
  *degenerate = false;
  if (reg_) {
    if (reg_->kinked_at_repeated_min() && repeated_min(q)) {
      *degenerate = true;
      return reg_->evaluate_soft(q, kSoftTau);
    }
    return reg_->evaluate(q, uses_hints() ? hint : nullptr);
  }
  const PotentialSpec& spec = bulk_->spec;
  const double v = qobs::value(spec, q);
  if (!std::isfinite(v)) return {v, QTensor()};
  if (spec.is_distance_based() && spec.smoothing_tau == 0.0 && repeated_min(q)) {
    *degenerate = true;
    PotentialSpec soft = spec;
    soft.smoothing_tau = kSoftTau;
    return {v, qobs::gradient(soft, q)};
  }
  return {v, qobs::gradient(spec, q)};
}

EnergyBreakdown Objective::energy(const QField& f) const { return evaluate(f, nullptr); }

EnergyBreakdown Objective::evaluate(const QField& f, QField* grad, std::vector<BmHint>* hints,
                                    EvalStats* stats) const {
  if (f.n() != grid_.n) throw InvalidInput("energy: field grid does not match the objective grid");
  if (hints && hints->size() != grid_.node_count()) hints->assign(grid_.node_count(), BmHint{});
  const int n = grid_.n;
  const int cells = n + 1;
  const double h = grid_.h();
  const double h3 = h * h * h;
  const bool want = grad != nullptr;

  // Elastic part: one slab of cells per first index.
  std::vector<double> slab_elastic(cells, 0.0);
  std::vector<std::array<Coeffs, 3>> flux;
  if (want) flux.resize(static_cast<std::size_t>(cells) * cells * cells);
  auto cell_index = [cells](int i, int j, int k) {
    return (static_cast<std::size_t>(i) * cells + j) * cells + k;
  };

  detail::parallel_for(0, cells, threads_, [&](int i) {
    CompensatedSum acc;
    for (int j = 0; j < cells; ++j)
      for (int k = 0; k < cells; ++k) {
        const Coeffs& q = f(i, j, k);
        const std::array<Coeffs, 3> D{(f(i + 1, j, k) - q) / h, (f(i, j + 1, k) - q) / h, (f(i, j, k + 1) - q) / h};
        CellTerms t = cell_terms(el_, D, want);
        acc.add(t.density);
        if (want) {
          auto& out = flux[cell_index(i, j, k)];
          for (int a = 0; a < 3; ++a) out[a] = h3 * t.flux[a];
        }
      }
    slab_elastic[i] = h3 * acc.value();
  });

  // Bulk part and gradient assembly over interior slabs.
  std::vector<double> slab_bulk(n, 0.0);
  std::vector<std::size_t> slab_degenerate(n, 0);
  if (want) *grad = QField(grid_);

  detail::parallel_for(1, n + 1, threads_, [&](int i) {
    CompensatedSum acc;
    std::size_t degenerate = 0;
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k) {
        const QTensor q = f.at(i, j, k);
        BmHint* hint = hints ? &(*hints)[grid_.index(i, j, k)] : nullptr;
        Coeffs g = Coeffs::Zero();
        if (bulk_) {
          if (want) {
            bool deg = false;
            const ValueGrad vg = bulk_value_grad(q, hint, &deg);
            acc.add(vg.value);
            g = h3 * vg.gradient.coeffs();
            degenerate += deg ? 1 : 0;
          } else {
            acc.add(bulk_value(q, hint));
          }
        }
        if (want) {
          const auto& here = flux[cell_index(i, j, k)];
          g += (flux[cell_index(i - 1, j, k)][0] - here[0]) / h;
          g += (flux[cell_index(i, j - 1, k)][1] - here[1]) / h;
          g += (flux[cell_index(i, j, k - 1)][2] - here[2]) / h;
          (*grad)(i, j, k) = g;
        }
      }
    slab_bulk[i - 1] = h3 * acc.value();
    slab_degenerate[i - 1] = degenerate;
  });

  CompensatedSum el, bk;
  for (double v : slab_elastic) el.add(v);
  for (double v : slab_bulk) bk.add(v);
  EnergyBreakdown out;
  out.elastic = el.value();
  out.bulk = bk.value();
  out.total = out.elastic + out.bulk;
  if (stats) {
    stats->degenerate_nodes = 0;
    for (auto d : slab_degenerate) stats->degenerate_nodes += d;
  }
  return out;
}

namespace {

Objective make_objective(const SolverConfig& cfg, const Grid& grid, std::optional<double> epsilon = std::nullopt) {
  std::optional<BulkModel> bulk = cfg.bulk;
  if (bulk && epsilon) bulk->epsilon = *epsilon;
  return Objective(grid, cfg.elastic(), std::move(bulk), cfg.threads);
}

}  // namespace

EnergyBreakdown energy(const QField& field, const SolverConfig& cfg) {
  cfg.validate();
  return make_objective(cfg, field.grid()).energy(field);
}

QField energy_gradient(const QField& field, const SolverConfig& cfg) {
  cfg.validate();
  if (!field.interior_finite()) throw InvalidInput("energy_gradient: field has non-finite values");
  QField g(field.grid());
  make_objective(cfg, field.grid()).evaluate(field, &g);
  return g;
}

double residual_norm(const QField& grad) {
  const Grid& g = grad.grid();
  const double h = g.h();
  double worst = 0.0;
  for (int i = 1; i <= g.n; ++i)
    for (int j = 1; j <= g.n; ++j)
      for (int k = 1; k <= g.n; ++k) worst = std::max(worst, grad(i, j, k).norm());
  return worst / (h * h * h);
}

// ---------------------------------------------------------------------------
// Minimizer
// ---------------------------------------------------------------------------

namespace {

double interior_dot(const QField& a, const QField& b) {
  const int n = a.n();
  CompensatedSum acc;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k) acc.add(a(i, j, k).dot(b(i, j, k)));
  return acc.value();
}

// Interior nodes outside the physical set are pulled back to distance `level` along
// the ray to the origin. Returns the number of nodes moved.
std::size_t guard_retract(QField& f, double level) {
  const int n = f.n();
  std::size_t moved = 0;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k) {
        const QTensor q = f.at(i, j, k);
        const double gap = obstacle_gap(q);
        if (gap >= 0.0) continue;
        const double eta = (1.0 - std::sqrt(6.0) * level) / (1.0 - std::sqrt(6.0) * gap);
        f.set(i, j, k, eta * q);
        ++moved;
      }
  return moved;
}

}  // namespace

MinimizeResult minimize(const QField& field0, const SolverConfig& cfg, const Objective& objective) {
  cfg.validate();
  if (field0.n() != objective.grid().n) throw InvalidInput("minimize: field grid does not match the objective");
  if (!field0.interior_finite()) throw InvalidInput("minimize: initial field has non-finite values");

  const Grid& grid = objective.grid();
  const int n = grid.n;
  const double h = grid.h();
  const ElasticModel el = cfg.elastic();

  MinimizeResult res;
  res.field = field0;
  QField& x = res.field;
  std::vector<BmHint> hints;
  std::vector<BmHint>* hint_ptr = objective.uses_hints() ? &hints : nullptr;

  QField g(grid);
  EvalStats stats;
  EnergyBreakdown E = objective.evaluate(x, &g, hint_ptr, &stats);
  if (!std::isfinite(E.total)) throw InvalidInput("minimize: initial field has infinite energy");
  res.degenerate_nodes += stats.degenerate_nodes;
  double r = residual_norm(g);
  res.trace.push_back({0, E.total, E.elastic, E.bulk, r});

  // Reference step: inverse of a bound on the largest Hessian eigenvalue.
  double curvature = 12.0 * h * (std::abs(el.L1) + 3.0 * std::abs(el.L2) + 3.0 * std::abs(el.L3));
  if (const RegularizedPotential* p = objective.potential()) curvature += h * h * h / p->epsilon();
  const double alpha0 = 1.0 / curvature;
  double alpha = alpha0;

  QField trial(grid), g_trial(grid);
  std::vector<BmHint> trial_hints;
  int iter = 0;
  while (true) {
    if (r <= cfg.grad_tol) {
      res.converged = true;
      break;
    }
    if (iter >= cfg.max_iters) break;
    ++iter;

    const double gg = interior_dot(g, g);
    const double rounding = 1e-14 * std::max(1.0, std::abs(E.total));
    bool accepted = false;
    EnergyBreakdown Et;
    EvalStats st;
    for (int bt = 0; bt < cfg.step.max_backtracks; ++bt) {
      trial = x;
      for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
          for (int k = 1; k <= n; ++k) trial(i, j, k) -= alpha * g(i, j, k);
      if (hint_ptr) trial_hints = hints;
      Et = objective.evaluate(trial, &g_trial, hint_ptr ? &trial_hints : nullptr, &st);
      const double predicted = cfg.step.armijo * alpha * gg;
      if (std::isfinite(Et.total) && Et.total <= E.total &&
          (Et.total <= E.total - predicted || predicted <= rounding)) {
        accepted = true;
        break;
      }
      alpha *= cfg.step.shrink;
    }
    if (!accepted) {
      std::ostringstream os;
      os << "minimize: line search failed at iteration " << iter << " (residual " << r << ", energy " << E.total
         << ", last step " << alpha / cfg.step.shrink << ")";
      throw StagnationError(os.str(), r, iter);
    }

    if (const std::size_t moved = guard_retract(trial, cfg.guard_level)) {
      res.guard_retractions += moved;
      Et = objective.evaluate(trial, &g_trial, hint_ptr ? &trial_hints : nullptr, &st);
    }
    res.degenerate_nodes += st.degenerate_nodes;

    // Barzilai-Borwein (long) step from the accepted pair.
    double ss = 0.0, sy = 0.0;
    {
      CompensatedSum a, b;
      for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
          for (int k = 1; k <= n; ++k) {
            const Coeffs s = trial(i, j, k) - x(i, j, k);
            const Coeffs y = g_trial(i, j, k) - g(i, j, k);
            a.add(s.squaredNorm());
            b.add(s.dot(y));
          }
      ss = a.value();
      sy = b.value();
    }
    if (cfg.step.barzilai_borwein)
      alpha = (sy > 0.0 && ss > 0.0) ? std::clamp(ss / sy, 1e-6 * alpha0, 1e6 * alpha0) : alpha0;
    else
      alpha = std::min(alpha / cfg.step.shrink, alpha0);

    std::swap(x, trial);
    std::swap(g, g_trial);
    if (hint_ptr) std::swap(hints, trial_hints);
    E = Et;
    r = residual_norm(g);
    res.trace.push_back({iter, E.total, E.elastic, E.bulk, r});
  }
  res.iterations = iter;
  res.residual = r;
  res.energy = E;
  return res;
}

MinimizeResult minimize(const QField& field0, const SolverConfig& cfg) {
  cfg.validate();
  return minimize(field0, cfg, make_objective(cfg, field0.grid()));
}

// ---------------------------------------------------------------------------
// Continuation
// ---------------------------------------------------------------------------

namespace {

void check_same_grid(const QField& a, const QField& b) {
  if (a.n() != b.n()) throw InvalidInput("field difference: grids differ");
}

}  // namespace

double window_l2_difference(const QField& a, const QField& b, double margin) {
  check_same_grid(a, b);
  const Grid& g = a.grid();
  const double h = g.h();
  CompensatedSum acc;
  for (int i = 1; i <= g.n; ++i)
    for (int j = 1; j <= g.n; ++j)
      for (int k = 1; k <= g.n; ++k)
        if (g.in_window(i, j, k, margin)) acc.add((a(i, j, k) - b(i, j, k)).squaredNorm());
  return std::sqrt(h * h * h * acc.value());
}

double window_h1_difference(const QField& a, const QField& b, double margin) {
  check_same_grid(a, b);
  const Grid& g = a.grid();
  const double h = g.h();
  CompensatedSum acc;
  for (int i = 1; i <= g.n; ++i)
    for (int j = 1; j <= g.n; ++j)
      for (int k = 1; k <= g.n; ++k) {
        if (!g.in_window(i, j, k, margin)) continue;
        const Coeffs here = a(i, j, k) - b(i, j, k);
        const int next[3][3] = {{i + 1, j, k}, {i, j + 1, k}, {i, j, k + 1}};
        for (const auto& p : next) {
          if (!g.in_window(p[0], p[1], p[2], margin)) continue;
          const Coeffs there = a(p[0], p[1], p[2]) - b(p[0], p[1], p[2]);
          acc.add((there - here).squaredNorm() / (h * h));
        }
      }
  return std::sqrt(h * h * h * acc.value());
}

std::vector<ContinuationStage> epsilon_continuation(const QField& field0, const SolverConfig& cfg,
                                                    double window_margin) {
  cfg.validate();
  if (!cfg.bulk) throw InvalidInput("epsilon_continuation: configuration has no bulk potential");
  if (cfg.epsilon_schedule.empty()) throw InvalidInput("epsilon_continuation: empty epsilon schedule");
  if (!(window_margin >= 0.0 && window_margin < 0.5)) throw InvalidInput("epsilon_continuation: window margin must lie in [0, 1/2)");

  std::vector<ContinuationStage> stages;
  QField current = field0;
  for (double eps : cfg.epsilon_schedule) {
    SolverConfig stage_cfg = cfg;
    stage_cfg.bulk->epsilon = eps;
    ContinuationStage st;
    st.epsilon = eps;
    st.result = minimize(current, stage_cfg, make_objective(stage_cfg, field0.grid()));
    if (!stages.empty()) {
      st.l2_increment = window_l2_difference(st.result.field, current, window_margin);
      st.h1_increment = window_h1_difference(st.result.field, current, window_margin);
    }
    current = st.result.field;
    stages.push_back(std::move(st));
  }
  return stages;
}

}  // namespace qobs
