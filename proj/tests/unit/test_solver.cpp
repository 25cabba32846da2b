#include <cmath>

#include <gtest/gtest.h>

#include "qobs/errors.hpp"
#include "qobs/sampling.hpp"
#include "qobs/solver.hpp"

using namespace qobs;

namespace {

QField random_field(const Grid& g, std::uint64_t seed, double scale = 0.05) {
  Rng rng(seed);
  QField f(g);
  for (auto& c : f.data()) c = random_traceless(rng, scale).coeffs();
  return f;
}

QField random_direction_field(const Grid& g, std::uint64_t seed) {
  Rng rng(seed);
  QField f(g);
  for (int i = 1; i <= g.n; ++i)
    for (int j = 1; j <= g.n; ++j)
      for (int k = 1; k <= g.n; ++k) f.set(i, j, k, random_traceless(rng, 1.0));
  return f;
}

QField axpy(const QField& x, double t, const QField& d) {
  QField out = x;
  for (std::size_t p = 0; p < out.data().size(); ++p) out.data()[p] += t * d.data()[p];
  return out;
}

double field_dot(const QField& a, const QField& b) {
  double s = 0.0;
  for (std::size_t p = 0; p < a.data().size(); ++p) s += a.data()[p].dot(b.data()[p]);
  return s;
}

BulkModel power_bulk(double eps, EnvelopeMethod method = EnvelopeMethod::Moreau) {
  BulkModel b;
  b.spec.family = InversePower{1.0, 1.0};
  b.epsilon = eps;
  b.method = method;
  return b;
}

BulkModel bm_bulk(double eps) {
  BulkModel b;
  b.spec.family = BallMajumdar{};
  b.epsilon = eps;
  return b;
}

BoundaryData twist(double S = 0.4) {
  BoundaryData d;
  d.S = S;
  d.director = BoundaryData::Director::Twist;
  d.n = Vec3::UnitX();
  d.axis = Vec3::UnitZ();
  d.pitch = 4.0;
  return d;
}

// Relative mismatch between the analytic and central-difference directional derivatives.
double fd_mismatch(const QField& f, const SolverConfig& cfg, std::uint64_t seed) {
  const QField dir = random_direction_field(f.grid(), seed);
  const QField g = energy_gradient(f, cfg);
  const double analytic = field_dot(g, dir);
  // Fourth-order central stencil. The Moreau envelope is only C^{1,1}, so the step stays
  // small enough that a second-derivative jump inside the stencil stays below tolerance.
  const double t = 1e-6;
  auto e = [&](double s) { return energy(axpy(f, s, dir), cfg).total; };
  const double numeric = (8 * (e(t) - e(-t)) - (e(2 * t) - e(-2 * t))) / (12 * t);
  return std::abs(analytic - numeric) / std::max(std::abs(analytic), 1e-12);
}

// Q(x) = f(x3) B0 + g(x1) B4: every column used by the divergence is constant along
// its derivative direction, so the forward-difference divergence vanishes in every cell.
QField div_free_field(const Grid& grid) {
  QField f(grid);
  for (int i = 0; i <= grid.n + 1; ++i)
    for (int j = 0; j <= grid.n + 1; ++j)
      for (int k = 0; k <= grid.n + 1; ++k) {
        const Vec3 x = grid.position(i, j, k);
        f.set(i, j, k, 0.1 * std::sin(3 * x.z()) * QTensor::basis(0) + 0.08 * std::cos(2 * x.x()) * QTensor::basis(4));
      }
  return f;
}

QField permute_axes(const QField& f) {
  // (x, y, z) -> (y, z, x) on both positions and tensors.
  Mat3 P;
  P << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  QField out(f.grid());
  const int s = f.grid().side();
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j)
      for (int k = 0; k < s; ++k) out.set(j, k, i, f.at(i, j, k).rotated(P));
  return out;
}

}  // namespace

TEST(Grid, Spacing) {
  Grid g(8);
  EXPECT_DOUBLE_EQ(g.h() * (g.n + 1), 1.0);
  EXPECT_THROW(Grid(3), InvalidInput);
}

TEST(MakeBoundary, Examples) {
  const Grid grid(6);
  BoundaryData d;
  d.S = 0.5;
  const QField f = make_boundary(d, grid);
  const auto l = eigenvalues(f.at(0, 3, 3));
  EXPECT_NEAR(l[0], -1.0 / 6, 1e-14);
  EXPECT_NEAR(l[1], -1.0 / 6, 1e-14);
  EXPECT_NEAR(l[2], 1.0 / 3, 1e-14);
  EXPECT_NEAR(distance(f.at(0, 3, 3)), std::sqrt(6.0) / 12, 1e-14);
  EXPECT_EQ(f.at(3, 3, 3), QTensor());

  d.S = 0.0;
  const QField z = make_boundary(d, grid);
  for (const auto& c : z.data()) EXPECT_EQ(c.norm(), 0.0);

  d.S = 0.999;
  EXPECT_THROW(make_boundary(d, grid), InvalidInput);
}

TEST(SolverConfig, Validation) {
  SolverConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.A = -0.7;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg.A = 0.0;
  cfg.grad_tol = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg.grad_tol = 1e-6;
  cfg.epsilon_schedule = {1e-2, 1e-1};
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg.epsilon_schedule.clear();
  cfg.general = ElasticModel{1.0, 0.0, -1.5};
  EXPECT_THROW(cfg.validate(), InvalidInput);
}

TEST(Energy, ConstantField) {
  const Grid grid(6);
  BoundaryData d;
  d.kind = BoundaryData::Kind::ConstantTensor;
  d.tensor = QTensor::uniaxial(0.3, Vec3(1, 1, 0));
  QField f = make_boundary(d, grid);
  for (int i = 1; i <= grid.n; ++i)
    for (int j = 1; j <= grid.n; ++j)
      for (int k = 1; k <= grid.n; ++k) f.set(i, j, k, d.tensor);

  SolverConfig cfg;
  cfg.A = 0.5;
  cfg.bulk = power_bulk(0.1);
  const EnergyBreakdown e = energy(f, cfg);
  EXPECT_EQ(e.elastic, 0.0);
  const RegularizedPotential reg(cfg.bulk->spec, 0.1);
  const double volume = std::pow(grid.n * grid.h(), 3);
  EXPECT_NEAR(e.bulk, reg.value(d.tensor) * volume, 1e-13);
}

TEST(Energy, LinearProfileIsExact) {
  const QTensor qa = QTensor::uniaxial(0.4, Vec3::UnitX());
  const QTensor qb = QTensor::uniaxial(0.2, Vec3::UnitZ());
  for (int n : {5, 11}) {
    const Grid grid(n);
    QField f(grid);
    for (int i = 0; i <= n + 1; ++i)
      for (int j = 0; j <= n + 1; ++j)
        for (int k = 0; k <= n + 1; ++k) {
          const double t = grid.position(i, j, k).z();
          f.set(i, j, k, (1 - t) * qa + t * qb);
        }
    SolverConfig cfg;
    EXPECT_NEAR(energy(f, cfg).elastic, 0.5 * (qb - qa).squared_norm(), 1e-13);
  }
}

TEST(Energy, RichardsonOnTwistedProfile) {
  // Director rotating a quarter turn across x3: exact elastic energy S^2 pi^2 / 4.
  const double S = 0.4;
  auto discrete = [&](int cells) {
    const Grid grid(cells - 1);
    QField f(grid);
    for (int i = 0; i <= grid.n + 1; ++i)
      for (int j = 0; j <= grid.n + 1; ++j)
        for (int k = 0; k <= grid.n + 1; ++k) {
          const double th = 0.5 * M_PI * grid.position(i, j, k).z();
          f.set(i, j, k, QTensor::uniaxial(S, Vec3(std::cos(th), std::sin(th), 0)));
        }
    return energy(f, SolverConfig{}).elastic;
  };
  const double exact = S * S * M_PI * M_PI / 4;
  const double e8 = discrete(8), e16 = discrete(16), e32 = discrete(32);
  const double err8 = std::abs(e8 - exact), err16 = std::abs(e16 - exact), err32 = std::abs(e32 - exact);
  EXPECT_NEAR(err8 / err16, 4.0, 0.05);
  EXPECT_NEAR(err16 / err32, 4.0, 0.05);
  const double extrapolated = (4 * e32 - e16) / 3;
  EXPECT_LT(std::abs(extrapolated - exact), 1e-2 * err32);
}

TEST(Energy, DivergenceFreeFieldIgnoresA) {
  const QField f = div_free_field(Grid(7));
  SolverConfig a0, a5;
  a5.A = 0.5;
  a0.bulk = a5.bulk = power_bulk(0.05);
  EXPECT_NEAR(energy(f, a0).total, energy(f, a5).total, 1e-14);
  const QField g0 = energy_gradient(f, a0), g5 = energy_gradient(f, a5);
  EXPECT_LT(g0.max_difference(g5), 1e-14);
}

TEST(Energy, ThreadCountDoesNotChangeResult) {
  const QField f = random_field(Grid(9), 3);
  SolverConfig cfg;
  cfg.A = 0.3;
  cfg.bulk = power_bulk(0.05);
  cfg.threads = 1;
  const EnergyBreakdown e1 = energy(f, cfg);
  const QField g1 = energy_gradient(f, cfg);
  cfg.threads = 4;
  const EnergyBreakdown e4 = energy(f, cfg);
  const QField g4 = energy_gradient(f, cfg);
  EXPECT_EQ(e1.total, e4.total);
  EXPECT_EQ(g1.max_difference(g4), 0.0);
}

TEST(Energy, SingularPotentialSentinel) {
  QField f = random_field(Grid(5), 4);
  SolverConfig cfg;
  cfg.bulk = power_bulk(0.0);
  EXPECT_TRUE(std::isfinite(energy(f, cfg).total));
  f.set(2, 2, 2, QTensor::diagonal(-0.5, 0.25, 0.25));
  EXPECT_EQ(energy(f, cfg).total, kInfinity);
}

TEST(Gradient, MatchesFiniteDifferences) {
  const Grid grid(8);
  const QField f = random_field(grid, 5);
  struct Case {
    const char* name;
    SolverConfig cfg;
  };
  std::vector<Case> cases;
  for (double A : {0.0, 0.5, -0.4}) {
    SolverConfig quad;
    quad.A = A;
    cases.push_back({"quadratic", quad});
    SolverConfig moreau = quad;
    moreau.bulk = power_bulk(0.02);
    cases.push_back({"power moreau", moreau});
    SolverConfig tangent = quad;
    tangent.bulk = power_bulk(0.02, EnvelopeMethod::Tangent);
    tangent.bulk->spec.family = Logarithmic{1.0, 0.0};
    cases.push_back({"log tangent", tangent});
    SolverConfig raw = quad;
    raw.bulk = power_bulk(0.0);
    cases.push_back({"raw barrier", raw});
  }
  SolverConfig general;
  general.general = ElasticModel{1.0, 0.7, 0.4};
  general.bulk = power_bulk(0.05);
  cases.push_back({"general", general});
  std::uint64_t seed = 100;
  for (const auto& c : cases) {
    for (int rep = 0; rep < 3; ++rep) {
      const double mismatch = fd_mismatch(f, c.cfg, seed++);
      EXPECT_LT(mismatch, 1e-6) << c.name << " A=" << c.cfg.A;
    }
  }
}

TEST(Gradient, BallMajumdarMatchesFiniteDifferences) {
  const QField f = random_field(Grid(5), 6);
  SolverConfig cfg;
  cfg.A = 0.5;
  cfg.bulk = bm_bulk(0.05);
  EXPECT_LT(fd_mismatch(f, cfg, 7), 1e-6);
}

TEST(Gradient, VanishesAtConstantMinimizer) {
  const Grid grid(6);
  BoundaryData d;
  d.kind = BoundaryData::Kind::ConstantTensor;
  const QField f = make_boundary(d, grid);  // Q = 0 maximizes the distance
  SolverConfig cfg;
  cfg.A = 0.5;
  cfg.bulk = power_bulk(0.05);
  EXPECT_LT(residual_norm(energy_gradient(f, cfg)), 1e-12);
}

TEST(Energy, LatticePermutationInvariance) {
  const QField f = random_field(Grid(7), 8);
  SolverConfig cfg;
  cfg.general = ElasticModel{1.0, 0.8, 0.3};
  cfg.bulk = power_bulk(0.05);
  const QField p = permute_axes(f);
  EXPECT_NEAR(energy(p, cfg).total, energy(f, cfg).total, 1e-12 * energy(f, cfg).total);
}

TEST(Minimize, ConstantMinimizerNeedsNoIterations) {
  const Grid grid(6);
  BoundaryData d;
  d.kind = BoundaryData::Kind::ConstantTensor;
  const QField f = make_boundary(d, grid);
  SolverConfig cfg;
  cfg.bulk = power_bulk(0.05);
  const MinimizeResult r = minimize(f, cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 1);
}

TEST(Minimize, TraceIsMonotoneAndConverges) {
  const Grid grid(8);
  const QField f0 = QField::make(grid, twist(), InitKind::Random, 9);
  SolverConfig cfg;
  cfg.A = 0.5;
  cfg.bulk = power_bulk(0.01);
  cfg.grad_tol = 1e-6;
  const MinimizeResult r = minimize(f0, cfg);
  ASSERT_TRUE(r.converged) << r.residual;
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i].total, r.trace[i - 1].total);
  EXPECT_EQ(r.guard_retractions, 0u);
  EXPECT_LE(r.residual, cfg.grad_tol);
}

TEST(Minimize, InitializationIndependence) {
  const Grid grid(8);
  SolverConfig cfg;
  cfg.A = 0.5;
  cfg.bulk = power_bulk(0.01);
  cfg.grad_tol = 1e-7;
  const MinimizeResult a = minimize(QField::make(grid, twist(), InitKind::Zero), cfg);
  const MinimizeResult b = minimize(QField::make(grid, twist(), InitKind::Random, 21, 0.05), cfg);
  ASSERT_TRUE(a.converged && b.converged);
  EXPECT_NEAR(a.energy.total, b.energy.total, 1e-8);
  EXPECT_LT(a.field.max_difference(b.field), 1e-5);
}

TEST(Minimize, FrameIndifferenceAtAZero) {
  const Grid grid(6);
  SolverConfig cfg;
  cfg.bulk = power_bulk(0.02);
  cfg.grad_tol = 1e-8;
  const BoundaryData d = twist();
  const Mat3 R = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  BoundaryData rd = d;
  rd.n = R * d.n;
  rd.axis = R * d.axis;
  // The twist phase depends on x . axis, so the rotated data is built directly instead.
  QField base = QField::make(grid, d, InitKind::Zero);
  QField rotated(grid);
  for (int i = 0; i < grid.side(); ++i)
    for (int j = 0; j < grid.side(); ++j)
      for (int k = 0; k < grid.side(); ++k) rotated.set(i, j, k, base.at(i, j, k).rotated(R));
  const MinimizeResult a = minimize(base, cfg);
  const MinimizeResult b = minimize(rotated, cfg);
  ASSERT_TRUE(a.converged && b.converged);
  double worst = 0.0;
  for (int i = 1; i <= grid.n; ++i)
    for (int j = 1; j <= grid.n; ++j)
      for (int k = 1; k <= grid.n; ++k)
        worst = std::max(worst, (a.field.at(i, j, k).rotated(R) - b.field.at(i, j, k)).norm());
  EXPECT_LT(worst, 1e-7);
  EXPECT_NEAR(a.energy.total, b.energy.total, 1e-10);
}

TEST(Minimize, LatticePermutationAtNonzeroA) {
  const Grid grid(6);
  SolverConfig cfg;
  cfg.A = 1.5;
  cfg.bulk = power_bulk(0.02);
  cfg.grad_tol = 1e-8;
  BoundaryData d = twist();
  d.axis = Vec3(1, 2, 0).normalized();
  const QField base = QField::make(grid, d, InitKind::Zero);
  const MinimizeResult a = minimize(base, cfg);
  const MinimizeResult b = minimize(permute_axes(base), cfg);
  ASSERT_TRUE(a.converged && b.converged);
  EXPECT_LT(permute_axes(a.field).max_difference(b.field), 1e-7);
  EXPECT_NEAR(a.energy.total, b.energy.total, 1e-10);
}

TEST(Minimize, BallMajumdarTwistStaysAwayFromObstacle) {
  const Grid grid(6);
  SolverConfig cfg;
  cfg.bulk = bm_bulk(0.05);
  cfg.grad_tol = 1e-6;
  const MinimizeResult r = minimize(QField::make(grid, twist(), InitKind::Zero), cfg);
  ASSERT_TRUE(r.converged);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i].total, r.trace[i - 1].total);
  double dmin = kMaxDistance;
  for (int i = 1; i <= grid.n; ++i)
    for (int j = 1; j <= grid.n; ++j)
      for (int k = 1; k <= grid.n; ++k) dmin = std::min(dmin, distance(r.field.at(i, j, k)));
  EXPECT_GT(dmin, 0.1);
  EXPECT_EQ(r.guard_retractions, 0u);
}

TEST(Continuation, SingleStageMatchesMinimize) {
  const Grid grid(6);
  SolverConfig cfg;
  cfg.bulk = power_bulk(0.1);
  cfg.epsilon_schedule = {0.1};
  const QField f0 = QField::make(grid, twist(), InitKind::Zero);
  const auto stages = epsilon_continuation(f0, cfg);
  ASSERT_EQ(stages.size(), 1u);
  const MinimizeResult direct = minimize(f0, cfg);
  EXPECT_EQ(stages[0].result.field.max_difference(direct.field), 0.0);
  EXPECT_EQ(stages[0].result.energy.total, direct.energy.total);
}

TEST(Continuation, IncrementsDecrease) {
  const Grid grid(8);
  SolverConfig cfg;
  cfg.A = 0.5;
  cfg.bulk = power_bulk(0.1);
  cfg.bulk->spec.family = InversePower{1.0, 0.05};
  cfg.epsilon_schedule = {1e-1, 1e-2, 1e-3, 1e-4};
  cfg.grad_tol = 1e-7;
  const auto stages = epsilon_continuation(QField::make(grid, twist(0.6), InitKind::Zero), cfg);
  ASSERT_EQ(stages.size(), 4u);
  for (const auto& s : stages) EXPECT_TRUE(s.result.converged);
  for (std::size_t i = 2; i < stages.size(); ++i) {
    EXPECT_LT(stages[i].l2_increment, stages[i - 1].l2_increment);
    EXPECT_LT(stages[i].h1_increment, stages[i - 1].h1_increment);
  }
}

TEST(Continuation, RejectsBadSchedules) {
  SolverConfig cfg;
  const QField f = QField::make(Grid(4), BoundaryData{}, InitKind::Zero);
  cfg.epsilon_schedule = {0.1};
  EXPECT_THROW(epsilon_continuation(f, cfg), InvalidInput);
  cfg.bulk = power_bulk(0.1);
  cfg.epsilon_schedule = {};
  EXPECT_THROW(epsilon_continuation(f, cfg), InvalidInput);
}
