#include <cmath>

#include <gtest/gtest.h>

#include "qobs/errors.hpp"
#include "qobs/retract.hpp"
#include "qobs/sampling.hpp"

using namespace qobs;

namespace {

constexpr double kSqrt6 = 2.449489742783178;

QTensor sample(Rng& rng, int i) {
  return i % 2 ? random_interior(rng) : random_at_distance(rng, log_uniform(rng, 1e-8, kMaxDistance));
}

}  // namespace

TEST(EtaA, WorkedValues) {
  EXPECT_EQ(eta_a(0.1, 0.1), 1.0);
  EXPECT_EQ(eta_a(0.3, 0.1), 1.0);
  EXPECT_NEAR(eta_a(0.05, 0.1), (1 - 0.1 * kSqrt6) / (1 - 0.05 * kSqrt6), 1e-15);
  EXPECT_NEAR(eta_a(0.05, 0.1), 0.860432, 1e-6);
  EXPECT_NEAR(eta_a(0.0, 0.1), 1 - 0.1 * kSqrt6, 1e-15);
  EXPECT_THROW(eta_a(0.1, 0.5), DomainError);
}

TEST(EtaA, MonotoneAndBounded) {
  for (double a : {1e-3, 0.05, 0.3}) {
    double last = 0.0;
    for (double x = 0; x <= kMaxDistance; x += 1e-3) {
      const double v = eta_a(x, a);
      EXPECT_GT(v, 0.0);
      EXPECT_LE(v, 1.0);
      EXPECT_GE(v, last);
      last = v;
    }
  }
}

TEST(HA, DistanceIdentity) {
  Rng rng(11);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const QTensor q = sample(rng, i);
    const double a = uniform(rng, 1e-4, 0.4);
    worst = std::max(worst, std::abs(distance(h_a(q, a)) - std::max(distance(q), a)));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(HA, Examples) {
  Rng rng(12);
  const QTensor far = random_at_distance(rng, 0.2);
  EXPECT_EQ(h_a(far, 0.1), far);
  const QTensor near = random_at_distance(rng, 0.05);
  EXPECT_NEAR(distance(h_a(near, 0.1)), 0.1, 1e-14);
  EXPECT_EQ(h_a(QTensor(), 0.1), QTensor());
  EXPECT_THROW(h_a(QTensor::diagonal(-0.5, 0.25, 0.25), 0.1), DomainError);
  // boundary tensors go to distance exactly a
  EXPECT_NEAR(distance(h_a(random_boundary(rng), 0.02)), 0.02, 1e-14);
}

TEST(PowerJoin, EdgesAndLimits) {
  for (double s : {0.07, 0.5, 1.0, 2.0}) {
    for (double a : {1e-3, 1e-2, 0.05}) {
      const PowerRetraction r(a, s, 1.0, 1.0);
      SCOPED_TRACE(testing::Message() << "s=" << s << " a=" << a);
      EXPECT_EQ(r.eta(r.lower_edge()), 1.0);
      EXPECT_EQ(r.derivative(r.lower_edge()), 0.0);
      // above the band the value is the outer branch exactly
      const double y = r.upper_edge();
      const double outer = (1 - kSqrt6 * a) / (1 - kSqrt6 * std::pow(1.0 / y, 1 / s));
      EXPECT_NEAR(r.eta(y), outer, 1e-15);
      EXPECT_NEAR(r.eta(2 * y), (1 - kSqrt6 * a) / (1 - kSqrt6 * std::pow(0.5 / y, 1 / s)), 1e-15);
      // C^1 match at the upper edge
      const double dl = r.derivative(y * (1 - 1e-12)), dr = r.derivative(y * (1 + 1e-12));
      EXPECT_NEAR(dl, dr, 1e-10 * std::abs(dr) + 1e-300);
      EXPECT_NEAR(r.eta(1e300), 1 - kSqrt6 * a, 1e-12);
      EXPECT_NEAR(r.eta(INFINITY), 1 - kSqrt6 * a, 1e-15);
      EXPECT_LE(r.envelope_ratio(), 1.0);
    }
  }
}

TEST(PowerJoin, ShapeProperties) {
  for (double s : {0.07, 0.5, 1.0, 2.0}) {
    for (double a : {1e-3, 0.05}) {
      const PowerRetraction r(a, s, 2.0, 2.0);
      const double lo = std::log(r.lower_edge() / 4), hi = std::log(r.upper_edge() * 4);
      double last = 1.0;
      for (int i = 0; i <= 20000; ++i) {
        const double y = std::exp(lo + (hi - lo) * i / 20000);
        const double v = r.eta(y), d = r.derivative(y);
        EXPECT_LE(v, last + 1e-15);
        EXPECT_GT(v, 0.0);
        EXPECT_LE(v, r.cap(y) + 1e-14);
        EXPECT_LE(1 - v, r.closeness_constant() * a + 1e-15);
        EXPECT_LE(std::abs(d), r.envelope(y) * (1 + 1e-12));
        last = v;
      }
      // derivative continuity across both joins
      for (double y : {r.knee_value(), r.upper_edge()}) {
        const double dl = r.derivative(y * (1 - 1e-10)), dr = r.derivative(y * (1 + 1e-10));
        EXPECT_LE(std::abs(dl - dr), 1e-6 * std::max(std::abs(dl), r.envelope(y))) << s << " " << a;
      }
    }
  }
}

TEST(PowerJoin, FiniteDifferenceDerivative) {
  const PowerRetraction r(0.02, 1.0, 1.0, 1.0);
  for (double f = 0.51; f < 2.0; f += 0.05) {
    const double y = f * 1.0 / 0.02;
    const double h = 1e-6 * y;
    EXPECT_NEAR((r.eta(y + h) - r.eta(y - h)) / (2 * h), r.derivative(y), 1e-6 * std::abs(r.derivative(y)) + 1e-12);
  }
}

TEST(PowerJoin, RejectsLargeLevel) {
  EXPECT_THROW(PowerRetraction(0.5, 1.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(PowerRetraction(0.0, 1.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(PowerRetraction(0.01, 1.0, 2.0, 1.0), DomainError);
}

TEST(TildeH, IdentityFarAndPushbackNear) {
  Rng rng(13);
  for (const auto& fam : {InversePower{1, 1}, InversePower{2, 0.5}, InversePower{0.3, 3}}) {
    const PotentialSpec spec{fam, 0.0};
    for (double a : {1e-3, 0.01, 0.04}) {
      const PowerRetraction r = PowerRetraction::from_family(a, fam);
      const double L = r.lambda_s();
      EXPECT_NEAR(L, std::pow(2.0, 1 / fam.s), 1e-12);
      if (L * a * 1.1 < kMaxDistance) {
        const QTensor q = random_at_distance(rng, L * a * 1.1);
        EXPECT_EQ(tilde_h_a(q, r, spec), q);
      }
      EXPECT_GE(distance(tilde_h_a(random_at_distance(rng, a / 2), r, spec)), a - 1e-12);
      for (int i = 0; i < 2000; ++i) {
        const QTensor q = sample(rng, i);
        const QTensor out = tilde_h_a(q, r, spec);
        EXPECT_GE(distance(out), a - 1e-12);
        if (distance(q) >= L * a) EXPECT_EQ(out, q);
      }
      EXPECT_EQ(tilde_h_a(QTensor(), r, spec), QTensor());
      EXPECT_GE(distance(tilde_h_a(random_boundary(rng), r, spec)), a - 1e-12);
    }
  }
}

TEST(LogJoin, BranchesAndEnvelope) {
  for (double a : {1e-4, 1e-3, 0.01, 0.03}) {
    for (double m0 : {0.0, 0.5, 2.0}) {
      const LogRetraction r(a, 1.0, m0, std::exp(1.0));
      EXPECT_EQ(r.eta(r.lower_edge() - 1e-3), 1.0);
      EXPECT_EQ(r.eta(r.upper_edge()), r.far_value());
      EXPECT_NEAR(r.far_value(), (1 - kSqrt6 * std::exp(1.0) * a) / (1 - kSqrt6 * a), 1e-15);
      EXPECT_LE(r.envelope_ratio(), 1.0);
      double last = 1.0;
      for (int i = 0; i <= 5000; ++i) {
        const double y = r.lower_edge() + (r.upper_edge() - r.lower_edge()) * i / 5000;
        const double v = r.eta(y);
        EXPECT_LE(v, last);
        EXPECT_LE(std::abs(r.derivative(y)), r.envelope(y) * (1 + 1e-12));
        EXPECT_LE(1 - v, r.closeness_constant() * a + 1e-15);
        last = v;
      }
      // C^1 at both edges: derivative vanishes there
      EXPECT_NEAR(r.derivative(r.lower_edge() + 1e-9), 0.0, 1e-6);
      EXPECT_NEAR(r.derivative(r.lower_edge() + r.join_fraction() * std::exp(m0) - 1e-9), 0.0, 1e-6);
    }
  }
}

TEST(LogJoin, IdentityRegionGrowsWhenLevelShrinks) {
  double last = -INFINITY;
  for (double a = 0.03; a > 1e-6; a /= 2) {
    const LogRetraction r(a, 0.7, 0.3, std::exp(1.0));
    EXPECT_GT(r.lower_edge(), last);
    last = r.lower_edge();
  }
}

TEST(HatH, DropsPotentialByK0) {
  Rng rng(14);
  for (const auto& fam : {Logarithmic{1, 0}, Logarithmic{0.5, 1.0}, Logarithmic{2, -1}}) {
    const PotentialSpec spec{fam, 0.0};
    for (double a : {1e-3, 0.01, 0.05}) {
      const LogRetraction r = LogRetraction::from_family(a, fam);
      double worst = INFINITY;
      for (int i = 0; i < 2000; ++i) {
        const QTensor q = random_at_distance(rng, i == 0 ? a : a * uniform(rng, 1e-6, 1.0));
        worst = std::min(worst, value(spec, q) - value(spec, hat_h_a(q, r, spec)));
      }
      EXPECT_GE(worst, fam.k - 1e-9);
      // equality at distance exactly a
      const QTensor q = random_at_distance(rng, a);
      EXPECT_NEAR(value(spec, q) - value(spec, hat_h_a(q, r, spec)), fam.k, 1e-9);
      // identity far away
      const QTensor far = random_at_distance(rng, 0.39);
      if (value(spec, far) <= r.lower_edge()) EXPECT_EQ(hat_h_a(far, r, spec), far);
    }
  }
}

TEST(Comparison, CutoffShape) {
  EXPECT_EQ(comparison_cutoff(Vec3(0.5, 0.5, 0.5), 0.3, 0.1), 1.0);
  EXPECT_EQ(comparison_cutoff(Vec3(0.05, 0.5, 0.5), 0.3, 0.1), 0.0);
  EXPECT_EQ(comparison_cutoff(Vec3(0.5, 0.95, 0.5), 0.3, 0.1), 0.0);
  const double mid = comparison_cutoff(Vec3(0.2, 0.5, 0.5), 0.3, 0.1);
  EXPECT_NEAR(mid, 0.5, 1e-15);
  EXPECT_THROW(comparison_cutoff(Vec3(0.5, 0.5, 0.5), 0.1, 0.3), InvalidInput);
}

TEST(Comparison, FieldCases) {
  BoundaryData bd;
  bd.S = 0.4;
  const QField f = QField::make(Grid(10), bd, InitKind::Random, 3, 0.05);
  const QField same = comparison_field(f, Retraction::distance(0.0));
  EXPECT_EQ(same.max_difference(f), 0.0);

  double dmin = INFINITY;
  for (int i = 1; i <= 10; ++i)
    for (int j = 1; j <= 10; ++j)
      for (int k = 1; k <= 10; ++k) dmin = std::min(dmin, distance(f.at(i, j, k)));
  EXPECT_EQ(comparison_field(f, Retraction::distance(0.5 * dmin)).max_difference(f), 0.0);

  // tensors near the obstacle inside U get pushed out; the boundary layer is untouched
  QField g = f;
  Rng rng(4);
  g.set(5, 5, 5, random_at_distance(rng, 1e-3));
  g.set(1, 1, 1, random_at_distance(rng, 1e-3));
  const QField c = comparison_field(g, Retraction::distance(0.05));
  EXPECT_NEAR(distance(c.at(5, 5, 5)), 0.05, 1e-12);
  EXPECT_EQ(c.at(1, 1, 1), g.at(1, 1, 1));
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) EXPECT_EQ(c.at(0, i, j), g.at(0, i, j));

  const PotentialSpec log_spec{Logarithmic{1, 0}, 0.0};
  const QField cl = comparison_field(g, Retraction::log(0.01, log_spec));
  EXPECT_GT(distance(cl.at(5, 5, 5)), 0.01);
  const PotentialSpec pow_spec{InversePower{1, 1}, 0.0};
  const QField cp = comparison_field(g, Retraction::power(0.01, pow_spec));
  EXPECT_GE(distance(cp.at(5, 5, 5)), 0.01 - 1e-12);
}
