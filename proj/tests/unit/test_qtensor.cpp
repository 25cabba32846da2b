#include <cmath>

#include <gtest/gtest.h>

#include "qobs/errors.hpp"
#include "qobs/qtensor.hpp"
#include "qobs/sampling.hpp"
#include "qobs_test/oracles.hpp"

using namespace qobs;

namespace {

const double kThird = 1.0 / 3.0;

}  // namespace

TEST(QTensor, ReconstructionIsSymmetricAndTraceless) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const QTensor q = random_traceless(rng, 2.0);
    const Mat3 m = q.matrix();
    EXPECT_LE((m - m.transpose()).norm(), 1e-14);
    EXPECT_LE(std::abs(m.trace()), 1e-14);
    EXPECT_NEAR(m.norm(), q.norm(), 1e-12);
  }
}

TEST(QTensor, FromMatrixRoundTrip) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const QTensor q = random_traceless(rng);
    EXPECT_LE((QTensor::from_matrix(q.matrix()) - q).norm(), 1e-14);
  }
}

TEST(QTensor, InnerProductMatchesFrobenius) {
  Rng rng(3);
  const QTensor a = random_traceless(rng), b = random_traceless(rng);
  const double frob = (a.matrix().array() * b.matrix().array()).sum();
  EXPECT_NEAR(a.dot(b), frob, 1e-13);
}

TEST(Eigen, ZeroTensor) {
  const Spectrum sp = eigen(QTensor());
  for (double l : sp.lambdas) EXPECT_EQ(l, 0.0);
  EXPECT_LE((sp.frame[0].cross(sp.frame[1]) - sp.frame[2]).norm(), 1e-15);
}

TEST(Eigen, DiagonalInput) {
  const Spectrum sp = eigen(QTensor::diagonal(2 * kThird, -kThird, -kThird));
  EXPECT_NEAR(sp.lambdas[0], -kThird, 1e-15);
  EXPECT_NEAR(sp.lambdas[1], -kThird, 1e-15);
  EXPECT_NEAR(sp.lambdas[2], 2 * kThird, 1e-15);
  EXPECT_NEAR(std::abs(sp.frame[2][0]), 1.0, 1e-14);
}

TEST(Eigen, NonFiniteInputRejected) {
  QTensor q;
  q[2] = std::nan("");
  EXPECT_THROW(eigen(q), InvalidInput);
}

TEST(Eigen, AgreesWithJacobiOracle) {
  Rng rng(4);
  double worst_values = 0.0, worst_recon = 0.0, worst_ortho = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const QTensor q = (i % 2 == 0) ? random_interior(rng) : random_traceless(rng, 1.0);
    const Spectrum sp = eigen(q);
    const auto ref = qobs_test::jacobi_eigen(q.matrix());
    for (int k = 0; k < 3; ++k) worst_values = std::max(worst_values, std::abs(sp.lambdas[k] - ref.values[k]));
    worst_recon = std::max(worst_recon, (sp.reconstruct() - q).norm());
    Mat3 F;
    for (int k = 0; k < 3; ++k) F.col(k) = sp.frame[k];
    worst_ortho = std::max(worst_ortho, (F.transpose() * F - Mat3::Identity()).norm());
    EXPECT_LE(sp.lambdas[0], sp.lambdas[1]);
    EXPECT_LE(sp.lambdas[1], sp.lambdas[2]);
    EXPECT_LE(std::abs(sp.lambdas[0] + sp.lambdas[1] + sp.lambdas[2]), 1e-12);
  }
  EXPECT_LE(worst_values, 1e-12);
  EXPECT_LE(worst_recon, 1e-10);
  EXPECT_LE(worst_ortho, 1e-10);
}

TEST(Eigen, NearlyDegenerateSpectra) {
  Rng rng(5);
  for (double gap : {1e-4, 1e-8, 1e-10, 1e-13, 0.0}) {
    for (int i = 0; i < 200; ++i) {
      const double l1 = uniform(rng, -kThird, 0.0);
      const double l2 = l1 + gap;
      const QTensor q = with_eigenvalues({l1, l2, -l1 - l2}, random_rotation(rng));
      const Spectrum sp = eigen(q);
      EXPECT_LE((sp.reconstruct() - q).norm(), 1e-12);
      EXPECT_NEAR(sp.lambdas[0], l1, 1e-13);
    }
  }
}

TEST(Eigen, DeterministicSignConvention) {
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    const Spectrum sp = eigen(random_traceless(rng));
    for (const Vec3& v : sp.frame) {
      int k = 0;
      while (k < 3 && std::abs(v[k]) <= 1e-12) ++k;
      ASSERT_LT(k, 3);
      EXPECT_GT(v[k], 0.0);
    }
  }
}

TEST(Eigen, ReconstructIdentityOnSpectrum) {
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const Spectrum sp = eigen(random_interior(rng));
    const Spectrum again = eigen(sp.reconstruct());
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(again.lambdas[k], sp.lambdas[k], 1e-13);
      EXPECT_NEAR(std::abs(again.frame[k].dot(sp.frame[k])), 1.0, 1e-9);
    }
  }
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify(QTensor(), 1e-9), Region::Interior);
  EXPECT_EQ(classify(QTensor::diagonal(-kThird, 1.0 / 6, 1.0 / 6), 1e-9), Region::Boundary);
  EXPECT_EQ(classify(QTensor::diagonal(-0.5, 0.25, 0.25), 1e-9), Region::Outside);
  EXPECT_EQ(classify(QTensor::diagonal(2 * kThird, -kThird, -kThird), 1e-9), Region::Boundary);
  EXPECT_THROW(classify(QTensor(), -1.0), InvalidInput);
}

TEST(Classify, RegionsAreExclusiveAndTolerant) {
  const QTensor near = QTensor::diagonal(-kThird + 1e-6, 1.0 / 6 - 5e-7, 1.0 / 6 - 5e-7);
  EXPECT_EQ(classify(near, 1e-9), Region::Interior);
  EXPECT_EQ(classify(near, 1e-5), Region::Boundary);
}

TEST(Distance, Examples) {
  EXPECT_NEAR(distance(QTensor()), 0.4082482905, 1e-10);
  EXPECT_NEAR(distance(QTensor::diagonal(-kThird, 1.0 / 6, 1.0 / 6)), 0.0, 1e-15);
  EXPECT_THROW(distance(QTensor::diagonal(-0.5, 0.25, 0.25)), DomainError);
}

TEST(Distance, OrthogonalInvariance) {
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const QTensor q = random_interior(rng);
    EXPECT_NEAR(distance(q.rotated(random_rotation(rng))), distance(q), 1e-12);
  }
}

TEST(Distance, MatchesBruteForceOracle) {
  Rng rng(9);
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const QTensor q = random_interior(rng);
    const double bf = brute_force_distance(q, 20, 1000 + i);
    worst = std::max(worst, std::abs(distance(q) - bf));
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(BruteForceDistance, Examples) {
  EXPECT_NEAR(brute_force_distance(QTensor(), 20, 1), kMaxDistance, 1e-6);
  Rng rng(10);
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(brute_force_distance(random_boundary(rng), 5, i), 0.0, 1e-8);
  EXPECT_THROW(brute_force_distance(QTensor(), 0, 1), InvalidInput);
}

TEST(NearestPoint, ZeroTensor) {
  const QTensor p = nearest_obstacle_point(QTensor());
  EXPECT_EQ(classify(p, 1e-10), Region::Boundary);
  EXPECT_NEAR(p.norm(), kMaxDistance, 1e-14);
  const auto l = eigenvalues(p);
  EXPECT_NEAR(l[0], -kThird, 1e-14);
  EXPECT_NEAR(l[1], 1.0 / 6, 1e-14);
  EXPECT_NEAR(l[2], 1.0 / 6, 1e-14);
}

TEST(NearestPoint, BoundaryIsFixedPoint) {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const QTensor b = random_boundary(rng);
    EXPECT_LE((nearest_obstacle_point(b) - b).norm(), 1e-14);
  }
}

TEST(NearestPoint, RealizesDistanceAndBeatsSampledBoundary) {
  Rng rng(12);
  for (int i = 0; i < 50; ++i) {
    const QTensor q = random_interior(rng);
    const QTensor p = nearest_obstacle_point(q);
    EXPECT_EQ(classify(p, 1e-10), Region::Boundary);
    const double d = (q - p).norm();
    EXPECT_NEAR(d, distance(q), 1e-12);
    for (int k = 0; k < 1000; ++k) EXPECT_LE(d, (q - random_boundary(rng)).norm() + 1e-15);
  }
}

TEST(Norm2Slack, Examples) {
  const double s6 = std::sqrt(6.0), s2 = std::sqrt(2.0);
  EXPECT_NEAR(norm2_slack(QTensor::diagonal(1 / s6, 1 / s6, -2 / s6)), 0.0, 1e-12);
  EXPECT_EQ(norm2_slack(QTensor()), 0.0);
  const QTensor m = QTensor::diagonal(1 / s2, 0.0, -1 / s2);
  EXPECT_NEAR(norm2_slack(m), 1.0 / 6.0, 1e-14);
  const double oracle = 2.0 / 3.0 * m.squared_norm() - std::pow(qobs_test::spectral_norm_power(m.matrix()), 2);
  EXPECT_NEAR(norm2_slack(m), oracle, 1e-12);
}

TEST(Norm2Slack, NonNegativeAndZeroOnlyForRepeatedEigenvalue) {
  Rng rng(13);
  for (int i = 0; i < 100000; ++i) EXPECT_GE(norm2_slack(random_traceless(rng)), -1e-12);
  for (int i = 0; i < 100; ++i) {
    const double a = uniform(rng, -1.0, 1.0);
    EXPECT_NEAR(norm2_slack(with_eigenvalues({a, a, -2 * a}, random_rotation(rng))), 0.0, 1e-12);
  }
}

TEST(DivSlack, ZeroAndEqualityConfiguration) {
  EXPECT_EQ(div_slack(QTensor(), QTensor(), QTensor()), 0.0);
  Rng rng(14);
  for (int i = 0; i < 100; ++i) {
    const double x = uniform(rng, -1, 1), y = uniform(rng, -1, 1), z = uniform(rng, -1, 1);
    Mat3 M, N, P;
    M << x, 0.75 * y, 0.75 * z, 0.75 * y, -0.5 * x, 0, 0.75 * z, 0, -0.5 * x;
    N << -0.5 * y, 0.75 * x, 0, 0.75 * x, y, 0.75 * z, 0, 0.75 * z, -0.5 * y;
    P << -0.5 * z, 0, 0.75 * x, 0, -0.5 * z, 0.75 * y, 0.75 * x, 0.75 * y, z;
    EXPECT_NEAR(div_slack(QTensor::from_matrix(M), QTensor::from_matrix(N), QTensor::from_matrix(P)), 0.0, 1e-12);
  }
}

TEST(DivSlack, NonNegativeOnRandomTriples) {
  Rng rng(15);
  for (int i = 0; i < 100000; ++i) {
    EXPECT_GE(div_slack(random_traceless(rng), random_traceless(rng), random_traceless(rng)), -1e-12);
  }
}

TEST(Lipschitz, Examples) {
  EXPECT_EQ(lipschitz_witness(QTensor(), QTensor()), 0.0);
  EXPECT_NEAR(lipschitz_witness(QTensor(), QTensor::diagonal(-kThird, 1.0 / 6, 1.0 / 6)), 1.0, 1e-14);
}

TEST(Lipschitz, RatioAtMostOne) {
  Rng rng(16);
  for (int i = 0; i < 100000; ++i) {
    EXPECT_LE(lipschitz_witness(random_interior(rng), random_interior(rng)), 1.0 + 1e-10);
  }
}
