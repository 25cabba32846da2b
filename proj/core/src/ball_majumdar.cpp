#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "qobs/errors.hpp"
#include "qobs/potentials.hpp"

namespace qobs {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt6 = 0.40824829046386301637;

/// Plane coordinates of a traceless diagonal: (l1 - l2)/sqrt2, (l1 + l2 - 2 l3)/sqrt6.
std::array<double, 2> to_plane(const std::array<double, 3>& l) {
  return {(l[0] - l[1]) * kInvSqrt2, (l[0] + l[1] - 2.0 * l[2]) * kInvSqrt6};
}

std::array<double, 3> from_plane(double t0, double t1) {
  return {t0 * kInvSqrt2 + t1 * kInvSqrt6, -t0 * kInvSqrt2 + t1 * kInvSqrt6, -2.0 * t1 * kInvSqrt6};
}

/// Quadrature nodes of the uniform measure on the sphere, pole along the third
/// eigenvector. Stored as plane coordinates of (m.n1^2, m.n2^2, m.n3^2) with
/// weights summing to one; reflection symmetries are folded into the weights.
struct Nodes {
  std::vector<double> x, y, w;
};

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    nodes[i] = z;
    weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

std::unique_ptr<Nodes> build_nodes(int polar, int azimuth) {
  std::vector<double> u, wu;
  gauss_legendre(polar, u, wu);
  std::vector<double> us, ws;
  for (int i = 0; i < polar; ++i) {
    if (polar % 2 == 0) {
      if (u[i] > 0) {
        us.push_back(u[i]);
        ws.push_back(wu[i]);  // doubled weight of the +-u pair, halved for probability
      }
    } else {
      us.push_back(u[i]);
      ws.push_back(0.5 * wu[i]);
    }
  }
  const bool fold = azimuth % 4 == 0;
  const int na = fold ? azimuth / 4 : azimuth;
  const double wa = 1.0 / static_cast<double>(na);
  auto out = std::make_unique<Nodes>();
  for (std::size_t i = 0; i < us.size(); ++i) {
    const double s2 = 1.0 - us[i] * us[i];
    for (int j = 0; j < na; ++j) {
      const double phi = 2.0 * std::numbers::pi * (j + 0.5) / azimuth;
      const double c2 = std::cos(phi) * std::cos(phi);
      const auto p = to_plane({s2 * c2 - 1.0 / 3.0, s2 * (1.0 - c2) - 1.0 / 3.0, us[i] * us[i] - 1.0 / 3.0});
      out->x.push_back(p[0]);
      out->y.push_back(p[1]);
      out->w.push_back(ws[i] * wa);
    }
  }
  return out;
}

const Nodes& nodes_for(int polar, int azimuth) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<Nodes>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{polar, azimuth}];
  if (!slot) slot = build_nodes(polar, azimuth);
  return *slot;
}

/// ln Z with the mean and covariance of the plane features under the tilted measure.
struct Moments {
  double log_z;
  double mx, my;
  double cxx, cxy, cyy;
};

Moments moments(const Nodes& nd, double t0, double t1) {
  const std::size_t n = nd.w.size();
  double shift = -kInfinity;
  for (std::size_t j = 0; j < n; ++j) shift = std::max(shift, t0 * nd.x[j] + t1 * nd.y[j]);
  double z = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = nd.x[j], y = nd.y[j];
    const double e = nd.w[j] * std::exp(t0 * x + t1 * y - shift);
    z += e;
    sx += e * x;
    sy += e * y;
    sxx += e * x * x;
    sxy += e * x * y;
    syy += e * y * y;
  }
  Moments m;
  m.log_z = shift + std::log(z);
  m.mx = sx / z;
  m.my = sy / z;
  m.cxx = sxx / z - m.mx * m.mx;
  m.cxy = sxy / z - m.mx * m.my;
  m.cyy = syy / z - m.my * m.my;
  return m;
}

}  // namespace

double bm_resolution_floor(const BallMajumdar& spec) {
  const double step = 2.0 * std::numbers::pi / std::min(2.0 * spec.quad_polar, 1.0 * spec.quad_azimuth);
  return 1.6 * step * step;
}

BmPartition bm_partition(const BallMajumdar& spec, const std::array<double, 3>& lambda) {
  const auto t = to_plane(lambda);
  const Moments m = moments(nodes_for(spec.quad_polar, spec.quad_azimuth), t[0], t[1]);
  return {m.log_z, from_plane(m.mx, m.my)};
}

BmDual bm_dual(const BallMajumdar& spec, const QTensor& Q, const BmSolveOptions& opt, BmHint* hint) {
  const Nodes& nd = nodes_for(spec.quad_polar, spec.quad_azimuth);
  const Spectrum sp = eigen(Q);
  const auto q = to_plane(sp.lambdas);
  const double eps = opt.penalty;

  double t0 = 0.0, t1 = 0.0;
  if (hint && hint->valid) {
    t0 = hint->t0;
    t1 = hint->t1;
  }
  auto objective = [&](double a, double b, const Moments& m) {
    return a * q[0] + b * q[1] - m.log_z - 0.5 * eps * (a * a + b * b);
  };

  Moments m = moments(nd, t0, t1);
  double G = objective(t0, t1, m);
  double residual = 0.0;
  int it = 0;
  bool converged = false;
  for (; it <= opt.max_iters; ++it) {
    const double g0 = q[0] - m.mx - eps * t0;
    const double g1 = q[1] - m.my - eps * t1;
    residual = std::hypot(g0, g1);
    if (residual <= opt.tol) {
      converged = true;
      break;
    }
    if (it == opt.max_iters) break;
    const double hxx = m.cxx + eps, hxy = m.cxy, hyy = m.cyy + eps;
    const double det = hxx * hyy - hxy * hxy;
    double s0, s1;
    if (det > 0.0 && std::isfinite(det)) {
      s0 = (hyy * g0 - hxy * g1) / det;
      s1 = (hxx * g1 - hxy * g0) / det;
    } else {
      s0 = g0;
      s1 = g1;
    }
    const double slope = g0 * s0 + g1 * s1;
    const double slack = 1e-13 * std::max(1.0, std::abs(G));
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const double a = t0 + alpha * s0, b = t1 + alpha * s1;
      const Moments trial = moments(nd, a, b);
      const double Gt = objective(a, b, trial);
      if (Gt >= G + 1e-4 * alpha * slope - slack) {
        t0 = a;
        t1 = b;
        m = trial;
        G = Gt;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  if (!converged) throw ConvergenceError("ball_majumdar: dual Newton did not converge", residual, it);

  if (hint) *hint = {t0, t1, true};
  const auto L = from_plane(t0, t1);
  Mat3 mat = Mat3::Zero();
  for (int i = 0; i < 3; ++i) mat += L[i] * sp.frame[i] * sp.frame[i].transpose();
  BmDual out;
  out.value = G;
  out.multiplier = QTensor::from_matrix(mat).coeffs();
  out.iterations = it;
  out.residual = residual;
  return out;
}

double bm_value(const BallMajumdar& spec, const QTensor& Q) {
  if (!Q.is_finite()) throw InvalidInput("bm_value: non-finite tensor");
  const auto l = eigenvalues(Q);
  if (!(l[0] > -1.0 / 3.0 && l[2] < 2.0 / 3.0)) return kInfinity;
  return bm_dual(spec, Q).value + spec.offset;
}

}  // namespace qobs
