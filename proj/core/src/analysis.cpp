#include "qobs/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "parallel.hpp"
#include "qobs/errors.hpp"
#include "qobs/exponents.hpp"

namespace qobs {

namespace {

using detail::CompensatedSum;

void check_margin(double margin) {
  if (!(margin >= 0.0 && margin < 0.5)) throw InvalidInput("analysis: window margin must lie in [0, 1/2)");
}

double cell_gradient_sq(const QField& f, int i, int j, int k) {
  const double h = f.grid().h();
  const Coeffs& q = f(i, j, k);
  return ((f(i + 1, j, k) - q).squaredNorm() + (f(i, j + 1, k) - q).squaredNorm() + (f(i, j, k + 1) - q).squaredNorm()) /
         (h * h);
}

bool cell_center_in_window(const Grid& g, int i, int j, int k, double margin) {
  const double h = g.h();
  auto inside = [&](int t) {
    const double c = (t + 0.5) * h;
    return c >= margin - 1e-12 && c <= 1.0 - margin + 1e-12;
  };
  return inside(i) && inside(j) && inside(k);
}

}  // namespace

double node_distance(const QTensor& Q) { return std::max(0.0, obstacle_gap(Q)); }

double window_volume(const Grid& grid, double margin) {
  check_margin(margin);
  std::size_t count = 0;
  for (int i = 1; i <= grid.n; ++i)
    for (int j = 1; j <= grid.n; ++j)
      for (int k = 1; k <= grid.n; ++k) count += grid.in_window(i, j, k, margin) ? 1 : 0;
  const double h = grid.h();
  return static_cast<double>(count) * h * h * h;
}

double level_set_measure(const QField& field, double a, double margin) {
  if (!(a > 0.0)) throw InvalidInput("level_set_measure: level must be > 0");
  check_margin(margin);
  const Grid& g = field.grid();
  std::size_t count = 0;
  for (int i = 1; i <= g.n; ++i)
    for (int j = 1; j <= g.n; ++j)
      for (int k = 1; k <= g.n; ++k)
        if (g.in_window(i, j, k, margin) && node_distance(field.at(i, j, k)) <= a) ++count;
  const double h = g.h();
  return static_cast<double>(count) * h * h * h;
}

std::vector<double> default_levels() {
  std::vector<double> out;
  for (int j = 2; j <= 10; ++j) out.push_back(kMaxDistance * std::ldexp(1.0, -j));
  return out;
}

ScalingReport scaling_fit(const QField& field, std::vector<double> levels, double margin,
                          const std::optional<ScalingTheory>& theory) {
  if (levels.size() < 3) throw InvalidInput("scaling_fit: at least 3 levels are required");
  for (double a : levels)
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidInput("scaling_fit: levels must be finite and > 0");
  check_margin(margin);
  std::sort(levels.begin(), levels.end(), std::greater<>());

  ScalingReport r;
  r.levels = levels;
  r.margin = margin;
  std::vector<double> xs, ys;
  for (double a : levels) {
    const double m = level_set_measure(field, a, margin);
    r.measures.push_back(m);
    if (m > 0.0) {
      xs.push_back(std::log(a));
      ys.push_back(std::log(m));
    }
  }
  r.fitted_levels = xs.size();
  r.empty_at_all_levels = xs.empty();
  if (xs.size() >= 3) {
    const double nx = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t t = 0; t < xs.size(); ++t) {
      mx += xs[t];
      my += ys[t];
    }
    mx /= nx;
    my /= nx;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t t = 0; t < xs.size(); ++t) {
      sxx += (xs[t] - mx) * (xs[t] - mx);
      sxy += (xs[t] - mx) * (ys[t] - my);
    }
    r.beta = sxy / sxx;
    r.log_constant = my - r.beta * mx;
    double ss = 0.0;
    for (std::size_t t = 0; t < xs.size(); ++t) {
      const double e = ys[t] - (r.log_constant + r.beta * xs[t]);
      ss += e * e;
    }
    r.residual = std::sqrt(ss / nx);
  } else {
    r.beta = std::numeric_limits<double>::quiet_NaN();
    r.residual = std::numeric_limits<double>::quiet_NaN();
    r.log_constant = std::numeric_limits<double>::quiet_NaN();
  }

  if (theory) {
    if (const auto* ip = std::get_if<InversePower>(&theory->spec.family)) {
      r.target = ip->s * q_max(theory->A) / 2.0;
      if (std::isfinite(r.beta)) r.meets_target = r.beta >= *r.target;
    }
  }
  return r;
}

DistanceWitness min_distance(const QField& field, double margin) {
  check_margin(margin);
  const Grid& g = field.grid();
  DistanceWitness w;
  w.value = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= g.n; ++i)
    for (int j = 1; j <= g.n; ++j)
      for (int k = 1; k <= g.n; ++k) {
        if (!g.in_window(i, j, k, margin)) continue;
        const double d = node_distance(field.at(i, j, k));
        if (d < w.value) w = {d, i, j, k};
      }
  if (w.i < 0) throw InvalidInput("min_distance: window contains no nodes");
  return w;
}

double dirichlet_density(const QField& field, const Vec3& center, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("dirichlet_density: radius must be > 0");
  if ((center.array() < 0.0).any() || (center.array() > 1.0).any())
    throw InvalidInput("dirichlet_density: center must lie in the closed unit cube");
  const Grid& g = field.grid();
  const double h = g.h();
  CompensatedSum acc;
  for (int i = 0; i <= g.n; ++i)
    for (int j = 0; j <= g.n; ++j)
      for (int k = 0; k <= g.n; ++k) {
        const Vec3 c = (Vec3(i, j, k) + Vec3::Constant(0.5)) * h;
        if ((c - center).norm() <= r) acc.add(cell_gradient_sq(field, i, j, k));
      }
  return h * h * h * acc.value() / r;
}

double grad_lq_norm(const QField& field, double q, double margin) {
  if (!(q >= 1.0) || !std::isfinite(q)) throw InvalidInput("grad_lq_norm: q must be finite and >= 1");
  check_margin(margin);
  const Grid& g = field.grid();
  const double h = g.h();
  CompensatedSum acc;
  for (int i = 0; i <= g.n; ++i)
    for (int j = 0; j <= g.n; ++j)
      for (int k = 0; k <= g.n; ++k)
        if (cell_center_in_window(g, i, j, k, margin)) acc.add(std::pow(cell_gradient_sq(field, i, j, k), 0.5 * q));
  return std::pow(h * h * h * acc.value(), 1.0 / q);
}

double holder_seminorm(const QField& field, double alpha, std::size_t pairs, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("holder_seminorm: alpha must lie in (0, 1)");
  if (pairs == 0) throw InvalidInput("holder_seminorm: pairs must be > 0");
  const Grid& g = field.grid();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(1, g.n);
  double worst = 0.0;
  for (std::size_t t = 0; t < pairs; ++t) {
    const int a[3] = {pick(rng), pick(rng), pick(rng)};
    const int b[3] = {pick(rng), pick(rng), pick(rng)};
    if (a[0] == b[0] && a[1] == b[1] && a[2] == b[2]) continue;
    const double dx = (g.position(a[0], a[1], a[2]) - g.position(b[0], b[1], b[2])).norm();
    const double dq = (field(a[0], a[1], a[2]) - field(b[0], b[1], b[2])).norm();
    worst = std::max(worst, dq / std::pow(dx, alpha));
  }
  return worst;
}

QField synthetic_radial_field(const Grid& grid, const Vec3& center) {
  QField f(grid);
  const double sqrt6 = std::sqrt(6.0);
  for (int i = 0; i < grid.side(); ++i)
    for (int j = 0; j < grid.side(); ++j)
      for (int k = 0; k < grid.side(); ++k) {
        const double d = std::min((grid.position(i, j, k) - center).norm(), kMaxDistance);
        const double l1 = -1.0 / 3.0 + 2.0 * d / sqrt6;
        // Oblate uniaxial about e3: eigenvalues (l1, -l1/2, -l1/2) with e3 carrying l1.
        f.set(i, j, k, QTensor::uniaxial(1.5 * l1, Vec3::UnitZ()));
      }
  return f;
}

}  // namespace qobs
