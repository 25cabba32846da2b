#include <algorithm>
#include <cmath>
#include <vector>

#include "qobs/errors.hpp"
#include "qobs/potentials.hpp"
#include "qobs/sampling.hpp"

namespace qobs {

namespace {

constexpr int kStrata = 12;
constexpr double kShallowest = 0.3;

double deepest_distance(const PotentialSpec& spec) {
  if (const auto* bm = std::get_if<BallMajumdar>(&spec.family)) return bm_resolution_floor(*bm);
  return 1e-6;
}

std::vector<double> strata(double d_min) {
  std::vector<double> d(kStrata);
  for (int j = 0; j < kStrata; ++j) d[j] = kShallowest * std::pow(d_min / kShallowest, j / double(kStrata - 1));
  return d;
}

void require_samples(std::size_t samples) {
  if (samples < 100) throw InvalidInput("hypothesis checks need at least 100 samples");
}

HypothesisReport make_report(const PotentialSpec& spec, const char* check) {
  spec.validate();
  HypothesisReport r;
  r.family = spec.family_name();
  r.check = check;
  return r;
}

bool is_power(const PotentialSpec& spec) { return std::holds_alternative<InversePower>(spec.family); }

/// Boundary point for a ray. The first two rays are the uniaxial extremes
/// (two eigenvalues at -1/3, then one), the rest are random.
QTensor ray_target(Rng& rng, std::size_t ray) {
  const double t = 1.0 / 3.0;
  if (ray == 0) return with_eigenvalues({-t, -t, 2 * t}, random_rotation(rng));
  if (ray == 1) return with_eigenvalues({-t, 0.5 * t, 0.5 * t}, random_rotation(rng));
  return random_boundary(rng);
}

}  // namespace

HypothesisReport check_growth(const PotentialSpec& spec, std::size_t samples, std::uint64_t seed) {
  require_samples(samples);
  HypothesisReport r = make_report(spec, "growth");
  Rng rng(seed);
  const auto d = strata(deepest_distance(spec));
  const std::size_t rays = std::max<std::size_t>(1, samples / kStrata);
  r.d_min = d.back();

  if (is_power(spec)) {
    const double s = std::get<InversePower>(spec.family).s;
    double lo = kInfinity, hi = 0.0, deep_hi = 0.0, prev_hi = 0.0;
    for (std::size_t ray = 0; ray < rays; ++ray) {
      const QTensor qb = ray_target(rng, ray);
      for (int j = 0; j < kStrata; ++j) {
        const QTensor q = (1.0 - d[j] / kMaxDistance) * qb;
        const double ratio = value(spec, q) * std::pow(distance(q), s);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        if (j == kStrata - 1) deep_hi = std::max(deep_hi, ratio);
        if (j == kStrata - 2) prev_hi = std::max(prev_hi, ratio);
        ++r.samples;
      }
    }
    r.m_s = lo;
    r.M_s = hi;
    r.bounded = std::isfinite(hi) && deep_hi <= 1.5 * prev_hi;
    return r;
  }

  double k_lo = kInfinity, k_hi = 0.0, m_lo = kInfinity, m_hi = -kInfinity;
  std::vector<double> f(kStrata), L(kStrata);
  for (std::size_t ray = 0; ray < rays; ++ray) {
    const QTensor qb = ray_target(rng, ray);
    QTensor deepest;
    for (int j = 0; j < kStrata; ++j) {
      const QTensor q = (1.0 - d[j] / kMaxDistance) * qb;
      f[j] = value(spec, q);
      L[j] = std::abs(std::log(distance(q)));
      deepest = q;
      ++r.samples;
    }
    const int a = kStrata - 1, b = kStrata - 2, c = kStrata - 3;
    const double k = (f[a] - f[b]) / (L[a] - L[b]);
    const double k_prev = (f[b] - f[c]) / (L[b] - L[c]);
    if (!(k > 0.0) || !std::isfinite(k) || std::abs(k - k_prev) > 0.3 * k) {
      r.bounded = false;
      if (!r.witness) r.witness = deepest;
    }
    k_lo = std::min(k_lo, k);
    k_hi = std::max(k_hi, k);
    for (int j = 0; j < kStrata; ++j) {
      m_lo = std::min(m_lo, f[j] - k * L[j]);
      m_hi = std::max(m_hi, f[j] - k * L[j]);
    }
  }
  r.k0 = k_lo;
  r.K0 = k_hi;
  r.m0 = m_lo;
  r.M0 = m_hi;
  return r;
}

double gradient_ratio(const PotentialSpec& spec, const QTensor& Q, double k0) {
  const double f = value(spec, Q);
  const double g = gradient(spec, Q).norm();
  if (const auto* p = std::get_if<InversePower>(&spec.family)) return std::pow(g, p->s) / std::pow(f, p->s + 1.0);
  return g * std::exp(-f / k0);
}

HypothesisReport check_gradient_bound(const PotentialSpec& spec, std::size_t samples, std::uint64_t seed) {
  require_samples(samples);
  HypothesisReport r = make_report(spec, "gradient");
  double k0 = 1.0;
  if (const auto* lg = std::get_if<Logarithmic>(&spec.family)) {
    k0 = lg->k;
  } else if (!is_power(spec)) {
    k0 = *check_growth(spec, samples, seed).k0;
    r.k0 = k0;
  }
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const auto d = strata(deepest_distance(spec));
  r.d_min = d.back();
  double worst = 0.0;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const QTensor q = random_at_distance(rng, d[i % kStrata]);
    double ratio;
    try {
      ratio = gradient_ratio(spec, q, k0);
    } catch (const DegenerateEigenvalue&) {
      ++skipped;
      continue;
    }
    ++r.samples;
    if (!std::isfinite(ratio)) r.bounded = false;
    if (ratio > worst || !r.witness) {
      worst = std::max(worst, ratio);
      r.witness = q;
    }
  }
  if (is_power(spec)) r.C_s = worst;
  else r.C_0 = worst;
  if (skipped) r.note = std::to_string(skipped) + " degenerate samples skipped";
  return r;
}

HypothesisReport check_hessian_bound(const PotentialSpec& spec, std::size_t samples, std::uint64_t seed) {
  require_samples(samples);
  HypothesisReport r = make_report(spec, "hessian");
  Rng rng(seed ^ 0xbf58476d1ce4e5b9ULL);
  const auto d = strata(std::max(deepest_distance(spec), 1e-4));
  r.d_min = d.back();
  const bool power = is_power(spec);
  double worst = kInfinity, min_form = kInfinity;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    QTensor q;
    double gap;
    do {
      q = random_at_distance(rng, d[i % kStrata]);
      const auto l = eigenvalues(q);
      gap = l[1] - l[0];
    } while (spec.smoothing_tau == 0.0 && spec.is_distance_based() && gap < 1e-3);
    const double step = std::min(1e-2 * d[i % kStrata], 0.25 * gap);
    const QTensor y = random_direction(rng);
    const double f = value(spec, q);
    const double form = (value(spec, q + step * y) - 2.0 * f + value(spec, q - step * y)) / (step * step);
    const double dfy = gradient(spec, q).dot(y);
    min_form = std::min(min_form, form);
    ++r.samples;
    if (std::abs(dfy) < 1e-8 * std::max(1.0, std::abs(f))) {
      ++skipped;
      continue;
    }
    const double ratio = power ? form * f / (dfy * dfy) : form / (dfy * dfy);
    if (ratio < worst) {
      worst = ratio;
      r.witness = q;
    }
  }
  if (power) r.c_s = worst;
  else r.c_0 = worst;
  r.min_quadratic_form = min_form;
  r.bounded = worst > 0.0;
  if (skipped) r.note = std::to_string(skipped) + " samples with vanishing directional derivative skipped";
  return r;
}

double convexity_midpoint_check(const PotentialSpec& spec, std::size_t triples, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed ^ 0x94d049bb133111ebULL);
  const double d_min = std::max(deepest_distance(spec), 1e-3);
  double worst = kInfinity;
  for (std::size_t i = 0; i < triples; ++i) {
    const QTensor q1 = random_at_distance(rng, log_uniform(rng, d_min, kMaxDistance));
    QTensor q2;
    if (i % 2 == 0) {
      q2 = random_at_distance(rng, log_uniform(rng, d_min, kMaxDistance));
    } else {
      // Nearby partner, resampled until it stays above the sampling floor.
      const double d1 = distance(q1);
      do {
        q2 = q1 + log_uniform(rng, 1e-3, 1.0) * d1 * random_direction(rng);
      } while (obstacle_gap(q2) < d_min || classify(q2, 0.0) != Region::Interior);
    }
    const double slack = 0.5 * (value(spec, q1) + value(spec, q2)) - value(spec, 0.5 * (q1 + q2));
    worst = std::min(worst, slack);
  }
  return triples ? worst : 0.0;
}

}  // namespace qobs
