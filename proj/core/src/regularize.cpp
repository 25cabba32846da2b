#include "qobs/regularize.hpp"

#include <cmath>
#include <numbers>

#include "qobs/errors.hpp"
#include "qobs/sampling.hpp"

namespace qobs {

namespace {

constexpr double kThird = 1.0 / 3.0;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt6 = 0.40824829046386301637;

std::array<double, 2> to_plane(const std::array<double, 3>& l) {
  return {(l[0] - l[1]) * kInvSqrt2, (l[0] + l[1] - 2.0 * l[2]) * kInvSqrt6};
}

std::array<double, 3> from_plane(double t0, double t1) {
  return {t0 * kInvSqrt2 + t1 * kInvSqrt6, -t0 * kInvSqrt2 + t1 * kInvSqrt6, -2.0 * t1 * kInvSqrt6};
}

QTensor spectral_tensor(const std::array<double, 3>& values, const Spectrum& sp) {
  Mat3 m = Mat3::Zero();
  for (int i = 0; i < 3; ++i) m += values[i] * sp.frame[i] * sp.frame[i].transpose();
  return QTensor::from_matrix(m);
}

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

/// Squared distance from sorted eigenvalues to {mu : min mu >= level}, with its
/// first two derivatives in the level.
struct WaterFill {
  double dist2, d1, d2;
  std::array<double, 3> mu;
};

WaterFill water_fill(const std::array<double, 3>& l, double level) {
  WaterFill w;
  if (l[0] >= level) return {0.0, 0.0, 0.0, l};
  const double theta = 0.5 * (level - l[0]);
  if (l[1] - theta >= level) {
    w.mu = {level, l[1] - theta, l[2] - theta};
    const double e = level - l[0];
    w.dist2 = 1.5 * e * e;
    w.d1 = 3.0 * e;
    w.d2 = 3.0;
  } else {
    w.mu = {level, level, -2.0 * level};
    const double a = level - l[0], b = level - l[1], c = 2.0 * level + l[2];
    w.dist2 = a * a + b * b + c * c;
    w.d1 = 2.0 * a + 2.0 * b + 4.0 * c;
    w.d2 = 12.0;
  }
  return w;
}

template <class F>
double golden_max(F&& f, double a, double b, double tol) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return fc > fd ? c : d;
}

}  // namespace

const char* to_string(EnvelopeMethod m) { return m == EnvelopeMethod::Tangent ? "tangent" : "moreau"; }

EnvelopeMethod envelope_method_from_string(const std::string& s) {
  if (s == "tangent") return EnvelopeMethod::Tangent;
  if (s == "moreau") return EnvelopeMethod::Moreau;
  throw InvalidInput("unknown envelope method: " + s);
}

RegularizedPotential::RegularizedPotential(PotentialSpec base, double epsilon, EnvelopeMethod method,
                                           RegularizationOptions options)
    : base_(std::move(base)), epsilon_(epsilon), method_(method), options_(options) {
  base_.validate();
  if (!(epsilon_ > 0.0) || !std::isfinite(epsilon_)) throw InvalidInput("regularization: epsilon must be > 0");
  if (base_.smoothing_tau != 0.0)
    throw InvalidInput("regularization: the base potential must use the exact smallest eigenvalue");
  if (options_.mollifier_nodes < 2 || options_.mollifier_nodes % 2 != 0)
    throw InvalidInput("regularization: mollifier_nodes must be a positive even number");
  const double target = 1.0 / epsilon_;

  if (base_.is_distance_based()) {
    if (const auto* p = std::get_if<InversePower>(&base_.family)) d_eps_ = std::pow(p->m * epsilon_, 1.0 / p->s);
    else {
      const auto& lg = std::get<Logarithmic>(base_.family);
      d_eps_ = std::exp((lg.c - target) / lg.k);
    }
    if (!(d_eps_ < kMaxDistance)) throw InvalidInput("regularization: epsilon too large, sublevel set is empty");
    omega_ = options_.omega_safety * std::abs(distance_profile(base_.family, d_eps_).d1);
  } else {
    const auto& bm = std::get<BallMajumdar>(base_.family);
    if (!(target > bm.offset)) throw InvalidInput("regularization: epsilon too large, sublevel set is empty");
    auto above = [&](double S) {
      try {
        return bm_value(bm, QTensor::diagonal(2 * S / 3, -S / 3, -S / 3)) >= target;
      } catch (const ConvergenceError&) {
        return true;
      }
    };
    auto bisect = [&](double inside, double outside) {
      for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (inside + outside);
        (above(mid) ? outside : inside) = mid;
      }
      return inside;
    };
    uniaxial_ = {bisect(0.0, -0.5), bisect(0.0, 1.0)};
    const double d_oblate = kSqrt6Half * (2.0 * uniaxial_.first / 3.0 + kThird);
    const double d_prolate = kSqrt6Half * (kThird - uniaxial_.second / 3.0);
    d_eps_ = std::min(d_oblate, d_prolate);
    if (method_ == EnvelopeMethod::Tangent) {
      const int n = options_.boundary_angles;
      boundary_.reserve(n);
      double r_max = 0.0;
      for (int k = 0; k < n; ++k) {
        boundary_.push_back(boundary_point(2.0 * std::numbers::pi * k / n));
        r_max = std::max(r_max, std::hypot(boundary_.back().t0, boundary_.back().t1));
      }
      omega_ = options_.omega_safety * r_max;
    }
  }

  if (method_ == EnvelopeMethod::Tangent) {
    const double radius = epsilon_ / omega_;
    mollify_ = radius >= options_.min_radius;
    if (mollify_) {
      Rng rng(options_.mollifier_seed);
      std::array<double, 7> shift;
      for (double& s : shift) s = uniform(rng, 0.0, 1.0);
      constexpr std::array<std::uint64_t, 7> bases{2, 3, 5, 7, 11, 13, 17};
      const int half = options_.mollifier_nodes / 2;
      double total = 0.0;
      for (int i = 0; i < half; ++i) {
        std::array<double, 7> u;
        for (int d = 0; d < 7; ++d) {
          u[d] = radical_inverse(static_cast<std::uint64_t>(i) + 1, bases[d]) + shift[d];
          u[d] -= std::floor(u[d]);
        }
        Coeffs g;
        std::array<double, 6> gauss;
        for (int p = 0; p < 3; ++p) {
          const double rad = std::sqrt(-2.0 * std::log(std::max(u[2 * p], 1e-300)));
          gauss[2 * p] = rad * std::cos(2.0 * std::numbers::pi * u[2 * p + 1]);
          gauss[2 * p + 1] = rad * std::sin(2.0 * std::numbers::pi * u[2 * p + 1]);
        }
        for (int d = 0; d < 5; ++d) g[d] = gauss[d];
        const double r = std::pow(u[6], 0.2);
        const Coeffs x = (g.norm() > 0 ? r / g.norm() : 0.0) * g;
        const double w = r < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0;
        nodes_.push_back(radius * x);
        nodes_.push_back(-radius * x);
        weights_.push_back(w);
        weights_.push_back(w);
        total += 2.0 * w;
      }
      for (double& w : weights_) w /= total;
    }
  }
}

RegularizedPotential::BoundaryPoint RegularizedPotential::boundary_point(double angle) const {
  const auto& bm = std::get<BallMajumdar>(base_.family);
  const double target = 1.0 / epsilon_ - bm.offset;
  const double c = std::cos(angle), s = std::sin(angle);
  // Along t = R (c, s) the conjugate value R (c,s).mu(t) - ln Z(t) increases in R
  // with derivative R (c,s)^T Cov (c,s); safeguarded Newton on R.
  auto eval = [&](double R, double* slope) {
    const auto L = from_plane(R * c, R * s);
    const BmPartition p = bm_partition(bm, L);
    const auto mu = to_plane(p.moments);
    if (slope) {
      const double h = 1e-6 * std::max(1.0, R);
      const auto Lp = from_plane((R + h) * c, (R + h) * s);
      const auto mp = to_plane(bm_partition(bm, Lp).moments);
      *slope = R * (c * (mp[0] - mu[0]) + s * (mp[1] - mu[1])) / h;
    }
    return std::pair{R * (c * mu[0] + s * mu[1]) - p.log_z, p.log_z};
  };
  double lo = 0.0, hi = 1.0;
  while (eval(hi, nullptr).first < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e9) throw ConvergenceError("regularization: sublevel boundary not bracketed", hi, 0);
  }
  double R = 0.5 * (lo + hi);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    double slope = 0.0;
    const double g = eval(R, &slope).first - target;
    (g < 0 ? lo : hi) = R;
    double next = slope > 0 ? R - g / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - R) <= 1e-15 * R) {
      R = next;
      break;
    }
    R = next;
  }
  const auto v = eval(R, nullptr);
  return {R * c, R * s, v.second};
}

ValueGrad RegularizedPotential::tangent_distance_based(const QTensor& Q) const {
  const Spectrum sp = eigen(Q);
  const double gap = obstacle_gap(sp.lambdas);
  double v, slope;
  if (gap >= d_eps_) {
    const Profile p = distance_profile(base_.family, gap);
    v = p.value;
    slope = p.d1;
  } else {
    const Profile p = distance_profile(base_.family, d_eps_);
    v = p.value + p.d1 * (gap - d_eps_);
    slope = p.d1;
  }
  const Mat3 n = sp.frame[0] * sp.frame[0].transpose();
  return {v, (slope * kSqrt6Half) * QTensor::from_matrix(n)};
}

ValueGrad RegularizedPotential::tangent_bm(const QTensor& Q) const {
  const auto& bm = std::get<BallMajumdar>(base_.family);
  const double target = 1.0 / epsilon_;
  const Spectrum sp = eigen(Q);
  if (sp.lambdas[0] > -kThird && sp.lambdas[2] < 2.0 * kThird) {
    try {
      const BmDual dual = bm_dual(bm, Q);
      if (dual.value + bm.offset < target) return {dual.value + bm.offset, QTensor(dual.multiplier)};
    } catch (const ConvergenceError&) {
    }
  }
  const auto q = to_plane(sp.lambdas);
  std::vector<BoundaryPoint> local;
  const std::vector<BoundaryPoint>* table = &boundary_;
  if (table->empty()) {
    for (int k = 0; k < 96; ++k) local.push_back(boundary_point(2.0 * std::numbers::pi * k / 96));
    table = &local;
  }
  const int n = static_cast<int>(table->size());
  int best = 0;
  double best_v = -kInfinity;
  for (int k = 0; k < n; ++k) {
    const auto& b = (*table)[k];
    const double v = b.t0 * q[0] + b.t1 * q[1] - b.log_z;
    if (v > best_v) {
      best_v = v;
      best = k;
    }
  }
  const double step = 2.0 * std::numbers::pi / n;
  auto T = [&](double angle) {
    const BoundaryPoint b = boundary_point(angle);
    return b.t0 * q[0] + b.t1 * q[1] - b.log_z;
  };
  const double angle = golden_max(T, (best - 1) * step, (best + 1) * step, 1e-9);
  BoundaryPoint b = boundary_point(angle);
  double v = b.t0 * q[0] + b.t1 * q[1] - b.log_z;
  if (v < best_v) {
    b = (*table)[best];
    v = best_v;
  }
  return {v + bm.offset, spectral_tensor(from_plane(b.t0, b.t1), sp)};
}

ValueGrad RegularizedPotential::tangent_envelope_with_gradient(const QTensor& Q) const {
  if (!Q.is_finite()) throw InvalidInput("tangent_envelope: non-finite tensor");
  return base_.is_distance_based() ? tangent_distance_based(Q) : tangent_bm(Q);
}

double RegularizedPotential::tangent_envelope(const QTensor& Q) const {
  return tangent_envelope_with_gradient(Q).value;
}

ValueGrad RegularizedPotential::moreau_distance_based(const QTensor& Q) const {
  const Spectrum sp = eigen(Q);
  const auto& l = sp.lambdas;
  const double gap = obstacle_gap(l);
  const double c = 1.0 / kSqrt6Half;  // d(level)/dD
  auto level = [&](double D) { return -kThird + c * D; };
  auto dh = [&](double D, double* second) {
    const Profile p = distance_profile(base_.family, D);
    const WaterFill w = water_fill(l, level(D));
    if (second) *second = p.d2 + c * c * w.d2 / (2.0 * epsilon_);
    return p.d1 + c * w.d1 / (2.0 * epsilon_);
  };

  double lo = std::max(gap, 0.0), hi = kMaxDistance;
  double D;
  if (lo >= hi || dh(hi, nullptr) <= 0.0) {
    D = hi;
  } else {
    // h' is increasing; bracket [lo, hi] with h'(lo) < 0 <= h'(hi).
    D = lo > 0.0 ? lo : 0.5 * hi;
    for (int it = 0; it < 300; ++it) {
      double second = 0.0;
      const double g = dh(D, &second);
      if (g < 0) lo = D;
      else hi = D;
      if (hi - lo <= 4e-16 * hi) break;
      double next = D - g / second;
      if (!(next > lo && next < hi)) next = lo > 0.0 && hi / lo > 4.0 ? std::sqrt(lo * hi) : (lo > 0.0 ? 0.5 * (lo + hi) : 0.0625 * hi);
      if (next == D) break;
      D = next;
    }
  }
  const WaterFill w = water_fill(l, level(D));
  const double v = distance_profile(base_.family, D).value + w.dist2 / (2.0 * epsilon_);
  std::array<double, 3> g;
  for (int i = 0; i < 3; ++i) g[i] = (l[i] - w.mu[i]) / epsilon_;
  return {v, spectral_tensor(g, sp)};
}

ValueGrad RegularizedPotential::moreau_bm(const QTensor& Q, BmHint* hint) const {
  const auto& bm = std::get<BallMajumdar>(base_.family);
  BmSolveOptions opt;
  opt.penalty = epsilon_;
  const BmDual dual = bm_dual(bm, Q, opt, hint);
  return {dual.value + bm.offset, QTensor(dual.multiplier)};
}

ValueGrad RegularizedPotential::evaluate(const QTensor& Q, BmHint* hint) const {
  if (!Q.is_finite()) throw InvalidInput("regularized potential: non-finite tensor");
  if (method_ == EnvelopeMethod::Moreau) return base_.is_distance_based() ? moreau_distance_based(Q) : moreau_bm(Q, hint);
  if (!mollify_) {
    ValueGrad vg = tangent_envelope_with_gradient(Q);
    vg.value -= epsilon_;
    return vg;
  }
  double v = 0.0;
  QTensor g;
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    const ValueGrad vg = tangent_envelope_with_gradient(Q - QTensor(nodes_[j]));
    v += weights_[j] * vg.value;
    g += weights_[j] * vg.gradient;
  }
  return {v - epsilon_, g};
}

bool RegularizedPotential::kinked_at_repeated_min() const {
  return method_ == EnvelopeMethod::Tangent && base_.is_distance_based() && !mollify_;
}

ValueGrad RegularizedPotential::evaluate_soft(const QTensor& Q, double tau) const {
  ValueGrad vg = evaluate(Q);
  if (!kinked_at_repeated_min()) return vg;
  const Spectrum sp = eigen(Q);
  std::array<double, 3> w;
  soft_min(sp.lambdas, tau, &w);
  Mat3 m = Mat3::Zero();
  for (int i = 0; i < 3; ++i) m += w[i] * sp.frame[i] * sp.frame[i].transpose();
  // the profile slope is negative and equals minus the gradient norm
  vg.gradient = (-vg.gradient.norm() * kSqrt6Half) * QTensor::from_matrix(m);
  return vg;
}

double RegularizedPotential::value(const QTensor& Q) const { return evaluate(Q).value; }

QTensor RegularizedPotential::gradient(const QTensor& Q) const { return evaluate(Q).gradient; }

}  // namespace qobs
