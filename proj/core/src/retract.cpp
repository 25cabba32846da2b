#include "qobs/retract.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qobs/errors.hpp"
#include "qobs/exponents.hpp"

namespace qobs {

namespace {

constexpr double kSqrt6 = 2.44948974278317809820;
constexpr int kVerifySamples = 4000;

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

}  // namespace

double eta_a(double x, double a) {
  if (!(a >= 0.0 && a < kMaxDistance)) throw DomainError("retraction level must lie in [0, sqrt6/6)");
  if (!(x <= kMaxDistance + 1e-15)) throw DomainError("distance above sqrt6/6");
  if (x >= a) return 1.0;
  return (1.0 - kSqrt6 * a) / (1.0 - kSqrt6 * x);
}

QTensor h_a(const QTensor& Q, double a) {
  if (classify(Q) == Region::Outside) throw DomainError("h_a: tensor outside the physical set");
  const double d = std::max(0.0, obstacle_gap(Q));
  return eta_a(d, a) * Q;
}

// ---------------------------------------------------------------------------
// power join
// ---------------------------------------------------------------------------

PowerRetraction::PowerRetraction(double a, double s, double m_s, double M_s) : a_(a), s_(s), m_s_(m_s), M_s_(M_s) {
  if (!(s > 0.0) || !(m_s > 0.0) || !(M_s >= m_s)) throw DomainError("need s > 0 and 0 < m_s <= M_s");
  if (!(a > 0.0 && a < kMaxDistance)) throw DomainError("retraction level must lie in (0, sqrt6/6)");
  x_lo_ = std::pow(2.0, -1.0 / s) * a;
  const double x_hi = std::pow(2.0, 1.0 / s) * a;
  p0_ = outer(x_lo_);
  m0_ = outer_slope(x_lo_);
  const double drop = 1.0 - p0_;
  // kappa in [3/2, 3] keeps the cubic concave; 2 reduces it to a parabola
  for (double kappa : {2.0, 1.75, 2.5, 1.5, 3.0}) {
    x_knee_ = x_lo_ + kappa * drop / m0_;
    if (x_knee_ > x_hi) continue;
    envelope_ratio_ = verify();
    if (envelope_ratio_ <= 1.0) return;
  }
  throw DomainError("power retraction: no admissible join; decrease a");
}

PowerRetraction PowerRetraction::from_family(double a, const InversePower& family) {
  return PowerRetraction(a, family.s, family.m, family.m);
}

double PowerRetraction::lambda_s() const { return qobs::lambda_s(m_s_, M_s_, s_); }

double PowerRetraction::outer(double x) const { return (1.0 - kSqrt6 * a_) / (1.0 - kSqrt6 * x); }

double PowerRetraction::outer_slope(double x) const {
  const double den = 1.0 - kSqrt6 * x;
  return kSqrt6 * (1.0 - kSqrt6 * a_) / (den * den);
}

double PowerRetraction::join(double x, double* dx) const {
  const double h = x_knee_ - x_lo_;
  const double t = (x - x_lo_) / h;
  const double t2 = t * t, t3 = t2 * t;
  if (dx) *dx = ((6 * t2 - 6 * t) * p0_ + (3 * t2 - 4 * t + 1) * h * m0_ + (-6 * t2 + 6 * t)) / h;
  return (2 * t3 - 3 * t2 + 1) * p0_ + (t3 - 2 * t2 + t) * h * m0_ + (-2 * t3 + 3 * t2);
}

double PowerRetraction::eta(double y) const {
  if (!(y >= 0.0)) throw DomainError("potential value must be nonnegative");
  if (std::isinf(y)) return 1.0 - kSqrt6 * a_;
  if (y == 0.0) return 1.0;
  const double x = std::pow(m_s_ / y, 1.0 / s_);
  if (x >= x_knee_) return 1.0;
  if (x <= x_lo_) return outer(x);
  return join(x, nullptr);
}

double PowerRetraction::derivative(double y) const {
  if (!(y > 0.0) || std::isinf(y)) return 0.0;
  const double x = std::pow(m_s_ / y, 1.0 / s_);
  double dEdx;
  if (x >= x_knee_) return 0.0;
  if (x <= x_lo_) dEdx = outer_slope(x);
  else join(x, &dEdx);
  return dEdx * (-x / (s_ * y));
}

double PowerRetraction::envelope(double y) const {
  return kPowerEnvelopeConstant * std::pow(m_s_, 1.0 / s_) / s_ * std::pow(y, -1.0 / s_ - 1.0);
}

double PowerRetraction::cap(double y) const {
  const double x = std::pow(m_s_ / y, 1.0 / s_);
  if (x >= a_) return 1.0;
  return outer(x);
}

double PowerRetraction::closeness_constant() const { return kSqrt6; }

double PowerRetraction::verify() const {
  // band plus a stretch of the outer branch
  const double lo = std::log(lower_edge()), hi = std::log(upper_edge() * 1e6);
  double worst = 0.0, last = 1.0;
  for (int i = 0; i <= kVerifySamples; ++i) {
    const double y = std::exp(lo + (hi - lo) * i / kVerifySamples);
    const double v = eta(y);
    if (v > last + 1e-15 || v > cap(y) + 1e-14) return kInfinity;
    last = v;
    worst = std::max(worst, std::abs(derivative(y)) / envelope(y));
  }
  return worst;
}

double tilde_eta_a(double y, double a, const InversePower& family) {
  return PowerRetraction::from_family(a, family).eta(y);
}

QTensor tilde_h_a(const QTensor& Q, const PowerRetraction& r, const PotentialSpec& spec) {
  if (!std::holds_alternative<InversePower>(spec.family)) throw InvalidInput("tilde_h_a needs an inverse-power potential");
  if (classify(Q) == Region::Outside) throw DomainError("tilde_h_a: tensor outside the physical set");
  return r.eta(value(spec, Q)) * Q;
}

QTensor tilde_h_a(const QTensor& Q, double a, const PotentialSpec& spec) {
  if (!std::holds_alternative<InversePower>(spec.family)) throw InvalidInput("tilde_h_a needs an inverse-power potential");
  return tilde_h_a(Q, PowerRetraction::from_family(a, std::get<InversePower>(spec.family)), spec);
}

// ---------------------------------------------------------------------------
// logarithmic join
// ---------------------------------------------------------------------------

LogRetraction::LogRetraction(double a, double k0, double m0, double Lambda0) : a_(a), k0_(k0), m0_(m0), L0_(Lambda0) {
  if (!(k0 > 0.0) || !(Lambda0 >= 1.0)) throw DomainError("need k0 > 0 and Lambda0 >= 1");
  if (!(a > 0.0 && a < 1.0) || !(kSqrt6 * Lambda0 * a < 1.0))
    throw DomainError("retraction level too large for the logarithmic join");
  hi_ = k0 * std::abs(std::log(a)) + m0;
  far_ = (1.0 - kSqrt6 * L0_ * a) / (1.0 - kSqrt6 * a);
  // compress the join toward the lower edge, where the envelope is wider
  for (double frac : {1.0, 0.75, 0.5, 0.35, 0.25, 0.15, 0.1}) {
    frac_ = frac;
    envelope_ratio_ = verify();
    if (envelope_ratio_ <= 1.0) return;
  }
  throw DomainError("logarithmic retraction: derivative envelope violated; decrease a");
}

LogRetraction LogRetraction::from_family(double a, const Logarithmic& family) {
  return LogRetraction(a, family.k, family.c, lambda_0(family.k, family.c, family.c));
}

double LogRetraction::eta(double y) const {
  if (std::isnan(y)) throw DomainError("potential value is NaN");
  const double lo = lower_edge();
  if (y <= lo) return 1.0;
  const double w = frac_ * (hi_ - lo);
  if (y >= lo + w) return far_;
  return 1.0 - (1.0 - far_) * smoothstep((y - lo) / w);
}

double LogRetraction::derivative(double y) const {
  const double lo = lower_edge();
  const double w = frac_ * (hi_ - lo);
  if (!(y > lo && y < lo + w)) return 0.0;
  const double t = (y - lo) / w;
  return -(1.0 - far_) * 6.0 * t * (1.0 - t) / w;
}

double LogRetraction::envelope(double y) const { return kLogEnvelopeConstant * L0_ * std::exp(-y / k0_); }

double LogRetraction::verify() const {
  const double lo = lower_edge();
  double worst = 0.0;
  for (int i = 0; i <= kVerifySamples; ++i) {
    const double y = lo + (hi_ - lo) * i / kVerifySamples;
    worst = std::max(worst, std::abs(derivative(y)) / envelope(y));
  }
  return worst;
}

double hat_eta_a(double y, double a, double k0, double m0, double Lambda0) {
  return LogRetraction(a, k0, m0, Lambda0).eta(y);
}

QTensor hat_h_a(const QTensor& Q, const LogRetraction& r, const PotentialSpec& spec) {
  if (classify(Q) == Region::Outside) throw DomainError("hat_h_a: tensor outside the physical set");
  return r.eta(value(spec, Q)) * Q;
}

QTensor hat_h_a(const QTensor& Q, double a, const PotentialSpec& spec) {
  if (!std::holds_alternative<Logarithmic>(spec.family)) throw InvalidInput("hat_h_a needs a logarithmic potential");
  return hat_h_a(Q, LogRetraction::from_family(a, std::get<Logarithmic>(spec.family)), spec);
}

// ---------------------------------------------------------------------------
// comparison fields
// ---------------------------------------------------------------------------

Retraction Retraction::distance(double a) {
  if (!(a >= 0.0 && a < kMaxDistance)) throw DomainError("retraction level must lie in [0, sqrt6/6)");
  return Retraction(a, PotentialSpec{}, std::monostate{});
}

Retraction Retraction::power(double a, const PotentialSpec& spec) {
  if (!std::holds_alternative<InversePower>(spec.family)) throw InvalidInput("power retraction needs an inverse-power potential");
  return Retraction(a, spec, PowerRetraction::from_family(a, std::get<InversePower>(spec.family)));
}

Retraction Retraction::log(double a, const PotentialSpec& spec) {
  if (!std::holds_alternative<Logarithmic>(spec.family)) throw InvalidInput("log retraction needs a logarithmic potential");
  return Retraction(a, spec, LogRetraction::from_family(a, std::get<Logarithmic>(spec.family)));
}

QTensor Retraction::apply(const QTensor& Q) const {
  if (const auto* p = std::get_if<PowerRetraction>(&impl_)) return tilde_h_a(Q, *p, spec_);
  if (const auto* l = std::get_if<LogRetraction>(&impl_)) return hat_h_a(Q, *l, spec_);
  if (a_ == 0.0) return Q;
  return h_a(Q, a_);
}

double comparison_cutoff(const Vec3& x, double inner, double outer) {
  if (!(outer > 0.0 && outer < inner && inner < 0.5)) throw InvalidInput("need 0 < outer < inner < 1/2");
  double rho = 1.0;
  for (int c = 0; c < 3; ++c) {
    const double t = std::min(x[c], 1.0 - x[c]);
    if (t <= outer) return 0.0;
    if (t < inner) {
      const double u = (t - outer) / (inner - outer);
      rho *= u * u * u * (u * (6.0 * u - 15.0) + 10.0);
    }
  }
  return rho;
}

QField comparison_field(const QField& field, const Retraction& r, double inner, double outer) {
  QField out = field;
  const Grid& g = field.grid();
  for (int i = 1; i <= g.n; ++i)
    for (int j = 1; j <= g.n; ++j)
      for (int k = 1; k <= g.n; ++k) {
        const double rho = comparison_cutoff(g.position(i, j, k), inner, outer);
        if (rho == 0.0) continue;
        const QTensor q = field.at(i, j, k);
        const QTensor moved = r.apply(q);
        if (moved == q) continue;
        out.set(i, j, k, rho * moved + (1.0 - rho) * q);
      }
  return out;
}

}  // namespace qobs
