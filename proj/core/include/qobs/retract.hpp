#pragma once

#include <cmath>
#include <variant>

#include "qobs/field.hpp"
#include "qobs/potentials.hpp"

namespace qobs {

/// min{1, (1 - sqrt6 a) / (1 - sqrt6 x)}.
double eta_a(double x, double a);

/// eta_a(d(Q)) Q: pushes tensors closer than a to the obstacle out to distance a.
/// Throws DomainError outside the physical set.
QTensor h_a(const QTensor& Q, double a);

/// Constant in the derivative envelope of the power-potential join.
inline constexpr double kPowerEnvelopeConstant = 8.0;

/// C^1 nonincreasing function of the potential value that equals 1 for small values and
/// the distance retraction evaluated at (m_s / y)^(1/s) for large ones. The join is a
/// clamped cubic Hermite in the variable x = (m_s / y)^(1/s).
class PowerRetraction {
 public:
  PowerRetraction(double a, double s, double m_s, double M_s);
  /// Growth constants of m d^-s are m_s = M_s = m.
  static PowerRetraction from_family(double a, const InversePower& family);

  double a() const { return a_; }
  double s() const { return s_; }
  /// (2 M_s / m_s)^(1/s); the map is the identity for d >= lambda_s() a.
  double lambda_s() const;

  double lower_edge() const { return m_s_ / (2.0 * std::pow(a_, s_)); }
  double upper_edge() const { return 2.0 * m_s_ / std::pow(a_, s_); }
  /// Potential value below which the map is exactly 1 (inside the band).
  double knee_value() const { return m_s_ * std::pow(x_knee_, -s_); }

  double eta(double y) const;
  double derivative(double y) const;
  /// (C m_s^(1/s) / s) y^(-1/s - 1).
  double envelope(double y) const;
  /// min{1, (1 - sqrt6 a) / (1 - sqrt6 (m_s/y)^(1/s))}.
  double cap(double y) const;

  /// Worst |eta'| / envelope over the join, measured at construction.
  double envelope_ratio() const { return envelope_ratio_; }
  /// sup (1 - eta) / a.
  double closeness_constant() const;

 private:
  double outer(double x) const;
  double outer_slope(double x) const;
  double join(double x, double* dx) const;
  double verify() const;

  double a_, s_, m_s_, M_s_;
  double x_lo_, x_knee_;
  double p0_, m0_;
  double envelope_ratio_ = 0.0;
};

/// Constant in the derivative envelope of the logarithmic join.
inline constexpr double kLogEnvelopeConstant = 4.0;

/// C^1 nonincreasing function equal to 1 below k0|ln a| + m0 - exp(m0/k0) and to
/// (1 - sqrt6 L0 a)/(1 - sqrt6 a) above k0|ln a| + m0.
class LogRetraction {
 public:
  LogRetraction(double a, double k0, double m0, double Lambda0);
  /// -k ln d + c has k0 = K0 = k and m0 = M0 = c, hence Lambda0 = e.
  static LogRetraction from_family(double a, const Logarithmic& family);

  double a() const { return a_; }
  double Lambda0() const { return L0_; }
  double lower_edge() const { return hi_ - std::exp(m0_ / k0_); }
  double upper_edge() const { return hi_; }
  double far_value() const { return far_; }

  double eta(double y) const;
  double derivative(double y) const;
  /// 4 Lambda0 exp(-y / k0).
  double envelope(double y) const;

  double envelope_ratio() const { return envelope_ratio_; }
  double closeness_constant() const { return (1.0 - far_) / a_; }
  /// Fraction of the band used by the join (1 unless compressed to meet the envelope).
  double join_fraction() const { return frac_; }

 private:
  double verify() const;

  double a_, k0_, m0_, L0_;
  double hi_, far_;
  double frac_ = 1.0;
  double envelope_ratio_ = 0.0;
};

double tilde_eta_a(double y, double a, const InversePower& family);
QTensor tilde_h_a(const QTensor& Q, const PowerRetraction& r, const PotentialSpec& spec);
QTensor tilde_h_a(const QTensor& Q, double a, const PotentialSpec& spec);

double hat_eta_a(double y, double a, double k0, double m0, double Lambda0);
QTensor hat_h_a(const QTensor& Q, const LogRetraction& r, const PotentialSpec& spec);
QTensor hat_h_a(const QTensor& Q, double a, const PotentialSpec& spec);

/// Retraction used to build comparison fields.
class Retraction {
 public:
  static Retraction distance(double a);
  /// spec must hold an InversePower family.
  static Retraction power(double a, const PotentialSpec& spec);
  /// spec must hold a Logarithmic family.
  static Retraction log(double a, const PotentialSpec& spec);

  QTensor apply(const QTensor& Q) const;
  double a() const { return a_; }

 private:
  Retraction(double a, PotentialSpec spec, std::variant<std::monostate, PowerRetraction, LogRetraction> impl)
      : a_(a), spec_(std::move(spec)), impl_(std::move(impl)) {}

  double a_;
  PotentialSpec spec_;
  std::variant<std::monostate, PowerRetraction, LogRetraction> impl_;
};

/// rho h(Q) + (1 - rho) Q with a C^2 cutoff rho equal to 1 on the central box
/// [inner, 1-inner]^3 and to 0 outside [outer, 1-outer]^3 (0 < outer < inner < 1/2).
/// The boundary layer is copied unchanged.
QField comparison_field(const QField& field, const Retraction& r, double inner_margin = 0.3,
                        double outer_margin = 0.1);

/// The cutoff used by comparison_field at a point of the unit cube.
double comparison_cutoff(const Vec3& x, double inner_margin, double outer_margin);

}  // namespace qobs
