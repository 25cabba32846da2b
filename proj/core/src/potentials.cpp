#include "qobs/potentials.hpp"

#include <cmath>

#include "qobs/errors.hpp"

namespace qobs {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool strictly_inside(const std::array<double, 3>& l) { return l[0] > -1.0 / 3.0 && l[2] < 2.0 / 3.0; }

}  // namespace

void PotentialSpec::validate() const {
  if (!(smoothing_tau >= 0.0) || !std::isfinite(smoothing_tau))
    throw InvalidInput("potential: smoothing_tau must be finite and >= 0");
  std::visit(Overloaded{
                 [](const InversePower& p) {
                   if (!(p.s > 0.0) || !std::isfinite(p.s)) throw InvalidInput("inverse_power: s must be > 0");
                   if (!(p.m > 0.0) || !std::isfinite(p.m)) throw InvalidInput("inverse_power: m must be > 0");
                 },
                 [](const Logarithmic& p) {
                   if (!(p.k > 0.0) || !std::isfinite(p.k)) throw InvalidInput("log: k must be > 0");
                   if (!std::isfinite(p.c)) throw InvalidInput("log: c must be finite");
                 },
                 [](const BallMajumdar& p) {
                   if (p.quad_polar < 16 || p.quad_azimuth < 16)
                     throw InvalidInput("ball_majumdar: quadrature counts must be >= 16");
                   if (!std::isfinite(p.offset)) throw InvalidInput("ball_majumdar: offset must be finite");
                 },
             },
             family);
  if (smoothing_tau > 0.0 && std::holds_alternative<BallMajumdar>(family))
    throw InvalidInput("ball_majumdar: smoothing_tau applies only to distance-based families");
}

std::string PotentialSpec::family_name() const {
  return std::visit(Overloaded{
                        [](const InversePower&) { return std::string("inverse_power"); },
                        [](const Logarithmic&) { return std::string("log"); },
                        [](const BallMajumdar&) { return std::string("ball_majumdar"); },
                    },
                    family);
}

Profile distance_profile(const PotentialFamily& family, double d) {
  if (const auto* p = std::get_if<InversePower>(&family)) {
    const double v = p->m * std::pow(d, -p->s);
    return {v, -p->s * v / d, p->s * (p->s + 1.0) * v / (d * d)};
  }
  if (const auto* p = std::get_if<Logarithmic>(&family)) {
    return {-p->k * std::log(d) + p->c, -p->k / d, p->k / (d * d)};
  }
  throw InvalidInput("distance_profile: family is not distance-based");
}

double soft_min(const std::array<double, 3>& l, double tau, std::array<double, 3>* weights) {
  if (tau <= 0.0) {
    if (weights) *weights = {1.0, 0.0, 0.0};
    return l[0];
  }
  std::array<double, 3> e;
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    e[i] = std::exp(-(l[i] - l[0]) / tau);
    sum += e[i];
  }
  if (weights)
    for (int i = 0; i < 3; ++i) (*weights)[i] = e[i] / sum;
  return l[0] - tau * std::log(sum);
}

double value(const PotentialSpec& spec, const QTensor& Q) {
  if (!Q.is_finite()) throw InvalidInput("value: non-finite tensor");
  if (const auto* bm = std::get_if<BallMajumdar>(&spec.family)) return bm_value(*bm, Q);
  const auto l = eigenvalues(Q);
  if (!strictly_inside(l)) return kInfinity;
  const double d = kSqrt6Half * (soft_min(l, spec.smoothing_tau) + 1.0 / 3.0);
  if (!(d > 0.0)) return kInfinity;
  return distance_profile(spec.family, d).value;
}

QTensor gradient(const PotentialSpec& spec, const QTensor& Q) {
  if (!Q.is_finite()) throw InvalidInput("gradient: non-finite tensor");
  if (const auto* bm = std::get_if<BallMajumdar>(&spec.family)) {
    if (!strictly_inside(eigenvalues(Q))) throw DomainError("gradient: tensor not in the open physical set");
    return QTensor(bm_dual(*bm, Q).multiplier);
  }
  const Spectrum sp = eigen(Q);
  if (!strictly_inside(sp.lambdas)) throw DomainError("gradient: tensor not in the open physical set");
  if (spec.smoothing_tau == 0.0 && sp.lambdas[1] - sp.lambdas[0] < kDegenerateGap)
    throw DegenerateEigenvalue("gradient: smallest eigenvalue is not simple");
  std::array<double, 3> w;
  const double d = kSqrt6Half * (soft_min(sp.lambdas, spec.smoothing_tau, &w) + 1.0 / 3.0);
  if (!(d > 0.0)) throw DomainError("gradient: smoothed distance is not positive");
  const double slope = distance_profile(spec.family, d).d1 * kSqrt6Half;
  Mat3 m = Mat3::Zero();
  for (int i = 0; i < 3; ++i) m += w[i] * sp.frame[i] * sp.frame[i].transpose();
  return slope * QTensor::from_matrix(m);
}

}  // namespace qobs
