#include "qobs/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qobs/errors.hpp"

namespace qobs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_coercive_A(double A) {
  if (!std::isfinite(A)) throw InvalidInput("A must be finite");
  if (A <= kMinA) throw DomainError("A = " + std::to_string(A) + " is not above -3/5");
}

// Smallest admissible mixing weight.
double omega_min(double A) { return std::max(0.0, -5.0 * A / 3.0); }

}  // namespace

const char* to_string(PBranch b) {
  switch (b) {
    case PBranch::Zero: return "zero";
    case PBranch::Endpoint: return "endpoint";
    case PBranch::Interior: return "interior";
    case PBranch::Origin: return "origin";
  }
  return "?";
}

double p_breakpoint_low() { return std::sqrt(18.0 / 5.0); }
double p_breakpoint_high() { return 0.6 + std::sqrt(18.0 / 5.0); }

double p_of_A_omega(double A, double omega) {
  require_coercive_A(A);
  if (!(omega >= 0.0 && omega <= 1.0)) throw DomainError("omega outside [0,1]");
  if (0.6 * omega + A < -1e-14) throw DomainError("omega below -5A/3");
  if (A == 0.0) return kInf;
  const double y = std::max(0.0, omega + 5.0 * A / 3.0);
  const double disc = 81.0 / 25.0 * y * y + 18.0 / 5.0 * A * A * y * (1.0 - omega);
  return 1.0 + (1.8 * y + std::sqrt(std::max(0.0, disc))) / (2.0 * A * A);
}

double p_branch_value(double A, PBranch branch) {
  switch (branch) {
    case PBranch::Zero: return kInf;
    case PBranch::Endpoint: return 1.0 + 3.0 / A + 9.0 / (5.0 * A * A);
    case PBranch::Interior: return 1.0 + (3.0 + 5.0 * A) / (2.0 * std::sqrt(10.0) * A - 6.0);
    case PBranch::Origin: return 1.0 + (3.0 + std::sqrt(9.0 + 6.0 * A)) / (2.0 * A);
  }
  return kInf;
}

ExponentTable p_of_A(double A) {
  require_coercive_A(A);
  ExponentTable t;
  t.A = A;
  if (A == 0.0) {
    t.branch = PBranch::Zero;
  } else if (A <= p_breakpoint_low()) {
    t.branch = PBranch::Endpoint;
  } else if (A <= p_breakpoint_high()) {
    t.branch = PBranch::Interior;
  } else {
    t.branch = PBranch::Origin;
  }
  t.pA = p_branch_value(A, t.branch);
  t.sA = A == 0.0 ? 0.0 : 2.0 / (2.0 * t.pA - 1.0);
  t.qMax = 6.0 * t.pA;
  return t;
}

double p_sup_oracle(double A, int grid) {
  require_coercive_A(A);
  if (A == 0.0) return kInf;
  grid = std::max(grid, 2);
  const double lo = omega_min(A), hi = 1.0;
  const auto f = [A](double w) { return p_of_A_omega(A, w); };

  int best = 0;
  double best_val = -kInf;
  const double step = (hi - lo) / grid;
  for (int i = 0; i <= grid; ++i) {
    const double v = f(i == grid ? hi : lo + i * step);
    if (v > best_val) best_val = v, best = i;
  }

  // golden section on the bracketing cell pair
  double a = std::max(lo, lo + (best - 1) * step), b = std::min(hi, lo + (best + 1) * step);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-12) {
    if (fc > fd) {
      b = d, d = c, fd = fc;
      c = b - g * (b - a), fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + g * (b - a), fd = f(d);
    }
  }
  return std::max({best_val, fc, fd, f(a), f(b)});
}

double s_of_A(double A) { return p_of_A(A).sA; }
double q_max(double A) { return p_of_A(A).qMax; }

DimensionBound dim_bound_basic(double s, double A) {
  if (!(s > 0.0)) throw DomainError("s must be positive");
  const double sA = s_of_A(A);
  if (s > sA) return {0.0, true};
  return {3.0 * (1.0 - s / sA), false};
}

DimensionBound dim_bound_improved_power(double s, double A) {
  if (!(s > 0.0)) throw DomainError("s must be positive");
  const ExponentTable t = p_of_A(A);
  if (s > t.sA) return {0.0, true};
  if (t.pA <= 2.0) return {3.0 * (1.0 - (3.0 * s + 2.0) / (3.0 * t.sA + 2.0)), false};
  return {3.0 - s / t.sA - 2.0 * (2.0 + s) / (2.0 + t.sA), false};
}

double dim_bound_improved_log(double k0, double K0, double A) {
  if (!(k0 > 0.0) || !(K0 >= k0)) throw DomainError("need 0 < k0 <= K0");
  const double p = p_of_A(A).pA;
  if (std::isinf(K0)) return 3.0;
  const double r = (K0 - k0) / k0;
  if (std::isinf(p)) {
    // limit p -> inf of the p > 2 branch
    return r > 0.0 ? 3.0 : 1.0;
  }
  if (p <= 2.0) return 3.0 - (6.0 * p - 3.0) / (6.0 * p * r + 2.0 * p + 2.0);
  return 3.0 - (2.0 * p - 1.0) / (p * (r * p + 1.0));
}

double lambda_s(double m_s, double M_s, double s) {
  if (!(m_s > 0.0) || !(M_s >= m_s) || !(s > 0.0)) throw DomainError("need 0 < m_s <= M_s and s > 0");
  return std::pow(2.0 * M_s / m_s, 1.0 / s);
}

double lambda_0(double k0, double m0, double M0) {
  if (!(k0 > 0.0) || !(M0 >= m0)) throw DomainError("need k0 > 0 and m0 <= M0");
  return std::exp(1.0 + (M0 - m0) / k0);
}

CoercivityReport coercivity_check(double L1, double L2, double L3) {
  CoercivityReport r;
  r.margins[0] = L1 + L3;
  r.margins[1] = 2.0 * L1 - L3;
  r.margins[2] = L1 + 5.0 / 3.0 * L2 + L3 / 6.0;
  r.coercive = r.margins[0] > 0.0 && r.margins[1] > 0.0 && r.margins[2] > 0.0;
  return r;
}

}  // namespace qobs
