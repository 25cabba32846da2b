#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace qobs::detail {

struct NelderMeadOptions {
  double initial_step = 0.2;
  double x_tol = 1e-11;
  double f_tol = 1e-15;
  int max_evals = 4000;
};

template <std::size_t N>
struct NelderMeadResult {
  std::array<double, N> x{};
  double f = 0.0;
  int evals = 0;
};

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
template <std::size_t N, class F>
NelderMeadResult<N> nelder_mead(F&& f, std::array<double, N> x0, const NelderMeadOptions& opt = {}) {
  using Point = std::array<double, N>;
  std::array<Point, N + 1> s;
  std::array<double, N + 1> fv;
  s[0] = x0;
  for (std::size_t i = 0; i < N; ++i) {
    s[i + 1] = x0;
    s[i + 1][i] += opt.initial_step;
  }
  int evals = 0;
  for (std::size_t i = 0; i <= N; ++i) {
    fv[i] = f(s[i]);
    ++evals;
  }
  std::array<std::size_t, N + 1> order;
  auto combine = [](const Point& a, const Point& b, double t) {
    Point r;
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + t * (b[i] - a[i]);
    return r;
  };

  while (evals < opt.max_evals) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order[0], worst = order[N], second = order[N - 1];

    double extent = 0.0;
    for (std::size_t i = 0; i <= N; ++i)
      for (std::size_t j = 0; j < N; ++j) extent = std::max(extent, std::abs(s[i][j] - s[best][j]));
    if (extent < opt.x_tol && fv[worst] - fv[best] < opt.f_tol) break;

    Point centroid{};
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < N; ++j) centroid[j] += s[i][j] / static_cast<double>(N);
    }
    const Point xr = combine(centroid, s[worst], -1.0);
    const double fr = f(xr);
    ++evals;
    if (fr < fv[best]) {
      const Point xe = combine(centroid, s[worst], -2.0);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) { s[worst] = xe; fv[worst] = fe; }
      else { s[worst] = xr; fv[worst] = fr; }
      continue;
    }
    if (fr < fv[second]) {
      s[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    const Point xc = outside ? combine(centroid, xr, 0.5) : combine(centroid, s[worst], 0.5);
    const double fc = f(xc);
    ++evals;
    if (fc < (outside ? fr : fv[worst])) {
      s[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == best) continue;
      s[i] = combine(s[best], s[i], 0.5);
      fv[i] = f(s[i]);
      ++evals;
    }
  }
  const auto it = std::min_element(fv.begin(), fv.end());
  NelderMeadResult<N> r;
  r.x = s[static_cast<std::size_t>(it - fv.begin())];
  r.f = *it;
  r.evals = evals;
  return r;
}

}  // namespace qobs::detail
