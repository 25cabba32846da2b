#include "qobs/app/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "qobs/app/commands.hpp"
#include "qobs/app/experiment.hpp"
#include "qobs/checkpoint.hpp"
#include "qobs/errors.hpp"
#include "qobs/exponents.hpp"
#include "qobs/qtensor.hpp"
#include "qobs/regularize.hpp"
#include "qobs/retract.hpp"
#include "qobs/sampling.hpp"

namespace qobs::app {

namespace {

constexpr double kThird = 1.0 / 3.0;

std::size_t pick(VerifyLevel level, std::size_t quick, std::size_t full) {
  return level == VerifyLevel::Full ? full : quick;
}

Metric at_most(std::string name, double value, double limit) { return {std::move(name), value, limit, true}; }
Metric at_least(std::string name, double value, double limit) { return {std::move(name), value, limit, false}; }

// Residual of a tensor claimed to lie on the obstacle boundary.
double boundary_residual(const QTensor& p) {
  const auto l = eigenvalues(p);
  return std::max(std::abs(l[0] + kThird), std::max(0.0, l[2] - 2.0 * kThird));
}

CheckResult distance_oracle(VerifyLevel level) {
  const std::size_t samples = pick(level, 1000, 10000);
  Rng rng(101);
  double worst = 0.0, on_boundary = 0.0, realized = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const QTensor q = random_interior(rng);
    const double d = distance(q);
    worst = std::max(worst, std::abs(d - brute_force_distance(q, 20, 1000 + i)));
    const QTensor p = nearest_obstacle_point(q);
    on_boundary = std::max(on_boundary, boundary_residual(p));
    realized = std::max(realized, std::abs((q - p).norm() - d));
  }
  CheckResult r;
  r.name = "distance oracle equivalence";
  r.metrics = {at_most("max |distance - brute force|", worst, 1e-6),
               at_most("max nearest-point boundary residual", on_boundary, 1e-10),
               at_most("max | |Q - P| - distance |", realized, 1e-12)};
  r.time_limit = 60.0;
  r.detail = std::to_string(samples) + " random interior tensors, 20 restarts each";
  return r;
}

CheckResult norm_inequalities(VerifyLevel level) {
  const std::size_t samples = pick(level, 10000, 1000000);
  Rng rng(102);
  double norm_min = kInfinity, div_min = kInfinity;
  for (std::size_t i = 0; i < samples; ++i) {
    norm_min = std::min(norm_min, norm2_slack(random_traceless(rng)));
    div_min = std::min(div_min, div_slack(random_traceless(rng), random_traceless(rng), random_traceless(rng)));
  }
  // Equality cases: a repeated eigenvalue for the spectral bound; the one-parameter
  // family below for the divergence bound.
  double norm_eq = 0.0, div_eq = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double a = uniform(rng, -1.0, 1.0);
    norm_eq = std::max(norm_eq, std::abs(norm2_slack(with_eigenvalues({a, a, -2 * a}, random_rotation(rng)))));
    const double x = uniform(rng, -1, 1), y = uniform(rng, -1, 1), z = uniform(rng, -1, 1);
    Mat3 M, N, P;
    M << x, 0.75 * y, 0.75 * z, 0.75 * y, -0.5 * x, 0, 0.75 * z, 0, -0.5 * x;
    N << -0.5 * y, 0.75 * x, 0, 0.75 * x, y, 0.75 * z, 0, 0.75 * z, -0.5 * y;
    P << -0.5 * z, 0, 0.75 * x, 0, -0.5 * z, 0.75 * y, 0.75 * x, 0.75 * y, z;
    div_eq = std::max(div_eq,
                      std::abs(div_slack(QTensor::from_matrix(M), QTensor::from_matrix(N), QTensor::from_matrix(P))));
  }
  CheckResult r;
  r.name = "norm and divergence inequalities";
  r.metrics = {at_least("min spectral-norm slack", norm_min, -1e-12), at_least("min divergence slack", div_min, -1e-12),
               at_most("max |slack| at spectral equality", norm_eq, 1e-12),
               at_most("max |slack| at divergence equality", div_eq, 1e-12)};
  r.time_limit = 30.0;
  r.detail = std::to_string(samples) + " random tensors and triples, 1000 equality configurations each";
  return r;
}

CheckResult exponent_formula() {
  double worst = 0.0;
  std::vector<double> positive;
  const double lo = std::log(0.01), hi = std::log(50.6);
  for (int i = 0; i < 200; ++i) {
    // (-0.59, 50]: a log grid shifted by 0.6 covers both signs of A.
    const double A = std::exp(lo + (hi - lo) * i / 199.0) - 0.6;
    if (A == 0.0) continue;
    worst = std::max(worst, std::abs(p_of_A(A).pA - p_sup_oracle(A)));
    if (A > 0) positive.push_back(A);
  }
  const double b1 = p_breakpoint_low(), b2 = p_breakpoint_high();
  const double jump = std::max({std::abs(p_branch_value(b1, PBranch::Endpoint) - p_branch_value(b1, PBranch::Interior)),
                                std::abs(p_branch_value(b2, PBranch::Interior) - p_branch_value(b2, PBranch::Origin)),
                                std::abs(p_of_A(b1 - 1e-13).pA - p_of_A(b1 + 1e-13).pA),
                                std::abs(p_of_A(b2 - 1e-13).pA - p_of_A(b2 + 1e-13).pA)});
  for (double A = 1e-3; A < 60; A *= 1.01) positive.push_back(A);
  std::sort(positive.begin(), positive.end());
  double non_decreasing = 0;
  for (std::size_t i = 1; i < positive.size(); ++i)
    if (positive[i] > positive[i - 1]) non_decreasing += p_of_A(positive[i]).pA >= p_of_A(positive[i - 1]).pA;
  CheckResult r;
  r.name = "p(A) closed form against numerical supremum";
  r.metrics = {at_most("max |p_of_A - oracle|", worst, 1e-8), at_most("max jump at breakpoints", jump, 1e-10),
               at_most("non-decreasing steps of p over A > 0", non_decreasing, 0.0)};
  r.time_limit = 10.0;
  r.detail = "200 log-spaced A in (-0.59, 50]; monotonicity on " + std::to_string(positive.size()) + " A > 0 values";
  return r;
}

CheckResult regularization(VerifyLevel level) {
  const std::size_t points = pick(level, 200, 1000);
  const std::size_t pairs = pick(level, 2000, 10000);
  Rng rng(104);
  const PotentialSpec power{InversePower{1.0, 1.0}, 0.0};
  const PotentialSpec log{Logarithmic{1.0, 0.0}, 0.0};
  double lower = kInfinity, upper = -kInfinity;
  for (const auto& spec : {power, log}) {
    for (double eps : {1e-1, 1e-2}) {
      const RegularizedPotential reg(spec, eps, EnvelopeMethod::Tangent);
      const double d_eps = reg.sublevel_threshold();
      for (std::size_t i = 0; i < points; ++i) {
        const QTensor q = random_at_distance(rng, uniform(rng, d_eps, kMaxDistance));
        const double f = value(spec, q), v = reg.value(q);
        lower = std::min(lower, v - (f - 2 * eps));
        upper = std::max(upper, v - f);
      }
    }
  }

  double convex = kInfinity;
  const RegularizedPotential tangent(power, 0.1, EnvelopeMethod::Tangent);
  const RegularizedPotential moreau(power, 0.01, EnvelopeMethod::Moreau);
  for (std::size_t i = 0; i < pairs; ++i) {
    const QTensor a = random_traceless(rng, 0.3), b = random_traceless(rng, 0.3);
    for (const RegularizedPotential* reg : {&tangent, &moreau})
      convex = std::min(convex, 0.5 * (reg->value(a) + reg->value(b)) - reg->value(0.5 * (a + b)));
  }

  // Sup error over {d >= 0.1} along a decreasing epsilon sequence.
  std::vector<QTensor> compact;
  for (std::size_t i = 0; i < 200; ++i) compact.push_back(random_at_distance(rng, uniform(rng, 0.1, kMaxDistance)));
  double non_decreasing = 0;
  std::ostringstream errors;
  errors.precision(3);
  for (EnvelopeMethod method : {EnvelopeMethod::Tangent, EnvelopeMethod::Moreau}) {
    double last = kInfinity;
    errors << " " << to_string(method) << ":";
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
      const RegularizedPotential reg(power, eps, method);
      double err = 0.0;
      for (const auto& q : compact) err = std::max(err, std::abs(reg.value(q) - value(power, q)));
      non_decreasing += err >= last;
      errors << " " << err;
      last = err;
    }
  }
  CheckResult r;
  r.name = "regularization sandwich and convexity";
  r.metrics = {at_least("min value_eps - (f_b - 2 eps)", lower, -1e-6), at_most("max value_eps - f_b", upper, 0.0),
               at_least("min midpoint convexity slack", convex, -1e-8),
               at_most("non-decreasing steps of the sup error along eps", non_decreasing, 0.0)};
  r.detail = std::to_string(points) + " points per (family, eps), " + std::to_string(pairs) +
             " convexity pairs; sup errors" + errors.str();
  return r;
}

QField random_field(const Grid& g, std::uint64_t seed) {
  Rng rng(seed);
  QField f(g);
  for (auto& c : f.data()) c = random_traceless(rng, 0.05).coeffs();
  return f;
}

CheckResult gradient_check(VerifyLevel level, int threads) {
  const std::size_t fields = pick(level, 4, 20);
  const Grid grid(8);
  double worst = 0.0;
  for (double A : {0.0, 0.5}) {
    SolverConfig quad;
    quad.A = A;
    quad.threads = threads;
    SolverConfig barrier = quad;
    BulkModel bulk;
    bulk.spec.family = InversePower{1.0, 1.0};
    bulk.epsilon = 0.02;
    barrier.bulk = bulk;
    for (const SolverConfig* cfg : {&quad, &barrier}) {
      for (std::size_t s = 0; s < fields; ++s) {
        const QField f = random_field(grid, 500 + s);
        QField dir(grid);
        Rng rng(900 + s);
        for (int i = 1; i <= grid.n; ++i)
          for (int j = 1; j <= grid.n; ++j)
            for (int k = 1; k <= grid.n; ++k) dir.set(i, j, k, random_traceless(rng));
        const QField g = energy_gradient(f, *cfg);
        double analytic = 0.0;
        for (std::size_t p = 0; p < g.data().size(); ++p) analytic += g.data()[p].dot(dir.data()[p]);
        auto e = [&](double t) {
          QField x = f;
          for (std::size_t p = 0; p < x.data().size(); ++p) x.data()[p] += t * dir.data()[p];
          return energy(x, *cfg).total;
        };
        // Fourth-order stencil; the Moreau envelope is only C^{1,1}.
        const double t = 1e-6;
        const double numeric = (8 * (e(t) - e(-t)) - (e(2 * t) - e(-2 * t))) / (12 * t);
        worst = std::max(worst, std::abs(analytic - numeric) / std::max(std::abs(analytic), 1e-12));
      }
    }
  }
  CheckResult r;
  r.name = "discrete gradient against finite differences";
  r.metrics = {at_most("max relative directional-derivative mismatch", worst, 1e-6)};
  r.detail = std::to_string(fields) + " fields per case; A in {0, 0.5}; quadratic and Moreau barrier (eps 0.02)";
  return r;
}

struct RunCache {
  std::map<int, RunArtifacts> twist;
};

const RunArtifacts& twist_run(VerifyLevel level, int threads, RunCache& cache) {
  const int n = level == VerifyLevel::Full ? 16 : 8;
  auto it = cache.twist.find(n);
  if (it == cache.twist.end()) it = cache.twist.emplace(n, run_experiment(a0_twist_experiment(n), threads)).first;
  return it->second;
}

CheckResult twist_emptiness(VerifyLevel level, int threads, RunCache& cache) {
  const RunArtifacts& run = twist_run(level, threads, cache);
  const double d = min_distance(run.field, kDefaultWindowMargin).value;
  CheckResult r;
  r.name = "A = 0 twist stays away from the obstacle";
  r.metrics = {at_least("converged", run.converged ? 1.0 : 0.0, 1.0),
               at_least("min distance over central half-cube (pinned)", d, kTwistDistanceFloor),
               at_least("min distance over central half-cube (floor)", d, 0.02)};
  r.time_limit = 600.0;
  r.detail = "n = " + std::to_string(run.field.n()) + ", Ball-Majumdar bulk, eps 1e-1 -> 1e-3, " +
             std::to_string(run.summary.at("iterations").get<int>()) + " iterations";
  return r;
}

CheckResult retraction(VerifyLevel level) {
  const std::size_t samples = pick(level, 10000, 100000);
  Rng rng(107);
  auto sample = [&](std::size_t i) {
    return i % 2 ? random_interior(rng) : random_at_distance(rng, log_uniform(rng, 1e-8, kMaxDistance));
  };
  double h_err = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const QTensor q = sample(i);
    const double a = uniform(rng, 1e-4, 0.4);
    h_err = std::max(h_err, std::abs(distance(h_a(q, a)) - std::max(distance(q), a)));
  }

  double tilde_moved = 0.0, tilde_floor = kInfinity;
  const std::size_t per = std::max<std::size_t>(samples / 20, 100);
  for (const auto& fam : {InversePower{1, 1}, InversePower{2, 0.5}, InversePower{0.3, 3}}) {
    const PotentialSpec spec{fam, 0.0};
    for (double a : {1e-3, 0.01, 0.04}) {
      const PowerRetraction pr = PowerRetraction::from_family(a, fam);
      for (std::size_t i = 0; i < per; ++i) {
        const QTensor q = sample(i);
        const QTensor out = tilde_h_a(q, pr, spec);
        tilde_floor = std::min(tilde_floor, distance(out) - a);
        if (distance(q) >= pr.lambda_s() * a) tilde_moved = std::max(tilde_moved, (out - q).norm());
      }
    }
  }

  double hat_drop = kInfinity;
  for (const auto& fam : {Logarithmic{1, 0}, Logarithmic{0.5, 1.0}, Logarithmic{2, -1}}) {
    const PotentialSpec spec{fam, 0.0};
    for (double a : {1e-3, 0.01, 0.05}) {
      const LogRetraction lr = LogRetraction::from_family(a, fam);
      for (std::size_t i = 0; i < per; ++i) {
        const QTensor q = random_at_distance(rng, i == 0 ? a : a * uniform(rng, 1e-6, 1.0));
        hat_drop = std::min(hat_drop, value(spec, q) - value(spec, hat_h_a(q, lr, spec)) - fam.k);
      }
    }
  }
  CheckResult r;
  r.name = "retraction exactness";
  r.metrics = {at_most("max |d(h_a Q) - max(d(Q), a)|", h_err, 1e-12),
               at_most("max |tilde_h_a Q - Q| where d >= Lambda_s a", tilde_moved, 0.0),
               at_least("min d(tilde_h_a Q) - a", tilde_floor, -1e-12),
               at_least("min potential drop of hat_h_a minus k0", hat_drop, -1e-9)};
  r.detail = std::to_string(samples) + " samples for h_a, " + std::to_string(per) + " per family and level otherwise";
  return r;
}

CheckResult synthetic_scaling() {
  const Grid grid(48);
  const double h = grid.h();
  const Vec3 center(0.5 + 0.3 * h, 0.5 - 0.2 * h, 0.5 + 0.1 * h);
  std::vector<double> levels;
  for (int j = 0; j <= 6; ++j) levels.push_back(0.2 * std::pow(0.8, j));
  const ScalingReport rep = scaling_fit(synthetic_radial_field(grid, center), levels, kDefaultWindowMargin);
  CheckResult r;
  r.name = "synthetic scaling oracle";
  r.metrics = {at_most("|beta - 3| / 3", std::abs(rep.beta - 3.0) / 3.0, 0.05),
               at_most("fit residual", rep.residual, 0.05)};
  std::ostringstream d;
  d << "n = 48, off-lattice center, levels 0.2 * 0.8^j (j = 0..6), beta = " << rep.beta;
  r.detail = d.str();
  return r;
}

CheckResult minimality(VerifyLevel level, int threads, RunCache& cache) {
  double worst = kInfinity;
  bool converged = true;
  std::ostringstream d;
  d.precision(4);
  auto probe = [&](const RunArtifacts& run, const ExperimentConfig& cfg) {
    converged = converged && run.converged;
    SolverConfig s = cfg.solver;
    s.bulk->epsilon = s.epsilon_schedule.back();
    const Objective obj(run.field.grid(), s.elastic(), s.bulk, threads);
    const DistanceWitness w = min_distance(run.field, 0.0);
    d << cfg.name << " (interior min distance " << w.value << "):";
    for (const auto& row : minimality_check(run.field, obj, {0.02, 0.05})) {
      worst = std::min(worst, row.margin());
      d << " a=" << row.a << " margin " << row.margin();
    }
    d << "; ";
  };
  const int n = level == VerifyLevel::Full ? 16 : 8;
  probe(twist_run(level, threads, cache), a0_twist_experiment(n));
  const ExperimentConfig near = supercritical_experiment();
  probe(run_experiment(near, threads), near);
  CheckResult r;
  r.name = "comparison field never beats the minimizer";
  r.metrics = {at_least("all runs converged", converged ? 1.0 : 0.0, 1.0),
               at_least("min comparison energy - converged energy", worst, -1e-9)};
  r.detail = d.str();
  return r;
}

ExperimentConfig determinism_experiment(int n) {
  ExperimentConfig c;
  c.name = "determinism";
  c.run = RunKind::Continuation;
  c.n = n;
  c.seed = 2024;
  c.solver.A = 0.5;
  BulkModel bulk;
  bulk.spec.family = InversePower{1.0, 0.2};
  bulk.epsilon = 1e-1;
  c.solver.bulk = bulk;
  c.solver.epsilon_schedule = {1e-1, 1e-2};
  c.boundary.S = 0.5;
  c.boundary.director = BoundaryData::Director::Twist;
  c.boundary.n = Vec3::UnitX();
  c.init.kind = InitKind::Random;
  c.init.noise = 0.05;
  return c;
}

CheckResult determinism(VerifyLevel level, const std::string& scratch) {
  namespace fs = std::filesystem;
  const ExperimentConfig cfg = determinism_experiment(level == VerifyLevel::Full ? 10 : 6);
  const std::vector<int> thread_counts = {1, 2, 3, 1};
  std::vector<std::vector<std::string>> contents;
  for (std::size_t r = 0; r < thread_counts.size(); ++r) {
    const std::string dir = (fs::path(scratch) / ("determinism_" + std::to_string(r))).string();
    std::vector<std::string> files;
    for (const auto& path : write_artifacts(run_experiment(cfg, thread_counts[r]), dir)) files.push_back(read_text(path));
    contents.push_back(std::move(files));
  }
  double mismatches = 0;
  for (std::size_t r = 1; r < contents.size(); ++r)
    for (std::size_t f = 0; f < contents[r].size(); ++f) mismatches += contents[r][f] != contents[0][f];
  CheckResult r;
  r.name = "determinism across runs and thread counts";
  r.metrics = {at_most("differing output files", mismatches, 0.0)};
  r.detail = "n = " + std::to_string(cfg.n) + ", threads 1, 2, 3, 1; checkpoint, sidecar, trace, scaling and summary";
  return r;
}

CheckResult dispatch(int id, VerifyLevel level, int threads, const std::string& scratch, RunCache& cache) {
  switch (id) {
    case 1: return distance_oracle(level);
    case 2: return norm_inequalities(level);
    case 3: return exponent_formula();
    case 4: return regularization(level);
    case 5: return gradient_check(level, threads);
    case 6: return twist_emptiness(level, threads, cache);
    case 7: return retraction(level);
    case 8: return synthetic_scaling();
    case 9: return minimality(level, threads, cache);
    case 10: return determinism(level, scratch);
    default: throw InvalidInput("criterion id must lie in 1.." + std::to_string(kCriteriaCount));
  }
}

CheckResult timed(int id, VerifyLevel level, int threads, const std::string& scratch, RunCache& cache) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = dispatch(id, level, threads, scratch, cache);
  } catch (const InvalidInput&) {
    throw;
  } catch (const std::exception& e) {
    r.metrics = {at_least("completed without error", 0.0, 1.0)};
    r.detail = std::string("error: ") + e.what();
  }
  r.id = id;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

VerifyLevel verify_level_from_string(const std::string& s) {
  if (s == "quick") return VerifyLevel::Quick;
  if (s == "full") return VerifyLevel::Full;
  throw ValidationError("verify level must be quick or full, got '" + s + "'");
}

const char* to_string(VerifyLevel l) { return l == VerifyLevel::Full ? "full" : "quick"; }

double Metric::slack() const {
  if (std::isnan(value)) return -kInfinity;
  return upper ? limit - value : value - limit;
}

bool CheckResult::pass() const {
  if (metrics.empty()) return false;
  for (const auto& m : metrics)
    if (!m.pass()) return false;
  return time_limit <= 0.0 || seconds <= time_limit;
}

void to_json(json& j, const Metric& m) {
  j = {{"name", m.name},
       {"value", number_to_json(m.value)},
       {"limit", number_to_json(m.limit)},
       {"bound", m.upper ? "upper" : "lower"},
       {"slack", number_to_json(m.slack())},
       {"pass", m.pass()}};
}

void to_json(json& j, const CheckResult& r) {
  j = {{"id", r.id}, {"name", r.name}, {"pass", r.pass()}, {"metrics", r.metrics}, {"seconds", r.seconds},
       {"detail", r.detail}};
  j["time_limit"] = r.time_limit > 0 ? json(r.time_limit) : json(nullptr);
}

CheckResult run_criterion(int id, VerifyLevel level, int threads, const std::string& scratch_dir) {
  RunCache cache;
  return timed(id, level, threads, scratch_dir, cache);
}

std::vector<CheckResult> run_verify(VerifyLevel level, int threads, const std::string& scratch_dir,
                                    const std::function<void(const CheckResult&)>& on_result) {
  RunCache cache;
  std::vector<CheckResult> out;
  for (int id = 1; id <= kCriteriaCount; ++id) {
    out.push_back(timed(id, level, threads, scratch_dir, cache));
    if (on_result) on_result(out.back());
  }
  return out;
}

json verify_report(VerifyLevel level, const std::vector<CheckResult>& results) {
  bool pass = !results.empty();
  for (const auto& r : results) pass = pass && r.pass();
  return {{"artifact_version", kArtifactVersion}, {"level", to_string(level)}, {"pass", pass}, {"checks", results}};
}

}  // namespace qobs::app
