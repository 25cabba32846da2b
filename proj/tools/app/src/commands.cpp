#include "qobs/app/commands.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "qobs/analysis.hpp"
#include "qobs/checkpoint.hpp"
#include "qobs/errors.hpp"
#include "qobs/exponents.hpp"
#include "qobs/retract.hpp"

namespace qobs::app {

namespace {

std::string header_comments(std::uint64_t hash) {
  return "# config_hash=" + hash_hex(hash) + "\n# artifact_version=" + kArtifactVersion + "\n";
}

json stage_json(double epsilon, const MinimizeResult& r, double l2, double h1) {
  return {{"epsilon", number_to_json(epsilon)},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"residual", r.residual},
          {"energy", r.energy},
          {"l2_increment", l2},
          {"h1_increment", h1},
          {"guard_retractions", r.guard_retractions},
          {"degenerate_nodes", r.degenerate_nodes}};
}

std::size_t contact_nodes(const QField& f, double tol, double margin) {
  const double h = f.grid().h();
  return static_cast<std::size_t>(std::llround(level_set_measure(f, tol, margin) / (h * h * h)));
}

std::optional<ScalingTheory> theory_for(const SolverConfig& s) {
  if (!s.bulk || s.general) return std::nullopt;
  return ScalingTheory{s.A, s.bulk->spec};
}

json dimension_json(const SolverConfig& s) {
  if (!s.bulk || s.general) return nullptr;
  const auto* ip = std::get_if<InversePower>(&s.bulk->spec.family);
  if (!ip) return nullptr;
  return {{"s", ip->s},
          {"s_of_A", number_to_json(s_of_A(s.A))},
          {"basic", dim_bound_basic(ip->s, s.A)},
          {"improved", dim_bound_improved_power(ip->s, s.A)}};
}

// The solve itself: one stage for a plain run, several for continuation.
struct Solve {
  std::vector<ContinuationStage> stages;
  SolverConfig final_cfg;
};

Solve solve(const ExperimentConfig& cfg, int threads) {
  Solve out;
  out.final_cfg = cfg.solver;
  out.final_cfg.threads = threads;
  out.final_cfg.seed = cfg.seed;
  const QField f0 = initial_field(cfg);
  if (cfg.run == RunKind::Continuation) {
    out.stages = epsilon_continuation(f0, out.final_cfg, cfg.analysis.margin);
    out.final_cfg.bulk->epsilon = cfg.solver.epsilon_schedule.back();
    out.final_cfg.epsilon_schedule.clear();
  } else {
    ContinuationStage st;
    st.epsilon = cfg.solver.bulk ? cfg.solver.bulk->epsilon : 0.0;
    st.result = minimize(f0, out.final_cfg);
    out.stages.push_back(std::move(st));
  }
  return out;
}

}  // namespace

std::vector<MinimalityRow> minimality_check(const QField& field, const Objective& objective,
                                            const std::vector<double>& levels) {
  std::vector<MinimalityRow> rows;
  const double e = objective.energy(field).total;
  for (double a : levels) {
    const QField c = comparison_field(field, Retraction::distance(a));
    rows.push_back({a, e, objective.energy(c).total});
  }
  return rows;
}

RunArtifacts run_experiment(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const Solve s = solve(cfg, threads);
  const MinimizeResult& last = s.stages.back().result;

  RunArtifacts art;
  art.field = last.field;
  art.hash = experiment_hash(cfg);
  art.converged = true;
  for (const auto& st : s.stages) art.converged = art.converged && st.result.converged;

  // Trace rows from every stage on one cumulative iteration axis.
  std::vector<TraceRow> trace;
  std::vector<std::string> comments = {"config_hash=" + hash_hex(art.hash),
                                       std::string("artifact_version=") + kArtifactVersion};
  int offset = 0;
  std::size_t guards = 0, degenerate = 0;
  json stages = json::array();
  for (std::size_t k = 0; k < s.stages.size(); ++k) {
    const auto& st = s.stages[k];
    std::ostringstream c;
    c.precision(17);
    c << "stage " << k << " epsilon=" << st.epsilon << " first_iter=" << offset;
    comments.push_back(c.str());
    for (TraceRow row : st.result.trace) {
      row.iter += offset;
      trace.push_back(row);
    }
    offset += st.result.iterations + 1;
    guards += st.result.guard_retractions;
    degenerate += st.result.degenerate_nodes;
    stages.push_back(stage_json(st.epsilon, st.result, st.l2_increment, st.h1_increment));
  }
  art.trace_csv = trace_csv(trace, comments);

  const double margin = cfg.analysis.margin;
  const ScalingReport scaling = scaling_fit(last.field, cfg.levels(), margin, theory_for(cfg.solver));
  art.scaling_csv = header_comments(art.hash) + scaling_csv(scaling);

  const Objective objective(Grid(cfg.n), s.final_cfg.elastic(), s.final_cfg.bulk, threads);
  json minimality = json::array();
  bool minimal = true;
  for (const auto& row : minimality_check(last.field, objective, cfg.analysis.comparison_levels)) {
    const bool ok = row.margin() >= -1e-9;
    minimal = minimal && ok;
    minimality.push_back({{"a", row.a},
                          {"energy", row.energy},
                          {"comparison_energy", row.comparison_energy},
                          {"margin", row.margin()},
                          {"ok", ok}});
  }

  const std::size_t contacts = contact_nodes(last.field, cfg.analysis.contact_tolerance, margin);
  json& sum = art.summary;
  sum["name"] = cfg.name;
  sum["artifact_version"] = kArtifactVersion;
  sum["config_hash"] = hash_hex(art.hash);
  sum["run"] = to_string(cfg.run);
  sum["n"] = cfg.n;
  sum["converged"] = art.converged;
  sum["iterations"] = offset - static_cast<int>(s.stages.size());
  sum["residual"] = last.residual;
  sum["energy"] = last.energy;
  sum["stages"] = stages;
  sum["min_distance"] = min_distance(last.field, margin);
  sum["min_distance_interior"] = min_distance(last.field, 0.0);
  sum["contact"] = {{"tolerance", cfg.analysis.contact_tolerance},
                    {"margin", margin},
                    {"nodes", contacts},
                    {"window_empty", contacts == 0}};
  sum["scaling"] = scaling;
  sum["minimality"] = minimality;
  sum["minimality_ok"] = minimal;
  sum["guard_retractions"] = guards;
  sum["degenerate_nodes"] = degenerate;
  if (!cfg.solver.general) sum["exponents"] = p_of_A(cfg.solver.A);
  sum["dimension_bound"] = dimension_json(cfg.solver);

  art.checkpoint = encode_checkpoint(last.field, art.hash);
  json doc = cfg;
  doc.erase("output");
  art.sidecar = {{"artifact_version", kArtifactVersion},
                 {"config_hash", hash_hex(art.hash)},
                 {"format", "QOBS checkpoint v1: u32 version, u32 n, u64 config hash, interior f64 (i,j,k,c) LE"},
                 {"n", cfg.n},
                 {"config", doc}};
  return art;
}

std::vector<std::string> write_artifacts(const RunArtifacts& a, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path d(dir);
  const std::vector<std::string> files = {(d / "field.qobs").string(), (d / "field.json").string(),
                                          (d / "trace.csv").string(), (d / "scaling.csv").string(),
                                          (d / "summary.json").string()};
  write_text(files[0], std::string(a.checkpoint.begin(), a.checkpoint.end()));
  write_json(files[1], a.sidecar);
  write_text(files[2], a.trace_csv);
  write_text(files[3], a.scaling_csv);
  write_json(files[4], a.summary);
  return files;
}

SweepArtifacts run_sweep(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  if (!cfg.sweep) throw ValidationError("sweep: the config has no sweep section");
  const SweepSpec& sw = *cfg.sweep;
  SweepArtifacts out;
  std::ostringstream csv;
  csv.precision(17);
  csv << header_comments(experiment_hash(cfg));
  csv << "axis,value,energy,min_distance,beta,iterations,converged,l2_increment,h1_increment\n";
  auto emit = [&](double value, const MinimizeResult& r, int iterations, double l2, double h1) {
    const DistanceWitness w = min_distance(r.field, cfg.analysis.margin);
    const ScalingReport sr = scaling_fit(r.field, cfg.levels(), cfg.analysis.margin);
    out.all_converged = out.all_converged && r.converged;
    csv << to_string(sw.axis) << ',' << value << ',' << r.energy.total << ',' << w.value << ',' << sr.beta << ','
        << iterations << ',' << (r.converged ? 1 : 0) << ',' << l2 << ',' << h1 << '\n';
    out.rows.push_back({{"axis", to_string(sw.axis)},
                        {"value", value},
                        {"energy", r.energy.total},
                        {"min_distance", w.value},
                        {"beta", number_to_json(sr.beta)},
                        {"iterations", iterations},
                        {"converged", r.converged},
                        {"l2_increment", l2},
                        {"h1_increment", h1}});
  };

  if (sw.axis == SweepAxis::Epsilon) {
    ExperimentConfig c = cfg;
    c.run = RunKind::Continuation;
    c.solver.epsilon_schedule = sw.values;
    for (const auto& st : solve(c, threads).stages)
      emit(st.epsilon, st.result, st.result.iterations, st.l2_increment, st.h1_increment);
  } else {
    for (double v : sw.values) {
      ExperimentConfig c = cfg;
      c.sweep.reset();
      if (sw.axis == SweepAxis::A) c.solver.A = v;
      else std::get<InversePower>(c.solver.bulk->spec.family).s = v;
      c.validate();
      const Solve s = solve(c, threads);
      // Every stage must converge; iterations count the whole schedule.
      int iterations = 0;
      MinimizeResult last = s.stages.back().result;
      for (const auto& st : s.stages) {
        iterations += st.result.iterations;
        last.converged = last.converged && st.result.converged;
      }
      emit(v, last, iterations, s.stages.back().l2_increment, s.stages.back().h1_increment);
    }
  }
  out.csv = csv.str();
  return out;
}

std::string formulas_csv(const std::vector<double>& A_values, const std::vector<double>& s_values) {
  std::ostringstream os;
  os.precision(17);
  os << "# artifact_version=" << kArtifactVersion << '\n';
  os << "A,p,s_of_A,q_max,branch,s,dim_basic,empty_basic,dim_improved,empty_improved\n";
  for (double A : A_values) {
    ExponentTable t;
    try {
      t = p_of_A(A);
    } catch (const Error& e) {
      throw DomainError("A=" + json(A).dump() + ": " + e.what());
    }
    const std::string row_head = [&] {
      std::ostringstream r;
      r.precision(17);
      r << A << ',' << t.pA << ',' << t.sA << ',' << t.qMax << ',' << to_string(t.branch);
      return r.str();
    }();
    if (s_values.empty()) {
      os << row_head << ",,,,,\n";
      continue;
    }
    for (double s : s_values) {
      const DimensionBound b = dim_bound_basic(s, A);
      const DimensionBound im = dim_bound_improved_power(s, A);
      os << row_head << ',' << s << ',' << b.value << ',' << (b.contact_set_empty ? 1 : 0) << ',' << im.value << ','
         << (im.contact_set_empty ? 1 : 0) << '\n';
    }
  }
  return os.str();
}

json check_potential_report(const PotentialSpec& spec, std::size_t samples, std::uint64_t seed) {
  json j;
  j["artifact_version"] = kArtifactVersion;
  j["spec"] = spec;
  j["config_hash"] = hash_hex(config_hash(j["spec"]));
  j["samples"] = samples;
  j["seed"] = seed;
  j["growth"] = check_growth(spec, samples, seed);
  j["gradient"] = check_gradient_bound(spec, samples, seed + 1);
  j["hessian"] = check_hessian_bound(spec, samples, seed + 2);
  j["convexity_worst_slack"] = convexity_midpoint_check(spec, samples, seed + 3);
  return j;
}

json write_synthetic(int n, const Vec3& center, const std::string& dir) {
  namespace fs = std::filesystem;
  const QField f = synthetic_radial_field(Grid(n), center);
  const json params = {{"kind", "synthetic_radial"}, {"n", n}, {"center", {center.x(), center.y(), center.z()}}};
  const std::uint64_t hash = config_hash(params);
  const ScalingReport r = scaling_fit(f, default_levels(), kDefaultWindowMargin);
  json out = {{"artifact_version", kArtifactVersion},
              {"config_hash", hash_hex(hash)},
              {"config", params},
              {"scaling", r},
              {"min_distance", min_distance(f, 0.0)}};
  fs::create_directories(dir);
  write_checkpoint((fs::path(dir) / "synthetic.qobs").string(), f, hash);
  write_json((fs::path(dir) / "synthetic.json").string(), out);
  return out;
}

}  // namespace qobs::app
