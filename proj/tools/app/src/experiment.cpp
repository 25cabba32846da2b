#include "qobs/app/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "qobs/errors.hpp"

namespace qobs::app {

namespace {

using namespace qobs::json_detail;

std::vector<double> get_numbers(const json& j, const char* key, const char* where) {
  const json& v = j.at(key);
  if (!v.is_array()) throw ValidationError(std::string(where) + "." + key + ": expected an array");
  std::vector<double> out;
  for (const auto& x : v) {
    try {
      out.push_back(number_from_json(x));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(where) + "." + key + ": " + e.what());
    }
  }
  return out;
}

json numbers_json(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(number_to_json(x));
  return out;
}

const char* init_name(InitKind k) {
  switch (k) {
    case InitKind::Zero: return "zero";
    case InitKind::Boundary: return "boundary";
    case InitKind::Random: return "random";
  }
  return "?";
}

InitKind init_from(const std::string& s) {
  if (s == "zero") return InitKind::Zero;
  if (s == "boundary") return InitKind::Boundary;
  if (s == "random") return InitKind::Random;
  throw ValidationError("init.kind: unknown value '" + s + "' (zero|boundary|random)");
}

RunKind run_from(const std::string& s) {
  if (s == "minimize") return RunKind::Minimize;
  if (s == "continuation") return RunKind::Continuation;
  throw ValidationError("run: unknown value '" + s + "' (minimize|continuation)");
}

SweepAxis axis_from(const std::string& s) {
  if (s == "A") return SweepAxis::A;
  if (s == "s") return SweepAxis::S;
  if (s == "epsilon") return SweepAxis::Epsilon;
  throw ValidationError("sweep.axis: unknown value '" + s + "' (A|s|epsilon)");
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

}  // namespace

const char* to_string(RunKind k) { return k == RunKind::Minimize ? "minimize" : "continuation"; }

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::A: return "A";
    case SweepAxis::S: return "s";
    case SweepAxis::Epsilon: return "epsilon";
  }
  return "?";
}

std::vector<double> ExperimentConfig::levels() const {
  return analysis.levels.empty() ? default_levels() : analysis.levels;
}

void ExperimentConfig::validate() const {
  if (name.empty()) throw ValidationError("name: must not be empty");
  if (n < 4 || n > 512) throw ValidationError("n: must lie in [4, 512]");
  if (init.noise < 0 || !std::isfinite(init.noise)) throw ValidationError("init.noise: must be finite and >= 0");
  if (!(analysis.margin >= 0 && analysis.margin < 0.5)) throw ValidationError("analysis.margin: must lie in [0, 0.5)");
  if (!(analysis.contact_tolerance >= 0)) throw ValidationError("analysis.contact_tolerance: must be >= 0");
  const auto lv = levels();
  if (lv.size() < 3) throw ValidationError("analysis.levels: at least 3 levels are needed");
  for (double a : lv)
    if (!(a > 0 && a <= kMaxDistance)) throw ValidationError("analysis.levels: each level must lie in (0, sqrt6/6]");
  for (double a : analysis.comparison_levels)
    if (!(a >= 0 && a < kMaxDistance)) throw ValidationError("analysis.comparison_levels: each level must lie in [0, sqrt6/6)");
  if (output.empty()) throw ValidationError("output: must not be empty");

  try {
    solver.validate();
  } catch (const InvalidInput& e) {
    throw ValidationError(std::string("solver: ") + e.what());
  }
  if (run == RunKind::Continuation) {
    if (!solver.bulk) throw ValidationError("run continuation: solver.bulk is required");
    if (solver.epsilon_schedule.empty()) throw ValidationError("run continuation: solver.epsilon_schedule is empty");
  } else if (!solver.epsilon_schedule.empty()) {
    throw ValidationError("run minimize: solver.epsilon_schedule must be empty (use run continuation)");
  }

  if (sweep) {
    if (sweep->values.empty()) throw ValidationError("sweep.values: must not be empty");
    switch (sweep->axis) {
      case SweepAxis::A:
        if (solver.general) throw ValidationError("sweep.axis A: not available with general elastic constants");
        for (double a : sweep->values)
          if (!(a > kMinA) || !std::isfinite(a)) throw ValidationError("sweep.values: A must exceed -3/5");
        break;
      case SweepAxis::S:
        if (!solver.bulk || !std::holds_alternative<InversePower>(solver.bulk->spec.family))
          throw ValidationError("sweep.axis s: needs an inverse_power bulk potential");
        for (double s : sweep->values)
          if (!(s > 0) || !std::isfinite(s)) throw ValidationError("sweep.values: s must be positive");
        break;
      case SweepAxis::Epsilon:
        if (!solver.bulk) throw ValidationError("sweep.axis epsilon: solver.bulk is required");
        if (!strictly_decreasing(sweep->values)) throw ValidationError("sweep.values: epsilon values must decrease");
        for (double e : sweep->values)
          if (!(e > 0)) throw ValidationError("sweep.values: epsilon must be positive");
        break;
    }
  }

  try {
    boundary.validate();
    make_boundary(boundary, Grid(n));
  } catch (const InvalidInput& e) {
    throw ValidationError(std::string("boundary: ") + e.what());
  }
}

void to_json(json& j, const ExperimentConfig& c) {
  j = json::object();
  j["name"] = c.name;
  j["run"] = to_string(c.run);
  j["n"] = c.n;
  j["seed"] = c.seed;
  j["solver"] = c.solver;
  j["boundary"] = c.boundary;
  j["init"] = {{"kind", init_name(c.init.kind)}, {"noise", c.init.noise}};
  json a = json::object();
  a["margin"] = c.analysis.margin;
  a["levels"] = numbers_json(c.analysis.levels);
  a["contact_tolerance"] = c.analysis.contact_tolerance;
  a["comparison_levels"] = numbers_json(c.analysis.comparison_levels);
  j["analysis"] = a;
  if (c.sweep) j["sweep"] = {{"axis", to_string(c.sweep->axis)}, {"values", numbers_json(c.sweep->values)}};
  j["output"] = c.output;
}

void from_json(const json& j, ExperimentConfig& c) {
  const char* where = "config";
  require_keys(j, {"$schema", "name", "run", "n", "seed", "solver", "boundary", "init", "analysis", "sweep", "output"},
               where);
  c = ExperimentConfig{};
  c.name = get_string(j, "name", c.name, where);
  c.run = run_from(get_string(j, "run", to_string(c.run), where));
  c.n = get_int(j, "n", c.n, where);
  c.seed = get_int(j, "seed", c.seed, where);
  if (j.contains("solver")) c.solver = j.at("solver").get<SolverConfig>();
  if (j.contains("boundary")) c.boundary = j.at("boundary").get<BoundaryData>();
  if (j.contains("init")) {
    const json& i = j.at("init");
    require_keys(i, {"kind", "noise"}, "init");
    c.init.kind = init_from(get_string(i, "kind", init_name(c.init.kind), "init"));
    c.init.noise = get_number(i, "noise", c.init.noise, "init");
  }
  if (j.contains("analysis")) {
    const json& a = j.at("analysis");
    require_keys(a, {"margin", "levels", "contact_tolerance", "comparison_levels"}, "analysis");
    c.analysis.margin = get_number(a, "margin", c.analysis.margin, "analysis");
    if (a.contains("levels")) c.analysis.levels = get_numbers(a, "levels", "analysis");
    c.analysis.contact_tolerance = get_number(a, "contact_tolerance", c.analysis.contact_tolerance, "analysis");
    if (a.contains("comparison_levels")) c.analysis.comparison_levels = get_numbers(a, "comparison_levels", "analysis");
  }
  if (j.contains("sweep") && !j.at("sweep").is_null()) {
    const json& s = j.at("sweep");
    require_keys(s, {"axis", "values"}, "sweep");
    if (!s.contains("axis") || !s.contains("values")) throw ValidationError("sweep: needs axis and values");
    SweepSpec sw;
    sw.axis = axis_from(get_string(s, "axis", "", "sweep"));
    sw.values = get_numbers(s, "values", "sweep");
    c.sweep = sw;
  }
  c.output = get_string(j, "output", c.output, where);
  c.solver.seed = c.seed;
  c.validate();
}

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open config " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ValidationError("config " + path + ": " + e.what());
  }
  try {
    return j.get<ExperimentConfig>();
  } catch (const json::exception& e) {
    throw ValidationError("config " + path + ": " + e.what());
  }
}

std::uint64_t experiment_hash(const ExperimentConfig& c) {
  // The output location does not change any result.
  json j = c;
  j.erase("output");
  return config_hash(j);
}

ExperimentConfig a0_twist_experiment(int n) {
  ExperimentConfig c;
  c.name = "a0_twist";
  c.run = RunKind::Continuation;
  c.n = n;
  c.solver.A = 0.0;
  BulkModel bulk;
  bulk.spec.family = BallMajumdar{};
  bulk.epsilon = 1e-1;
  c.solver.bulk = bulk;
  c.solver.epsilon_schedule = {1e-1, 1e-2, 1e-3};
  c.boundary.S = 0.4;
  c.boundary.director = BoundaryData::Director::Twist;
  c.boundary.n = Vec3::UnitX();
  c.boundary.axis = Vec3::UnitZ();
  c.boundary.pitch = 4.0;
  c.init.kind = InitKind::Zero;
  c.output = "runs/a0_twist";
  return c;
}

ExperimentConfig supercritical_experiment() {
  ExperimentConfig c;
  c.name = "supercritical";
  c.run = RunKind::Continuation;
  c.n = 12;
  c.solver.A = 5.0;
  BulkModel bulk;
  bulk.spec.family = InversePower{2.0, 1e-5};
  bulk.epsilon = 1e-1;
  c.solver.bulk = bulk;
  c.solver.epsilon_schedule = {1e-1, 1e-2, 1e-3, 1e-4};
  c.boundary.S = 0.84;
  c.boundary.director = BoundaryData::Director::Twist;
  c.boundary.n = Vec3::UnitX();
  c.boundary.axis = Vec3::UnitZ();
  c.boundary.pitch = 2.0;
  c.init.kind = InitKind::Zero;
  c.output = "runs/supercritical";
  return c;
}

QField initial_field(const ExperimentConfig& c) {
  return QField::make(Grid(c.n), c.boundary, c.init.kind, c.seed, c.init.noise);
}

}  // namespace qobs::app
