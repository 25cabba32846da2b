#include "qobs/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "qobs/errors.hpp"

namespace qobs {

namespace json_detail {

void require_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw ValidationError(std::string(where) + ": expected an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) throw ValidationError(std::string(where) + ": unknown key '" + item.key() + "'");
  }
}

double get_number(const json& j, const char* key, double fallback, const char* where) {
  if (!j.contains(key)) return fallback;
  try {
    return number_from_json(j.at(key));
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(where) + "." + key + ": " + e.what());
  }
}

bool get_bool(const json& j, const char* key, bool fallback, const char* where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw ValidationError(std::string(where) + "." + key + ": expected a boolean");
  return j.at(key).get<bool>();
}

std::string get_string(const json& j, const char* key, const std::string& fallback, const char* where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ValidationError(std::string(where) + "." + key + ": expected a string");
  return j.at(key).get<std::string>();
}

}  // namespace json_detail

namespace {

using json_detail::get_bool;
using json_detail::get_int;
using json_detail::get_number;
using json_detail::get_string;
using json_detail::require_keys;

Vec3 get_vec3(const json& j, const char* key, const Vec3& fallback, const char* where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 3) throw ValidationError(std::string(where) + "." + key + ": expected 3 numbers");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) throw ValidationError(std::string(where) + "." + key + ": expected 3 numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

json vec3_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

template <class F>
void wrap_invalid(const char* where, F&& f) {
  try {
    f();
  } catch (const InvalidInput& e) {
    throw ValidationError(std::string(where) + ": " + e.what());
  }
}

void put_optional(json& j, const char* key, const std::optional<double>& v) {
  if (v) j[key] = number_to_json(*v);
}

}  // namespace

json number_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ValidationError("expected a number");
}

std::uint64_t config_hash(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------

void to_json(json& j, const PotentialSpec& s) {
  j = json::object();
  j["family"] = s.family_name();
  if (const auto* p = std::get_if<InversePower>(&s.family)) {
    j["s"] = p->s;
    j["m"] = p->m;
  } else if (const auto* p = std::get_if<Logarithmic>(&s.family)) {
    j["k"] = p->k;
    j["c"] = p->c;
  } else if (const auto* p = std::get_if<BallMajumdar>(&s.family)) {
    j["quad_polar"] = p->quad_polar;
    j["quad_azimuth"] = p->quad_azimuth;
    j["offset"] = p->offset;
  }
  if (s.smoothing_tau != 0.0) j["smoothing_tau"] = s.smoothing_tau;
}

void from_json(const json& j, PotentialSpec& s) {
  const char* where = "potential";
  if (!j.is_object() || !j.contains("family")) throw ValidationError("potential: 'family' is required");
  const std::string family = get_string(j, "family", "", where);
  s = PotentialSpec{};
  if (family == "inverse_power") {
    require_keys(j, {"family", "s", "m", "smoothing_tau"}, where);
    InversePower p;
    p.s = get_number(j, "s", p.s, where);
    p.m = get_number(j, "m", p.m, where);
    s.family = p;
  } else if (family == "log") {
    require_keys(j, {"family", "k", "c", "smoothing_tau"}, where);
    Logarithmic p;
    p.k = get_number(j, "k", p.k, where);
    p.c = get_number(j, "c", p.c, where);
    s.family = p;
  } else if (family == "ball_majumdar") {
    require_keys(j, {"family", "quad_polar", "quad_azimuth", "offset", "smoothing_tau"}, where);
    BallMajumdar p;
    p.quad_polar = get_int(j, "quad_polar", p.quad_polar, where);
    p.quad_azimuth = get_int(j, "quad_azimuth", p.quad_azimuth, where);
    p.offset = get_number(j, "offset", p.offset, where);
    s.family = p;
  } else {
    throw ValidationError("potential.family: unknown family '" + family + "'");
  }
  s.smoothing_tau = get_number(j, "smoothing_tau", 0.0, where);
  wrap_invalid(where, [&] { s.validate(); });
}

void to_json(json& j, const RegularizationOptions& o) {
  j = {{"mollifier_nodes", o.mollifier_nodes},
       {"mollifier_seed", o.mollifier_seed},
       {"omega_safety", o.omega_safety},
       {"min_radius", o.min_radius},
       {"boundary_angles", o.boundary_angles}};
}

void from_json(const json& j, RegularizationOptions& o) {
  const char* where = "regularization";
  require_keys(j, {"mollifier_nodes", "mollifier_seed", "omega_safety", "min_radius", "boundary_angles"}, where);
  o = RegularizationOptions{};
  o.mollifier_nodes = get_int(j, "mollifier_nodes", o.mollifier_nodes, where);
  o.mollifier_seed = get_int(j, "mollifier_seed", o.mollifier_seed, where);
  o.omega_safety = get_number(j, "omega_safety", o.omega_safety, where);
  o.min_radius = get_number(j, "min_radius", o.min_radius, where);
  o.boundary_angles = get_int(j, "boundary_angles", o.boundary_angles, where);
  if (o.mollifier_nodes < 2 || o.mollifier_nodes % 2 != 0)
    throw ValidationError("regularization.mollifier_nodes: must be even and >= 2");
  if (!(o.omega_safety >= 1.0)) throw ValidationError("regularization.omega_safety: must be >= 1");
  if (!(o.min_radius > 0.0)) throw ValidationError("regularization.min_radius: must be > 0");
  if (o.boundary_angles < 16) throw ValidationError("regularization.boundary_angles: must be >= 16");
}

void to_json(json& j, const BulkModel& b) {
  j = {{"potential", b.spec}, {"epsilon", b.epsilon}, {"method", to_string(b.method)}, {"regularization", b.options}};
}

void from_json(const json& j, BulkModel& b) {
  const char* where = "bulk";
  require_keys(j, {"potential", "epsilon", "method", "regularization"}, where);
  b = BulkModel{};
  if (!j.contains("potential")) throw ValidationError("bulk: 'potential' is required");
  b.spec = j.at("potential").get<PotentialSpec>();
  b.epsilon = get_number(j, "epsilon", b.epsilon, where);
  if (!(b.epsilon >= 0.0) || !std::isfinite(b.epsilon)) throw ValidationError("bulk.epsilon: must be finite and >= 0");
  wrap_invalid(where, [&] { b.method = envelope_method_from_string(get_string(j, "method", "moreau", where)); });
  if (j.contains("regularization")) b.options = j.at("regularization").get<RegularizationOptions>();
}

void to_json(json& j, const ElasticModel& e) { j = {{"L1", e.L1}, {"L2", e.L2}, {"L3", e.L3}}; }

void from_json(const json& j, ElasticModel& e) {
  const char* where = "elastic";
  require_keys(j, {"L1", "L2", "L3"}, where);
  e = ElasticModel{};
  e.L1 = get_number(j, "L1", e.L1, where);
  e.L2 = get_number(j, "L2", e.L2, where);
  e.L3 = get_number(j, "L3", e.L3, where);
}

void to_json(json& j, const StepRule& s) {
  j = {{"barzilai_borwein", s.barzilai_borwein},
       {"armijo", s.armijo},
       {"shrink", s.shrink},
       {"max_backtracks", s.max_backtracks}};
}

void from_json(const json& j, StepRule& s) {
  const char* where = "step";
  require_keys(j, {"barzilai_borwein", "armijo", "shrink", "max_backtracks"}, where);
  s = StepRule{};
  s.barzilai_borwein = get_bool(j, "barzilai_borwein", s.barzilai_borwein, where);
  s.armijo = get_number(j, "armijo", s.armijo, where);
  s.shrink = get_number(j, "shrink", s.shrink, where);
  s.max_backtracks = get_int(j, "max_backtracks", s.max_backtracks, where);
}

void to_json(json& j, const SolverConfig& c) {
  j = json::object();
  j["A"] = c.A;
  if (c.general) j["elastic"] = *c.general;
  if (c.bulk) j["bulk"] = *c.bulk;
  j["max_iters"] = c.max_iters;
  j["grad_tol"] = c.grad_tol;
  j["step"] = c.step;
  j["epsilon_schedule"] = c.epsilon_schedule;
  j["guard_level"] = c.guard_level;
}

void from_json(const json& j, SolverConfig& c) {
  const char* where = "solver";
  require_keys(j, {"A", "elastic", "bulk", "max_iters", "grad_tol", "step", "epsilon_schedule", "guard_level"}, where);
  c = SolverConfig{};
  c.A = get_number(j, "A", c.A, where);
  if (j.contains("elastic")) c.general = j.at("elastic").get<ElasticModel>();
  if (j.contains("bulk") && !j.at("bulk").is_null()) c.bulk = j.at("bulk").get<BulkModel>();
  c.max_iters = get_int(j, "max_iters", c.max_iters, where);
  c.grad_tol = get_number(j, "grad_tol", c.grad_tol, where);
  if (j.contains("step")) c.step = j.at("step").get<StepRule>();
  if (j.contains("epsilon_schedule")) {
    const json& s = j.at("epsilon_schedule");
    if (!s.is_array()) throw ValidationError("solver.epsilon_schedule: expected an array");
    for (const auto& v : s) c.epsilon_schedule.push_back(number_from_json(v));
  }
  c.guard_level = get_number(j, "guard_level", c.guard_level, where);
  wrap_invalid(where, [&] { c.validate(); });
}

void to_json(json& j, const BoundaryData& b) {
  if (b.kind == BoundaryData::Kind::ConstantTensor) {
    const Mat3 m = b.tensor.matrix();
    j = {{"kind", "constant_tensor"},
         {"tensor", json::array({vec3_json(m.row(0)), vec3_json(m.row(1)), vec3_json(m.row(2))})}};
    return;
  }
  j = {{"kind", "uniaxial"}, {"S", b.S}, {"n", vec3_json(b.n)}};
  if (b.director == BoundaryData::Director::Twist) {
    j["director"] = "twist";
    j["axis"] = vec3_json(b.axis);
    j["pitch"] = b.pitch;
  } else {
    j["director"] = "constant";
  }
}

void from_json(const json& j, BoundaryData& b) {
  const char* where = "boundary";
  b = BoundaryData{};
  const std::string kind = j.is_object() ? get_string(j, "kind", "uniaxial", where) : "";
  if (kind == "constant_tensor") {
    require_keys(j, {"kind", "tensor"}, where);
    b.kind = BoundaryData::Kind::ConstantTensor;
    if (!j.contains("tensor")) throw ValidationError("boundary.tensor: required for constant_tensor");
    const json& t = j.at("tensor");
    if (!t.is_array() || t.size() != 3) throw ValidationError("boundary.tensor: expected a 3x3 array");
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
      const json row = json{{"row", t[r]}};
      m.row(r) = get_vec3(row, "row", Vec3::Zero(), "boundary.tensor");
    }
    if ((m - m.transpose()).norm() > 1e-12 || std::abs(m.trace()) > 1e-12)
      throw ValidationError("boundary.tensor: must be symmetric and traceless");
    b.tensor = QTensor::from_matrix(m);
  } else if (kind == "uniaxial") {
    require_keys(j, {"kind", "S", "n", "director", "axis", "pitch"}, where);
    b.kind = BoundaryData::Kind::Uniaxial;
    b.S = get_number(j, "S", b.S, where);
    b.n = get_vec3(j, "n", b.n, where);
    const std::string director = get_string(j, "director", "constant", where);
    if (director == "twist")
      b.director = BoundaryData::Director::Twist;
    else if (director != "constant")
      throw ValidationError("boundary.director: expected 'constant' or 'twist'");
    b.axis = get_vec3(j, "axis", b.axis, where);
    b.pitch = get_number(j, "pitch", b.pitch, where);
  } else {
    throw ValidationError("boundary.kind: expected 'uniaxial' or 'constant_tensor'");
  }
  wrap_invalid(where, [&] { b.validate(); });
}

// ---------------------------------------------------------------------------
// Reports

void to_json(json& j, const EnergyBreakdown& e) {
  j = {{"total", number_to_json(e.total)}, {"elastic", number_to_json(e.elastic)}, {"bulk", number_to_json(e.bulk)}};
}

void to_json(json& j, const ExponentTable& t) {
  j = {{"A", t.A},
       {"p", number_to_json(t.pA)},
       {"s", number_to_json(t.sA)},
       {"q_max", number_to_json(t.qMax)},
       {"branch", to_string(t.branch)}};
}

void to_json(json& j, const DimensionBound& d) {
  j = {{"value", number_to_json(d.value)}, {"contact_set_empty", d.contact_set_empty}};
}

void to_json(json& j, const HypothesisReport& r) {
  j = {{"family", r.family}, {"check", r.check}, {"samples", r.samples}, {"d_min", r.d_min}, {"bounded", r.bounded}};
  put_optional(j, "m_s", r.m_s);
  put_optional(j, "M_s", r.M_s);
  put_optional(j, "k0", r.k0);
  put_optional(j, "K0", r.K0);
  put_optional(j, "m0", r.m0);
  put_optional(j, "M0", r.M0);
  put_optional(j, "C_s", r.C_s);
  put_optional(j, "C_0", r.C_0);
  put_optional(j, "c_s", r.c_s);
  put_optional(j, "c_0", r.c_0);
  put_optional(j, "min_quadratic_form", r.min_quadratic_form);
  put_optional(j, "worst_slack", r.worst_slack);
  if (r.witness) {
    json w = json::array();
    for (int i = 0; i < 5; ++i) w.push_back((*r.witness)[i]);
    j["witness"] = w;
  }
  if (!r.note.empty()) j["note"] = r.note;
}

void to_json(json& j, const ScalingReport& r) {
  json levels = json::array(), measures = json::array();
  for (double a : r.levels) levels.push_back(a);
  for (double m : r.measures) measures.push_back(m);
  j = {{"levels", levels},
       {"measures", measures},
       {"margin", r.margin},
       {"fitted_levels", r.fitted_levels},
       {"beta", number_to_json(r.beta)},
       {"residual", number_to_json(r.residual)},
       {"empty_at_all_levels", r.empty_at_all_levels}};
  put_optional(j, "target", r.target);
  if (r.meets_target) j["meets_target"] = *r.meets_target;
}

void to_json(json& j, const DistanceWitness& w) {
  j = {{"value", number_to_json(w.value)}, {"node", json::array({w.i, w.j, w.k})}};
}

std::string scaling_csv(const ScalingReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "a,measure\n";
  for (std::size_t i = 0; i < r.levels.size(); ++i) os << r.levels[i] << ',' << r.measures[i] << '\n';
  return os.str();
}

}  // namespace qobs
