#pragma once

#include <cstdint>
#include <string>
#include <type_traits>

#include <nlohmann/json.hpp>

#include "qobs/analysis.hpp"
#include "qobs/errors.hpp"
#include "qobs/exponents.hpp"
#include "qobs/field.hpp"
#include "qobs/potentials.hpp"
#include "qobs/regularize.hpp"
#include "qobs/solver.hpp"

namespace qobs {

using json = nlohmann::json;

inline constexpr const char* kArtifactVersion = "1.0.0";

/// Finite values as numbers, others as the strings "inf", "-inf", "nan".
json number_to_json(double v);
/// Accepts numbers and the three strings above.
double number_from_json(const json& j);

/// FNV-1a 64 over the compact dump (object keys are sorted by the json type).
std::uint64_t config_hash(const json& j);
std::string hash_hex(std::uint64_t h);

// Parsing is strict: unknown keys, wrong types and out-of-range values raise
// ValidationError naming the offending key. Omitted keys keep their defaults.

void to_json(json& j, const PotentialSpec& s);
void from_json(const json& j, PotentialSpec& s);

void to_json(json& j, const RegularizationOptions& o);
void from_json(const json& j, RegularizationOptions& o);

void to_json(json& j, const BulkModel& b);
void from_json(const json& j, BulkModel& b);

void to_json(json& j, const ElasticModel& e);
void from_json(const json& j, ElasticModel& e);

void to_json(json& j, const StepRule& s);
void from_json(const json& j, StepRule& s);

/// seed and threads are run-time settings and are not part of the document.
void to_json(json& j, const SolverConfig& c);
void from_json(const json& j, SolverConfig& c);

void to_json(json& j, const BoundaryData& b);
void from_json(const json& j, BoundaryData& b);

void to_json(json& j, const EnergyBreakdown& e);
void to_json(json& j, const ExponentTable& t);
void to_json(json& j, const DimensionBound& d);
void to_json(json& j, const HypothesisReport& r);
void to_json(json& j, const ScalingReport& r);
void to_json(json& j, const DistanceWitness& w);

/// "a,measure" rows.
std::string scaling_csv(const ScalingReport& r);

namespace json_detail {
/// Throws ValidationError if j is not an object or holds a key outside allowed.
void require_keys(const json& j, std::initializer_list<const char*> allowed, const char* where);

// Optional-key readers: fallback when absent, ValidationError naming where.key on a bad type.
double get_number(const json& j, const char* key, double fallback, const char* where);
bool get_bool(const json& j, const char* key, bool fallback, const char* where);
std::string get_string(const json& j, const char* key, const std::string& fallback, const char* where);

template <class Int>
Int get_int(const json& j, const char* key, Int fallback, const char* where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ValidationError(std::string(where) + "." + key + ": expected an integer");
  if constexpr (std::is_unsigned_v<Int>) {
    if (v.is_number_unsigned()) return v.get<Int>();
    if (v.get<long long>() < 0) throw ValidationError(std::string(where) + "." + key + ": must be >= 0");
  }
  return v.get<Int>();
}
}  // namespace json_detail

}  // namespace qobs
