#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qobs/serialization.hpp"

namespace qobs::app {

enum class VerifyLevel { Quick, Full };

VerifyLevel verify_level_from_string(const std::string& s);
const char* to_string(VerifyLevel l);

/// One measured quantity against its limit.
struct Metric {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  /// true: value <= limit is required; false: value >= limit.
  bool upper = true;
  /// Distance to the limit, negative when violated.
  double slack() const;
  bool pass() const { return slack() >= 0.0; }
};

struct CheckResult {
  int id = 0;
  std::string name;
  std::vector<Metric> metrics;
  double seconds = 0.0;
  /// 0 means no runtime bound.
  double time_limit = 0.0;
  std::string detail;
  bool pass() const;
};

void to_json(json& j, const Metric& m);
void to_json(json& j, const CheckResult& r);

/// Number of acceptance criteria.
inline constexpr int kCriteriaCount = 10;

/// Runs a single criterion (1-based). Quick mode shrinks sample counts and grids.
/// scratch_dir holds files written by the determinism check.
CheckResult run_criterion(int id, VerifyLevel level, int threads, const std::string& scratch_dir);

/// All criteria in order; on_result is called as each one finishes.
std::vector<CheckResult> run_verify(VerifyLevel level, int threads, const std::string& scratch_dir,
                                    const std::function<void(const CheckResult&)>& on_result = {});

/// {"level", "pass", "checks": [...]} with every metric's slack.
json verify_report(VerifyLevel level, const std::vector<CheckResult>& results);

/// The pinned lower bound on the central-window distance in the twist emptiness check.
inline constexpr double kTwistDistanceFloor = 0.24;

}  // namespace qobs::app
