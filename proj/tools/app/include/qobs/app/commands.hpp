#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qobs/app/experiment.hpp"
#include "qobs/potentials.hpp"
#include "qobs/solver.hpp"

namespace qobs::app {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNotConverged = 3;
inline constexpr int kExitVerifyFailed = 4;

/// Everything cmd_minimize writes, computed without touching the filesystem.
struct RunArtifacts {
  QField field;
  bool converged = false;
  std::uint64_t hash = 0;
  std::vector<unsigned char> checkpoint;
  json sidecar;
  std::string trace_csv;
  std::string scaling_csv;
  json summary;
};

/// Plain minimization or epsilon continuation followed by the analysis pass.
/// threads only affects speed.
RunArtifacts run_experiment(const ExperimentConfig& cfg, int threads = 0);

/// field.qobs, field.json, trace.csv, scaling.csv and summary.json under dir (created if needed).
std::vector<std::string> write_artifacts(const RunArtifacts& a, const std::string& dir);

struct MinimalityRow {
  double a = 0.0;
  double energy = 0.0;
  double comparison_energy = 0.0;
  /// comparison_energy - energy; the minimizer should never lose.
  double margin() const { return comparison_energy - energy; }
};

/// Energy of the distance-retraction comparison field against the field itself.
std::vector<MinimalityRow> minimality_check(const QField& field, const Objective& objective,
                                            const std::vector<double>& levels);

struct SweepArtifacts {
  std::string csv;
  json rows = json::array();
  bool all_converged = true;
};

/// One run per value along cfg.sweep. The epsilon axis runs a single continuation
/// through the values and reports every stage.
SweepArtifacts run_sweep(const ExperimentConfig& cfg, int threads = 0);

/// Exponent table rows, with dimension bounds for each s when given.
/// Throws DomainError naming the offending A.
std::string formulas_csv(const std::vector<double>& A_values, const std::vector<double>& s_values);

/// Growth, gradient and Hessian reports plus the midpoint convexity slack.
json check_potential_report(const PotentialSpec& spec, std::size_t samples, std::uint64_t seed);

/// Radial distance field and its scaling fit, written as synthetic.qobs and synthetic.json.
json write_synthetic(int n, const Vec3& center, const std::string& dir);

}  // namespace qobs::app
