#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qobs/field.hpp"
#include "qobs/serialization.hpp"
#include "qobs/solver.hpp"

namespace qobs::app {

enum class RunKind { Minimize, Continuation };
enum class SweepAxis { A, S, Epsilon };

const char* to_string(RunKind k);
const char* to_string(SweepAxis a);

struct InitSpec {
  InitKind kind = InitKind::Boundary;
  double noise = 0.0;
};

struct AnalysisSpec {
  double margin = kDefaultWindowMargin;
  /// Empty selects default_levels().
  std::vector<double> levels;
  /// Window nodes at or below this distance count as contact.
  double contact_tolerance = 1e-6;
  /// Levels of the distance retraction used for the minimality check.
  std::vector<double> comparison_levels = {0.02, 0.05};
};

struct SweepSpec {
  SweepAxis axis = SweepAxis::A;
  std::vector<double> values;
};

struct ExperimentConfig {
  std::string name = "experiment";
  RunKind run = RunKind::Minimize;
  int n = 8;
  SolverConfig solver;
  BoundaryData boundary;
  InitSpec init;
  AnalysisSpec analysis;
  std::optional<SweepSpec> sweep;
  std::string output = "qobs_out";
  std::uint64_t seed = 0;

  /// Throws ValidationError (structure) or InvalidInput (coercivity, boundary margin)
  /// before any compute happens.
  void validate() const;
  std::vector<double> levels() const;
};

/// Strict: unknown keys and wrong types raise ValidationError. solver.threads is not
/// part of the document; the seed is.
void to_json(json& j, const ExperimentConfig& c);
void from_json(const json& j, ExperimentConfig& c);

ExperimentConfig load_experiment(const std::string& path);

/// Hash over the canonical document minus the output directory; embedded in every output file.
std::uint64_t experiment_hash(const ExperimentConfig& c);

/// The bundled A = 0 twist experiment (Ball-Majumdar bulk, continuation to 1e-3).
/// tools/configs/a0_twist.json holds the same document at n = 16.
ExperimentConfig a0_twist_experiment(int n = 16);

/// The bundled supercritical experiment: A = 5 with an inverse-power bulk of growth
/// s = 2 > s(5), strong twist anchoring close to the obstacle. Matches
/// tools/configs/supercritical.json.
ExperimentConfig supercritical_experiment();

/// Boundary layer from the config plus the chosen interior initialization.
QField initial_field(const ExperimentConfig& c);

}  // namespace qobs::app
