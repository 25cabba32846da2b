#include "qobs/app/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "qobs/app/commands.hpp"
#include "qobs/app/experiment.hpp"
#include "qobs/app/verify.hpp"
#include "qobs/checkpoint.hpp"
#include "qobs/errors.hpp"

namespace qobs::app {

namespace {

struct Options {
  std::string config;
  std::string out;
  int threads = 0;
  std::optional<std::uint64_t> seed;
  // formulas
  std::vector<double> A_values;
  std::string A_range;
  std::vector<double> s_values;
  // check-potential
  std::size_t samples = 2000;
  // verify
  std::string level = "quick";
  std::vector<int> criteria;
  // synth
  int n = 48;
  std::vector<double> center;
};

void add_common(CLI::App* sub, Options& o, bool config_required) {
  auto* c = sub->add_option("--config", o.config, "Path to a JSON config");
  if (config_required) c->required();
  sub->add_option("--out", o.out, "Output directory");
  sub->add_option("--threads", o.threads, "Worker threads (0 = all cores); never changes results")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", o.seed, "Override the config seed");
}

ExperimentConfig load_with_overrides(const Options& o) {
  ExperimentConfig cfg = load_experiment(o.config);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.solver.seed = *o.seed;
  }
  if (!o.out.empty()) cfg.output = o.out;
  return cfg;
}

// "lo:hi:count", linearly spaced and inclusive.
std::vector<double> parse_range(const std::string& text) {
  double lo, hi;
  int count;
  char c1, c2;
  std::istringstream is(text);
  if (!(is >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || count < 1 || !is.eof())
    throw ValidationError("--range expects lo:hi:count, got '" + text + "'");
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  return out;
}

int cmd_formulas(const Options& o, std::ostream& out) {
  std::vector<double> As = o.A_values;
  if (!o.A_range.empty()) {
    const auto r = parse_range(o.A_range);
    As.insert(As.end(), r.begin(), r.end());
  }
  if (As.empty()) throw ValidationError("formulas: give --A values or --range");
  const std::string csv = formulas_csv(As, o.s_values);
  if (o.out.empty()) {
    out << csv;
  } else {
    std::filesystem::create_directories(o.out);
    write_text((std::filesystem::path(o.out) / "formulas.csv").string(), csv);
  }
  return kExitOk;
}

int cmd_check_potential(const Options& o, std::ostream& out) {
  json j;
  try {
    j = json::parse(read_text(o.config));
  } catch (const json::exception& e) {
    throw ValidationError("config " + o.config + ": " + e.what());
  }
  const PotentialSpec spec = j.get<PotentialSpec>();
  const json report = check_potential_report(spec, o.samples, o.seed.value_or(0));
  if (o.out.empty()) {
    out << report.dump(2) << '\n';
  } else {
    std::filesystem::create_directories(o.out);
    write_json((std::filesystem::path(o.out) / "potential_report.json").string(), report);
  }
  return kExitOk;
}

int cmd_minimize(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load_with_overrides(o);
  const RunArtifacts art = run_experiment(cfg, o.threads);
  write_artifacts(art, cfg.output);
  const json& s = art.summary;
  out << cfg.name << ": converged=" << (art.converged ? "true" : "false") << " iterations=" << s.at("iterations")
      << " energy=" << std::setprecision(12) << s.at("energy").at("total").get<double>()
      << " min_distance=" << s.at("min_distance").at("value") << " contact_window_empty="
      << s.at("contact").at("window_empty") << " -> " << cfg.output << '\n';
  return art.converged ? kExitOk : kExitNotConverged;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load_with_overrides(o);
  const SweepArtifacts sw = run_sweep(cfg, o.threads);
  std::filesystem::create_directories(cfg.output);
  const std::string path = (std::filesystem::path(cfg.output) / "sweep.csv").string();
  write_text(path, sw.csv);
  out << sw.rows.size() << " runs -> " << path << '\n';
  return sw.all_converged ? kExitOk : kExitNotConverged;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const VerifyLevel level = verify_level_from_string(o.level);
  const std::string scratch =
      o.out.empty() ? (std::filesystem::temp_directory_path() / "qobs_verify").string() : o.out + "/scratch";
  auto print = [&](const CheckResult& r) {
    out << (r.pass() ? "PASS" : "FAIL") << " criterion " << r.id << ": " << r.name << " (" << std::fixed
        << std::setprecision(1) << r.seconds << " s)" << std::defaultfloat << '\n';
    out.flush();
  };
  std::vector<CheckResult> results;
  if (o.criteria.empty()) {
    results = run_verify(level, o.threads, scratch, print);
  } else {
    for (int id : o.criteria) {
      results.push_back(run_criterion(id, level, o.threads, scratch));
      print(results.back());
    }
  }
  const json report = verify_report(level, results);
  if (o.out.empty()) {
    out << report.dump(2) << '\n';
  } else {
    std::filesystem::create_directories(o.out);
    write_json((std::filesystem::path(o.out) / "verify.json").string(), report);
  }
  return report.at("pass").get<bool>() ? kExitOk : kExitVerifyFailed;
}

int cmd_synth(const Options& o, std::ostream& out) {
  if (o.n < 4) throw ValidationError("synth: --n must be at least 4");
  const Grid grid(o.n);
  Vec3 center(0.5 + 0.3 * grid.h(), 0.5 - 0.2 * grid.h(), 0.5 + 0.1 * grid.h());
  if (!o.center.empty()) {
    if (o.center.size() != 3) throw ValidationError("synth: --center takes three numbers");
    center = Vec3(o.center[0], o.center[1], o.center[2]);
  }
  const std::string dir = o.out.empty() ? "synthetic" : o.out;
  const json r = write_synthetic(o.n, center, dir);
  out << "beta=" << r.at("scaling").at("beta") << " residual=" << r.at("scaling").at("residual") << " -> " << dir
      << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"qobs: Q-tensor obstacle experiments"};
  app.require_subcommand(1);
  Options o;

  auto* formulas = app.add_subcommand("formulas", "Tabulate p(A), s(A), q_max(A) and dimension bounds");
  formulas->add_option("--A", o.A_values, "Divergence coefficient values")->allow_extra_args(false);
  formulas->add_option("--range", o.A_range, "lo:hi:count, linearly spaced A values");
  formulas->add_option("--s", o.s_values, "Bulk growth exponents for the dimension bounds")->allow_extra_args(false);
  formulas->add_option("--out", o.out, "Write formulas.csv here instead of stdout");

  auto* check = app.add_subcommand("check-potential", "Hypothesis report for a bulk potential spec");
  add_common(check, o, true);
  check->add_option("--samples", o.samples, "Samples per check")->check(CLI::PositiveNumber);

  auto* minimize = app.add_subcommand("minimize", "Run one experiment and write its artifacts");
  add_common(minimize, o, true);

  auto* sweep = app.add_subcommand("sweep", "Run the experiment along its sweep axis");
  add_common(sweep, o, true);

  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  add_common(verify, o, false);
  verify->add_option("--level", o.level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  verify->add_option("--criterion", o.criteria, "Run only these criteria (1-10)")->allow_extra_args(false);

  auto* synth = app.add_subcommand("synth", "Write the synthetic radial distance field");
  add_common(synth, o, false);
  synth->add_option("--n", o.n, "Interior nodes per axis");
  synth->add_option("--center", o.center, "Ball center (three numbers)")->expected(3);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*formulas) return cmd_formulas(o, out);
    if (*check) return cmd_check_potential(o, out);
    if (*minimize) return cmd_minimize(o, out);
    if (*sweep) return cmd_sweep(o, out);
    if (*verify) return cmd_verify(o, out);
    if (*synth) return cmd_synth(o, out);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const StagnationError& e) {
    err << "not converged: " << e.what() << " (residual " << e.residual() << " after " << e.iterations()
        << " iterations)\n";
    return kExitNotConverged;
  } catch (const ConvergenceError& e) {
    err << "not converged: " << e.what() << " (residual " << e.residual() << " after " << e.iterations()
        << " iterations)\n";
    return kExitNotConverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace qobs::app
