// Acceptance suite: one PASS/FAIL line per criterion, then the worst slack of every
// metric. Exit status 0 only when all criteria pass. "--quick" shrinks the suite.
#include <cstring>
#include <filesystem>
#include <iomanip>
#include <iostream>

#include "qobs/app/verify.hpp"

int main(int argc, char** argv) {
  using namespace qobs::app;
  VerifyLevel level = VerifyLevel::Full;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--quick") == 0) level = VerifyLevel::Quick;
  const std::string scratch = (std::filesystem::temp_directory_path() / "qobs_acceptance").string();

  bool all = true;
  run_verify(level, 0, scratch, [&](const CheckResult& r) {
    all = all && r.pass();
    std::cout << (r.pass() ? "PASS" : "FAIL") << " criterion " << r.id << ": " << r.name << " [" << std::fixed
              << std::setprecision(1) << r.seconds << " s";
    if (r.time_limit > 0) std::cout << " / " << r.time_limit << " s";
    std::cout << "]" << std::defaultfloat << std::setprecision(6) << '\n';
    for (const auto& m : r.metrics)
      std::cout << "    " << (m.pass() ? "ok  " : "BAD ") << m.name << " = " << m.value << (m.upper ? " <= " : " >= ")
                << m.limit << '\n';
    if (!r.detail.empty()) std::cout << "    " << r.detail << '\n';
    std::cout.flush();
  });
  std::filesystem::remove_all(scratch);
  std::cout << (all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << '\n';
  return all ? 0 : 1;
}
