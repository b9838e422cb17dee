// Acceptance gate: runs criteria 1-13 on the default configuration and prints
// one PASS/FAIL line per criterion. Exit status is nonzero if any fails.
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>

#include "noisereg/experiments.hpp"
#include "noisereg/io.hpp"
#include "noisereg/parallel.hpp"

int main(int argc, char** argv) {
  using namespace noisereg;
  std::filesystem::path out;
  int threads = default_threads();
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--out") == 0) out = argv[i + 1];
    if (std::strcmp(argv[i], "--threads") == 0) threads = std::stoi(argv[i + 1]);
  }
  RunContext ctx;
  ctx.threads = threads;
  const auto report = run_acceptance(ctx, [](const CriterionResult& c) {
    std::printf("[%s] criterion %2d: %s (%.1f s)\n", c.passed ? "PASS" : "FAIL", c.id, c.title.c_str(), c.seconds);
    if (!c.error.empty()) std::printf("       error: %s\n", c.error.c_str());
    for (const auto& part : c.parts) {
      for (const auto& name : part.failed_checks()) std::printf("       failed check: %s\n", name.c_str());
    }
    std::fflush(stdout);
  });
  if (!out.empty()) write_json(out / "summary.json", report.summary());
  std::size_t passed = 0;
  for (const auto& c : report.criteria) passed += c.passed ? 1 : 0;
  std::printf("%zu/%zu criteria passed\n", passed, report.criteria.size());
  return report.all_passed() ? 0 : 1;
}
