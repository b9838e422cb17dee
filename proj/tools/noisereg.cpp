// SPDX-License-Identifier: Apache-2.0
// noisereg: command-line front end for the experiments.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "noisereg/config.hpp"
#include "noisereg/experiments.hpp"
#include "noisereg/io.hpp"
#include "noisereg/parallel.hpp"

namespace fs = std::filesystem;
using namespace noisereg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitFailed = 3;

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_outcome(const fs::path& dir, const Outcome& o) {
  write_json(dir / "summary.json", o.summary());
  for (const auto& t : o.tables) write_csv(dir, t);
}

json metadata(const std::string& command, const RunContext& ctx, double seconds,
              const std::string& started) {
  return json{{"command", command},
              {"started_utc", started},
              {"wall_seconds", seconds},
              {"threads", ctx.threads},
              {"seed", ctx.seed()}};
}

int run_all(const RunContext& ctx, const fs::path& out, const std::string& started) {
  const auto t0 = std::chrono::steady_clock::now();
  json timings = json::array();
  const auto report = run_acceptance(ctx, [&](const CriterionResult& c) {
    std::printf("[%s] criterion %2d: %s (%.1f s)\n", c.passed ? "PASS" : "FAIL", c.id, c.title.c_str(), c.seconds);
    if (!c.error.empty()) std::printf("       error: %s\n", c.error.c_str());
    for (const auto& part : c.parts) {
      for (const auto& name : part.failed_checks()) std::printf("       failed check: %s\n", name.c_str());
    }
    std::fflush(stdout);
    timings.push_back(json{{"id", c.id}, {"seconds", c.seconds}});
    char sub[32];
    std::snprintf(sub, sizeof sub, "criterion_%02d", c.id);
    for (std::size_t k = 0; k < c.parts.size(); ++k) {
      const fs::path dir = c.parts.size() == 1 ? out / sub : out / sub / ("part_" + std::to_string(k + 1));
      write_outcome(dir, c.parts[k]);
    }
  });
  write_json(out / "summary.json", report.summary());
  json meta = metadata("all-acceptance", ctx,
                       std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), started);
  meta["criteria_seconds"] = timings;
  write_json(out / "metadata.json", meta);
  std::size_t passed = 0;
  for (const auto& c : report.criteria) passed += c.passed ? 1 : 0;
  std::printf("%zu/%zu criteria passed\n", passed, report.criteria.size());
  return report.all_passed() ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noisereg: noise-regularised explosive SDE experiments"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir = "out";
  std::vector<std::string> sets;
  long long seed = -1;
  int threads = 0;
  app.add_option("--config", config_path, "JSON config; keys missing from it take defaults");
  app.add_option("--seed", seed, "master seed (overrides config 'seed')");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (0: hardware concurrency)");
  app.add_option("--set", sets, "override, e.g. --set model.eta=1.5")->take_all();
  app.fallthrough();

  std::vector<std::string> names;
  for (const auto& [name, fn] : commands()) names.push_back(name);
  names.push_back("all-acceptance");
  names.push_back("print-config");
  for (const auto& n : names) app.add_subcommand(n, "run " + n);

  if (argc > 1 && argv[1][0] != '-' && std::find(names.begin(), names.end(), argv[1]) == names.end()) {
    std::cerr << "unknown command '" << argv[1] << "'\n";
    return kExitInvalid;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunContext ctx;
  try {
    ctx.cfg = config_path.empty() ? default_config() : load_config_file(config_path);
    for (const auto& s : sets) apply_override(ctx.cfg, s);
    if (seed >= 0) ctx.cfg["seed"] = static_cast<Seed>(seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: unknown or invalid key '" << e.key() << "': " << e.what() << "\n";
    return kExitInvalid;
  }
  ctx.threads = threads > 0 ? threads : default_threads();

  if (command == "print-config") {
    std::cout << render_json(ctx.cfg);
    return kExitOk;
  }

  const fs::path out = out_dir;
  const std::string started = utc_now();
  try {
    fs::create_directories(out);
    write_json(out / "config.json", ctx.cfg);
    if (command == "all-acceptance") return run_all(ctx, out, started);

    const auto t0 = std::chrono::steady_clock::now();
    const Outcome o = (*find_command(command))(ctx);
    write_outcome(out, o);
    write_json(out / "metadata.json",
               metadata(command, ctx, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), started));
    for (const auto& c : o.checks) {
      std::printf("[%s] %s\n", c.at("passed").get<bool>() ? "PASS" : "FAIL", c.at("name").get<std::string>().c_str());
    }
    return o.passed ? kExitOk : kExitFailed;
  } catch (const ConfigError& e) {
    std::cerr << "config error: invalid key '" << e.key() << "': " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ValidationError& e) {
    json viol = json::array();
    for (const auto& v : e.report().violations) {
      std::cerr << "validation error: " << v.key << ": " << v.message << "\n";
      viol.push_back(json{{"key", v.key}, {"message", v.message}});
    }
    write_json(out / "summary.json", json{{"command", command}, {"passed", false}, {"violations", viol}});
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "experiment error: " << e.what() << "\n";
    return kExitFailed;
  }
}
