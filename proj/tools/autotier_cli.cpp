// autotier: run scenarios, compare runs, check the greedy placement against the oracle.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "autotier/autotiering.hpp"
#include "autotier/instances.hpp"
#include "autotier/scenario_io.hpp"
#include "autotier/simulator.hpp"

namespace {

using namespace autotier;

constexpr std::size_t kMaxRandomVmdks = 8;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("autotier");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("AUTOTIER_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

int cmd_run(const std::string& scenario_path, const std::string& policy,
            std::optional<std::uint64_t> seed, const std::string& out) {
  const Scenario sc = load_scenario(scenario_path);
  const std::uint64_t s = seed.value_or(sc.simulation.seed);
  spdlog::info("running '{}' under {} with seed {}", sc.name, policy, s);
  const RunResult run = run_scenario(sc, policy, s);
  write_run_artifacts(run, out);
  const nlohmann::json summary = summary_json(run);
  std::cout << policy << ": mean IOPS " << format_number(summary["total"]["mean_iops"])
            << ", mean MB/s " << format_number(summary["total"]["mean_mbps"])
            << ", migrations " << run.migrations.size() << " -> " << out << "\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& dirs) {
  std::vector<nlohmann::json> summaries;
  for (const std::string& dir : dirs) {
    std::ifstream in(std::filesystem::path(dir) / "summary.json");
    if (!in) throw std::runtime_error("no summary.json in '" + dir + "'");
    summaries.push_back(nlohmann::json::parse(in));
  }
  std::cout << compare_summaries(summaries).dump(2) << "\n";
  return 0;
}

bool report(const Scenario& sc, std::uint64_t seed, bool verbose) {
  const MonitorState st = initial_monitor_state(sc, seed);
  std::vector<TierId> previous;
  for (const VmdkSpec& v : sc.vmdks) previous.push_back(v.initial_tier);
  const OracleComparison cmp = compare_with_oracle(st, sc, previous);
  bool ok = true;
  if (cmp.oracle) {
    ok = cmp.greedy_feasible && cmp.greedy_profit <= cmp.oracle_profit + 1e-9;
  }
  if (verbose || !ok) {
    std::cout << (ok ? "ok" : "MISMATCH") << " greedy " << format_number(cmp.greedy_profit)
              << (cmp.greedy_feasible ? "" : " (infeasible)") << ", oracle "
              << (cmp.oracle ? format_number(cmp.oracle_profit) : std::string("none")) << "\n";
  }
  return ok;
}

int cmd_oracle(const std::string& scenario_path, int random_count, std::uint64_t seed) {
  const Scenario sc = load_scenario(scenario_path);
  if (sc.vmdks.size() > kOracleMaxVmdks || sc.tiers.size() > kOracleMaxTiers) {
    throw std::invalid_argument("scenario too large for the oracle");
  }
  bool ok = report(sc, seed, true);
  Rng rng(seed);
  int failures = 0;
  for (int i = 0; i < random_count; ++i) {
    if (!report(random_tiny_instance(sc, kMaxRandomVmdks, rng), seed + static_cast<std::uint64_t>(i) + 1, false)) {
      ++failures;
    }
  }
  if (random_count > 0) {
    std::cout << random_count - failures << "/" << random_count << " random instances ok\n";
  }
  return ok && failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Multi-tier SSD placement simulator"};
  app.require_subcommand(1);

  std::string scenario, policy = "autotiering", out = "out";
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Simulate a scenario and write run artifacts");
  run->add_option("--scenario", scenario, "Scenario JSON")->required();
  run->add_option("--policy", policy, "autotiering, idt or edt")
      ->check(CLI::IsMember({"autotiering", "idt", "edt"}));
  run->add_option("--seed", seed, "Overrides the scenario seed");
  run->add_option("--out", out, "Output directory");

  std::vector<std::string> dirs;
  auto* compare = app.add_subcommand("compare", "Ratios of AutoTiering against baselines");
  compare->add_option("--runs", dirs, "Run output directories")->required();

  int random_count = 0;
  std::uint64_t oracle_seed = 1;
  auto* oracle = app.add_subcommand("oracle-check", "Greedy vs exhaustive oracle at epoch 0");
  oracle->add_option("--scenario", scenario, "Scenario JSON")->required();
  oracle->add_option("--random", random_count, "Also check this many random instances");
  oracle->add_option("--seed", oracle_seed, "Seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(scenario, policy, seed, out);
    if (*compare) return cmd_compare(dirs);
    if (*oracle) return cmd_oracle(scenario, random_count, oracle_seed);
  } catch (const ValidationError& e) {
    std::cerr << "invalid scenario:\n";
    for (const Diagnostic& d : e.diagnostics()) std::cerr << "  " << d.path << ": " << d.message << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
