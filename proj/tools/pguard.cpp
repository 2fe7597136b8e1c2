#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pguard/bench.hpp"
#include "pguard/scenario.hpp"

namespace {

bool parse_range(const std::string& text, std::size_t& lo, std::size_t& hi) {
  std::size_t dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      lo = hi = std::stoul(text);
    } else {
      lo = std::stoul(text.substr(0, dots));
      hi = std::stoul(text.substr(dots + 2));
    }
  } catch (const std::exception&) {
    return false;
  }
  return lo >= 1 && lo <= hi;
}

std::uint64_t seed_from_env(std::uint64_t fallback) {
  const char* s = std::getenv("PGUARD_SEED");
  if (s == nullptr) return fallback;
  char* end = nullptr;
  unsigned long long v = std::strtoull(s, &end, 10);
  if (end == s || *end != '\0') return fallback;
  return v;
}

int exit_code_for(const pguard::ScenarioOutcome& out) {
  if (out.conflict) return 2;
  if (!out.violations.empty()) return 3;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"browser-extension pipeline simulator with a record-and-replay guard"};
  app.require_subcommand(1);

  std::string run_file;
  std::string mode = "unguarded";
  std::string policy;
  std::string format = "table";
  bool timings = false;
  CLI::App* run = app.add_subcommand("run", "execute a scenario file");
  run->add_option("file", run_file, "scenario file")->required();
  run->add_option("--mode", mode, "unguarded, guarded or differential")
      ->check(CLI::IsMember({"unguarded", "guarded", "differential"}));
  run->add_option("--policy", policy, "override the scenario's conflict policy")
      ->check(CLI::IsMember({"last-wins", "first-wins", "fail"}));
  run->add_option("--format", format, "table or records")
      ->check(CLI::IsMember({"table", "records"}));
  run->add_flag("--timings", timings, "include per-slot wall times (non-deterministic)");

  std::string verify_file;
  CLI::App* verify = app.add_subcommand("verify", "check a scenario's guarded slot order");
  verify->add_option("file", verify_file, "scenario file")->required();

  std::string dump_file;
  CLI::App* dump = app.add_subcommand("dump-store", "run guarded and print the patch store");
  dump->add_option("file", dump_file, "scenario file")->required();

  std::string ext_range = "1..10";
  std::string dom_range = "200";
  std::size_t reps = 5;
  std::uint64_t seed_cli = 0;
  bool seed_given = false;
  CLI::App* bench = app.add_subcommand("bench", "measure guarded overhead scaling");
  bench->add_option("--ext", ext_range, "extension count range, e.g. 1..10");
  bench->add_option("--dom", dom_range, "tree size range, e.g. 50..500");
  bench->add_option("--reps", reps, "repetitions per configuration");
  bench->add_option("--seed", seed_cli, "generator seed (beats PGUARD_SEED)")
      ->each([&](const std::string&) { seed_given = true; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run)) {
      pguard::Scenario s = pguard::load_scenario(run_file);
      if (!policy.empty()) {
        if (policy == "last-wins") {
          s.guard_spec.config.conflict_policy = pguard::ConflictPolicy::LastWins;
        } else if (policy == "first-wins") {
          s.guard_spec.config.conflict_policy = pguard::ConflictPolicy::FirstWins;
        } else {
          s.guard_spec.config.conflict_policy = pguard::ConflictPolicy::FailOnConflict;
        }
      }
      pguard::RunMode m = mode == "guarded"      ? pguard::RunMode::Guarded
                          : mode == "differential" ? pguard::RunMode::Differential
                                                   : pguard::RunMode::Unguarded;
      pguard::ScenarioOutcome out = pguard::run_scenario(s, m);
      pguard::ReportOptions options;
      options.with_timings = timings;
      options.records_format = format == "records";
      std::cout << pguard::format_report(s, out, options);
      return exit_code_for(out);
    }
    if (app.got_subcommand(verify)) {
      pguard::Scenario s = pguard::load_scenario(verify_file);
      pguard::GuardedRegistry g = pguard::guarded_registry_for(s);
      std::vector<pguard::Violation> violations = pguard::verify_pipeline_integrity(g);
      for (const pguard::Violation& v : violations) {
        std::cout << v.position << " " << v.extension_id << " " << v.reason << "\n";
      }
      if (violations.empty()) std::cout << "intact\n";
      return violations.empty() ? 0 : 3;
    }
    if (app.got_subcommand(dump)) {
      pguard::Scenario s = pguard::load_scenario(dump_file);
      pguard::ScenarioOutcome out = pguard::run_scenario(s, pguard::RunMode::Guarded);
      if (out.conflict) {
        std::cerr << "conflict: " << out.conflict_message << "\n";
        return 2;
      }
      std::cout << pguard::dump_records(out.guarded->store);
      return 0;
    }
    if (app.got_subcommand(bench)) {
      pguard::BenchConfig cfg;
      if (!parse_range(ext_range, cfg.ext_min, cfg.ext_max)) {
        std::cerr << "bad --ext range: " << ext_range << "\n";
        return 4;
      }
      if (!parse_range(dom_range, cfg.dom_min, cfg.dom_max)) {
        std::cerr << "bad --dom range: " << dom_range << "\n";
        return 4;
      }
      cfg.reps = reps;
      cfg.seed = seed_from_env(cfg.seed);
      if (seed_given) cfg.seed = seed_cli;
      std::cout << pguard::format_bench(pguard::run_bench(cfg));
      return 0;
    }
  } catch (const pguard::ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return 4;
  } catch (const pguard::PipelineError& e) {
    std::cerr << "pipeline error: " << e.what() << "\n";
    return 4;
  } catch (const pguard::PatchError& e) {
    std::cerr << "patch error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
