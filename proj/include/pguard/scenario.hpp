#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pguard/monitor.hpp"

namespace pguard {

/// Errors from scenario text. Io covers unreadable files, Parse covers
/// malformed lines (line is 1-based), Validation covers well-formed text
/// with inconsistent content.
class ScenarioError : public std::runtime_error {
 public:
  enum class Kind { Io, Parse, Validation };
  ScenarioError(Kind kind, std::size_t line, const std::string& message)
      : std::runtime_error(line == 0 ? message : "line " + std::to_string(line) + ": " + message),
        kind_(kind), line_(line) {}
  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }  // 0 when not tied to a line

 private:
  Kind kind_;
  std::size_t line_;
};

enum class AttackerKind { None, Usual, Strong };
enum class Manipulation { None, SecurePrefs, Management };

struct AttackerSpec {
  AttackerKind kind = AttackerKind::None;
  Manipulation manipulation = Manipulation::None;
  Manifest manifest;  // id "attacker", idle/bubble unless overridden
  std::optional<std::uint64_t> preferred_install_time;
};

struct GuardSpec {
  bool requested = false;
  MonitorConfig config;
  bool monitors_privileged = true;
};

/// A parsed scenario file: a load-time tree, the installed extensions in
/// declaration order with resolved unique install times, and optional
/// attacker and guard sections.
struct Scenario {
  std::string name;
  DomTree dom0;
  std::vector<Extension> extensions;
  AttackerSpec attacker;
  GuardSpec guard_spec;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// The declared extensions alone.
Registry victim_registry(const Scenario&);

/// Victims plus the usual attacker with any declared manipulation applied.
/// Strong attackers restructure the pipeline instead, so this returns the
/// victim registry unchanged for them.
Registry attacked_registry(const Scenario&);

/// The guarded pipeline the scenario describes: victims (plus a usual
/// attacker as an ordinary monitored slot) wrapped by guard(); a strong
/// attacker's probes are interleaved on top.
GuardedRegistry guarded_registry_for(const Scenario&);

enum class RunMode { Unguarded, Guarded, Differential };

struct ScenarioOutcome {
  RunMode mode = RunMode::Unguarded;
  std::optional<ExecutionTrace> unguarded;
  std::optional<GuardedRunResult> guarded;
  std::vector<Attribution> attributed;          // strong attacker, unguarded run
  std::vector<Attribution> attributed_guarded;  // strong attacker, guarded run
  std::vector<PatchEntry> learned;              // usual attacker, unguarded run
  std::vector<PatchEntry> learned_guarded;      // usual attacker, guarded run
  std::vector<Violation> violations;
  std::string integrity_error;  // non-empty when the integrity check refused
  bool conflict = false;
  std::string conflict_message;
  std::optional<bool> outputs_equal;  // differential mode only
};

/// Runs the scenario in the requested mode. Conflicts under fail-on-conflict
/// are reported in the outcome rather than thrown; scenario and privilege
/// errors propagate.
ScenarioOutcome run_scenario(const Scenario&, RunMode);

struct ReportOptions {
  bool with_timings = false;   // off keeps reports byte-stable across runs
  bool records_format = false; // dump patch entries as record lines
};

std::string format_report(const Scenario&, const ScenarioOutcome&, const ReportOptions& = {});

}  // namespace pguard
