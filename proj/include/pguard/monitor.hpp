#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pguard/pipeline.hpp"

namespace pguard {

enum class ConflictPolicy { LastWins, FirstWins, FailOnConflict };

// How a middle monitor rewrites its victim's output before the next victim
// sees it. StripAll rewinds to the load-time tree, so every victim observes
// exactly what the page loaded with.
enum class DelPolicy { StripAll };

struct MonitorConfig {
  ConflictPolicy conflict_policy = ConflictPolicy::LastWins;
  DelPolicy del_policy = DelPolicy::StripAll;
};

/// A registry wrapped for guarded execution: for n victims, 2n+1 slots in
/// the shape [init, E1, m1, E2, m2, ..., En, final]. Victims keep their
/// manifests apart from renumbered install times; monitor manifests mirror
/// their neighbor victim so the derived execution order equals the slot
/// order.
struct GuardedRegistry {
  Registry slots;
  std::vector<std::string> victim_ids;  // slot order
  std::string init_id;
  std::vector<std::string> middle_ids;
  std::string final_id;
  std::vector<std::string> probe_ids;  // filled by interleave_strong_attacker
  MonitorConfig config;
  PatchTable store;  // shared monitor store; reset at the start of each run
};

struct GuardedRunResult {
  ExecutionTrace trace;
  PatchTable store;
  DomTree final_dom;
};

struct Violation {
  std::size_t position = 0;  // slot index in the executed order
  std::string extension_id;
  std::string reason;
};

class ConflictError : public std::runtime_error {
 public:
  ConflictError(std::size_t slot_a, std::size_t slot_b, PatchEntry entry,
                const std::string& message)
      : std::runtime_error(message), slot_a_(slot_a), slot_b_(slot_b),
        entry_(std::move(entry)) {}
  std::size_t slot_a() const { return slot_a_; }
  std::size_t slot_b() const { return slot_b_; }
  const PatchEntry& entry() const { return entry_; }

 private:
  std::size_t slot_a_;
  std::size_t slot_b_;
  PatchEntry entry_;
};

/// Wraps every enabled extension of `victims` between monitors.
/// monitors_privileged grants the monitor manifests management, which
/// verify_pipeline_integrity requires. EmptyRegistry when nothing is
/// enabled.
GuardedRegistry guard(const Registry& victims, MonitorConfig config = {},
                      bool monitors_privileged = true);

/// One middle monitor: records diff(prev_input, out) under `slot` in the
/// store, then rewinds the tree by applying the inverse, handing the next
/// victim the previous input again.
DomTree middle_monitor_step(const DomTree& prev_input, const DomTree& out, PatchTable& store,
                            std::size_t slot);

/// The closing slot: records the last victim's diff, then replays the whole
/// store against dom0 under the configured conflict policy.
DomTree final_apply(const DomTree& dom0, const DomTree& last_victim_out, PatchTable& store,
                    const MonitorConfig& config);

/// Applies stored entries in slot order against dom0. Entry positions are
/// rebased over what earlier slots already applied; a position landing
/// inside another slot's deletion, or an update hitting another slot's
/// value, is a conflict resolved by the policy (LastWins drops the earlier
/// entry and retries, FirstWins drops the later one, FailOnConflict throws
/// ConflictError).
DomTree replay_store(const DomTree& dom0, const PatchTable&, ConflictPolicy);

/// Executes the guarded slot sequence. The init slot re-normalizes the
/// input; every extension slot (victims and any interleaved foreigner) runs
/// its program; middle monitors record-and-rewind; the final slot merges.
/// The store starts empty on every run.
GuardedRunResult run_guarded(GuardedRegistry&, const DomTree& dom0);

/// The strong attacker's move against a guarded pipeline: n+1 observer
/// copies dropped into the slot sequence (before and after the opening
/// monitor, then after each middle monitor), install times renumbered.
/// PrivilegeDenied unless the attacker manifest holds management.
GuardedRegistry interleave_strong_attacker(const GuardedRegistry&, const Manifest& attacker);

/// Walks the executed slot order against the expected alternation
/// [init, victim, middle, victim, ..., victim, final]; every slot that does
/// not belong there yields one Violation, as does a missing expected slot.
/// PrivilegeDenied when the monitors lack management.
std::vector<Violation> verify_pipeline_integrity(const GuardedRegistry&);

}  // namespace pguard
