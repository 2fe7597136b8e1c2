#include "pguard/monitor.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pguard {
namespace {

std::uint64_t now_ns() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

bool contains_id(const std::vector<std::string>& ids, const std::string& id) {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

// Rebases `path` over one structural edit at `at`. Returns false when the
// path dies: it addressed, or passed through, a node the edit deleted.
// `slot_like` marks positions that denote boundaries between siblings
// (insertion points, deletion gaps), which survive a delete landing exactly
// on their index; node positions there die with the node.
bool rebase_path(NodePath& path, bool slot_like, PatchOp op, const NodePath& at) {
  if (op == PatchOp::Update) return true;
  const std::vector<std::size_t>& a = at.steps;
  if (a.empty()) {
    // The root was replaced: everything below it is gone.
    return op != PatchOp::Delete;
  }
  std::size_t m = a.size();
  if (path.steps.size() < m) return true;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (path.steps[i] != a[i]) return true;
  }
  std::size_t& c = path.steps[m - 1];
  std::size_t k = a[m - 1];
  if (op == PatchOp::Insert) {
    // Ties shift too: a later slot's material lands after what an earlier
    // slot already put at the same anchor.
    if (c >= k) ++c;
    return true;
  }
  if (c > k) {
    --c;
    return true;
  }
  if (c < k) return true;
  if (path.steps.size() > m) return false;
  return slot_like;
}

constexpr std::size_t kLocalInverse = static_cast<std::size_t>(-1);

// One coordinate shift a pending entry must cross before it can apply: a
// foreign slot's already-applied edit, or the inverse of a dropped entry
// from the pending entry's own slot. Ops form a chain: each position is
// relative to the tree once the preceding ops in the list took effect.
struct DeltaOp {
  PatchOp op = PatchOp::Insert;
  NodePath position;
  std::size_t origin = kLocalInverse;  // candidate index; kLocalInverse for drops
};

struct AppliedRec {
  std::size_t slot = 0;
  PatchEntry entry;           // position maintained in current-tree coordinates
  std::size_t candidate = 0;  // index into the replay candidate list
  bool alive = true;          // false once a later edit removed the node
};

bool path_prefix_leq(const NodePath& prefix, const NodePath& path) {
  if (prefix.steps.size() > path.steps.size()) return false;
  return std::equal(prefix.steps.begin(), prefix.steps.end(), path.steps.begin());
}

// Apply-time failures name no culprit, so recover one from the applied
// history: the latest live other-slot entry whose effect explains the
// failure. Record positions track the current tree, so the comparison is
// immune to shifts that happened since the record applied.
const AppliedRec* find_killer(const std::vector<AppliedRec>& applied, std::size_t slot,
                              const PatchEntry& e, PatchErrorKind kind) {
  for (auto it = applied.rbegin(); it != applied.rend(); ++it) {
    if (it->slot == slot || !it->alive) continue;
    const PatchEntry& other = it->entry;
    if (kind == PatchErrorKind::UpdateMismatch) {
      if (other.op == PatchOp::Update && other.position == e.position &&
          other.target == e.target && other.attr_name == e.attr_name) {
        return &*it;
      }
    } else if (kind == PatchErrorKind::PositionUnresolvable) {
      if (other.op == PatchOp::Delete && path_prefix_leq(other.position, e.position)) {
        return &*it;
      }
    }
  }
  return nullptr;
}

struct Candidate {
  std::size_t slot = 0;
  PatchEntry entry;  // recorded coordinates, in the slot's own frame
  bool dropped = false;
};

// Keeps applied record positions in current-tree coordinates after one more
// structural entry lands.
void shift_applied(std::vector<AppliedRec>& applied, const PatchEntry& just_applied) {
  if (just_applied.op == PatchOp::Update) return;
  for (AppliedRec& rec : applied) {
    if (!rec.alive) continue;
    bool slot_like = rec.entry.op == PatchOp::Delete;
    rec.alive = rebase_path(rec.entry.position, slot_like, just_applied.op,
                            just_applied.position);
  }
}

// A slot's later entries were recorded after `own`, so once `own` applies,
// the foreign shifts they still have to cross move with it: symmetric
// transform of the delta chain against the own edit. Chain ops are
// boundaries between siblings, and a slot's recorded coordinates can never
// address foreign material, so an own edit landing on the same index slides
// past them; only deleting an enclosing subtree erases a chain op.
void advance_frame(std::vector<DeltaOp>& delta, const PatchEntry& own) {
  if (own.op == PatchOp::Update) return;
  NodePath l = own.position;
  std::vector<DeltaOp> kept;
  kept.reserve(delta.size());
  for (DeltaOp& q : delta) {
    NodePath q_before = q.position;
    bool q_alive = rebase_path(q.position, true, own.op, l);
    // The own entry survived its own candidacy, so its marker cannot die
    // crossing the same chain again.
    rebase_path(l, true, q.op, q_before);
    if (q_alive) kept.push_back(std::move(q));
  }
  delta = kept;
}

}  // namespace

GuardedRegistry guard(const Registry& victims, MonitorConfig config, bool monitors_privileged) {
  std::vector<std::string> order = execution_order(victims);
  if (order.empty()) {
    throw PipelineError(PipelineErrorKind::EmptyRegistry, "nothing to guard");
  }
  GuardedRegistry g;
  g.config = config;
  std::uint64_t clock = 0;
  auto add_monitor = [&](const std::string& id, const Manifest& mirror) {
    Extension m;
    m.manifest.extension_id = id;
    m.manifest.run_at = mirror.run_at;
    m.manifest.phase = mirror.phase;
    m.manifest.install_time = clock++;
    m.manifest.management = monitors_privileged;
    g.slots.add(std::move(m));
  };
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Extension* victim = victims.find(order[i]);
    if (i == 0) {
      g.init_id = "monitor:init";
      add_monitor(g.init_id, victim->manifest);
    }
    Extension copy = *victim;
    copy.manifest.install_time = clock++;
    g.slots.add(std::move(copy));
    g.victim_ids.push_back(order[i]);
    if (i + 1 < order.size()) {
      std::string id = "monitor:mid:" + std::to_string(i + 1);
      g.middle_ids.push_back(id);
      add_monitor(id, victim->manifest);
    } else {
      g.final_id = "monitor:final";
      add_monitor(g.final_id, victim->manifest);
    }
  }
  return g;
}

DomTree middle_monitor_step(const DomTree& prev_input, const DomTree& out, PatchTable& store,
                            std::size_t slot) {
  std::vector<PatchEntry> d = diff(prev_input, out);
  store.append(slot, d);
  std::vector<PatchEntry> undo = invert(d);
  return pguard::apply(out, undo);
}

DomTree final_apply(const DomTree& dom0, const DomTree& last_victim_out, PatchTable& store,
                    const MonitorConfig& config) {
  std::size_t slot = store.entries.empty() ? 1 : store.entries.back().slot + 1;
  store.append(slot, diff(dom0, last_victim_out));
  return replay_store(dom0, store, config.conflict_policy);
}

DomTree replay_store(const DomTree& dom0, const PatchTable& table, ConflictPolicy policy) {
  std::vector<Candidate> candidates;
  candidates.reserve(table.entries.size());
  for (const StoredEntry& s : table.entries) candidates.push_back({s.slot, s.entry, false});

  // LastWins drops one candidate per pass and restarts, so the loop runs at
  // most candidates.size() + 1 times.
  for (;;) {
    std::optional<DomNode> root = dom0.root;
    std::vector<AppliedRec> applied;
    // Per slot, the chain of shifts between that slot's recorded frame and
    // the current tree. Keyed up front so foreign edits reach slots whose
    // own entries come later.
    std::map<std::size_t, std::vector<DeltaOp>> deltas;
    for (const Candidate& c : candidates) deltas[c.slot];
    bool restarted = false;

    // A dropped entry stays in its slot's frame arithmetic: later entries
    // of the slot were recorded assuming it applied, so its inverse joins
    // the chain they cross.
    auto retire = [](std::vector<DeltaOp>& delta, const PatchEntry& recorded) {
      if (recorded.op == PatchOp::Update) return;
      DeltaOp inv;
      inv.op = recorded.op == PatchOp::Insert ? PatchOp::Delete : PatchOp::Insert;
      inv.position = recorded.position;
      delta.insert(delta.begin(), std::move(inv));
    };

    for (std::size_t idx = 0; idx < candidates.size() && !restarted; ++idx) {
      Candidate& cand = candidates[idx];
      std::vector<DeltaOp>& delta = deltas[cand.slot];
      if (cand.dropped) {
        retire(delta, cand.entry);
        continue;
      }
      PatchEntry e = cand.entry;
      bool slot_like = e.op == PatchOp::Insert && !e.position.steps.empty();

      // Carry the entry from its slot's frame into the current tree.
      std::optional<std::size_t> killer_cand;
      bool cascade = false;
      for (const DeltaOp& q : delta) {
        if (!rebase_path(e.position, slot_like, q.op, q.position)) {
          if (q.origin == kLocalInverse) {
            cascade = true;
          } else {
            killer_cand = q.origin;
          }
          break;
        }
      }
      if (cascade) {
        // The entry depended on a dropped entry of its own slot; it goes
        // down with it, under every policy.
        cand.dropped = true;
        retire(delta, cand.entry);
        continue;
      }
      if (!killer_cand.has_value()) {
        bool ok = false;
        try {
          apply_entry(root, e);
          ok = true;
        } catch (const PatchError& err) {
          const AppliedRec* rec = find_killer(applied, cand.slot, e, err.kind());
          if (rec == nullptr) throw;
          killer_cand = rec->candidate;
        }
        if (ok) {
          shift_applied(applied, e);
          applied.push_back({cand.slot, e, idx, true});
          advance_frame(delta, cand.entry);
          if (e.op != PatchOp::Update) {
            for (auto& [slot, chain] : deltas) {
              if (slot != cand.slot) chain.push_back({e.op, e.position, idx});
            }
          }
          continue;
        }
      }

      std::size_t killer_slot = candidates[*killer_cand].slot;
      switch (policy) {
        case ConflictPolicy::FirstWins:
          cand.dropped = true;
          retire(delta, cand.entry);
          break;
        case ConflictPolicy::LastWins:
          candidates[*killer_cand].dropped = true;
          restarted = true;
          break;
        case ConflictPolicy::FailOnConflict:
          throw ConflictError(killer_slot, cand.slot, cand.entry,
                              "slots " + std::to_string(killer_slot) + " and " +
                                  std::to_string(cand.slot) + " collide at " +
                                  cand.entry.position.to_string());
      }
    }
    if (restarted) continue;
    if (!root) {
      throw PatchError(PatchErrorKind::EmptyResult, "replay leaves the document without a root");
    }
    return DomTree{std::move(*root)};
  }
}

GuardedRunResult run_guarded(GuardedRegistry& g, const DomTree& dom0) {
  g.store = PatchTable{};
  std::vector<std::string> order = execution_order(g.slots);

  ExecutionTrace trace;
  trace.initial = dom0;
  DomTree current = dom0;
  DomTree normalized = dom0;        // what the init slot hands downstream
  DomTree prev_victim_input = dom0; // rewind target for the next middle
  std::size_t victims_seen = 0;

  for (const std::string& id : order) {
    Extension* e = g.slots.find(id);
    ExecutionTrace::Step step;
    step.extension_id = id;
    step.input = current;
    std::uint64_t started = now_ns();

    if (id == g.init_id) {
      evaluate(*e, current);
      current = parse(serialize(current));
      normalized = current;
    } else if (id == g.final_id) {
      evaluate(*e, current);
      current = final_apply(normalized, current, g.store, g.config);
    } else if (contains_id(g.middle_ids, id)) {
      evaluate(*e, current);
      current = middle_monitor_step(prev_victim_input, current, g.store, victims_seen);
    } else {
      if (contains_id(g.victim_ids, id)) {
        prev_victim_input = current;
        ++victims_seen;
      }
      current = evaluate(*e, current);
    }

    step.elapsed_ns = now_ns() - started;
    step.output = current;
    trace.steps.push_back(std::move(step));
  }
  trace.final_dom = current;
  return GuardedRunResult{std::move(trace), g.store, std::move(current)};
}

GuardedRegistry interleave_strong_attacker(const GuardedRegistry& g, const Manifest& attacker) {
  if (!attacker.management) {
    throw PipelineError(PipelineErrorKind::PrivilegeDenied,
                        "interleaving needs the management permission");
  }
  std::vector<std::string> order = execution_order(g.slots);
  GuardedRegistry out;
  out.victim_ids = g.victim_ids;
  out.init_id = g.init_id;
  out.middle_ids = g.middle_ids;
  out.final_id = g.final_id;
  out.config = g.config;

  std::uint64_t clock = 0;
  std::size_t probes = 0;
  auto push_copy = [&](const Extension& src) {
    Extension copy = src;
    copy.manifest.install_time = clock++;
    out.slots.add(std::move(copy));
  };
  auto push_probe = [&](const Manifest& mirror) {
    Extension probe;
    probe.manifest = attacker;
    probe.manifest.extension_id = attacker.extension_id + "#" + std::to_string(probes++);
    probe.manifest.run_at = mirror.run_at;
    probe.manifest.phase = mirror.phase;
    probe.manifest.install_time = clock++;
    out.probe_ids.push_back(probe.manifest.extension_id);
    out.slots.add(std::move(probe));
  };

  for (const std::string& id : order) {
    const Extension* e = g.slots.find(id);
    if (id == g.init_id) {
      push_probe(e->manifest);  // sees the raw load
      push_copy(*e);
      push_probe(e->manifest);  // sees the normalized tree
    } else {
      push_copy(*e);
      if (contains_id(g.middle_ids, id)) push_probe(e->manifest);
    }
  }
  return out;
}

std::vector<Violation> verify_pipeline_integrity(const GuardedRegistry& g) {
  const Extension* init = g.slots.find(g.init_id);
  if (init == nullptr) {
    throw PipelineError(PipelineErrorKind::UnknownExtension,
                        "guarded registry lost its opening monitor");
  }
  if (!init->manifest.management) {
    throw PipelineError(PipelineErrorKind::PrivilegeDenied,
                        "integrity checks need managing monitors");
  }

  std::vector<std::string> expected;
  expected.push_back(g.init_id);
  for (std::size_t i = 0; i < g.victim_ids.size(); ++i) {
    expected.push_back(g.victim_ids[i]);
    if (i < g.middle_ids.size()) expected.push_back(g.middle_ids[i]);
  }
  expected.push_back(g.final_id);

  std::vector<std::string> actual = execution_order(g.slots);
  std::vector<Violation> out;
  std::size_t next = 0;
  for (std::size_t pos = 0; pos < actual.size(); ++pos) {
    if (next < expected.size() && actual[pos] == expected[next]) {
      ++next;
      continue;
    }
    out.push_back({pos, actual[pos], "slot does not belong to the guarded alternation"});
  }
  for (; next < expected.size(); ++next) {
    out.push_back({actual.size(), expected[next], "guarded slot missing from the order"});
  }
  return out;
}

}  // namespace pguard
