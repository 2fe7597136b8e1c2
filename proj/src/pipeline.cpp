#include "pguard/pipeline.hpp"

#include <algorithm>
#include <chrono>

namespace pguard {

namespace {

int run_at_rank(RunAt v) {
  switch (v) {
    case RunAt::DocumentStart: return 0;
    case RunAt::DocumentEnd: return 1;
    case RunAt::DocumentIdle: return 2;
  }
  return 3;
}

int phase_rank(Phase v) { return v == Phase::Capture ? 0 : 1; }

bool runs_before(const Manifest& a, const Manifest& b) {
  if (run_at_rank(a.run_at) != run_at_rank(b.run_at)) {
    return run_at_rank(a.run_at) < run_at_rank(b.run_at);
  }
  if (phase_rank(a.phase) != phase_rank(b.phase)) {
    return phase_rank(a.phase) < phase_rank(b.phase);
  }
  return a.install_time < b.install_time;  // FIFO: oldest install first
}

std::uint64_t now_ns() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

}  // namespace

void Registry::add(Extension extension, bool enabled) {
  for (const Installed& other : entries) {
    if (other.extension.manifest.extension_id == extension.manifest.extension_id) {
      throw PipelineError(PipelineErrorKind::DuplicateExtensionId,
                          "duplicate extension id: " + extension.manifest.extension_id);
    }
    if (other.extension.manifest.install_time == extension.manifest.install_time) {
      throw PipelineError(PipelineErrorKind::DuplicateInstallTime,
                          "duplicate install time for " + extension.manifest.extension_id);
    }
  }
  entries.push_back({std::move(extension), enabled});
}

Extension* Registry::find(std::string_view id) {
  for (Installed& e : entries) {
    if (e.extension.manifest.extension_id == id) return &e.extension;
  }
  return nullptr;
}

const Extension* Registry::find(std::string_view id) const {
  for (const Installed& e : entries) {
    if (e.extension.manifest.extension_id == id) return &e.extension;
  }
  return nullptr;
}

bool Registry::contains(std::string_view id) const { return find(id) != nullptr; }

void Registry::set_enabled(std::string_view id, bool enabled) {
  for (Installed& e : entries) {
    if (e.extension.manifest.extension_id == id) {
      e.enabled = enabled;
      return;
    }
  }
  throw PipelineError(PipelineErrorKind::UnknownExtension,
                      "unknown extension: " + std::string(id));
}

std::vector<std::string> execution_order(const Registry& r) {
  std::vector<const Manifest*> manifests;
  for (const Installed& e : r.entries) {
    if (e.enabled) manifests.push_back(&e.extension.manifest);
  }
  std::sort(manifests.begin(), manifests.end(),
            [](const Manifest* a, const Manifest* b) { return runs_before(*a, *b); });
  std::vector<std::string> order;
  order.reserve(manifests.size());
  for (const Manifest* m : manifests) order.push_back(m->extension_id);
  return order;
}

ExecutionTrace run_pipeline(Registry& r, const DomTree& dom0) {
  std::vector<std::string> order = execution_order(r);
  if (order.empty()) {
    throw PipelineError(PipelineErrorKind::EmptyRegistry, "no enabled extensions to run");
  }
  ExecutionTrace trace;
  trace.initial = dom0;
  DomTree current = dom0;
  for (const std::string& id : order) {
    Extension* e = r.find(id);
    ExecutionTrace::Step step;
    step.extension_id = id;
    step.input = current;
    std::uint64_t started = now_ns();
    step.output = evaluate(*e, current);
    step.elapsed_ns = now_ns() - started;
    current = step.output;
    trace.steps.push_back(std::move(step));
  }
  trace.final_dom = current;
  return trace;
}

bool Knowledge::contains(const DomTree& t) const {
  return std::any_of(snapshots.begin(), snapshots.end(),
                     [&](const DomTree& s) { return s == t; });
}

Knowledge default_knowledge(const ExecutionTrace& trace, std::size_t position) {
  if (position < 1 || position > trace.steps.size()) {
    throw PipelineError(PipelineErrorKind::IndexOutOfRange,
                        "no pipeline slot " + std::to_string(position));
  }
  Knowledge k;
  k.snapshots.push_back(trace.initial);
  const DomTree& input = trace.steps[position - 1].input;
  if (!k.contains(input)) k.snapshots.push_back(input);
  return k;
}

Extension make_usual_attacker(std::string id, std::uint64_t install_time) {
  Extension e;
  e.manifest.extension_id = std::move(id);
  e.manifest.run_at = RunAt::DocumentIdle;
  e.manifest.phase = Phase::Bubble;
  e.manifest.install_time = install_time;
  return e;
}

std::vector<PatchEntry> usual_attacker_learned(const Extension& attacker,
                                               const DomTree& dom0) {
  if (attacker.observation_log.empty()) return {};
  return diff(dom0, attacker.observation_log.back());
}

Registry make_strong_attacker(const Registry& victims, const Manifest& attacker) {
  if (!attacker.management) {
    throw PipelineError(PipelineErrorKind::PrivilegeDenied,
                        "interleaving requires the management privilege");
  }
  std::vector<std::string> order = execution_order(victims);
  if (order.empty()) {
    throw PipelineError(PipelineErrorKind::EmptyRegistry, "no enabled victims to bracket");
  }
  Registry out;
  std::uint64_t clock = 0;
  auto add_probe = [&](std::size_t index, const Manifest& mirror) {
    Extension probe;
    probe.manifest = attacker;
    probe.manifest.extension_id =
        attacker.extension_id + "#" + std::to_string(index);
    probe.manifest.run_at = mirror.run_at;
    probe.manifest.phase = mirror.phase;
    probe.manifest.install_time = clock++;
    out.add(std::move(probe));
  };
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Extension* victim = victims.find(order[i]);
    if (i == 0) add_probe(0, victim->manifest);
    Extension copy = *victim;
    copy.manifest.install_time = clock++;
    out.add(std::move(copy));
    add_probe(i + 1, victim->manifest);
  }
  return out;
}

std::vector<Attribution> strong_attacker_attribution(const Registry& ran,
                                                     std::string_view attacker_base_id) {
  std::string prefix = std::string(attacker_base_id) + "#";
  std::vector<Attribution> out;
  const DomTree* previous_probe = nullptr;
  std::string pending_victim;
  for (const std::string& id : execution_order(ran)) {
    const Extension* e = ran.find(id);
    if (id.rfind(prefix, 0) == 0) {
      if (e->observation_log.empty()) {
        throw PipelineError(PipelineErrorKind::IndexOutOfRange,
                            "attribution needs a completed run");
      }
      const DomTree& observed = e->observation_log.back();
      if (previous_probe != nullptr && !pending_victim.empty()) {
        out.push_back({pending_victim, diff(*previous_probe, observed)});
      }
      previous_probe = &observed;
      pending_victim.clear();
    } else {
      pending_victim = id;
    }
  }
  return out;
}

Registry reorder_via_secure_preferences(const Registry& r, std::string_view id,
                                        std::uint64_t new_install_time) {
  Registry out = r;
  Extension* target = out.find(id);
  if (target == nullptr) {
    throw PipelineError(PipelineErrorKind::UnknownExtension,
                        "unknown extension: " + std::string(id));
  }
  for (const Installed& e : out.entries) {
    if (e.extension.manifest.extension_id != id &&
        e.extension.manifest.install_time == new_install_time) {
      throw PipelineError(PipelineErrorKind::DuplicateInstallTime,
                          "install time already taken: " + std::to_string(new_install_time));
    }
  }
  target->manifest.install_time = new_install_time;
  return out;
}

Registry reorder_via_management(const Registry& r, std::string_view attacker_id) {
  const Extension* attacker = r.find(attacker_id);
  if (attacker == nullptr) {
    throw PipelineError(PipelineErrorKind::UnknownExtension,
                        "unknown extension: " + std::string(attacker_id));
  }
  if (!attacker->manifest.management) {
    throw PipelineError(PipelineErrorKind::PrivilegeDenied,
                        "reordering requires the management privilege");
  }
  // Disable everything, then re-enable in the old order with the attacker
  // last; the fresh clock values record the re-enable sequence.
  std::vector<std::string> sequence;
  for (const std::string& id : execution_order(r)) {
    if (id != attacker_id) sequence.push_back(id);
  }
  sequence.push_back(std::string(attacker_id));
  Registry out = r;
  for (Installed& e : out.entries) e.enabled = false;
  // Start above every existing clock so disabled stragglers keep unique times.
  std::uint64_t clock = 0;
  for (const Installed& e : out.entries) {
    clock = std::max(clock, e.extension.manifest.install_time + 1);
  }
  for (const std::string& id : sequence) {
    Extension* e = out.find(id);
    e->manifest.install_time = clock++;
    out.set_enabled(id, true);
  }
  return out;
}

}  // namespace pguard
