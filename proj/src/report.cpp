#include <sstream>
#include <string>
#include <vector>

#include "pguard/scenario.hpp"

namespace pguard {
namespace {

const char* mode_name(RunMode m) {
  switch (m) {
    case RunMode::Unguarded: return "unguarded";
    case RunMode::Guarded: return "guarded";
    case RunMode::Differential: return "differential";
  }
  return "";
}

void put_trace(std::ostringstream& os, const ExecutionTrace& t, const char* title) {
  os << title << "\n";
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const ExecutionTrace::Step& step = t.steps[i];
    os << "  " << i << " " << step.extension_id << " " << node_count(step.input) << " -> "
       << node_count(step.output) << "\n";
  }
}

void put_knowledge(std::ostringstream& os, const ExecutionTrace& t, const DomTree& dom0,
                   const char* title) {
  os << title << "\n";
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    Knowledge k = default_knowledge(t, i + 1);
    std::size_t learned = diff(dom0, t.steps[i].input).size();
    os << "  " << t.steps[i].extension_id << " snapshots " << k.snapshots.size() << " learned "
       << learned << "\n";
  }
}

void put_entries(std::ostringstream& os, const std::vector<PatchEntry>& entries, bool records) {
  os << "  entries " << entries.size() << "\n";
  if (!records) return;
  for (const PatchEntry& e : entries) {
    os << "  " << to_record(StoredEntry{0, e}) << "\n";
  }
}

void put_timings(std::ostringstream& os, const ExecutionTrace& t, const char* label) {
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    os << "  " << label << " " << i << " " << t.steps[i].extension_id << " "
       << t.steps[i].elapsed_ns << " ns\n";
  }
}

}  // namespace

std::string format_report(const Scenario& s, const ScenarioOutcome& out,
                          const ReportOptions& options) {
  std::ostringstream os;
  os << "scenario " << s.name << "\n";
  os << "mode " << mode_name(out.mode) << "\n";

  if (out.unguarded) {
    os << "\n";
    put_trace(os, *out.unguarded, "pipeline");
    put_knowledge(os, *out.unguarded, s.dom0, "knowledge");
  }
  if (out.guarded) {
    os << "\n";
    put_trace(os, out.guarded->trace, "guarded-pipeline");
    put_knowledge(os, out.guarded->trace, s.dom0, "guarded-knowledge");
  }

  if (s.attacker.kind == AttackerKind::Usual) {
    if (out.unguarded) {
      os << "\nlearned\n";
      put_entries(os, out.learned, options.records_format);
    }
    if (out.guarded) {
      os << "\nlearned-guarded\n";
      put_entries(os, out.learned_guarded, options.records_format);
    }
  }
  if (s.attacker.kind == AttackerKind::Strong) {
    if (out.unguarded) {
      os << "\nattributed\n";
      for (const Attribution& a : out.attributed) {
        os << "  victim " << a.victim_id << "\n";
        put_entries(os, a.effect, options.records_format);
      }
    }
    if (out.guarded) {
      os << "\nattributed-guarded\n";
      for (const Attribution& a : out.attributed_guarded) {
        os << "  victim " << a.victim_id << "\n";
        put_entries(os, a.effect, options.records_format);
      }
    }
  }

  if (out.guarded) {
    os << "\nstore\n";
    os << "  entries " << out.guarded->store.entries.size() << "\n";
    if (options.records_format) {
      for (const StoredEntry& e : out.guarded->store.entries) {
        os << "  " << to_record(e) << "\n";
      }
    }
  }

  if (!out.violations.empty()) {
    os << "\nviolations\n";
    for (const Violation& v : out.violations) {
      os << "  " << v.position << " " << v.extension_id << " " << v.reason << "\n";
    }
  }
  if (!out.integrity_error.empty()) {
    os << "\nintegrity\n  " << out.integrity_error << "\n";
  }
  if (out.conflict) {
    os << "\nconflict\n  " << out.conflict_message << "\n";
  }

  os << "\nfinal\n";
  if (out.guarded) {
    os << "  " << serialize(out.guarded->final_dom) << "\n";
  } else if (out.conflict) {
    os << "  none (merge aborted)\n";
  } else if (out.unguarded) {
    os << "  " << serialize(out.unguarded->final_dom) << "\n";
  }

  if (out.outputs_equal) {
    os << "\nequal " << (*out.outputs_equal ? "true" : "false") << "\n";
  }

  if (options.with_timings) {
    os << "\ntimings\n";
    if (out.unguarded) put_timings(os, *out.unguarded, "pipeline");
    if (out.guarded) put_timings(os, out.guarded->trace, "guarded-pipeline");
  }
  return os.str();
}

}  // namespace pguard
