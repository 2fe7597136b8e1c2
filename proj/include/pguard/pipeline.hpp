#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pguard/extension.hpp"
#include "pguard/patch.hpp"

namespace pguard {

enum class PipelineErrorKind {
  EmptyRegistry,
  IndexOutOfRange,
  UnknownExtension,
  DuplicateExtensionId,
  DuplicateInstallTime,
  PrivilegeDenied,
};

class PipelineError : public std::runtime_error {
 public:
  PipelineError(PipelineErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  PipelineErrorKind kind() const { return kind_; }

 private:
  PipelineErrorKind kind_;
};

struct Installed {
  Extension extension;
  bool enabled = true;
};

/// The set of installed extensions. Ids and install times are unique;
/// execution order is derived, never stored.
struct Registry {
  std::vector<Installed> entries;

  void add(Extension, bool enabled = true);
  Extension* find(std::string_view id);
  const Extension* find(std::string_view id) const;
  bool contains(std::string_view id) const;
  void set_enabled(std::string_view id, bool enabled);  // UnknownExtension on miss
};

/// Enabled extension ids sorted by (run_at: start < end < idle, then
/// phase: capture < bubble, then install_time ascending). Unique install
/// times make the order total.
std::vector<std::string> execution_order(const Registry&);

struct ExecutionTrace {
  struct Step {
    std::string extension_id;
    DomTree input;
    DomTree output;
    std::uint64_t elapsed_ns = 0;
  };
  DomTree initial;
  std::vector<Step> steps;
  DomTree final_dom;
};

/// Runs every enabled extension in execution order, threading each output
/// into the next input. Observation logs grow by one snapshot per
/// participant. EmptyRegistry when nothing is enabled.
ExecutionTrace run_pipeline(Registry&, const DomTree& dom0);

/// What an extension can reconstruct without privileges: the load-time
/// tree, plus its own input. Snapshots are deduplicated, so the set has
/// size 1 for the first slot or when nothing changed upstream.
struct Knowledge {
  std::vector<DomTree> snapshots;

  bool contains(const DomTree&) const;
};

/// Knowledge of the extension at 1-based `position` in the trace.
Knowledge default_knowledge(const ExecutionTrace&, std::size_t position);

/// Pure observer: empty program, so its output equals its input and its
/// log records whatever the pipeline hands it.
Extension make_usual_attacker(std::string id, std::uint64_t install_time);

/// Everything a trailing observer learns: the edit script from the
/// load-time tree to its latest observed input.
std::vector<PatchEntry> usual_attacker_learned(const Extension& attacker, const DomTree& dom0);

/// Registry with n+1 observer copies of the attacker bracketing the n
/// enabled victims (before, between, after). Copies mirror the run_at and
/// phase of their following victim and all install times are renumbered,
/// so the derived order interleaves exactly. PrivilegeDenied unless the
/// attacker manifest holds management.
Registry make_strong_attacker(const Registry& victims, const Manifest& attacker);

struct Attribution {
  std::string victim_id;
  std::vector<PatchEntry> effect;
};

/// Per-victim effects recovered from a bracketed run: consecutive observer
/// snapshots differenced around each victim. The registry must have been
/// run so the observer logs are populated.
std::vector<Attribution> strong_attacker_attribution(const Registry& ran,
                                                     std::string_view attacker_base_id);

/// Install-time edit (the preferences file is writable): same registry
/// with one extension's clock changed. UnknownExtension / DuplicateInstallTime.
Registry reorder_via_secure_preferences(const Registry&, std::string_view id,
                                        std::uint64_t new_install_time);

/// Disable-all then re-enable with the attacker last, handing out fresh
/// consecutive install times in re-enable order. Within one run_at and
/// phase group this puts the attacker at the back; the attacker still
/// controls its own manifest for the rest. PrivilegeDenied unless the
/// attacker holds management.
Registry reorder_via_management(const Registry&, std::string_view attacker_id);

}  // namespace pguard
