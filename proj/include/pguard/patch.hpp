#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pguard/dom.hpp"

namespace pguard {

enum class PatchOp { Insert, Delete, Update };
enum class UpdateTarget { Attribute, Text };

/// One edit step. A patch is a program, not a set: each entry's position is
/// interpreted against the tree as it stands once all earlier entries have
/// been applied. Insert positions name the child slot the payload lands in
/// (slot == child count appends); Delete and Update positions name an
/// existing node. The empty position addresses the root: Delete clears it
/// and a following Insert installs a replacement.
struct PatchEntry {
  PatchOp op = PatchOp::Insert;
  NodePath position;
  // Insert: the inserted subtree. Delete: the removed subtree, retained so
  // the entry stays invertible.
  std::optional<DomNode> payload;
  UpdateTarget target = UpdateTarget::Text;
  std::string attr_name;                 // Update on an attribute
  std::optional<std::string> old_value;  // absent = attribute not present
  std::optional<std::string> new_value;
};

bool operator==(const PatchEntry&, const PatchEntry&);
inline bool operator!=(const PatchEntry& a, const PatchEntry& b) { return !(a == b); }

PatchEntry make_insert(NodePath position, DomNode payload);
PatchEntry make_delete(NodePath position, std::optional<DomNode> removed = std::nullopt);
PatchEntry make_attr_update(NodePath position, std::string name,
                            std::optional<std::string> old_value,
                            std::optional<std::string> new_value);
PatchEntry make_text_update(NodePath position, std::string old_value, std::string new_value);

/// A patch entry plus the pipeline slot that produced it.
struct StoredEntry {
  std::size_t slot = 0;
  PatchEntry entry;
};

/// Append-only table of slot-tagged entries; slots are non-decreasing.
struct PatchTable {
  std::vector<StoredEntry> entries;

  void append(std::size_t slot, const std::vector<PatchEntry>& batch);
};

enum class PatchErrorKind {
  PositionUnresolvable,
  UpdateMismatch,
  MissingPayload,
  SizeLimitExceeded,
  EmptyResult,
};

class PatchError : public std::runtime_error {
 public:
  PatchError(PatchErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  PatchErrorKind kind() const { return kind_; }

 private:
  PatchErrorKind kind_;
};

/// Edit script turning `pre` into `post`. Correct by construction
/// (apply(pre, diff(pre, post)) == post) and empty iff the trees are equal;
/// not necessarily minimal. When `post` extends `pre` by insertions only,
/// the script contains only Insert entries.
std::vector<PatchEntry> diff(const DomTree& pre, const DomTree& post);

/// Applies entries in order. Throws PatchError on unresolvable positions,
/// stale Update old-values, missing Insert payloads, or a script that
/// leaves the document without a root.
DomTree apply(const DomTree&, std::span<const PatchEntry>);

/// Single-entry apply over an optional root, permitting the cleared-root
/// state between a root Delete and the Insert that replaces it.
void apply_entry(std::optional<DomNode>& root, const PatchEntry&);

/// Reversed script with Insert/Delete swapped and Update values flipped;
/// apply(apply(t, p), invert(p)) == t. Throws MissingPayload when a Delete
/// lacks its retained subtree.
std::vector<PatchEntry> invert(std::span<const PatchEntry>);

/// Shortest edit script by breadth-first search over single edits, with
/// insert payloads and update values drawn from `post`. Both trees must
/// have at most 8 nodes (SizeLimitExceeded otherwise). Validation aid for
/// diff; quadratic-state search, not for production-size trees.
std::vector<PatchEntry> oracle_diff(const DomTree& pre, const DomTree& post);

/// Line format: "insert <slot> <path> <payload>", "delete <slot> <path>
/// <payload>", "update <slot> <path> attr <name> <old> <new>" or
/// "update <slot> <path> text <old> <new>". Paths as in NodePath::to_string.
/// Payloads (serialized subtrees) and values are double-quoted with
/// backslash escapes, "-" for an absent value or payload.
std::string to_record(const StoredEntry&);
StoredEntry record_from_line(std::string_view);
std::string dump_records(const PatchTable&);
PatchTable records_from_text(std::string_view);

}  // namespace pguard
