#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pguard/dom.hpp"

namespace pguard {

enum class RunAt { DocumentStart, DocumentEnd, DocumentIdle };
enum class Phase { Capture, Bubble };

std::string_view to_string(RunAt);
std::string_view to_string(Phase);
std::optional<RunAt> run_at_from_string(std::string_view);
std::optional<Phase> phase_from_string(std::string_view);

/// Static registration data. install_time is a logical clock: unique,
/// non-negative, higher means installed later.
struct Manifest {
  std::string extension_id;
  RunAt run_at = RunAt::DocumentStart;
  Phase phase = Phase::Capture;
  std::uint64_t install_time = 0;
  bool management = false;  // may disable/enable other extensions
};

struct Selector {
  enum class Kind { ByTag, ByAttribute, ByPath, Root };
  Kind kind = Kind::Root;
  std::string tag;        // ByTag
  std::string attr_name;  // ByAttribute
  std::string attr_value;
  NodePath path;          // ByPath
};

struct Action {
  enum class Kind { InsertChild, DeleteSelf, SetAttribute, SetText, Nothing };
  Kind kind = Kind::Nothing;
  DomNode subtree;                   // InsertChild payload
  std::optional<std::size_t> index;  // InsertChild; absent = append
  std::string name;                  // SetAttribute
  std::string value;                 // SetAttribute / SetText
};

enum class RuleScope { FirstMatch, AllMatches };

struct Rule {
  Selector selector;
  Action action;
  RuleScope scope = RuleScope::FirstMatch;
};

/// Deterministic effect: rules run in order, each against the tree left by
/// the previous one. A selector with no match makes its rule a no-op, as
/// does an action that cannot act on the matched node kind (InsertChild or
/// SetAttribute on a text node, SetText on an element, DeleteSelf on the
/// root).
struct EffectProgram {
  std::vector<Rule> rules;
};

struct Extension {
  Manifest manifest;
  EffectProgram program;
  std::vector<DomTree> observation_log;  // one input snapshot per run
};

enum class Monotonicity { Monotone, NonMonotone };

/// Matched node paths in document order (pre-order, root first).
std::vector<NodePath> find_matches(const DomTree&, const Selector&);

/// Runs the program over a copy of the input and appends the input to the
/// extension's observation log. The input itself is never mutated.
DomTree evaluate(Extension&, const DomTree& input);

/// Monotone iff every action only adds nodes (InsertChild or Nothing).
Monotonicity classify(const Extension&);

}  // namespace pguard
