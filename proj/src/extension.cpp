#include "pguard/extension.hpp"

#include <algorithm>

namespace pguard {

namespace {

bool selector_hits(const DomNode& n, const Selector& s) {
  switch (s.kind) {
    case Selector::Kind::ByTag:
      return n.kind == NodeKind::Element && n.tag == s.tag;
    case Selector::Kind::ByAttribute: {
      if (n.kind != NodeKind::Element) return false;
      const std::string* value = n.attribute(s.attr_name);
      return value != nullptr && *value == s.attr_value;
    }
    case Selector::Kind::ByPath:
    case Selector::Kind::Root:
      return false;  // resolved positionally, not per node
  }
  return false;
}

void collect_matches(const DomNode& n, const Selector& s, NodePath prefix,
                     std::vector<NodePath>& out) {
  if (selector_hits(n, s)) out.push_back(prefix);
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    NodePath next = prefix;
    next.steps.push_back(i);
    collect_matches(n.children[i], s, std::move(next), out);
  }
}

void apply_action(DomTree& work, const NodePath& path, const Action& action) {
  DomNode* n = resolve(work, path);
  if (n == nullptr) return;
  switch (action.kind) {
    case Action::Kind::InsertChild: {
      if (n->kind != NodeKind::Element) return;
      std::size_t slot = action.index ? std::min(*action.index, n->children.size())
                                      : n->children.size();
      n->children.insert(n->children.begin() + static_cast<std::ptrdiff_t>(slot),
                         action.subtree);
      return;
    }
    case Action::Kind::DeleteSelf: {
      if (path.steps.empty()) return;  // the root always stays
      NodePath parent_path{{path.steps.begin(), path.steps.end() - 1}};
      DomNode* parent = resolve(work, parent_path);
      if (parent == nullptr) return;
      parent->children.erase(parent->children.begin() +
                             static_cast<std::ptrdiff_t>(path.steps.back()));
      return;
    }
    case Action::Kind::SetAttribute:
      if (n->kind != NodeKind::Element) return;
      set_attribute(*n, action.name, action.value);
      return;
    case Action::Kind::SetText:
      if (n->kind != NodeKind::Text) return;
      n->text = action.value;
      return;
    case Action::Kind::Nothing:
      return;
  }
}

}  // namespace

std::string_view to_string(RunAt v) {
  switch (v) {
    case RunAt::DocumentStart: return "document_start";
    case RunAt::DocumentEnd: return "document_end";
    case RunAt::DocumentIdle: return "document_idle";
  }
  return "";
}

std::string_view to_string(Phase v) {
  return v == Phase::Capture ? "capture" : "bubble";
}

std::optional<RunAt> run_at_from_string(std::string_view s) {
  if (s == "document_start") return RunAt::DocumentStart;
  if (s == "document_end") return RunAt::DocumentEnd;
  if (s == "document_idle") return RunAt::DocumentIdle;
  return std::nullopt;
}

std::optional<Phase> phase_from_string(std::string_view s) {
  if (s == "capture") return Phase::Capture;
  if (s == "bubble") return Phase::Bubble;
  return std::nullopt;
}

std::vector<NodePath> find_matches(const DomTree& t, const Selector& s) {
  std::vector<NodePath> out;
  switch (s.kind) {
    case Selector::Kind::Root:
      out.push_back(NodePath{});
      return out;
    case Selector::Kind::ByPath:
      if (resolve(t, s.path) != nullptr) out.push_back(s.path);
      return out;
    default:
      collect_matches(t.root, s, NodePath{}, out);
      return out;
  }
}

DomTree evaluate(Extension& e, const DomTree& input) {
  e.observation_log.push_back(input);
  DomTree work = input;
  for (const Rule& rule : e.program.rules) {
    std::vector<NodePath> matches = find_matches(work, rule.selector);
    if (rule.scope == RuleScope::FirstMatch && matches.size() > 1) matches.resize(1);
    // Matches are collected up front, then edited deepest-and-rightmost
    // first: an edit at a path never shifts paths that precede it in
    // document order.
    for (auto it = matches.rbegin(); it != matches.rend(); ++it) {
      apply_action(work, *it, rule.action);
    }
  }
  return work;
}

Monotonicity classify(const Extension& e) {
  bool monotone = std::all_of(e.program.rules.begin(), e.program.rules.end(),
                              [](const Rule& rule) {
                                return rule.action.kind == Action::Kind::InsertChild ||
                                       rule.action.kind == Action::Kind::Nothing;
                              });
  return monotone ? Monotonicity::Monotone : Monotonicity::NonMonotone;
}

}  // namespace pguard
