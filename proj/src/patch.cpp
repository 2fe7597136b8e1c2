#include "pguard/patch.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <unordered_set>
#include <utility>

namespace pguard {

namespace {

NodePath child_path(const NodePath& parent, std::size_t index) {
  NodePath out = parent;
  out.steps.push_back(index);
  return out;
}

// --- child alignment ------------------------------------------------------

// Identity match: same kind, same tag, same "id" attribute value. Weights
// prefer exactly equal subtrees, then embeddings (so insert-only edits pair
// every old child with its own grown copy), then bare identity.
int level1_weight(const DomNode& a, const DomNode& b) {
  if (a.kind != b.kind) return 0;
  if (a.kind == NodeKind::Text) return a.text == b.text ? 3 : 0;
  if (a.tag != b.tag) return 0;
  const std::string* id_a = a.attribute("id");
  const std::string* id_b = b.attribute("id");
  if ((id_a == nullptr) != (id_b == nullptr)) return 0;
  if (id_a != nullptr && *id_a != *id_b) return 0;
  if (a == b) return 3;
  if (node_leq(a, b)) return 2;
  return 1;
}

// Fallback pairing for children level1 left unmatched; a pair here may
// still update its way from a to b (id flips, text rewrites).
bool level2_match(const DomNode& a, const DomNode& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == NodeKind::Text) return true;
  return a.tag == b.tag;
}

using Matches = std::vector<std::pair<std::size_t, std::size_t>>;

template <typename WeightFn>
Matches range_lcs(std::size_t a_lo, std::size_t a_hi, std::size_t b_lo, std::size_t b_hi,
                  WeightFn weight) {
  const std::size_t p = a_hi - a_lo;
  const std::size_t q = b_hi - b_lo;
  if (p == 0 || q == 0) return {};
  std::vector<int> wt(p * q);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < q; ++j) {
      wt[i * q + j] = weight(a_lo + i, b_lo + j);
    }
  }
  std::vector<int> dp((p + 1) * (q + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> int& { return dp[i * (q + 1) + j]; };
  for (std::size_t i = p; i-- > 0;) {
    for (std::size_t j = q; j-- > 0;) {
      int best = std::max(at(i + 1, j), at(i, j + 1));
      int w = wt[i * q + j];
      if (w > 0) best = std::max(best, w + at(i + 1, j + 1));
      at(i, j) = best;
    }
  }
  Matches out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < p && j < q) {
    int w = wt[i * q + j];
    if (w > 0 && at(i, j) == w + at(i + 1, j + 1)) {
      out.emplace_back(a_lo + i, b_lo + j);
      ++i;
      ++j;
    } else if (at(i, j) == at(i + 1, j)) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

Matches align_children(const std::vector<DomNode>& a, const std::vector<DomNode>& b) {
  Matches anchors = range_lcs(0, a.size(), 0, b.size(), [&](std::size_t i, std::size_t j) {
    return level1_weight(a[i], b[j]);
  });
  Matches all;
  std::size_t a_lo = 0;
  std::size_t b_lo = 0;
  for (std::size_t k = 0; k <= anchors.size(); ++k) {
    std::size_t a_hi = (k < anchors.size()) ? anchors[k].first : a.size();
    std::size_t b_hi = (k < anchors.size()) ? anchors[k].second : b.size();
    Matches gap = range_lcs(a_lo, a_hi, b_lo, b_hi, [&](std::size_t i, std::size_t j) {
      return level2_match(a[i], b[j]) ? 1 : 0;
    });
    all.insert(all.end(), gap.begin(), gap.end());
    if (k < anchors.size()) {
      all.push_back(anchors[k]);
      a_lo = anchors[k].first + 1;
      b_lo = anchors[k].second + 1;
    }
  }
  return all;
}

// --- attribute plans ------------------------------------------------------

bool has_name(const std::vector<std::pair<std::string, std::string>>& attrs,
              const std::string& name) {
  return std::any_of(attrs.begin(), attrs.end(),
                     [&](const auto& kv) { return kv.first == name; });
}

// Per-name updates reproduce the post list only when shared names keep
// their relative order, new names sit at the tail (apply appends), and
// removed names sit at the tail of the pre list (the inverted plan re-adds
// them by appending); anything else falls back to replacing the node.
std::optional<std::vector<PatchEntry>> attr_plan(
    const NodePath& path, const std::vector<std::pair<std::string, std::string>>& pre,
    const std::vector<std::pair<std::string, std::string>>& post) {
  std::vector<const std::pair<std::string, std::string>*> common_pre;
  std::vector<const std::pair<std::string, std::string>*> common_post;
  std::vector<const std::pair<std::string, std::string>*> added;
  for (const auto& kv : pre) {
    if (has_name(post, kv.first)) common_pre.push_back(&kv);
  }
  bool common_done = false;
  for (const auto& kv : post) {
    if (has_name(pre, kv.first)) {
      if (common_done) return std::nullopt;  // shared name after an added one
      common_post.push_back(&kv);
    } else {
      common_done = true;
      added.push_back(&kv);
    }
  }
  if (common_pre.size() != common_post.size()) return std::nullopt;
  for (std::size_t i = 0; i < common_pre.size(); ++i) {
    if (common_pre[i]->first != common_post[i]->first) return std::nullopt;  // reorder
  }
  bool seen_removed = false;
  for (const auto& kv : pre) {
    if (!has_name(post, kv.first)) {
      seen_removed = true;
    } else if (seen_removed) {
      return std::nullopt;  // removed name before a shared one
    }
  }
  std::vector<PatchEntry> plan;
  for (auto it = pre.rbegin(); it != pre.rend(); ++it) {
    if (!has_name(post, it->first)) {
      plan.push_back(make_attr_update(path, it->first, it->second, std::nullopt));
    }
  }
  for (std::size_t i = 0; i < common_pre.size(); ++i) {
    if (common_pre[i]->second != common_post[i]->second) {
      plan.push_back(
          make_attr_update(path, common_pre[i]->first, common_pre[i]->second,
                           common_post[i]->second));
    }
  }
  for (const auto* kv : added) {
    plan.push_back(make_attr_update(path, kv->first, std::nullopt, kv->second));
  }
  return plan;
}

// --- recursive diff -------------------------------------------------------

void diff_node(std::vector<PatchEntry>& out, const NodePath& path, const DomNode& a,
               const DomNode& b);

void diff_children(std::vector<PatchEntry>& out, const NodePath& parent,
                   const std::vector<DomNode>& a, const std::vector<DomNode>& b) {
  Matches matches = align_children(a, b);
  std::size_t ai = 0;
  std::size_t bj = 0;
  std::size_t cur = 0;  // child index in the evolving tree
  std::size_t mk = 0;
  while (ai < a.size() || bj < b.size()) {
    bool at_match = mk < matches.size() && ai == matches[mk].first && bj == matches[mk].second;
    if (at_match) {
      diff_node(out, child_path(parent, cur), a[ai], b[bj]);
      ++ai;
      ++bj;
      ++cur;
      ++mk;
    } else if (ai < a.size() && (mk == matches.size() || ai < matches[mk].first)) {
      out.push_back(make_delete(child_path(parent, cur), a[ai]));
      ++ai;
    } else {
      out.push_back(make_insert(child_path(parent, cur), b[bj]));
      ++bj;
      ++cur;
    }
  }
}

void replace_node(std::vector<PatchEntry>& out, const NodePath& path, const DomNode& a,
                  const DomNode& b) {
  out.push_back(make_delete(path, a));
  out.push_back(make_insert(path, b));
}

void diff_node(std::vector<PatchEntry>& out, const NodePath& path, const DomNode& a,
               const DomNode& b) {
  if (a == b) return;
  if (a.kind == NodeKind::Text && b.kind == NodeKind::Text) {
    out.push_back(make_text_update(path, a.text, b.text));
    return;
  }
  if (a.kind != b.kind || a.tag != b.tag) {
    replace_node(out, path, a, b);
    return;
  }
  if (a.attributes != b.attributes) {
    auto plan = attr_plan(path, a.attributes, b.attributes);
    if (!plan) {
      replace_node(out, path, a, b);
      return;
    }
    out.insert(out.end(), plan->begin(), plan->end());
  }
  diff_children(out, path, a.children, b.children);
}

// --- apply ----------------------------------------------------------------

DomNode* resolve_mut(std::optional<DomNode>& root, std::span<const std::size_t> steps) {
  if (!root) return nullptr;
  DomNode* n = &*root;
  for (std::size_t step : steps) {
    if (n->kind != NodeKind::Element || step >= n->children.size()) return nullptr;
    n = &n->children[step];
  }
  return n;
}

[[noreturn]] void unresolvable(const PatchEntry& e, const char* what) {
  throw PatchError(PatchErrorKind::PositionUnresolvable,
                   std::string(what) + " at " + e.position.to_string());
}

[[noreturn]] void mismatch(const PatchEntry& e, const char* what) {
  throw PatchError(PatchErrorKind::UpdateMismatch,
                   std::string(what) + " at " + e.position.to_string());
}

void apply_one(std::optional<DomNode>& root, const PatchEntry& e) {
  switch (e.op) {
    case PatchOp::Insert: {
      if (!e.payload) {
        throw PatchError(PatchErrorKind::MissingPayload,
                         "insert at " + e.position.to_string() + " has no payload");
      }
      if (e.position.steps.empty()) {
        if (root) unresolvable(e, "root insert with a root present");
        root = *e.payload;
        return;
      }
      std::span<const std::size_t> steps(e.position.steps);
      DomNode* parent = resolve_mut(root, steps.first(steps.size() - 1));
      if (parent == nullptr || parent->kind != NodeKind::Element) {
        unresolvable(e, "insert parent missing");
      }
      std::size_t slot = steps.back();
      if (slot > parent->children.size()) unresolvable(e, "insert slot out of range");
      parent->children.insert(parent->children.begin() + static_cast<std::ptrdiff_t>(slot),
                              *e.payload);
      return;
    }
    case PatchOp::Delete: {
      if (e.position.steps.empty()) {
        if (!root) unresolvable(e, "root already deleted");
        root.reset();
        return;
      }
      std::span<const std::size_t> steps(e.position.steps);
      DomNode* parent = resolve_mut(root, steps.first(steps.size() - 1));
      if (parent == nullptr || parent->kind != NodeKind::Element) {
        unresolvable(e, "delete parent missing");
      }
      std::size_t slot = steps.back();
      if (slot >= parent->children.size()) unresolvable(e, "delete target missing");
      parent->children.erase(parent->children.begin() + static_cast<std::ptrdiff_t>(slot));
      return;
    }
    case PatchOp::Update: {
      DomNode* n = resolve_mut(root, e.position.steps);
      if (n == nullptr) unresolvable(e, "update target missing");
      if (e.target == UpdateTarget::Text) {
        if (n->kind != NodeKind::Text) mismatch(e, "text update on a non-text node");
        if (!e.old_value || !e.new_value) mismatch(e, "text update without both values");
        if (n->text != *e.old_value) mismatch(e, "stale text value");
        n->text = *e.new_value;
      } else {
        if (n->kind != NodeKind::Element) mismatch(e, "attribute update on a text node");
        const std::string* cur = n->attribute(e.attr_name);
        bool same = cur ? (e.old_value && *cur == *e.old_value) : !e.old_value;
        if (!same) mismatch(e, "stale attribute value");
        if (e.new_value) {
          set_attribute(*n, e.attr_name, *e.new_value);
        } else {
          remove_attribute(*n, e.attr_name);
        }
      }
      return;
    }
  }
}

// --- oracle ---------------------------------------------------------------

// Injective tree key; serialize() would conflate adjacent text nodes.
void canonical_key(const DomNode& n, std::string& out) {
  if (n.kind == NodeKind::Text) {
    out += 't';
    out += std::to_string(n.text.size());
    out += ':';
    out += n.text;
    return;
  }
  out += 'e';
  out += n.tag;
  out += '(';
  for (const auto& [name, value] : n.attributes) {
    out += std::to_string(name.size());
    out += ':';
    out += name;
    out += std::to_string(value.size());
    out += ':';
    out += value;
  }
  out += '|';
  for (const DomNode& child : n.children) canonical_key(child, out);
  out += ')';
}

std::string state_key(const std::optional<DomNode>& root) {
  if (!root) return "<no-root>";
  std::string out;
  canonical_key(*root, out);
  return out;
}

struct OracleVocabulary {
  std::vector<DomNode> payloads;                         // distinct subtrees of post
  std::vector<std::string> attr_names;                   // names appearing in post
  std::map<std::string, std::vector<std::string>> attr_values;
  std::vector<std::string> text_values;
};

void collect_vocabulary(const DomNode& n, OracleVocabulary& v,
                        std::unordered_set<std::string>& seen_payloads) {
  if (seen_payloads.insert(state_key(n)).second) v.payloads.push_back(n);
  if (n.kind == NodeKind::Text) {
    if (std::find(v.text_values.begin(), v.text_values.end(), n.text) == v.text_values.end()) {
      v.text_values.push_back(n.text);
    }
    return;
  }
  for (const auto& [name, value] : n.attributes) {
    if (std::find(v.attr_names.begin(), v.attr_names.end(), name) == v.attr_names.end()) {
      v.attr_names.push_back(name);
    }
    auto& values = v.attr_values[name];
    if (std::find(values.begin(), values.end(), value) == values.end()) {
      values.push_back(value);
    }
  }
  for (const DomNode& child : n.children) collect_vocabulary(child, v, seen_payloads);
}

void collect_paths(const DomNode& n, NodePath prefix, std::vector<NodePath>& out) {
  out.push_back(prefix);
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    collect_paths(n.children[i], child_path(prefix, i), out);
  }
}

std::vector<PatchEntry> oracle_moves(const std::optional<DomNode>& root,
                                     const OracleVocabulary& v) {
  std::vector<PatchEntry> moves;
  if (!root) {
    for (const DomNode& payload : v.payloads) moves.push_back(make_insert(NodePath{}, payload));
    return moves;
  }
  DomTree tree{*root};
  std::vector<NodePath> paths;
  collect_paths(tree.root, NodePath{}, paths);
  for (const NodePath& path : paths) {
    const DomNode* n = resolve(tree, path);
    moves.push_back(make_delete(path, *n));
    if (n->kind == NodeKind::Text) {
      for (const std::string& value : v.text_values) {
        if (value != n->text) moves.push_back(make_text_update(path, n->text, value));
      }
    } else {
      std::vector<std::string> names = v.attr_names;
      for (const auto& [name, value] : n->attributes) {
        if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
      }
      for (const std::string& name : names) {
        const std::string* cur = n->attribute(name);
        std::optional<std::string> old_value =
            cur ? std::optional<std::string>(*cur) : std::nullopt;
        std::vector<std::optional<std::string>> candidates;
        if (auto it = v.attr_values.find(name); it != v.attr_values.end()) {
          for (const std::string& value : it->second) candidates.emplace_back(value);
        }
        candidates.emplace_back(std::nullopt);
        for (const auto& next_value : candidates) {
          if (next_value == old_value) continue;
          moves.push_back(make_attr_update(path, name, old_value, next_value));
        }
      }
      for (std::size_t slot = 0; slot <= n->children.size(); ++slot) {
        for (const DomNode& payload : v.payloads) {
          moves.push_back(make_insert(child_path(path, slot), payload));
        }
      }
    }
  }
  return moves;
}

// --- record escaping ------------------------------------------------------

std::string quote_value(const std::optional<std::string>& v) {
  if (!v) return "-";
  std::string out = "\"";
  for (char c : *v) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

struct RecordCursor {
  std::string_view line;
  std::size_t pos = 0;

  void skip_spaces() {
    while (pos < line.size() && line[pos] == ' ') ++pos;
  }

  std::string_view word() {
    skip_spaces();
    std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ') ++pos;
    return line.substr(start, pos - start);
  }

  std::string_view rest() {
    skip_spaces();
    return line.substr(pos);
  }

  std::optional<std::string> value() {
    skip_spaces();
    if (pos < line.size() && line[pos] == '-') {
      ++pos;
      return std::nullopt;
    }
    if (pos >= line.size() || line[pos] != '"') {
      throw std::invalid_argument("patch record: expected a quoted value");
    }
    ++pos;
    std::string out;
    while (pos < line.size() && line[pos] != '"') {
      char c = line[pos++];
      if (c == '\\' && pos < line.size()) {
        char esc = line[pos++];
        switch (esc) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: out += esc;
        }
      } else {
        out += c;
      }
    }
    if (pos >= line.size()) throw std::invalid_argument("patch record: unterminated value");
    ++pos;
    return out;
  }
};

DomNode payload_from_text(std::string_view text) {
  std::vector<DomNode> forest = parse_fragment(text);
  if (forest.size() != 1) {
    throw std::invalid_argument("patch record: payload must be a single node");
  }
  return std::move(forest[0]);
}

}  // namespace

bool operator==(const PatchEntry& a, const PatchEntry& b) {
  return a.op == b.op && a.position == b.position && a.payload == b.payload &&
         a.target == b.target && a.attr_name == b.attr_name && a.old_value == b.old_value &&
         a.new_value == b.new_value;
}

PatchEntry make_insert(NodePath position, DomNode payload) {
  PatchEntry e;
  e.op = PatchOp::Insert;
  e.position = std::move(position);
  e.payload = std::move(payload);
  return e;
}

PatchEntry make_delete(NodePath position, std::optional<DomNode> removed) {
  PatchEntry e;
  e.op = PatchOp::Delete;
  e.position = std::move(position);
  e.payload = std::move(removed);
  return e;
}

PatchEntry make_attr_update(NodePath position, std::string name,
                            std::optional<std::string> old_value,
                            std::optional<std::string> new_value) {
  PatchEntry e;
  e.op = PatchOp::Update;
  e.position = std::move(position);
  e.target = UpdateTarget::Attribute;
  e.attr_name = std::move(name);
  e.old_value = std::move(old_value);
  e.new_value = std::move(new_value);
  return e;
}

PatchEntry make_text_update(NodePath position, std::string old_value, std::string new_value) {
  PatchEntry e;
  e.op = PatchOp::Update;
  e.position = std::move(position);
  e.target = UpdateTarget::Text;
  e.old_value = std::move(old_value);
  e.new_value = std::move(new_value);
  return e;
}

void PatchTable::append(std::size_t slot, const std::vector<PatchEntry>& batch) {
  if (!entries.empty() && slot < entries.back().slot) {
    throw std::invalid_argument("patch table slots must be non-decreasing");
  }
  for (const PatchEntry& e : batch) entries.push_back({slot, e});
}

std::vector<PatchEntry> diff(const DomTree& pre, const DomTree& post) {
  std::vector<PatchEntry> out;
  if (pre == post) return out;
  if (pre.root.tag != post.root.tag) {
    replace_node(out, NodePath{}, pre.root, post.root);
    return out;
  }
  diff_node(out, NodePath{}, pre.root, post.root);
  return out;
}

void apply_entry(std::optional<DomNode>& root, const PatchEntry& e) { apply_one(root, e); }

DomTree apply(const DomTree& t, std::span<const PatchEntry> entries) {
  std::optional<DomNode> root = t.root;
  for (const PatchEntry& e : entries) apply_one(root, e);
  if (!root) {
    throw PatchError(PatchErrorKind::EmptyResult, "patch leaves the document without a root");
  }
  return DomTree{std::move(*root)};
}

std::vector<PatchEntry> invert(std::span<const PatchEntry> entries) {
  std::vector<PatchEntry> out;
  out.reserve(entries.size());
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    const PatchEntry& e = *it;
    switch (e.op) {
      case PatchOp::Insert: {
        if (!e.payload) {
          throw PatchError(PatchErrorKind::MissingPayload,
                           "insert at " + e.position.to_string() + " has no payload");
        }
        out.push_back(make_delete(e.position, e.payload));
        break;
      }
      case PatchOp::Delete: {
        if (!e.payload) {
          throw PatchError(PatchErrorKind::MissingPayload,
                           "delete at " + e.position.to_string() +
                               " lacks its retained subtree");
        }
        out.push_back(make_insert(e.position, *e.payload));
        break;
      }
      case PatchOp::Update: {
        PatchEntry inv = e;
        std::swap(inv.old_value, inv.new_value);
        out.push_back(std::move(inv));
        break;
      }
    }
  }
  return out;
}

std::vector<PatchEntry> oracle_diff(const DomTree& pre, const DomTree& post) {
  constexpr std::size_t size_limit = 8;
  if (node_count(pre) > size_limit || node_count(post) > size_limit) {
    throw PatchError(PatchErrorKind::SizeLimitExceeded,
                     "oracle_diff handles trees of at most 8 nodes");
  }
  if (pre == post) return {};

  OracleVocabulary vocabulary;
  std::unordered_set<std::string> seen_payloads;
  collect_vocabulary(post.root, vocabulary, seen_payloads);
  const std::string target = state_key(post.root);

  struct State {
    std::optional<DomNode> root;
    std::vector<PatchEntry> script;
  };
  std::deque<State> queue;
  queue.push_back({pre.root, {}});
  std::unordered_set<std::string> seen{state_key(pre.root)};

  // A root delete plus a root insert of post reaches any target, so the
  // search never needs more than two levels.
  while (!queue.empty()) {
    State state = std::move(queue.front());
    queue.pop_front();
    for (const PatchEntry& move : oracle_moves(state.root, vocabulary)) {
      std::optional<DomNode> next = state.root;
      apply_one(next, move);
      std::string key = state_key(next);
      if (key == target) {
        std::vector<PatchEntry> script = state.script;
        script.push_back(move);
        return script;
      }
      if (!seen.insert(key).second) continue;
      State next_state;
      next_state.root = std::move(next);
      next_state.script = state.script;
      next_state.script.push_back(move);
      queue.push_back(std::move(next_state));
    }
  }
  throw std::logic_error("oracle_diff search exhausted");
}

std::string to_record(const StoredEntry& stored) {
  const PatchEntry& e = stored.entry;
  std::string out;
  switch (e.op) {
    case PatchOp::Insert:
      if (!e.payload) {
        throw PatchError(PatchErrorKind::MissingPayload, "insert record has no payload");
      }
      out = "insert";
      break;
    case PatchOp::Delete: out = "delete"; break;
    case PatchOp::Update: out = "update"; break;
  }
  out += ' ';
  out += std::to_string(stored.slot);
  out += ' ';
  out += e.position.to_string();
  out += ' ';
  if (e.op == PatchOp::Update) {
    if (e.target == UpdateTarget::Attribute) {
      out += "attr ";
      out += e.attr_name;
      out += ' ';
    } else {
      out += "text ";
    }
    out += quote_value(e.old_value);
    out += ' ';
    out += quote_value(e.new_value);
  } else {
    // Payloads are quoted like update values so text nodes holding
    // newlines cannot split the record line.
    out += e.payload ? quote_value(serialize_node(*e.payload)) : "-";
  }
  return out;
}

StoredEntry record_from_line(std::string_view line) {
  RecordCursor cursor{line};
  std::string_view op = cursor.word();
  std::string_view slot_text = cursor.word();
  std::string_view path_text = cursor.word();
  std::size_t slot = 0;
  for (char c : slot_text) {
    if (c < '0' || c > '9') throw std::invalid_argument("patch record: bad slot");
    slot = slot * 10 + static_cast<std::size_t>(c - '0');
  }
  if (slot_text.empty()) throw std::invalid_argument("patch record: bad slot");
  auto path = NodePath::from_string(path_text);
  if (!path) throw std::invalid_argument("patch record: bad path");

  StoredEntry out;
  out.slot = slot;
  if (op == "insert") {
    auto payload = cursor.value();
    if (!payload) throw std::invalid_argument("patch record: insert needs a payload");
    out.entry = make_insert(*path, payload_from_text(*payload));
  } else if (op == "delete") {
    auto payload = cursor.value();
    if (!payload) {
      out.entry = make_delete(*path);
    } else {
      out.entry = make_delete(*path, payload_from_text(*payload));
    }
  } else if (op == "update") {
    std::string_view target = cursor.word();
    if (target == "attr") {
      std::string name(cursor.word());
      auto old_value = cursor.value();
      auto new_value = cursor.value();
      out.entry = make_attr_update(*path, std::move(name), std::move(old_value),
                                   std::move(new_value));
    } else if (target == "text") {
      auto old_value = cursor.value();
      auto new_value = cursor.value();
      if (!old_value || !new_value) {
        throw std::invalid_argument("patch record: text update needs both values");
      }
      out.entry = make_text_update(*path, std::move(*old_value), std::move(*new_value));
    } else {
      throw std::invalid_argument("patch record: unknown update target");
    }
  } else {
    throw std::invalid_argument("patch record: unknown operation");
  }
  return out;
}

std::string dump_records(const PatchTable& table) {
  std::string out;
  for (const StoredEntry& stored : table.entries) {
    out += to_record(stored);
    out += '\n';
  }
  return out;
}

PatchTable records_from_text(std::string_view text) {
  PatchTable table;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty()) {
      StoredEntry stored = record_from_line(line);
      if (!table.entries.empty() && stored.slot < table.entries.back().slot) {
        throw std::invalid_argument("patch records: slots must be non-decreasing");
      }
      table.entries.push_back(std::move(stored));
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  return table;
}

}  // namespace pguard
