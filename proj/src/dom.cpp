#include "pguard/dom.hpp"

#include <algorithm>
#include <cctype>

namespace pguard {

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '_' || c == ':';
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool whitespace_only(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out += s[i++];
      continue;
    }
    auto semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 6) {
      out += s[i++];
      continue;
    }
    std::string_view name = s.substr(i + 1, semi - i - 1);
    if (name == "lt") out += '<';
    else if (name == "gt") out += '>';
    else if (name == "amp") out += '&';
    else if (name == "quot") out += '"';
    else if (name == "apos") out += '\'';
    else {
      out += s[i++];
      continue;
    }
    i = semi + 1;
  }
  return out;
}

void escape_text(std::string_view s, std::string& out) {
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
}

void escape_attr(std::string_view s, std::string& out) {
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
}

// Merge adjacent text runs, then drop whitespace-only and empty text nodes.
void normalize_children(std::vector<DomNode>& children) {
  std::vector<DomNode> merged;
  merged.reserve(children.size());
  for (DomNode& child : children) {
    if (child.kind == NodeKind::Text && !merged.empty() &&
        merged.back().kind == NodeKind::Text) {
      merged.back().text += child.text;
    } else {
      merged.push_back(std::move(child));
    }
  }
  children.clear();
  for (DomNode& child : merged) {
    if (child.kind == NodeKind::Text && whitespace_only(child.text)) continue;
    children.push_back(std::move(child));
  }
}

struct Parser {
  std::string_view input;
  std::size_t pos = 0;

  std::vector<DomNode> open_stack;
  std::vector<DomNode> top;

  void add(DomNode n) {
    if (open_stack.empty()) {
      top.push_back(std::move(n));
    } else {
      open_stack.back().children.push_back(std::move(n));
    }
  }

  void add_text(std::string s) {
    DomNode n;
    n.kind = NodeKind::Text;
    n.text = std::move(s);
    add(std::move(n));
  }

  void close_one() {
    DomNode n = std::move(open_stack.back());
    open_stack.pop_back();
    normalize_children(n.children);
    add(std::move(n));
  }

  // Pops up to and including the innermost open element with this tag;
  // a close tag with no matching open element is dropped.
  void close_through(const std::string& tag) {
    for (std::size_t i = open_stack.size(); i-- > 0;) {
      if (open_stack[i].tag == tag) {
        while (open_stack.size() > i) close_one();
        return;
      }
    }
  }

  void read_open_tag() {
    std::size_t start = pos + 1;
    std::size_t j = start;
    while (j < input.size() && is_name_char(input[j])) ++j;
    DomNode el;
    el.kind = NodeKind::Element;
    el.tag = to_lower(input.substr(start, j - start));
    pos = j;
    while (pos < input.size() && input[pos] != '>') {
      if (is_space(input[pos]) || input[pos] == '/') {
        ++pos;
        continue;
      }
      std::size_t name_start = pos;
      while (pos < input.size() && !is_space(input[pos]) && input[pos] != '=' &&
             input[pos] != '>' && input[pos] != '/') {
        ++pos;
      }
      std::string name = to_lower(input.substr(name_start, pos - name_start));
      std::string value;
      if (pos < input.size() && input[pos] == '=') {
        ++pos;
        if (pos < input.size() && (input[pos] == '"' || input[pos] == '\'')) {
          char quote = input[pos++];
          std::size_t value_start = pos;
          while (pos < input.size() && input[pos] != quote) ++pos;
          value = decode_entities(input.substr(value_start, pos - value_start));
          if (pos < input.size()) ++pos;
        } else {
          std::size_t value_start = pos;
          while (pos < input.size() && !is_space(input[pos]) && input[pos] != '>') ++pos;
          value = decode_entities(input.substr(value_start, pos - value_start));
        }
      }
      if (name.empty()) continue;
      if (el.attribute(name) == nullptr) {
        el.attributes.emplace_back(std::move(name), std::move(value));
      }
    }
    if (pos < input.size()) ++pos;  // '>'
    open_stack.push_back(std::move(el));
  }

  void read_close_tag() {
    std::size_t start = pos + 2;
    std::size_t j = start;
    while (j < input.size() && is_name_char(input[j])) ++j;
    std::string tag = to_lower(input.substr(start, j - start));
    while (j < input.size() && input[j] != '>') ++j;
    pos = (j < input.size()) ? j + 1 : j;
    close_through(tag);
  }

  void skip_markup_declaration() {
    // Comments and doctype have no representation in the tree.
    while (pos < input.size() && input[pos] != '>') ++pos;
    if (pos < input.size()) ++pos;
  }

  std::vector<DomNode> run() {
    while (pos < input.size()) {
      if (input[pos] == '<') {
        if (pos + 1 < input.size() && input[pos + 1] == '/' &&
            pos + 2 < input.size() && is_name_start(input[pos + 2])) {
          read_close_tag();
          continue;
        }
        if (pos + 1 < input.size() && is_name_start(input[pos + 1])) {
          read_open_tag();
          continue;
        }
        if (pos + 1 < input.size() && input[pos + 1] == '!') {
          skip_markup_declaration();
          continue;
        }
        add_text("<");  // bare '<' is literal text
        ++pos;
        continue;
      }
      std::size_t start = pos;
      while (pos < input.size() && input[pos] != '<') ++pos;
      add_text(decode_entities(input.substr(start, pos - start)));
    }
    while (!open_stack.empty()) close_one();
    normalize_children(top);
    return std::move(top);
  }
};

void serialize_into(const DomNode& n, std::string& out) {
  if (n.kind == NodeKind::Text) {
    escape_text(n.text, out);
    return;
  }
  out += '<';
  out += n.tag;
  for (const auto& [name, value] : n.attributes) {
    out += ' ';
    out += name;
    out += "=\"";
    escape_attr(value, out);
    out += '"';
  }
  out += '>';
  for (const DomNode& child : n.children) serialize_into(child, out);
  out += "</";
  out += n.tag;
  out += '>';
}

bool same_data(const DomNode& a, const DomNode& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == NodeKind::Text) return a.text == b.text;
  return a.tag == b.tag && a.attributes == b.attributes;
}

// Order-preserving embedding of child sequence a[ai..] into b[bj..].
bool embed_children(const std::vector<DomNode>& a, const std::vector<DomNode>& b,
                    std::size_t ai, std::size_t bj, std::vector<signed char>& memo,
                    std::size_t width);

bool embed_node(const DomNode& a, const DomNode& b) {
  if (!same_data(a, b)) return false;
  if (a.children.empty()) return true;
  std::size_t width = b.children.size() + 1;
  std::vector<signed char> memo((a.children.size() + 1) * width, -1);
  return embed_children(a.children, b.children, 0, 0, memo, width);
}

bool embed_children(const std::vector<DomNode>& a, const std::vector<DomNode>& b,
                    std::size_t ai, std::size_t bj, std::vector<signed char>& memo,
                    std::size_t width) {
  if (ai == a.size()) return true;
  if (bj == b.size()) return false;
  if (a.size() - ai > b.size() - bj) return false;
  signed char& slot = memo[ai * width + bj];
  if (slot >= 0) return slot == 1;
  bool ok = (embed_node(a[ai], b[bj]) && embed_children(a, b, ai + 1, bj + 1, memo, width)) ||
            embed_children(a, b, ai, bj + 1, memo, width);
  slot = ok ? 1 : 0;
  return ok;
}

}  // namespace

const std::string* DomNode::attribute(std::string_view name) const {
  for (const auto& [attr_name, value] : attributes) {
    if (attr_name == name) return &value;
  }
  return nullptr;
}

bool operator==(const DomNode& a, const DomNode& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == NodeKind::Text) return a.text == b.text;
  return a.tag == b.tag && a.attributes == b.attributes && a.children == b.children;
}

DomNode make_element(std::string tag,
                     std::vector<std::pair<std::string, std::string>> attributes,
                     std::vector<DomNode> children) {
  DomNode n;
  n.kind = NodeKind::Element;
  n.tag = to_lower(tag);
  n.attributes = std::move(attributes);
  n.children = std::move(children);
  return n;
}

DomNode make_text(std::string text) {
  DomNode n;
  n.kind = NodeKind::Text;
  n.text = std::move(text);
  return n;
}

void set_attribute(DomNode& node, std::string_view name, std::string_view value) {
  for (auto& [attr_name, attr_value] : node.attributes) {
    if (attr_name == name) {
      attr_value = std::string(value);
      return;
    }
  }
  node.attributes.emplace_back(std::string(name), std::string(value));
}

bool remove_attribute(DomNode& node, std::string_view name) {
  for (auto it = node.attributes.begin(); it != node.attributes.end(); ++it) {
    if (it->first == name) {
      node.attributes.erase(it);
      return true;
    }
  }
  return false;
}

std::size_t node_count(const DomNode& n) {
  std::size_t count = 1;
  for (const DomNode& child : n.children) count += node_count(child);
  return count;
}

bool operator==(const DomTree& a, const DomTree& b) { return a.root == b.root; }

std::size_t node_count(const DomTree& t) { return node_count(t.root); }

std::string NodePath::to_string() const {
  if (steps.empty()) return ".";
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i > 0) out += '/';
    out += std::to_string(steps[i]);
  }
  return out;
}

std::optional<NodePath> NodePath::from_string(std::string_view s) {
  NodePath path;
  if (s == ".") return path;
  if (s.empty()) return std::nullopt;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i;
    std::size_t value = 0;
    while (j < s.size() && s[j] >= '0' && s[j] <= '9') {
      value = value * 10 + static_cast<std::size_t>(s[j] - '0');
      ++j;
    }
    if (j == i) return std::nullopt;
    path.steps.push_back(value);
    if (j == s.size()) break;
    if (s[j] != '/') return std::nullopt;
    i = j + 1;
    if (i == s.size()) return std::nullopt;  // trailing '/'
  }
  return path;
}

bool operator==(const NodePath& a, const NodePath& b) { return a.steps == b.steps; }

DomTree parse(std::string_view html) {
  Parser parser{html, 0, {}, {}};
  std::vector<DomNode> forest = parser.run();
  if (forest.size() == 1 && forest[0].kind == NodeKind::Element) {
    return DomTree{std::move(forest[0])};
  }
  DomNode root;
  root.kind = NodeKind::Element;
  root.tag = "html";
  root.children = std::move(forest);
  return DomTree{std::move(root)};
}

std::vector<DomNode> parse_fragment(std::string_view html) {
  Parser parser{html, 0, {}, {}};
  return parser.run();
}

std::string serialize(const DomTree& t) { return serialize_node(t.root); }

std::string serialize_node(const DomNode& n) {
  std::string out;
  serialize_into(n, out);
  return out;
}

bool subtree_leq(const DomTree& a, const DomTree& b) { return embed_node(a.root, b.root); }

bool node_leq(const DomNode& a, const DomNode& b) { return embed_node(a, b); }

const DomNode* resolve(const DomTree& t, const NodePath& path) {
  const DomNode* n = &t.root;
  for (std::size_t step : path.steps) {
    if (n->kind != NodeKind::Element || step >= n->children.size()) return nullptr;
    n = &n->children[step];
  }
  return n;
}

DomNode* resolve(DomTree& t, const NodePath& path) {
  DomNode* n = &t.root;
  for (std::size_t step : path.steps) {
    if (n->kind != NodeKind::Element || step >= n->children.size()) return nullptr;
    n = &n->children[step];
  }
  return n;
}

}  // namespace pguard
