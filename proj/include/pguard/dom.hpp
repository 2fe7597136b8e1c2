#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pguard {

enum class NodeKind { Element, Text };

/// One node of the page tree. Elements carry a lowercase tag, an ordered
/// attribute list (unique names) and an ordered child sequence; text nodes
/// carry only their content.
struct DomNode {
  NodeKind kind = NodeKind::Element;
  std::string tag;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;
  std::vector<DomNode> children;

  /// Value of the named attribute, or nullptr when not present.
  const std::string* attribute(std::string_view name) const;
};

bool operator==(const DomNode&, const DomNode&);
inline bool operator!=(const DomNode& a, const DomNode& b) { return !(a == b); }

DomNode make_element(std::string tag,
                     std::vector<std::pair<std::string, std::string>> attributes = {},
                     std::vector<DomNode> children = {});
DomNode make_text(std::string text);

/// Sets or appends; an existing attribute keeps its position in the list.
void set_attribute(DomNode&, std::string_view name, std::string_view value);
/// Returns false when the attribute was not present.
bool remove_attribute(DomNode&, std::string_view name);

std::size_t node_count(const DomNode&);

/// A whole document. The root is always an element. Trees are plain values;
/// every edit produces a new tree.
struct DomTree {
  DomNode root;
};

bool operator==(const DomTree&, const DomTree&);
inline bool operator!=(const DomTree& a, const DomTree& b) { return !(a == b); }

std::size_t node_count(const DomTree&);

/// Child-index address of a node; the empty path is the root.
struct NodePath {
  std::vector<std::size_t> steps;

  std::string to_string() const;  // "." for the root, else "0/2/1"
  static std::optional<NodePath> from_string(std::string_view);
};

bool operator==(const NodePath&, const NodePath&);
inline bool operator!=(const NodePath& a, const NodePath& b) { return !(a == b); }

/// Lenient parse of the restricted HTML form. Total: any input yields a
/// tree. Tags and attribute names are lowercased, unclosed tags close at
/// their parent boundary, stray close tags are dropped, whitespace-only
/// text between elements is dropped, adjacent text runs merge, and an
/// "html" root is synthesized when the input does not reduce to exactly one
/// top-level element. Parsing an already-serialized tree is a fixed point.
DomTree parse(std::string_view html);

/// Fragment parse without root synthesis; returns the top-level forest.
std::vector<DomNode> parse_fragment(std::string_view html);

/// Explicit close tag for every element, double-quoted attribute values,
/// &amp;/&lt;/&gt;/&quot; escaping. No self-closing syntax, no comments,
/// no doctype.
std::string serialize(const DomTree&);
std::string serialize_node(const DomNode&);

/// Structural embedding: true iff `a` maps injectively into `b` preserving
/// parent-child edges, sibling order, tags, attributes and text. This is
/// the partial order that insert-only edits preserve.
bool subtree_leq(const DomTree& a, const DomTree& b);
bool node_leq(const DomNode& a, const DomNode& b);

const DomNode* resolve(const DomTree&, const NodePath&);
DomNode* resolve(DomTree&, const NodePath&);

}  // namespace pguard
