#pragma once

// Independent reference implementations the tests check the library
// against. Everything here favors obviousness over speed.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pguard/dom.hpp"

namespace testsupport {

inline bool same_shallow(const pguard::DomNode& a, const pguard::DomNode& b) {
  return a.kind == b.kind && a.tag == b.tag && a.attributes == b.attributes && a.text == b.text;
}

// Plain recursive definition of "a embeds into b": equal node data and an
// order-preserving injection of children. Exponential, for small trees.
inline bool naive_embed(const pguard::DomNode& a, const pguard::DomNode& b);

inline bool naive_embed_children(const std::vector<pguard::DomNode>& a, std::size_t i,
                                 const std::vector<pguard::DomNode>& b, std::size_t j) {
  if (i == a.size()) return true;
  if (j == b.size()) return false;
  if (naive_embed(a[i], b[j]) && naive_embed_children(a, i + 1, b, j + 1)) return true;
  return naive_embed_children(a, i, b, j + 1);
}

inline bool naive_embed(const pguard::DomNode& a, const pguard::DomNode& b) {
  if (!same_shallow(a, b)) return false;
  return naive_embed_children(a.children, 0, b.children, 0);
}

// Strict recursive-descent parser for the serializer's own output:
// balanced lowercase tags, double-quoted attributes, the five named
// entities. Returns nothing on any deviation, so it only validates
// canonical text.
class StrictParser {
 public:
  explicit StrictParser(std::string_view text) : text_(text) {}

  std::optional<pguard::DomNode> run() {
    std::optional<pguard::DomNode> node = parse_node();
    if (!node || pos_ != text_.size()) return std::nullopt;
    return node;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  bool failed_ = false;

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  static bool name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
  }

  std::string read_name() {
    std::string out;
    while (!eof() && name_char(peek())) out += text_[pos_++];
    if (out.empty()) failed_ = true;
    return out;
  }

  std::optional<std::string> decode(std::string_view raw) {
    std::string out;
    std::size_t i = 0;
    while (i < raw.size()) {
      char c = raw[i];
      if (c == '<' || c == '>') return std::nullopt;
      if (c != '&') {
        out += c;
        ++i;
        continue;
      }
      std::size_t semi = raw.find(';', i);
      if (semi == std::string_view::npos) return std::nullopt;
      std::string_view name = raw.substr(i + 1, semi - i - 1);
      if (name == "amp") out += '&';
      else if (name == "lt") out += '<';
      else if (name == "gt") out += '>';
      else if (name == "quot") out += '"';
      else if (name == "apos") out += '\'';
      else return std::nullopt;
      i = semi + 1;
    }
    return out;
  }

  std::optional<pguard::DomNode> parse_node() {
    if (failed_ || eof()) return std::nullopt;
    if (peek() != '<') {
      std::size_t start = pos_;
      while (!eof() && peek() != '<') ++pos_;
      std::optional<std::string> text = decode(text_.substr(start, pos_ - start));
      if (!text) return std::nullopt;
      return pguard::make_text(*text);
    }
    ++pos_;  // '<'
    pguard::DomNode node;
    node.kind = pguard::NodeKind::Element;
    node.tag = read_name();
    if (failed_) return std::nullopt;
    while (!eof() && peek() == ' ') {
      ++pos_;
      std::string name = read_name();
      if (failed_ || eof() || peek() != '=') return std::nullopt;
      ++pos_;
      if (eof() || peek() != '"') return std::nullopt;
      ++pos_;
      std::size_t start = pos_;
      while (!eof() && peek() != '"') ++pos_;
      if (eof()) return std::nullopt;
      std::optional<std::string> value = decode(text_.substr(start, pos_ - start));
      if (!value) return std::nullopt;
      ++pos_;  // closing quote
      node.attributes.emplace_back(std::move(name), std::move(*value));
    }
    if (eof() || peek() != '>') return std::nullopt;
    ++pos_;
    while (!eof() && !(peek() == '<' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/')) {
      std::optional<pguard::DomNode> child = parse_node();
      if (!child) return std::nullopt;
      node.children.push_back(std::move(*child));
    }
    if (pos_ + 1 >= text_.size() || peek() != '<' || text_[pos_ + 1] != '/') return std::nullopt;
    pos_ += 2;
    std::string closing = read_name();
    if (failed_ || closing != node.tag || eof() || peek() != '>') return std::nullopt;
    ++pos_;
    return node;
  }
};

inline std::optional<pguard::DomNode> strict_parse(std::string_view text) {
  return StrictParser(text).run();
}

// Every node path of a tree in document order.
inline void collect_paths(const pguard::DomNode& n, pguard::NodePath here,
                          std::vector<pguard::NodePath>& out) {
  out.push_back(here);
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    pguard::NodePath child = here;
    child.steps.push_back(i);
    collect_paths(n.children[i], std::move(child), out);
  }
}

inline std::vector<pguard::NodePath> all_paths(const pguard::DomTree& t) {
  std::vector<pguard::NodePath> out;
  collect_paths(t.root, pguard::NodePath{}, out);
  return out;
}

}  // namespace testsupport
