#include "doctest.h"

#include <random>
#include <vector>

#include "pguard/dom.hpp"
#include "pguard/patch.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace pguard;

namespace {

template <typename Fn>
PatchErrorKind error_kind(Fn&& fn) {
  try {
    fn();
  } catch (const PatchError& e) {
    return e.kind();
  }
  FAIL("expected a PatchError");
  return PatchErrorKind::EmptyResult;
}

}  // namespace

TEST_CASE("diff reaches its target and inverts") {
  std::mt19937_64 rng(7101);
  for (int i = 0; i < 150; ++i) {
    auto [a, b] = testsupport::random_pair(rng, 20);
    std::vector<PatchEntry> script = diff(a, b);
    CHECK(pguard::apply(a, script) == b);
    CHECK(pguard::apply(b, invert(script)) == a);
    CHECK(script.empty() == (a == b));
  }
  DomTree t = testsupport::random_tree(rng, 15);
  CHECK(diff(t, t).empty());
}

TEST_CASE("insert-only growth produces insert-only scripts") {
  std::mt19937_64 rng(7102);
  for (int i = 0; i < 100; ++i) {
    DomTree base = testsupport::random_tree(rng, 15);
    DomTree grown = base;
    std::size_t inserts = 1 + testsupport::pick(rng, 3);
    for (std::size_t k = 0; k < inserts; ++k) {
      std::vector<NodePath> paths = testsupport::all_paths(grown);
      DomNode* n = resolve(grown, paths[testsupport::pick(rng, paths.size())]);
      if (n->kind != NodeKind::Element) continue;
      std::size_t budget = 1 + testsupport::pick(rng, 3);
      DomNode sub = testsupport::random_node(rng, budget, false);
      std::size_t slot = testsupport::pick(rng, n->children.size() + 1);
      n->children.insert(n->children.begin() + static_cast<std::ptrdiff_t>(slot),
                         std::move(sub));
    }
    std::vector<PatchEntry> script = diff(base, grown);
    CHECK(subtree_leq(base, grown));
    for (const PatchEntry& e : script) CHECK(e.op == PatchOp::Insert);
    CHECK(pguard::apply(base, script) == grown);
  }
}

TEST_CASE("diff shapes") {
  SUBCASE("id change on the root is an attribute update") {
    DomTree a{make_element("div", {{"id", "a"}})};
    DomTree b{make_element("div", {{"id", "b"}})};
    std::vector<PatchEntry> script = diff(a, b);
    REQUIRE(script.size() == 1);
    CHECK(script[0] == make_attr_update(NodePath{}, "id", "a", "b"));
  }
  SUBCASE("id change on a lone child still pairs the nodes") {
    DomTree a{make_element("div", {}, {make_element("span", {{"id", "x"}})})};
    DomTree b{make_element("div", {}, {make_element("span", {{"id", "y"}})})};
    std::vector<PatchEntry> script = diff(a, b);
    REQUIRE(script.size() == 1);
    CHECK(script[0] == make_attr_update(NodePath{{0}}, "id", "x", "y"));
  }
  SUBCASE("attribute addition and removal become updates") {
    DomTree a{make_element("div", {{"a", "1"}})};
    DomTree b{make_element("div", {{"a", "1"}, {"b", "2"}})};
    std::vector<PatchEntry> add = diff(a, b);
    REQUIRE(add.size() == 1);
    CHECK(add[0] == make_attr_update(NodePath{}, "b", std::nullopt, "2"));
    std::vector<PatchEntry> drop = diff(b, a);
    REQUIRE(drop.size() == 1);
    CHECK(drop[0] == make_attr_update(NodePath{}, "b", "2", std::nullopt));
  }
  SUBCASE("non-tail attribute removal falls back to node replacement") {
    // A removal update would re-add the name at the tail when inverted,
    // losing its original position.
    DomTree a{make_element("div", {{"x", "1"}, {"a", "2"}})};
    DomTree b{make_element("div", {{"a", "2"}})};
    std::vector<PatchEntry> script = diff(a, b);
    REQUIRE(script.size() == 2);
    CHECK(script[0].op == PatchOp::Delete);
    CHECK(script[1].op == PatchOp::Insert);
    CHECK(pguard::apply(a, script) == b);
    CHECK(pguard::apply(b, invert(script)) == a);
  }
  SUBCASE("attribute reorder falls back to node replacement") {
    DomTree a{make_element("div", {{"a", "1"}, {"b", "2"}})};
    DomTree b{make_element("div", {{"b", "2"}, {"a", "1"}})};
    std::vector<PatchEntry> script = diff(a, b);
    REQUIRE(script.size() == 2);
    CHECK(script[0].op == PatchOp::Delete);
    CHECK(script[0].position.steps.empty());
    CHECK(script[1].op == PatchOp::Insert);
    CHECK(script[1].position.steps.empty());
    CHECK(pguard::apply(a, script) == b);
  }
  SUBCASE("root tag change replaces the root") {
    DomTree a{make_element("div")};
    DomTree b{make_element("span")};
    std::vector<PatchEntry> script = diff(a, b);
    REQUIRE(script.size() == 2);
    CHECK(script[0] == make_delete(NodePath{}, a.root));
    CHECK(script[1] == make_insert(NodePath{}, b.root));
  }
  SUBCASE("text rewrite is a text update") {
    DomTree a{make_element("p", {}, {make_text("old")})};
    DomTree b{make_element("p", {}, {make_text("new")})};
    std::vector<PatchEntry> script = diff(a, b);
    REQUIRE(script.size() == 1);
    CHECK(script[0] == make_text_update(NodePath{{0}}, "old", "new"));
  }
  SUBCASE("kind change replaces the child") {
    DomTree a{make_element("div", {}, {make_text("x")})};
    DomTree b{make_element("div", {}, {make_element("span")})};
    std::vector<PatchEntry> script = diff(a, b);
    REQUIRE(script.size() == 2);
    CHECK(script[0].op == PatchOp::Delete);
    CHECK(script[1].op == PatchOp::Insert);
    CHECK(pguard::apply(a, script) == b);
  }
}

TEST_CASE("apply reads positions against the evolving tree") {
  DomTree t{make_element("div", {}, {make_element("span"), make_element("p"),
                                     make_element("b")})};
  SUBCASE("repeated deletes at one slot walk the sibling list") {
    std::vector<PatchEntry> script{make_delete(NodePath{{0}}, t.root.children[0]),
                                   make_delete(NodePath{{0}}, t.root.children[1])};
    DomTree out = pguard::apply(t, script);
    REQUIRE(out.root.children.size() == 1);
    CHECK(out.root.children[0].tag == "b");
  }
  SUBCASE("insert at the child count appends") {
    std::vector<PatchEntry> script{make_insert(NodePath{{3}}, make_element("a"))};
    DomTree out = pguard::apply(t, script);
    REQUIRE(out.root.children.size() == 4);
    CHECK(out.root.children[3].tag == "a");
  }
  SUBCASE("insert past the child count fails") {
    std::vector<PatchEntry> script{make_insert(NodePath{{4}}, make_element("a"))};
    CHECK(error_kind([&] { pguard::apply(t, script); }) == PatchErrorKind::PositionUnresolvable);
  }
  SUBCASE("root replacement goes through the cleared state") {
    std::vector<PatchEntry> script{make_delete(NodePath{}, t.root),
                                   make_insert(NodePath{}, make_element("main"))};
    CHECK(pguard::apply(t, script).root.tag == "main");
  }
  SUBCASE("a script that leaves no root fails") {
    std::vector<PatchEntry> script{make_delete(NodePath{}, t.root)};
    CHECK(error_kind([&] { pguard::apply(t, script); }) == PatchErrorKind::EmptyResult);
  }
  SUBCASE("stale update old-values are rejected") {
    DomTree p{make_element("p", {{"k", "1"}}, {make_text("hi")})};
    CHECK(error_kind([&] {
            pguard::apply(p, std::vector<PatchEntry>{make_text_update(NodePath{{0}}, "bye", "x")});
          }) == PatchErrorKind::UpdateMismatch);
    CHECK(error_kind([&] {
            pguard::apply(p, std::vector<PatchEntry>{make_attr_update(NodePath{}, "k", "2", "3")});
          }) == PatchErrorKind::UpdateMismatch);
    CHECK(error_kind([&] {
            pguard::apply(p, std::vector<PatchEntry>{
                         make_attr_update(NodePath{}, "k", std::nullopt, "3")});
          }) == PatchErrorKind::UpdateMismatch);
  }
  SUBCASE("insert without a payload fails") {
    PatchEntry bare;
    bare.op = PatchOp::Insert;
    bare.position = NodePath{{0}};
    CHECK(error_kind([&] { pguard::apply(t, std::vector<PatchEntry>{bare}); }) ==
          PatchErrorKind::MissingPayload);
  }
  SUBCASE("apply_entry exposes the cleared-root state") {
    std::optional<DomNode> root = t.root;
    apply_entry(root, make_delete(NodePath{}, t.root));
    CHECK_FALSE(root.has_value());
    apply_entry(root, make_insert(NodePath{}, make_element("body")));
    REQUIRE(root.has_value());
    CHECK(root->tag == "body");
  }
}

TEST_CASE("invert swaps operations in reverse order") {
  PatchEntry ins = make_insert(NodePath{{1}}, make_element("span"));
  PatchEntry upd = make_text_update(NodePath{{0}}, "a", "b");
  std::vector<PatchEntry> inv = invert(std::vector<PatchEntry>{ins, upd});
  REQUIRE(inv.size() == 2);
  CHECK(inv[0] == make_text_update(NodePath{{0}}, "b", "a"));
  CHECK(inv[1] == make_delete(NodePath{{1}}, make_element("span")));

  // A delete that never retained its subtree cannot be undone.
  std::vector<PatchEntry> bare{make_delete(NodePath{{0}})};
  CHECK(error_kind([&] { invert(bare); }) == PatchErrorKind::MissingPayload);
}

TEST_CASE("patch tables are append-only with non-decreasing slots") {
  PatchTable table;
  table.append(1, {make_insert(NodePath{{0}}, make_element("a"))});
  table.append(1, {make_delete(NodePath{{1}}, make_element("b"))});
  table.append(3, {make_text_update(NodePath{{0}}, "x", "y")});
  REQUIRE(table.entries.size() == 3);
  CHECK(table.entries[0].slot == 1);
  CHECK(table.entries[2].slot == 3);
  CHECK_THROWS_AS(table.append(2, {make_insert(NodePath{}, make_element("c"))}),
                  std::invalid_argument);
}

TEST_CASE("search oracle agrees with diff on small trees") {
  std::mt19937_64 rng(7103);
  std::vector<DomTree> universe = testsupport::enumerate_decorated(3);
  for (int i = 0; i < 120; ++i) {
    const DomTree& a = universe[testsupport::pick(rng, universe.size())];
    const DomTree& b = universe[testsupport::pick(rng, universe.size())];
    std::vector<PatchEntry> best = oracle_diff(a, b);
    std::vector<PatchEntry> script = diff(a, b);
    CHECK(pguard::apply(a, best) == b);
    CHECK(best.size() <= script.size());
    CHECK(best.empty() == script.empty());
  }
  CHECK(oracle_diff(universe[0], universe[0]).empty());

  DomNode wide = make_element("div");
  for (int i = 0; i < 8; ++i) wide.children.push_back(make_element("span"));
  CHECK(error_kind([&] { oracle_diff(DomTree{wide}, DomTree{wide}); }) ==
        PatchErrorKind::SizeLimitExceeded);
}

TEST_CASE("records print and parse losslessly") {
  SUBCASE("exact line shapes") {
    StoredEntry ins{2, make_insert(NodePath{{0, 1}}, make_element("span", {{"id", "x"}}))};
    CHECK(to_record(ins) == "insert 2 0/1 \"<span id=\\\"x\\\"></span>\"");
    StoredEntry bare_delete{3, make_delete(NodePath{{1, 2}})};
    CHECK(to_record(bare_delete) == "delete 3 1/2 -");
    StoredEntry attr{0, make_attr_update(NodePath{}, "id", std::nullopt, "b")};
    CHECK(to_record(attr) == "update 0 . attr id - \"b\"");
    StoredEntry text{1, make_text_update(NodePath{{0}}, "a\nb\t\\", "c")};
    CHECK(to_record(text) == "update 1 0 text \"a\\nb\\t\\\\\" \"c\"");
  }
  SUBCASE("round trip through one line") {
    std::vector<StoredEntry> cases{
        {2, make_insert(NodePath{{0, 1}}, make_element("a", {{"href", "x\"y"}},
                                                       {make_text("new\nline")}))},
        {4, make_delete(NodePath{{2}}, make_element("p", {}, {make_text("bye")}))},
        {4, make_delete(NodePath{{2}})},
        {5, make_attr_update(NodePath{{1}}, "class", "old", std::nullopt)},
        {6, make_text_update(NodePath{{0, 0}}, "tab\there", "and \"quotes\"")},
    };
    for (const StoredEntry& c : cases) {
      StoredEntry back = record_from_line(to_record(c));
      CHECK(back.slot == c.slot);
      CHECK(back.entry == c.entry);
    }
  }
  SUBCASE("whole tables round trip") {
    PatchTable table;
    table.append(0, {make_insert(NodePath{{0}}, make_element("div", {{"id", "d"}}))});
    table.append(2, {make_text_update(NodePath{{0, 0}}, "a", "b"),
                     make_delete(NodePath{{1}}, make_text("gone"))});
    PatchTable back = records_from_text(dump_records(table));
    REQUIRE(back.entries.size() == table.entries.size());
    for (std::size_t i = 0; i < back.entries.size(); ++i) {
      CHECK(back.entries[i].slot == table.entries[i].slot);
      CHECK(back.entries[i].entry == table.entries[i].entry);
    }
  }
  SUBCASE("malformed lines are rejected") {
    CHECK_THROWS_AS(record_from_line("insert x . \"<a></a>\""), std::invalid_argument);
    CHECK_THROWS_AS(record_from_line("insert 1 bad \"<a></a>\""), std::invalid_argument);
    CHECK_THROWS_AS(record_from_line("insert 1 . -"), std::invalid_argument);
    CHECK_THROWS_AS(record_from_line("insert 1 . \"unterminated"), std::invalid_argument);
    CHECK_THROWS_AS(record_from_line("munge 1 . -"), std::invalid_argument);
    CHECK_THROWS_AS(record_from_line("update 1 . attr k \"a\""), std::invalid_argument);
    CHECK_THROWS_AS(record_from_line("update 1 . text - \"x\""), std::invalid_argument);
    CHECK_THROWS_AS(record_from_line("update 1 . style \"a\" \"b\""), std::invalid_argument);
  }
}
