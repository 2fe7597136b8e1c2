#include "doctest.h"

#include "pguard/dom.hpp"
#include "pguard/extension.hpp"

using namespace pguard;

namespace {

DomTree sample_list() {
  return DomTree{make_element(
      "div", {},
      {make_element("span", {{"k", "v"}}),
       make_element("p", {}, {make_element("span"), make_text("hi")}),
       make_element("span")})};
}

Rule rule_of(Selector::Kind sk, Action::Kind ak) {
  Rule r;
  r.selector.kind = sk;
  r.action.kind = ak;
  return r;
}

}  // namespace

TEST_CASE("selectors match in document order") {
  DomTree t = sample_list();
  SUBCASE("by tag, pre-order") {
    Selector s;
    s.kind = Selector::Kind::ByTag;
    s.tag = "span";
    std::vector<NodePath> m = find_matches(t, s);
    REQUIRE(m.size() == 3);
    CHECK(m[0] == NodePath{{0}});
    CHECK(m[1] == NodePath{{1, 0}});
    CHECK(m[2] == NodePath{{2}});
  }
  SUBCASE("the root participates") {
    Selector s;
    s.kind = Selector::Kind::ByTag;
    s.tag = "div";
    std::vector<NodePath> m = find_matches(t, s);
    REQUIRE(m.size() == 1);
    CHECK(m[0].steps.empty());
  }
  SUBCASE("by attribute, exact value") {
    Selector s;
    s.kind = Selector::Kind::ByAttribute;
    s.attr_name = "k";
    s.attr_value = "v";
    std::vector<NodePath> m = find_matches(t, s);
    REQUIRE(m.size() == 1);
    CHECK(m[0] == NodePath{{0}});
    s.attr_value = "other";
    CHECK(find_matches(t, s).empty());
  }
  SUBCASE("by path") {
    Selector s;
    s.kind = Selector::Kind::ByPath;
    s.path = NodePath{{1, 1}};
    std::vector<NodePath> m = find_matches(t, s);
    REQUIRE(m.size() == 1);
    CHECK(m[0] == NodePath{{1, 1}});
    s.path = NodePath{{9}};
    CHECK(find_matches(t, s).empty());
  }
  SUBCASE("text nodes never match tag or attribute selectors") {
    Selector s;
    s.kind = Selector::Kind::ByTag;
    s.tag = "";
    CHECK(find_matches(t, s).empty());
  }
}

TEST_CASE("actions edit a copy of the input") {
  DomTree t = sample_list();
  SUBCASE("insert appends by default and clamps explicit slots") {
    Extension e;
    Rule r = rule_of(Selector::Kind::Root, Action::Kind::InsertChild);
    r.action.subtree = make_element("li");
    e.program.rules.push_back(r);
    DomTree out = evaluate(e, t);
    REQUIRE(out.root.children.size() == 4);
    CHECK(out.root.children[3].tag == "li");

    e.program.rules[0].action.index = 0;
    DomTree front = evaluate(e, t);
    CHECK(front.root.children[0].tag == "li");

    e.program.rules[0].action.index = 99;
    DomTree clamped = evaluate(e, t);
    CHECK(clamped.root.children[3].tag == "li");
  }
  SUBCASE("delete removes the matched node but never the root") {
    Extension e;
    Rule r = rule_of(Selector::Kind::ByPath, Action::Kind::DeleteSelf);
    r.selector.path = NodePath{{0}};
    e.program.rules.push_back(r);
    DomTree out = evaluate(e, t);
    CHECK(out.root.children.size() == 2);
    CHECK(out.root.children[0].tag == "p");

    Extension root_del;
    root_del.program.rules.push_back(rule_of(Selector::Kind::Root, Action::Kind::DeleteSelf));
    CHECK(evaluate(root_del, t) == t);
  }
  SUBCASE("attribute writes only land on elements") {
    Extension e;
    Rule r = rule_of(Selector::Kind::ByPath, Action::Kind::SetAttribute);
    r.selector.path = NodePath{{1, 0}};
    r.action.name = "marked";
    r.action.value = "yes";
    e.program.rules.push_back(r);
    DomTree out = evaluate(e, t);
    REQUIRE(out.root.children[1].children[0].attribute("marked") != nullptr);

    e.program.rules[0].selector.path = NodePath{{1, 1}};  // a text node
    CHECK(evaluate(e, t) == t);
  }
  SUBCASE("text writes only land on text nodes") {
    Extension e;
    Rule r = rule_of(Selector::Kind::ByPath, Action::Kind::SetText);
    r.selector.path = NodePath{{1, 1}};
    r.action.value = "rewritten";
    e.program.rules.push_back(r);
    DomTree out = evaluate(e, t);
    CHECK(out.root.children[1].children[1].text == "rewritten");

    e.program.rules[0].selector.path = NodePath{{1, 0}};  // an element
    CHECK(evaluate(e, t) == t);
  }
  SUBCASE("nothing is the identity") {
    Extension e;
    e.program.rules.push_back(rule_of(Selector::Kind::Root, Action::Kind::Nothing));
    CHECK(evaluate(e, t) == t);
  }
}

TEST_CASE("rule scope and sequencing") {
  SUBCASE("first match takes the document-order head") {
    DomTree t{make_element("div", {}, {make_element("span"), make_element("span")})};
    Extension e;
    Rule r = rule_of(Selector::Kind::ByTag, Action::Kind::SetAttribute);
    r.selector.tag = "span";
    r.action.name = "hit";
    r.action.value = "1";
    r.scope = RuleScope::FirstMatch;
    e.program.rules.push_back(r);
    DomTree out = evaluate(e, t);
    CHECK(out.root.children[0].attribute("hit") != nullptr);
    CHECK(out.root.children[1].attribute("hit") == nullptr);

    e.program.rules[0].scope = RuleScope::AllMatches;
    DomTree both = evaluate(e, t);
    CHECK(both.root.children[0].attribute("hit") != nullptr);
    CHECK(both.root.children[1].attribute("hit") != nullptr);
  }
  SUBCASE("matches are collected before the rule edits anything") {
    // The payload itself satisfies the selector; a rule that rescanned
    // mid-flight would insert forever.
    DomTree t{make_element("div", {{"k", "v"}}, {make_element("div", {{"k", "v"}})})};
    Extension e;
    Rule r = rule_of(Selector::Kind::ByAttribute, Action::Kind::InsertChild);
    r.selector.attr_name = "k";
    r.selector.attr_value = "v";
    r.action.subtree = make_element("span", {{"k", "v"}});
    r.scope = RuleScope::AllMatches;
    e.program.rules.push_back(r);
    DomTree out = evaluate(e, t);
    REQUIRE(out.root.children.size() == 2);
    CHECK(out.root.children[1].tag == "span");
    REQUIRE(out.root.children[0].children.size() == 1);
    CHECK(out.root.children[0].children[0].tag == "span");
  }
  SUBCASE("deleting every match leaves siblings consistent") {
    DomTree t{make_element("div", {}, {make_element("span"),
                                       make_element("p", {}, {make_element("span")}),
                                       make_element("span")})};
    Extension e;
    Rule r = rule_of(Selector::Kind::ByTag, Action::Kind::DeleteSelf);
    r.selector.tag = "span";
    r.scope = RuleScope::AllMatches;
    e.program.rules.push_back(r);
    DomTree out = evaluate(e, t);
    REQUIRE(out.root.children.size() == 1);
    CHECK(out.root.children[0].tag == "p");
    CHECK(out.root.children[0].children.empty());
  }
  SUBCASE("later rules see earlier rules' edits") {
    DomTree t{make_element("div")};
    Extension e;
    Rule first = rule_of(Selector::Kind::Root, Action::Kind::InsertChild);
    first.action.subtree = make_element("span", {{"stage", "one"}});
    Rule second = rule_of(Selector::Kind::ByAttribute, Action::Kind::SetAttribute);
    second.selector.attr_name = "stage";
    second.selector.attr_value = "one";
    second.action.name = "stage";
    second.action.value = "two";
    second.scope = RuleScope::AllMatches;
    e.program.rules.push_back(first);
    e.program.rules.push_back(second);
    DomTree out = evaluate(e, t);
    REQUIRE(out.root.children.size() == 1);
    CHECK(*out.root.children[0].attribute("stage") == "two");
  }
}

TEST_CASE("evaluate records inputs without mutating them") {
  DomTree t = sample_list();
  DomTree copy = t;
  Extension e;
  Rule r = rule_of(Selector::Kind::Root, Action::Kind::InsertChild);
  r.action.subtree = make_element("footer");
  e.program.rules.push_back(r);
  evaluate(e, t);
  evaluate(e, t);
  CHECK(t == copy);
  REQUIRE(e.observation_log.size() == 2);
  CHECK(e.observation_log[0] == t);
  CHECK(e.observation_log[1] == t);
}

TEST_CASE("classification splits growth from everything else") {
  Extension grow;
  grow.program.rules.push_back(rule_of(Selector::Kind::Root, Action::Kind::InsertChild));
  grow.program.rules.push_back(rule_of(Selector::Kind::Root, Action::Kind::Nothing));
  CHECK(classify(grow) == Monotonicity::Monotone);

  Extension empty;
  CHECK(classify(empty) == Monotonicity::Monotone);

  for (Action::Kind k : {Action::Kind::DeleteSelf, Action::Kind::SetAttribute,
                         Action::Kind::SetText}) {
    Extension e;
    e.program.rules.push_back(rule_of(Selector::Kind::ByTag, k));
    CHECK(classify(e) == Monotonicity::NonMonotone);
  }
}

TEST_CASE("manifest enums round trip as text") {
  for (RunAt r : {RunAt::DocumentStart, RunAt::DocumentEnd, RunAt::DocumentIdle}) {
    CHECK(run_at_from_string(to_string(r)) == r);
  }
  for (Phase p : {Phase::Capture, Phase::Bubble}) {
    CHECK(phase_from_string(to_string(p)) == p);
  }
  CHECK(to_string(RunAt::DocumentStart) == "document_start");
  CHECK(to_string(Phase::Bubble) == "bubble");
  CHECK_FALSE(run_at_from_string("soon").has_value());
  CHECK_FALSE(phase_from_string("trickle").has_value());
}
