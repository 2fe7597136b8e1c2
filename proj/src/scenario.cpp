#include "pguard/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace pguard {
namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
  throw ScenarioError(ScenarioError::Kind::Parse, line, msg);
}

[[noreturn]] void validation_fail(std::size_t line, const std::string& msg) {
  throw ScenarioError(ScenarioError::Kind::Validation, line, msg);
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string trimmed(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

// Whitespace-separated words; a word starting with '"' keeps spaces until
// the closing quote and understands \" \\ \n \t; '#' outside quotes starts
// a comment.
std::vector<std::string> tokenize(const std::string& text, std::size_t line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (c == '#') break;
    std::string tok;
    if (c == '"') {
      ++i;
      bool closed = false;
      while (i < text.size()) {
        char d = text[i++];
        if (d == '"') {
          closed = true;
          break;
        }
        if (d == '\\') {
          if (i >= text.size()) parse_fail(line, "dangling escape");
          char e = text[i++];
          switch (e) {
            case 'n': tok += '\n'; break;
            case 't': tok += '\t'; break;
            case '"': tok += '"'; break;
            case '\\': tok += '\\'; break;
            default: parse_fail(line, std::string("unknown escape \\") + e);
          }
        } else {
          tok += d;
        }
      }
      if (!closed) parse_fail(line, "unterminated quote");
    } else {
      while (i < text.size() && !is_space(text[i]) && text[i] != '#') tok += text[i++];
    }
    out.push_back(std::move(tok));
  }
  return out;
}

std::uint64_t parse_u64(const std::string& tok, std::size_t line, const std::string& field) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    validation_fail(line, field + ": not an unsigned integer: '" + tok + "'");
  }
  return value;
}

RunAt parse_run_at(const std::string& tok, std::size_t line) {
  std::optional<RunAt> v = run_at_from_string(tok);
  if (!v) v = run_at_from_string("document_" + tok);
  if (!v) validation_fail(line, "run_at: unknown value '" + tok + "'");
  return *v;
}

Phase parse_phase(const std::string& tok, std::size_t line) {
  std::optional<Phase> v = phase_from_string(tok);
  if (!v) validation_fail(line, "phase: unknown value '" + tok + "'");
  return *v;
}

Selector parse_selector(const std::string& tok, std::size_t line) {
  Selector s;
  if (tok == "root") {
    s.kind = Selector::Kind::Root;
    return s;
  }
  if (tok.rfind("tag=", 0) == 0) {
    s.kind = Selector::Kind::ByTag;
    s.tag = tok.substr(4);
    std::transform(s.tag.begin(), s.tag.end(), s.tag.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s.tag.empty()) validation_fail(line, "selector: empty tag");
    return s;
  }
  if (tok.rfind("attr=", 0) == 0) {
    std::string rest = tok.substr(5);
    std::size_t colon = rest.find(':');
    if (colon == std::string::npos || colon == 0) {
      validation_fail(line, "selector: attr needs name:value");
    }
    s.kind = Selector::Kind::ByAttribute;
    s.attr_name = rest.substr(0, colon);
    std::transform(s.attr_name.begin(), s.attr_name.end(), s.attr_name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    s.attr_value = rest.substr(colon + 1);
    return s;
  }
  if (tok.rfind("path=", 0) == 0) {
    std::optional<NodePath> p = NodePath::from_string(tok.substr(5));
    if (!p) validation_fail(line, "selector: bad path '" + tok.substr(5) + "'");
    s.kind = Selector::Kind::ByPath;
    s.path = *p;
    return s;
  }
  validation_fail(line, "selector: expected root, tag=, attr= or path=, got '" + tok + "'");
}

DomNode parse_payload(const std::string& fragment, std::size_t line) {
  std::vector<DomNode> forest = parse_fragment(fragment);
  if (forest.size() != 1) {
    validation_fail(line, "insert-child: fragment must hold exactly one node");
  }
  return std::move(forest.front());
}

Rule parse_rule(const std::vector<std::string>& toks, std::size_t line) {
  if (toks.size() < 3) parse_fail(line, "on: needs a selector and an action");
  Rule rule;
  rule.selector = parse_selector(toks[1], line);
  rule.scope = RuleScope::AllMatches;
  std::size_t last = toks.size();
  if (toks.back() == "first" || toks.back() == "all") {
    rule.scope = toks.back() == "first" ? RuleScope::FirstMatch : RuleScope::AllMatches;
    --last;
  }
  std::vector<std::string> args(toks.begin() + 2, toks.begin() + last);
  if (args.empty()) parse_fail(line, "on: missing action");
  const std::string& verb = args[0];
  Action& a = rule.action;
  if (verb == "insert-child") {
    if (args.size() != 2 && args.size() != 4) {
      parse_fail(line, "insert-child: expected fragment, optionally 'at N'");
    }
    a.kind = Action::Kind::InsertChild;
    a.subtree = parse_payload(args[1], line);
    if (args.size() == 4) {
      if (args[2] != "at") parse_fail(line, "insert-child: expected 'at', got '" + args[2] + "'");
      a.index = static_cast<std::size_t>(parse_u64(args[3], line, "insert-child index"));
    }
  } else if (verb == "delete-self") {
    if (args.size() != 1) parse_fail(line, "delete-self: takes no arguments");
    a.kind = Action::Kind::DeleteSelf;
  } else if (verb == "set-attr") {
    if (args.size() != 3) parse_fail(line, "set-attr: expected name and value");
    a.kind = Action::Kind::SetAttribute;
    a.name = args[1];
    std::transform(a.name.begin(), a.name.end(), a.name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    a.value = args[2];
  } else if (verb == "set-text") {
    if (args.size() != 2) parse_fail(line, "set-text: expected one value");
    a.kind = Action::Kind::SetText;
    a.value = args[1];
  } else if (verb == "nothing") {
    if (args.size() != 1) parse_fail(line, "nothing: takes no arguments");
    a.kind = Action::Kind::Nothing;
  } else {
    validation_fail(line, "action: unknown verb '" + verb + "'");
  }
  return rule;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  std::vector<std::string> raw;
  {
    std::string cur;
    for (char c : text) {
      if (c == '\n') {
        raw.push_back(std::move(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    raw.push_back(std::move(cur));
  }

  Scenario s;
  bool seen_scenario = false;
  bool seen_dom = false;
  bool seen_attacker = false;
  bool seen_guard = false;
  struct Decl {
    std::size_t line = 0;
    std::optional<std::uint64_t> time;
  };
  std::vector<Decl> decls;

  std::size_t ln = 0;
  while (ln < raw.size()) {
    std::vector<std::string> toks = tokenize(raw[ln], ln + 1);
    if (toks.empty()) {
      ++ln;
      continue;
    }
    const std::string& head = toks[0];
    std::size_t section_line = ln + 1;

    if (head == "scenario") {
      if (toks.size() != 2) parse_fail(section_line, "scenario: needs a name");
      if (seen_scenario) parse_fail(section_line, "scenario: duplicate header");
      s.name = toks[1];
      seen_scenario = true;
    } else if (head == "dom") {
      if (toks.size() != 1) parse_fail(section_line, "dom: takes no arguments");
      if (seen_dom) parse_fail(section_line, "dom: duplicate section");
      std::string html;
      bool closed = false;
      ++ln;
      while (ln < raw.size()) {
        if (trimmed(raw[ln]) == "end") {
          closed = true;
          break;
        }
        html += raw[ln];
        html += '\n';
        ++ln;
      }
      if (!closed) parse_fail(section_line, "dom: missing end");
      s.dom0 = parse(html);
      seen_dom = true;
    } else if (head == "extension") {
      if (toks.size() != 2) parse_fail(section_line, "extension: needs an id");
      Extension ext;
      ext.manifest.extension_id = toks[1];
      ext.manifest.run_at = RunAt::DocumentIdle;  // content-script defaults
      ext.manifest.phase = Phase::Bubble;
      Decl decl;
      decl.line = section_line;
      bool closed = false;
      ++ln;
      while (ln < raw.size()) {
        std::vector<std::string> body = tokenize(raw[ln], ln + 1);
        if (body.empty()) {
          ++ln;
          continue;
        }
        if (body.size() == 1 && body[0] == "end") {
          closed = true;
          break;
        }
        const std::string& key = body[0];
        if (key == "run_at" && body.size() == 2) {
          ext.manifest.run_at = parse_run_at(body[1], ln + 1);
        } else if (key == "phase" && body.size() == 2) {
          ext.manifest.phase = parse_phase(body[1], ln + 1);
        } else if (key == "install_time" && body.size() == 2) {
          decl.time = parse_u64(body[1], ln + 1, "install_time");
        } else if (key == "privileges" && body.size() == 2) {
          if (body[1] == "management") {
            ext.manifest.management = true;
          } else if (body[1] == "none") {
            ext.manifest.management = false;
          } else {
            validation_fail(ln + 1, "privileges: unknown value '" + body[1] + "'");
          }
        } else if (key == "on") {
          ext.program.rules.push_back(parse_rule(body, ln + 1));
        } else {
          parse_fail(ln + 1, "extension: unknown line '" + key + "'");
        }
        ++ln;
      }
      if (!closed) parse_fail(section_line, "extension: missing end");
      s.extensions.push_back(std::move(ext));
      decls.push_back(decl);
    } else if (head == "attacker") {
      if (toks.size() != 2) parse_fail(section_line, "attacker: needs usual or strong");
      if (seen_attacker) parse_fail(section_line, "attacker: duplicate section");
      seen_attacker = true;
      if (toks[1] == "usual") {
        s.attacker.kind = AttackerKind::Usual;
      } else if (toks[1] == "strong") {
        s.attacker.kind = AttackerKind::Strong;
      } else {
        validation_fail(section_line, "attacker: unknown kind '" + toks[1] + "'");
      }
      s.attacker.manifest.extension_id = "attacker";
      s.attacker.manifest.run_at = RunAt::DocumentIdle;
      s.attacker.manifest.phase = Phase::Bubble;
      bool closed = false;
      ++ln;
      while (ln < raw.size()) {
        std::vector<std::string> body = tokenize(raw[ln], ln + 1);
        if (body.empty()) {
          ++ln;
          continue;
        }
        if (body.size() == 1 && body[0] == "end") {
          closed = true;
          break;
        }
        const std::string& key = body[0];
        if (key == "id" && body.size() == 2) {
          s.attacker.manifest.extension_id = body[1];
        } else if (key == "run_at" && body.size() == 2) {
          s.attacker.manifest.run_at = parse_run_at(body[1], ln + 1);
        } else if (key == "phase" && body.size() == 2) {
          s.attacker.manifest.phase = parse_phase(body[1], ln + 1);
        } else if (key == "install_time" && body.size() == 2) {
          s.attacker.preferred_install_time = parse_u64(body[1], ln + 1, "install_time");
        } else if (key == "privileges" && body.size() == 2) {
          if (body[1] == "management") {
            s.attacker.manifest.management = true;
          } else if (body[1] == "none") {
            s.attacker.manifest.management = false;
          } else {
            validation_fail(ln + 1, "privileges: unknown value '" + body[1] + "'");
          }
        } else if (key == "manipulation" && body.size() == 2) {
          if (body[1] == "none") {
            s.attacker.manipulation = Manipulation::None;
          } else if (body[1] == "secure-prefs") {
            s.attacker.manipulation = Manipulation::SecurePrefs;
          } else if (body[1] == "management") {
            s.attacker.manipulation = Manipulation::Management;
          } else {
            validation_fail(ln + 1, "manipulation: unknown value '" + body[1] + "'");
          }
        } else {
          parse_fail(ln + 1, "attacker: unknown line '" + key + "'");
        }
        ++ln;
      }
      if (!closed) parse_fail(section_line, "attacker: missing end");
    } else if (head == "guard") {
      if (toks.size() != 1) parse_fail(section_line, "guard: takes no arguments");
      if (seen_guard) parse_fail(section_line, "guard: duplicate section");
      seen_guard = true;
      s.guard_spec.requested = true;
      bool closed = false;
      ++ln;
      while (ln < raw.size()) {
        std::vector<std::string> body = tokenize(raw[ln], ln + 1);
        if (body.empty()) {
          ++ln;
          continue;
        }
        if (body.size() == 1 && body[0] == "end") {
          closed = true;
          break;
        }
        const std::string& key = body[0];
        if (key == "policy" && body.size() == 2) {
          if (body[1] == "last-wins") {
            s.guard_spec.config.conflict_policy = ConflictPolicy::LastWins;
          } else if (body[1] == "first-wins") {
            s.guard_spec.config.conflict_policy = ConflictPolicy::FirstWins;
          } else if (body[1] == "fail") {
            s.guard_spec.config.conflict_policy = ConflictPolicy::FailOnConflict;
          } else {
            validation_fail(ln + 1, "policy: unknown value '" + body[1] + "'");
          }
        } else if (key == "monitors-privileged" && body.size() == 2) {
          if (body[1] == "true") {
            s.guard_spec.monitors_privileged = true;
          } else if (body[1] == "false") {
            s.guard_spec.monitors_privileged = false;
          } else {
            validation_fail(ln + 1, "monitors-privileged: expected true or false");
          }
        } else {
          parse_fail(ln + 1, "guard: unknown line '" + key + "'");
        }
        ++ln;
      }
      if (!closed) parse_fail(section_line, "guard: missing end");
    } else {
      parse_fail(section_line, "unknown section '" + head + "'");
    }
    ++ln;
  }

  if (!seen_scenario) validation_fail(0, "scenario: header missing");
  if (!seen_dom) validation_fail(0, "dom0: section missing");

  std::set<std::string> ids;
  for (std::size_t i = 0; i < s.extensions.size(); ++i) {
    if (!ids.insert(s.extensions[i].manifest.extension_id).second) {
      validation_fail(decls[i].line,
                      "extension_id: duplicate '" + s.extensions[i].manifest.extension_id + "'");
    }
  }
  std::set<std::uint64_t> used;
  for (std::size_t i = 0; i < s.extensions.size(); ++i) {
    if (decls[i].time && !used.insert(*decls[i].time).second) {
      validation_fail(decls[i].line,
                      "install_time: duplicate " + std::to_string(*decls[i].time));
    }
  }
  std::uint64_t clock = 0;
  for (std::size_t i = 0; i < s.extensions.size(); ++i) {
    if (decls[i].time) {
      s.extensions[i].manifest.install_time = *decls[i].time;
      continue;
    }
    while (used.count(clock) != 0) ++clock;
    used.insert(clock);
    s.extensions[i].manifest.install_time = clock;
  }
  if (s.attacker.kind != AttackerKind::None &&
      s.attacker.manipulation == Manipulation::SecurePrefs && !s.attacker.preferred_install_time) {
    validation_fail(0, "manipulation: secure-prefs needs an install_time");
  }
  if (ids.count(s.attacker.manifest.extension_id) != 0 && s.attacker.kind != AttackerKind::None) {
    validation_fail(0, "attacker: id collides with extension '" +
                           s.attacker.manifest.extension_id + "'");
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(ScenarioError::Kind::Io, 0, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

Registry victim_registry(const Scenario& s) {
  Registry r;
  for (const Extension& e : s.extensions) r.add(e);
  return r;
}

Registry attacked_registry(const Scenario& s) {
  Registry r = victim_registry(s);
  if (s.attacker.kind != AttackerKind::Usual) return r;
  std::uint64_t next = 0;
  for (const Installed& e : r.entries) {
    next = std::max(next, e.extension.manifest.install_time + 1);
  }
  Extension att = make_usual_attacker(s.attacker.manifest.extension_id, next);
  att.manifest.run_at = s.attacker.manifest.run_at;
  att.manifest.phase = s.attacker.manifest.phase;
  att.manifest.management = s.attacker.manifest.management;
  if (s.attacker.manipulation == Manipulation::None && s.attacker.preferred_install_time) {
    att.manifest.install_time = *s.attacker.preferred_install_time;
  }
  r.add(std::move(att));
  if (s.attacker.manipulation == Manipulation::SecurePrefs) {
    r = reorder_via_secure_preferences(r, s.attacker.manifest.extension_id,
                                       *s.attacker.preferred_install_time);
  } else if (s.attacker.manipulation == Manipulation::Management) {
    r = reorder_via_management(r, s.attacker.manifest.extension_id);
  }
  return r;
}

GuardedRegistry guarded_registry_for(const Scenario& s) {
  if (s.attacker.kind == AttackerKind::Strong) {
    return interleave_strong_attacker(
        guard(victim_registry(s), s.guard_spec.config, s.guard_spec.monitors_privileged),
        s.attacker.manifest);
  }
  return guard(s.attacker.kind == AttackerKind::Usual ? attacked_registry(s) : victim_registry(s),
               s.guard_spec.config, s.guard_spec.monitors_privileged);
}

ScenarioOutcome run_scenario(const Scenario& s, RunMode mode) {
  if (s.extensions.empty()) {
    throw ScenarioError(ScenarioError::Kind::Validation, 0, "scenario declares no extensions");
  }
  ScenarioOutcome out;
  out.mode = mode;
  bool want_unguarded = mode != RunMode::Guarded;
  bool want_guarded = mode != RunMode::Unguarded;

  if (want_unguarded) {
    if (s.attacker.kind == AttackerKind::Strong) {
      Registry bracketed = make_strong_attacker(victim_registry(s), s.attacker.manifest);
      out.unguarded = run_pipeline(bracketed, s.dom0);
      out.attributed = strong_attacker_attribution(bracketed, s.attacker.manifest.extension_id);
    } else {
      Registry r = attacked_registry(s);
      out.unguarded = run_pipeline(r, s.dom0);
      if (s.attacker.kind == AttackerKind::Usual) {
        out.learned = usual_attacker_learned(*r.find(s.attacker.manifest.extension_id), s.dom0);
      }
    }
  }

  if (want_guarded) {
    GuardedRegistry g = guarded_registry_for(s);
    try {
      out.guarded = run_guarded(g, s.dom0);
    } catch (const ConflictError& c) {
      out.conflict = true;
      out.conflict_message = c.what();
    }
    if (out.guarded) {
      if (s.attacker.kind == AttackerKind::Strong) {
        out.attributed_guarded =
            strong_attacker_attribution(g.slots, s.attacker.manifest.extension_id);
      } else if (s.attacker.kind == AttackerKind::Usual) {
        out.learned_guarded =
            usual_attacker_learned(*g.slots.find(s.attacker.manifest.extension_id), s.dom0);
      }
    }
    try {
      out.violations = verify_pipeline_integrity(g);
    } catch (const PipelineError& p) {
      if (p.kind() != PipelineErrorKind::PrivilegeDenied) throw;
      out.integrity_error = p.what();
    }
  }

  if (mode == RunMode::Differential && out.unguarded && out.guarded) {
    out.outputs_equal = out.unguarded->final_dom.root == out.guarded->final_dom.root;
  }
  return out;
}

}  // namespace pguard
