#include "flatlog/split.hpp"

#include <algorithm>
#include <set>

#include "flatlog/error.hpp"
#include "flatlog/parser.hpp"
#include "flatlog/stratify.hpp"

namespace flatlog {

namespace {

std::set<std::string> vars_of(const std::vector<const Atom*>& atoms) {
  std::set<std::string> out;
  for (const Atom* a : atoms) {
    for (const auto& t : a->args) {
      if (t.is_variable()) out.insert(t.text);
    }
  }
  return out;
}

std::string join(const std::set<std::string>& s) {
  std::string out;
  for (const auto& v : s) out += (out.empty() ? "" : ", ") + v;
  return out;
}

}  // namespace

std::pair<Rule, Rule> split_helper(const Program& program, const Rule& rule, const SplitDirective& d) {
  auto fail = [&](const std::string& msg) -> ProgramError {
    return ProgramError(".split " + d.rule_label + ": " + msg, d.line, 1);
  };
  if (program.find(d.helper)) throw fail("helper relation '" + d.helper + "' already exists");
  if (d.atoms.empty()) throw fail("empty atom subset");

  // Resolve atom names to body positions. The helper body keeps the
  // directive's order.
  std::vector<bool> in_subset(rule.body.size(), false);
  std::vector<const Atom*> subset, remainder;
  for (const auto& name : d.atoms) {
    std::size_t hits = 0, where = 0;
    for (std::size_t i = 0; i < rule.body.size(); ++i) {
      if (rule.body[i].relation == name) {
        ++hits;
        where = i;
      }
    }
    if (hits == 0) throw fail("rule has no body atom over '" + name + "'");
    if (hits > 1) throw fail("atom name '" + name + "' is ambiguous in the rule body");
    if (in_subset[where]) throw fail("atom '" + name + "' listed twice");
    in_subset[where] = true;
    subset.push_back(&rule.body[where]);
  }
  for (std::size_t i = 0; i < rule.body.size(); ++i) {
    if (!in_subset[i]) remainder.push_back(&rule.body[i]);
  }

  for (const Atom* a : subset) {
    if (a->negated) throw fail("negated atom " + to_string(*a) + " cannot be split out");
  }
  // Recursive atoms would need their own delta handling inside the helper.
  for (const auto& scc : relation_sccs(program)) {
    if (std::find(scc.begin(), scc.end(), rule.head.relation) == scc.end()) continue;
    for (const Atom* a : subset) {
      if (std::find(scc.begin(), scc.end(), a->relation) != scc.end()) {
        throw fail("atom " + to_string(*a) + " is recursive with the rule head; only non-recursive atoms can be split");
      }
    }
  }

  auto subset_vars = vars_of(subset);
  auto remainder_vars = vars_of(remainder);
  for (const auto& q : rule.inequalities) {
    for (const Term* t : {&q.lhs, &q.rhs}) {
      if (t->is_variable()) remainder_vars.insert(t->text);
    }
  }
  std::set<std::string> shared;
  for (const auto& v : subset_vars) {
    if (remainder_vars.count(v)) shared.insert(v);
  }
  if (!remainder.empty() && shared.empty()) {
    throw fail("isolated atoms share no variable with the rest of the body (would be a cross product)");
  }
  std::set<std::string> boundary = shared;
  for (const auto& t : rule.head.args) {
    if (t.is_variable() && subset_vars.count(t.text)) boundary.insert(t.text);
  }
  std::set<std::string> listed(d.helper_variables.begin(), d.helper_variables.end());
  if (listed.size() != d.helper_variables.size()) throw fail("helper columns repeat a variable");
  if (listed != boundary) {
    throw fail("helper columns {" + join(listed) + "} must be exactly the boundary variables {" + join(boundary) + "}");
  }

  Atom helper_head;
  helper_head.relation = d.helper;
  helper_head.line = d.line;
  for (const auto& v : d.helper_variables) helper_head.args.push_back(Term::variable(v));

  Rule helper;
  helper.label = d.rule_label + "$" + d.helper;
  helper.head = helper_head;
  helper.line = rule.line;
  for (const Atom* a : subset) helper.body.push_back(*a);

  Rule consumer;
  consumer.label = rule.label;
  consumer.head = rule.head;
  consumer.line = rule.line;
  for (const Atom* a : remainder) consumer.body.push_back(*a);
  consumer.body.push_back(helper_head);
  consumer.inequalities = rule.inequalities;
  return {std::move(helper), std::move(consumer)};
}

Program apply_splits(Program program) {
  auto directives = std::move(program.splits);
  program.splits.clear();
  for (const auto& d : directives) {
    auto it = std::find_if(program.rules.begin(), program.rules.end(),
                           [&](const Rule& r) { return r.label == d.rule_label; });
    if (it == program.rules.end()) throw ProgramError(".split: no rule labelled '" + d.rule_label + "'", d.line, 1);
    auto [helper, consumer] = split_helper(program, *it, d);
    *it = std::move(consumer);
    RelationDecl decl;
    decl.name = d.helper;
    decl.attributes = d.helper_variables;
    decl.helper = true;
    program.relations.push_back(std::move(decl));
    program.rules.push_back(std::move(helper));
  }
  validate(program);
  return program;
}

}  // namespace flatlog
