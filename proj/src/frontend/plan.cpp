#include "flatlog/plan.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "flatlog/error.hpp"

namespace flatlog {

std::vector<RuleInstance> seminaive_rewrite(const Program& program, const Stratum& stratum) {
  std::vector<RuleInstance> out;
  for (std::size_t r : stratum.rules) {
    const Rule& rule = program.rules[r];
    if (!stratum.recursive) {
      out.push_back({r, std::nullopt});
      continue;
    }
    std::size_t before = out.size();
    for (std::size_t i = 0; i < rule.body.size(); ++i) {
      const Atom& a = rule.body[i];
      if (a.negated) continue;
      if (std::find(stratum.relations.begin(), stratum.relations.end(), a.relation) != stratum.relations.end()) {
        out.push_back({r, i});
      }
    }
    if (out.size() == before) throw InternalError("non-recursive rule placed in a recursive stratum: " + rule.to_string());
  }
  return out;
}

std::vector<std::string> choose_variable_order(const Rule& rule, std::optional<std::size_t> delta_atom) {
  std::vector<std::string> order;
  auto placed = [&](const std::string& v) { return std::find(order.begin(), order.end(), v) != order.end(); };
  if (delta_atom) {
    for (const auto& v : rule.body.at(*delta_atom).variables()) order.push_back(v);
  }
  std::vector<std::string> rest;
  std::map<std::string, std::size_t> constraints;
  for (const auto& a : rule.body) {
    if (a.negated) continue;
    for (const auto& v : a.variables()) {
      if (constraints[v]++ == 0 && !placed(v)) rest.push_back(v);
    }
  }
  // rest is in first-occurrence order, so a stable sort keeps the tie-break
  std::stable_sort(rest.begin(), rest.end(),
                   [&](const std::string& a, const std::string& b) { return constraints[a] > constraints[b]; });
  order.insert(order.end(), rest.begin(), rest.end());
  return order;
}

namespace {

// Physical order for an atom: constants first (argument order), then
// variable columns by level; ties keep argument order. Anonymous variables
// in negated atoms (not in `level_of`) go last.
ColumnOrder atom_order(const Atom& a, const std::map<std::string, std::size_t>& level_of) {
  ColumnOrder order(a.arity());
  std::iota(order.begin(), order.end(), 0u);
  auto rank = [&](std::uint32_t col) -> std::size_t {
    const Term& t = a.args[col];
    if (t.is_constant()) return 0;
    auto it = level_of.find(t.text);
    if (it == level_of.end()) return std::numeric_limits<std::size_t>::max();
    return it->second + 1;
  };
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return rank(x) < rank(y); });
  return order;
}

Binding bind_term(const Term& t, const std::map<std::string, std::size_t>& level_of, Interner& interner) {
  if (t.is_constant()) return Binding::of_constant(interner.intern(t.text));
  return Binding::of_level(level_of.at(t.text));
}

std::size_t check_level(std::initializer_list<const Binding*> bs) {
  std::size_t level = kGroundLevel;
  for (const Binding* b : bs) {
    if (b->constant) continue;
    level = level == kGroundLevel ? b->level : std::max(level, b->level);
  }
  return level;
}

}  // namespace

JoinPlan compile_plan(const Program& program, const RuleInstance& instance, Interner& interner) {
  const Rule& rule = program.rules.at(instance.rule);
  JoinPlan plan;
  plan.rule = instance.rule;
  plan.text = rule.to_string();
  plan.head_relation = rule.head.relation;
  plan.variable_order = choose_variable_order(rule, instance.delta_atom);

  std::map<std::string, std::size_t> level_of;
  for (std::size_t l = 0; l < plan.variable_order.size(); ++l) level_of[plan.variable_order[l]] = l;
  plan.levels.resize(plan.variable_order.size());

  for (std::size_t i = 0; i < rule.body.size(); ++i) {
    const Atom& a = rule.body[i];
    if (a.negated) {
      NegatedProbe probe;
      probe.relation = a.relation;
      probe.order = atom_order(a, level_of);
      for (auto col : probe.order) {
        const Term& t = a.args[col];
        if (t.is_variable() && !level_of.count(t.text)) break;
        probe.columns.push_back(bind_term(t, level_of, interner));
        if (!probe.columns.back().constant) {
          probe.level = probe.level == kGroundLevel ? probe.columns.back().level
                                                    : std::max(probe.level, probe.columns.back().level);
        }
      }
      probe.bound_prefix = probe.columns.size();
      plan.negated.push_back(std::move(probe));
      continue;
    }
    PlanSource src;
    src.relation = a.relation;
    src.body_index = i;
    src.version = (instance.delta_atom && *instance.delta_atom == i) ? Version::Delta : Version::Full;
    src.order = atom_order(a, level_of);
    for (auto col : src.order) src.columns.push_back(bind_term(a.args[col], level_of, interner));
    while (src.const_prefix < src.columns.size() && src.columns[src.const_prefix].constant) ++src.const_prefix;
    std::size_t s = plan.sources.size();
    if (src.version == Version::Delta) plan.delta_source = s;
    for (std::size_t c = src.const_prefix; c < src.columns.size();) {
      std::size_t level = src.columns[c].level;
      std::size_t e = c;
      while (e < src.columns.size() && src.columns[e].level == level) ++e;
      plan.levels[level].push_back({s, c, e});
      c = e;
    }
    plan.sources.push_back(std::move(src));
  }

  for (const auto& q : rule.inequalities) {
    InequalityCheck check;
    check.lhs = bind_term(q.lhs, level_of, interner);
    check.rhs = bind_term(q.rhs, level_of, interner);
    check.level = check_level({&check.lhs, &check.rhs});
    plan.inequalities.push_back(check);
  }
  for (const auto& t : rule.head.args) plan.head.push_back(bind_term(t, level_of, interner));

  // Root sources: those whose first variable column binds level 0.
  if (!plan.levels.empty()) {
    std::vector<std::size_t> roots;
    for (const auto& ls : plan.levels[0]) roots.push_back(ls.source);
    if (plan.delta_source &&
        std::find(roots.begin(), roots.end(), *plan.delta_source) != roots.end()) {
      plan.outer = plan.delta_source;
    } else {
      plan.outer = roots.front();
    }
    for (std::size_t r : roots) {
      if (r != *plan.outer) {
        plan.inner = r;
        break;
      }
    }
  }
  return plan;
}

bool check_prefix_property(const JoinPlan& plan) {
  std::map<std::string, std::size_t> seen;
  for (const auto& v : plan.variable_order) {
    if (seen[v]++) return false;
  }
  std::vector<bool> constrained(plan.variable_order.size(), false);
  for (const auto& src : plan.sources) {
    bool in_vars = false;
    std::size_t last = 0;
    for (const auto& b : src.columns) {
      if (b.constant) {
        if (in_vars) return false;
        continue;
      }
      if (b.level >= plan.variable_order.size()) return false;
      if (in_vars && b.level < last) return false;
      in_vars = true;
      last = b.level;
      constrained[b.level] = true;
    }
  }
  return std::all_of(constrained.begin(), constrained.end(), [](bool b) { return b; });
}

}  // namespace flatlog
