#include "flatlog/oracle.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <string_view>
#include <unordered_map>

namespace flatlog::oracle {

std::size_t TupleHash::operator()(const Tuple& t) const {
  std::size_t h = 0x9e3779b97f4a7c15ull;
  for (const auto& s : t) h = (h ^ std::hash<std::string>{}(s)) * 0x100000001b3ull;
  return h;
}

std::vector<Tuple> sorted(const Relation& rel) {
  // Sorting string tuples directly is dominated by cache misses on large
  // relations. Rank the distinct strings once, sort a flat matrix of ranks,
  // then emit in that order; the orders agree.
  std::vector<const Tuple*> rows;
  rows.reserve(rel.size());
  std::size_t arity = 0;
  for (const auto& t : rel) {
    if (!rows.empty() && t.size() != arity) {
      std::vector<Tuple> out(rel.begin(), rel.end());
      std::sort(out.begin(), out.end());
      return out;
    }
    arity = t.size();
    rows.push_back(&t);
  }
  std::unordered_map<std::string_view, std::uint32_t> rank;
  for (const Tuple* t : rows) {
    for (const auto& v : *t) rank.emplace(v, 0);
  }
  std::vector<std::string_view> distinct;
  distinct.reserve(rank.size());
  for (const auto& [v, _] : rank) distinct.push_back(v);
  std::sort(distinct.begin(), distinct.end());
  for (std::uint32_t i = 0; i < distinct.size(); ++i) rank[distinct[i]] = i;
  std::vector<std::uint32_t> flat(rows.size() * arity);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < arity; ++k) flat[i * arity + k] = rank[(*rows[i])[k]];
  }
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(flat.begin() + a * arity, flat.begin() + (a + 1) * arity, flat.begin() + b * arity,
                                        flat.begin() + (b + 1) * arity);
  });
  std::vector<Tuple> out;
  out.reserve(rows.size());
  for (std::size_t i : order) out.push_back(*rows[i]);
  return out;
}

namespace {

// Variable assignment of one rule body. Values point into fact tuples or
// rule constants, which outlive the enumeration.
class Bindings {
 public:
  const std::string* get(const std::string& var) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (*names_[i] == var) return values_[i];
    }
    return nullptr;
  }
  void set(const std::string& var, const std::string* value) {
    names_.push_back(&var);
    values_.push_back(value);
  }
  std::size_t size() const { return names_.size(); }
  void truncate(std::size_t n) {
    names_.resize(n);
    values_.resize(n);
  }

 private:
  std::vector<const std::string*> names_;  // variable names from the rule
  std::vector<const std::string*> values_;
};

const Relation& lookup(const FactSet& facts, const std::string& name) {
  static const Relation empty;
  auto it = facts.find(name);
  return it == facts.end() ? empty : it->second;
}

// Per-(relation, column) value index, rebuilt whenever the facts change.
class Index {
 public:
  explicit Index(const FactSet& facts) : facts_(facts) {}

  const std::vector<const Tuple*>& candidates(const std::string& rel, std::size_t col, const std::string& value) {
    auto& by_value = tables_[{rel, col}];
    if (!built_.count({rel, col})) {
      built_.insert({rel, col});
      for (const auto& t : lookup(facts_, rel)) by_value[t[col]].push_back(&t);
    }
    static const std::vector<const Tuple*> none;
    auto it = by_value.find(value);
    return it == by_value.end() ? none : it->second;
  }

 private:
  const FactSet& facts_;
  std::map<std::pair<std::string, std::size_t>, std::unordered_map<std::string, std::vector<const Tuple*>>> tables_;
  std::set<std::pair<std::string, std::size_t>> built_;
};

const std::string* term_value(const Term& t, const Bindings& b) { return t.is_constant() ? &t.text : b.get(t.text); }

// Extends `b` with the tuple if it agrees with the atom; false otherwise.
// The caller truncates `b` back afterwards either way.
bool unify(const Atom& atom, const Tuple& t, Bindings& b) {
  if (t.size() != atom.args.size()) return false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Term& term = atom.args[i];
    if (term.is_constant()) {
      if (term.text != t[i]) return false;
      continue;
    }
    const std::string* bound = b.get(term.text);
    if (!bound) b.set(term.text, &t[i]);
    else if (*bound != t[i]) return false;
  }
  return true;
}

// A negated atom holds when no tuple matches its bound positions; variables
// not bound by the positive atoms are wildcards.
bool absent(const Atom& atom, const FactSet& facts, const Bindings& b) {
  for (const auto& t : lookup(facts, atom.relation)) {
    bool match = true;
    for (std::size_t i = 0; i < t.size() && match; ++i) {
      auto v = term_value(atom.args[i], b);
      if (v && *v != t[i]) match = false;
    }
    if (match) return false;
  }
  return true;
}

void enumerate(const std::vector<Atom>& atoms, const std::vector<Inequality>& inequalities, const FactSet& facts,
               Index& index, const std::function<void(const Bindings&)>& emit) {
  std::vector<const Atom*> positive;
  std::vector<const Atom*> negative;
  for (const auto& a : atoms) (a.negated ? negative : positive).push_back(&a);

  std::function<void(std::size_t, Bindings&)> step = [&](std::size_t i, Bindings& b) {
    if (i == positive.size()) {
      for (const auto& q : inequalities) {
        auto l = term_value(q.lhs, b);
        auto r = term_value(q.rhs, b);
        if (!l || !r || *l == *r) return;
      }
      for (const Atom* n : negative) {
        if (!absent(*n, facts, b)) return;
      }
      emit(b);
      return;
    }
    const Atom& atom = *positive[i];
    // Use any already determined column to cut the scan down.
    const std::vector<const Tuple*>* cands = nullptr;
    for (std::size_t c = 0; c < atom.args.size() && !cands; ++c) {
      if (auto v = term_value(atom.args[c], b)) cands = &index.candidates(atom.relation, c, *v);
    }
    auto visit = [&](const Tuple& t) {
      const std::size_t mark = b.size();
      if (unify(atom, t, b)) step(i + 1, b);
      b.truncate(mark);
    };
    if (cands) {
      for (const Tuple* t : *cands) visit(*t);
    } else {
      for (const auto& t : lookup(facts, atom.relation)) visit(t);
    }
  };
  Bindings b;
  step(0, b);
}

Tuple project(const std::vector<Term>& terms, const Bindings& b) {
  Tuple out;
  for (const auto& t : terms) out.push_back(*term_value(t, b));
  return out;
}

// Relation groups by mutual reachability over the dependency graph
// (head depends on every body relation), dependencies first.
std::vector<std::vector<std::string>> components(const Program& program) {
  std::vector<std::string> names;
  for (const auto& d : program.relations) names.push_back(d.name);
  const std::size_t n = names.size();
  auto id = [&](const std::string& s) { return static_cast<std::size_t>(std::find(names.begin(), names.end(), s) - names.begin()); };
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));  // reach[a][b]: a depends on b
  for (const auto& r : program.rules) {
    for (const auto& a : r.body) reach[id(r.head.relation)][id(a.relation)] = true;
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (reach[k][j]) reach[i][j] = true;
      }
    }
  }
  std::vector<bool> placed(n, false);
  std::vector<std::vector<std::string>> out;
  std::size_t done = 0;
  while (done < n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (placed[i]) continue;
      // Ready when everything it depends on outside its own group is placed.
      bool ready = true;
      for (std::size_t j = 0; j < n && ready; ++j) {
        if (j != i && reach[i][j] && !(reach[j][i]) && !placed[j]) ready = false;
      }
      if (!ready) continue;
      std::vector<std::string> group;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || (reach[i][j] && reach[j][i])) {
          placed[j] = true;
          group.push_back(names[j]);
          ++done;
        }
      }
      std::sort(group.begin(), group.end());
      out.push_back(std::move(group));
      break;
    }
  }
  return out;
}

}  // namespace

FixpointResult naive_fixpoint(const Program& program, const FactSet& facts) {
  FixpointResult result;
  FactSet& db = result.relations;
  for (const auto& d : program.relations) db[d.name];
  for (const auto& [name, rel] : facts) db[name].insert(rel.begin(), rel.end());
  for (const auto& r : program.rules) {
    if (r.is_fact()) db[r.head.relation].insert(project(r.head.args, {}));
  }

  for (const auto& group : components(program)) {
    auto in_group = [&](const std::string& rel) { return std::binary_search(group.begin(), group.end(), rel); };
    std::vector<const Rule*> base;
    std::vector<const Rule*> recursive;
    for (const auto& r : program.rules) {
      if (r.is_fact() || !in_group(r.head.relation)) continue;
      bool rec = std::any_of(r.body.begin(), r.body.end(), [&](const Atom& a) { return in_group(a.relation); });
      (rec ? recursive : base).push_back(&r);
    }

    // Applies rules to a frozen snapshot; returns the tuples not yet present.
    auto apply = [&](const std::vector<const Rule*>& rules) {
      FactSet fresh;
      Index index(db);
      for (const Rule* r : rules) {
        enumerate(r->body, r->inequalities, db, index, [&](const Bindings& b) {
          Tuple t = project(r->head.args, b);
          if (!db[r->head.relation].count(t)) fresh[r->head.relation].insert(std::move(t));
        });
      }
      return fresh;
    };
    auto absorb = [&](FactSet& fresh) {
      std::size_t n = 0;
      for (auto& [name, rel] : fresh) {
        n += rel.size();
        db[name].insert(rel.begin(), rel.end());
      }
      return n;
    };

    ComponentRounds rounds{group, !recursive.empty(), 1};
    auto fresh = apply(base);
    absorb(fresh);
    if (!recursive.empty()) {
      rounds.rounds = 0;
      while (true) {
        ++rounds.rounds;
        auto more = apply(recursive);
        if (absorb(more) == 0) break;
      }
    }
    result.components.push_back(std::move(rounds));
  }
  return result;
}

Relation bruteforce_join(const std::vector<Atom>& atoms, const std::vector<Inequality>& inequalities,
                         const FactSet& facts, const std::vector<std::string>& projection) {
  Relation out;
  Index index(facts);
  enumerate(atoms, inequalities, facts, index, [&](const Bindings& b) {
    Tuple t;
    for (const auto& v : projection) t.push_back(*b.get(v));
    out.insert(std::move(t));
  });
  return out;
}

}  // namespace flatlog::oracle
