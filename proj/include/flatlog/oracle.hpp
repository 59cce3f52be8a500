#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "flatlog/ast.hpp"

// Reference evaluators for tests. They work on plain string tuples and
// nested loops and share no evaluation code with the engine.
namespace flatlog::oracle {

using Tuple = std::vector<std::string>;

struct TupleHash {
  std::size_t operator()(const Tuple& t) const;
};

using Relation = std::unordered_set<Tuple, TupleHash>;
using FactSet = std::map<std::string, Relation>;

// One strongly connected group of relations and the number of rounds its
// recursive rules took: full applications until one produced nothing new,
// that last one included. Non-recursive groups report 1.
struct ComponentRounds {
  std::vector<std::string> relations;  // sorted
  bool recursive = false;
  std::size_t rounds = 0;
};

struct FixpointResult {
  FactSet relations;
  std::vector<ComponentRounds> components;
};

// Least fixpoint by repeated full application of every rule, group by
// group. `facts` seeds the input relations; program facts are added too.
// .split directives are ignored (the original rules are evaluated).
FixpointResult naive_fixpoint(const Program& program, const FactSet& facts);

// All bindings of the variables satisfying every atom (negated atoms are
// absence checks, `!=` pairs are filters), projected onto `projection`.
Relation bruteforce_join(const std::vector<Atom>& atoms, const std::vector<Inequality>& inequalities,
                         const FactSet& facts, const std::vector<std::string>& projection);

std::vector<Tuple> sorted(const Relation& rel);

}  // namespace flatlog::oracle
