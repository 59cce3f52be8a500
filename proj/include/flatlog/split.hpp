#pragma once

#include <utility>

#include "flatlog/ast.hpp"

namespace flatlog {

// Helper-relation splitting. Moves a sub-conjunction of a rule body into a
// fresh helper relation whose columns are the variables the isolated atoms
// share with the rest of the rule (plus those the head needs), ordered as
// the directive lists them. Returns (helper rule, consumer rule).
//
// Rejected: unknown rule label or atom, ambiguous atom names, negated or
// recursive atoms in the subset, a subset disconnected from the remainder,
// and helper columns that differ from the boundary variable set.
std::pair<Rule, Rule> split_helper(const Program& program, const Rule& rule, const SplitDirective& directive);

// Applies every .split directive of the program, declaring the helper
// relations and replacing each split rule by its consumer. The result has
// no directives left and is validated.
Program apply_splits(Program program);

}  // namespace flatlog
