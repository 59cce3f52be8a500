#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "flatlog/ast.hpp"
#include "flatlog/columns.hpp"
#include "flatlog/stratify.hpp"
#include "flatlog/value.hpp"

namespace flatlog {

enum class Version { Full, Delta };

// One semi-naive instance of a rule: `delta_atom` (a body position) reads
// the previous iteration's delta, every other atom reads the full relation.
struct RuleInstance {
  std::size_t rule = 0;
  std::optional<std::size_t> delta_atom;
};

// Expands the rules of a stratum. A rule with k recursive body atoms yields
// k instances in a recursive stratum; rules of a non-recursive stratum yield
// one delta-free instance each.
std::vector<RuleInstance> seminaive_rewrite(const Program& program, const Stratum& stratum);

// Global variable order for a rule instance: the delta atom's variables
// first in argument order, then the rest by descending number of positive
// atoms mentioning them, ties broken by first textual occurrence.
std::vector<std::string> choose_variable_order(const Rule& rule, std::optional<std::size_t> delta_atom);

// Marks a bind-at-level requirement for a physical column or head slot.
struct Binding {
  bool constant = false;
  Value value = 0;        // when constant
  std::size_t level = 0;  // when variable: position in the variable order

  static Binding of_constant(Value v) { return {true, v, 0}; }
  static Binding of_level(std::size_t l) { return {false, 0, l}; }
};

// Reached by a check that must run before any variable binds.
inline constexpr std::size_t kGroundLevel = std::numeric_limits<std::size_t>::max();

struct PlanSource {
  std::string relation;
  std::size_t body_index = 0;
  Version version = Version::Full;
  ColumnOrder order;              // required physical order of the relation
  std::vector<Binding> columns;   // per physical column
  std::size_t const_prefix = 0;   // leading constant columns
};

// Source `source` constrains the level's variable on physical columns
// [first_column, end_column) (more than one when the atom repeats the variable).
struct LevelSource {
  std::size_t source = 0;
  std::size_t first_column = 0;
  std::size_t end_column = 0;
};

// Anti-join probe against a closed relation. The first `bound_prefix`
// physical columns are determined once `level` binds; the rest are
// anonymous and unconstrained.
struct NegatedProbe {
  std::string relation;
  ColumnOrder order;
  std::vector<Binding> columns;
  std::size_t bound_prefix = 0;
  std::size_t level = kGroundLevel;
};

struct InequalityCheck {
  Binding lhs;
  Binding rhs;
  std::size_t level = kGroundLevel;
};

struct JoinPlan {
  std::size_t rule = 0;
  std::string text;  // the rule, for diagnostics and stats
  std::string head_relation;
  std::vector<Binding> head;  // head projection, logical attribute order
  std::vector<std::string> variable_order;
  std::vector<PlanSource> sources;                   // positive atoms, body order
  std::vector<std::vector<LevelSource>> levels;      // per variable
  std::vector<NegatedProbe> negated;
  std::vector<InequalityCheck> inequalities;
  std::optional<std::size_t> delta_source;           // index into sources
  // Root work partitioning: the outer source's histogram drives the split,
  // the inner source (another source rooted at level 0) contributes the
  // second factor of each key's fan-out.
  std::optional<std::size_t> outer;
  std::optional<std::size_t> inner;
};

// Compiles an instance into a plan. Constants are interned on the way.
JoinPlan compile_plan(const Program& program, const RuleInstance& instance, Interner& interner);

// Every body variable appears exactly once in the order and every source
// narrows its columns in increasing level order after its constants.
bool check_prefix_property(const JoinPlan& plan);

}  // namespace flatlog
