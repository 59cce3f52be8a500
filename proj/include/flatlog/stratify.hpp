#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "flatlog/ast.hpp"

namespace flatlog {

enum class ScheduleMode { Sequential, PhaseAligned };

// A group of rules evaluated together to a local fixpoint. Each SCC of the
// relation dependency graph yields up to two strata: its non-recursive
// rules (evaluated once) followed by its recursive rules (iterated).
struct Stratum {
  std::size_t index = 0;
  std::vector<std::size_t> rules;       // indices into Program::rules
  std::vector<std::string> relations;   // relations of the SCC, declaration order
  bool recursive = false;
  ScheduleMode schedule = ScheduleMode::Sequential;
};

// Topologically ordered strata. Facts (bodiless rules) are not part of any
// stratum. Throws ProgramError naming the cycle when a negated dependency
// lies inside an SCC.
std::vector<Stratum> stratify(const Program& program);

// Relation-level strongly connected components in topological order
// (dependencies first). Exposed for the rewrite passes.
std::vector<std::vector<std::string>> relation_sccs(const Program& program);

}  // namespace flatlog
