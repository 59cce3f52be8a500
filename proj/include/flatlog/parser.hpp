#pragma once

#include <string_view>

#include "flatlog/ast.hpp"

namespace flatlog {

// Parses and validates a program. Throws ProgramError with line/column on
// syntax errors, undeclared relations, arity mismatches, unsafe negation and
// head variables not bound by a positive body atom.
Program parse(std::string_view source);

// Semantic checks only; parse() already runs them. Exposed for programs built
// or rewritten in memory.
void validate(const Program& program);

}  // namespace flatlog
