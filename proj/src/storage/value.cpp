#include "flatlog/value.hpp"

#include <limits>

#include "flatlog/error.hpp"

namespace flatlog {

Value Interner::intern(std::string_view constant) {
  if (auto it = ids_.find(constant); it != ids_.end()) return it->second;
  if (names_.size() >= static_cast<std::size_t>(std::numeric_limits<Value>::max())) {
    throw ProgramError("too many distinct constants for the configured value width");
  }
  auto id = static_cast<Value>(names_.size());
  names_.emplace_back(constant);
  ids_.emplace(names_.back(), id);
  return id;
}

bool Interner::lookup(std::string_view constant, Value& out) const {
  auto it = ids_.find(constant);
  if (it == ids_.end()) return false;
  out = it->second;
  return true;
}

}  // namespace flatlog
