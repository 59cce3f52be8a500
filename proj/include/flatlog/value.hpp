#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace flatlog {

#ifdef FLATLOG_VALUE64
using Value = std::uint64_t;
#else
using Value = std::uint32_t;
#endif

// Dense bijection between constants and Values. Ids are handed out from 0 in
// first-seen order. Integers and strings share one namespace: the integer 7
// and the string "7" intern to the same id, since fact files carry no types.
class Interner {
 public:
  Value intern(std::string_view constant);
  Value intern(std::int64_t constant) { return intern(std::to_string(constant)); }

  // Id of an already interned constant, or false if it was never seen.
  bool lookup(std::string_view constant, Value& out) const;

  const std::string& name(Value id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::unordered_map<std::string, Value, Hash, std::equal_to<>> ids_;
  std::vector<std::string> names_;
};

}  // namespace flatlog
