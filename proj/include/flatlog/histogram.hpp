#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flatlog/value.hpp"

namespace flatlog {

// Degree distribution of a relation's leading (root) column.
//   keys     distinct root values, strictly increasing
//   degrees  tuples per key, all >= 1
//   prefix   inclusive prefix sum of degrees; back() is the tuple count
struct Histogram {
  std::vector<Value> keys;
  std::vector<std::uint64_t> degrees;
  std::vector<std::uint64_t> prefix;

  std::size_t size() const { return keys.size(); }
  bool empty() const { return keys.empty(); }
  std::uint64_t total() const { return prefix.empty() ? 0 : prefix.back(); }

  // Structural check of the invariants above.
  bool well_formed() const;

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

// Run-length pass over a sorted column.
Histogram histogram_build(std::span<const Value> sorted_column);

// Histogram of the union of two disjoint-by-row sorted columns (head, body).
Histogram histogram_build(std::span<const Value> a, std::span<const Value> b);

// Folds the root column of a freshly merged delta into an existing histogram.
// Equivalent to rebuilding over the union, but touches only the delta.
Histogram histogram_update(const Histogram& base, std::span<const Value> delta_root_column);

}  // namespace flatlog
