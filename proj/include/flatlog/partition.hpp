#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "flatlog/value.hpp"

namespace flatlog {

// Flattened root-level work space of one join. Key i owns the work units
// [prefix[i-1], prefix[i]); there are outer_degree[i] * inner_degree[i] of
// them, one per (outer row, inner row) pair under the key. Keys without
// work are omitted.
struct WorkHistogram {
  std::vector<Value> keys;
  std::vector<std::uint64_t> outer_degree;
  std::vector<std::uint64_t> inner_degree;
  std::vector<std::uint64_t> prefix;

  std::size_t size() const { return keys.size(); }
  std::uint64_t total() const { return prefix.empty() ? 0 : prefix.back(); }
  std::uint64_t key_begin(std::size_t key) const { return key == 0 ? 0 : prefix[key - 1]; }
  std::uint64_t fanout(std::size_t key) const { return prefix[key] - key_begin(key); }

  // Builds the prefix sums; keys with a zero degree on either side are dropped.
  static WorkHistogram from_degrees(std::vector<Value> keys, std::vector<std::uint64_t> outer,
                                    std::vector<std::uint64_t> inner);
};

struct Slice {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
  std::size_t first_key = 0;  // smallest key index with prefix[key] > begin

  std::uint64_t size() const { return end - begin; }
  bool empty() const { return begin >= end; }
};

// Contiguous slices of [0, T) handed to p workers at launch.
struct WorkPartition {
  WorkHistogram histogram;
  std::size_t workers = 1;
  std::vector<Slice> slices;

  std::uint64_t total() const { return histogram.total(); }
  std::uint64_t max_slice() const;
};

// Splits [0, T) into p slices of at most ceil(T/p) units. When T < p each
// key goes to its own worker instead.
WorkPartition partition_work(WorkHistogram histogram, std::size_t workers);

struct WorkUnit {
  std::size_t key = 0;   // index into the histogram
  std::uint64_t outer = 0;  // row offset under the key in the outer source
  std::uint64_t inner = 0;  // row offset under the key in the inner source

  friend bool operator==(const WorkUnit&, const WorkUnit&) = default;
};

// global -> (key, i1, i2): binary search for the owning key, then
// local = global - prefix[key-1], i1 = local / d2, i2 = local % d2.
WorkUnit decode_workunit(std::uint64_t global, const WorkHistogram& histogram);
std::uint64_t encode_workunit(const WorkUnit& unit, const WorkHistogram& histogram);

}  // namespace flatlog
