#include "flatlog/partition.hpp"

#include <algorithm>
#include <cassert>

#include "flatlog/error.hpp"

namespace flatlog {

WorkHistogram WorkHistogram::from_degrees(std::vector<Value> keys, std::vector<std::uint64_t> outer,
                                          std::vector<std::uint64_t> inner) {
  if (keys.size() != outer.size() || keys.size() != inner.size()) {
    throw InternalError("work histogram: mismatched degree arrays");
  }
  WorkHistogram h;
  std::uint64_t running = 0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (outer[i] == 0 || inner[i] == 0) continue;
    running += outer[i] * inner[i];
    h.keys.push_back(keys[i]);
    h.outer_degree.push_back(outer[i]);
    h.inner_degree.push_back(inner[i]);
    h.prefix.push_back(running);
  }
  return h;
}

std::uint64_t WorkPartition::max_slice() const {
  std::uint64_t m = 0;
  for (const auto& s : slices) m = std::max(m, s.size());
  return m;
}

WorkPartition partition_work(WorkHistogram histogram, std::size_t workers) {
  if (workers == 0) throw InternalError("partition_work: need at least one worker");
  WorkPartition part;
  part.workers = workers;
  part.histogram = std::move(histogram);
  const auto& h = part.histogram;
  const std::uint64_t total = h.total();
  part.slices.resize(workers);
  if (total == 0) return part;

  if (total < workers) {
    // Not enough units to go around: one key per worker.
    for (std::size_t k = 0; k < h.size(); ++k) part.slices[k] = Slice{h.key_begin(k), h.prefix[k], k};
    for (std::size_t w = h.size(); w < workers; ++w) part.slices[w] = Slice{total, total, h.size()};
    return part;
  }

  const std::uint64_t chunk = (total + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::uint64_t b = std::min<std::uint64_t>(total, chunk * w);
    std::uint64_t e = std::min<std::uint64_t>(total, b + chunk);
    auto it = std::upper_bound(h.prefix.begin(), h.prefix.end(), b);
    part.slices[w] = Slice{b, e, static_cast<std::size_t>(it - h.prefix.begin())};
  }
  return part;
}

WorkUnit decode_workunit(std::uint64_t global, const WorkHistogram& h) {
  assert(global < h.total());
  if (global >= h.total()) throw InternalError("decode_workunit: index outside the work space");
  auto it = std::upper_bound(h.prefix.begin(), h.prefix.end(), global);
  std::size_t key = static_cast<std::size_t>(it - h.prefix.begin());
  std::uint64_t local = global - h.key_begin(key);
  std::uint64_t d2 = h.inner_degree[key];
  return WorkUnit{key, local / d2, local % d2};
}

std::uint64_t encode_workunit(const WorkUnit& unit, const WorkHistogram& h) {
  return h.key_begin(unit.key) + unit.outer * h.inner_degree[unit.key] + unit.inner;
}

}  // namespace flatlog
