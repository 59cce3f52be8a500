#include "flatlog/histogram.hpp"

namespace flatlog {

namespace {

void recompute_prefix(Histogram& h) {
  h.prefix.resize(h.degrees.size());
  std::uint64_t running = 0;
  for (std::size_t i = 0; i < h.degrees.size(); ++i) {
    running += h.degrees[i];
    h.prefix[i] = running;
  }
}

// Merges two (key, degree) lists, summing degrees of shared keys.
Histogram merge_counts(const Histogram& a, const Histogram& b) {
  Histogram out;
  out.keys.reserve(a.size() + b.size());
  out.degrees.reserve(a.size() + b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a.keys[i] < b.keys[j])) {
      out.keys.push_back(a.keys[i]);
      out.degrees.push_back(a.degrees[i++]);
    } else if (i == a.size() || b.keys[j] < a.keys[i]) {
      out.keys.push_back(b.keys[j]);
      out.degrees.push_back(b.degrees[j++]);
    } else {
      out.keys.push_back(a.keys[i]);
      out.degrees.push_back(a.degrees[i++] + b.degrees[j++]);
    }
  }
  recompute_prefix(out);
  return out;
}

}  // namespace

bool Histogram::well_formed() const {
  if (degrees.size() != keys.size() || prefix.size() != keys.size()) return false;
  std::uint64_t running = 0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (i > 0 && keys[i - 1] >= keys[i]) return false;
    if (degrees[i] == 0) return false;
    running += degrees[i];
    if (prefix[i] != running) return false;
  }
  return true;
}

Histogram histogram_build(std::span<const Value> sorted_column) {
  Histogram h;
  std::size_t i = 0;
  while (i < sorted_column.size()) {
    std::size_t j = i + 1;
    while (j < sorted_column.size() && sorted_column[j] == sorted_column[i]) ++j;
    h.keys.push_back(sorted_column[i]);
    h.degrees.push_back(j - i);
    i = j;
  }
  recompute_prefix(h);
  return h;
}

Histogram histogram_build(std::span<const Value> a, std::span<const Value> b) {
  if (b.empty()) return histogram_build(a);
  if (a.empty()) return histogram_build(b);
  return merge_counts(histogram_build(a), histogram_build(b));
}

Histogram histogram_update(const Histogram& base, std::span<const Value> delta_root_column) {
  if (delta_root_column.empty()) return base;
  return merge_counts(base, histogram_build(delta_root_column));
}

}  // namespace flatlog
