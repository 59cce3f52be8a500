#include "flatlog/relation.hpp"

#include <algorithm>

#include "flatlog/error.hpp"

namespace flatlog {

std::size_t FlushPolicy::threshold(std::size_t body_size) const {
  if (fixed) return *fixed;
  return std::max(min_head, body_divisor == 0 ? body_size : body_size / body_divisor);
}

ColumnarRelation::ColumnarRelation(std::size_t arity, ColumnOrder order)
    : order_(std::move(order)), head_(arity), body_(arity) {
  if (order_.size() != arity) throw InternalError("column order does not match arity");
}

bool ColumnarRelation::merge(const SortedColumns& delta, const FlushPolicy& policy) {
  if (delta.arity() != arity()) throw InternalError("merge: arity mismatch");
  if (delta.empty()) return false;
  histogram_ = histogram_update(histogram_, delta.column(0));
  if (head_.size() + delta.size() > policy.threshold(body_.size())) {
    body_ = merge_sorted(body_, merge_sorted(head_, delta));
    head_ = SortedColumns(arity());
    return true;
  }
  head_ = merge_sorted(head_, delta);
  return false;
}

bool ColumnarRelation::check_invariants() const {
  if (!head_.is_strictly_sorted() || !body_.is_strictly_sorted()) return false;
  // head ∩ body = ∅ via a linear two-pointer walk
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < head_.size() && j < body_.size()) {
    int c = head_.compare_row(i, body_, j);
    if (c == 0) return false;
    if (c < 0) ++i; else ++j;
  }
  if (arity() == 0) return true;
  return histogram_ == histogram_build(head_.column(0), body_.column(0)) && histogram_.well_formed();
}

SortedColumns compute_delta(const TupleBuffer& fresh, const ColumnarRelation& full) {
  if (fresh.arity() != full.arity()) throw ProgramError("compute_delta: arity mismatch");
  SortedColumns sorted = sort_dedup(fresh, full.column_order());
  sorted = difference_sorted(sorted, full.body());
  return difference_sorted(sorted, full.head());
}

std::size_t DeltaState::compute_delta_from_staged() {
  delta = compute_delta(staged, full);
  staged = TupleBuffer(full.arity());
  delta_histogram = histogram_build(full.arity() == 0 ? std::span<const Value>{} : delta.column(0));
  return delta.size();
}

bool DeltaState::merge(const FlushPolicy& policy) { return full.merge(delta, policy); }

void DeltaState::set_delta(SortedColumns d) {
  delta = std::move(d);
  delta_histogram = histogram_build(delta.arity() == 0 ? std::span<const Value>{} : delta.column(0));
}

}  // namespace flatlog
