#pragma once

#include <cstddef>
#include <optional>

#include "flatlog/columns.hpp"
#include "flatlog/histogram.hpp"

namespace flatlog {

// When to flush the head buffer into the body. By default the head is
// flushed once |head| + |delta| exceeds max(min_head, |body| / body_divisor);
// `fixed` overrides the computed threshold (0 forces a flush on every merge).
struct FlushPolicy {
  std::size_t min_head = 4096;
  std::size_t body_divisor = 8;
  std::optional<std::size_t> fixed;

  std::size_t threshold(std::size_t body_size) const;
};

// One sorted physical copy of a relation (an "index" for one column order).
// Logical contents are head ∪ body; the two are disjoint and each sorted.
class ColumnarRelation {
 public:
  ColumnarRelation() = default;
  ColumnarRelation(std::size_t arity, ColumnOrder order);

  std::size_t arity() const { return order_.size(); }
  const ColumnOrder& column_order() const { return order_; }
  const SortedColumns& head() const { return head_; }
  const SortedColumns& body() const { return body_; }
  const Histogram& root_histogram() const { return histogram_; }
  std::size_t size() const { return head_.size() + body_.size(); }
  bool empty() const { return size() == 0; }

  bool contains(std::span<const Value> physical_row) const {
    return head_.contains(physical_row) || body_.contains(physical_row);
  }

  // Integrates a sorted, duplicate-free delta disjoint from the current
  // contents. Returns true when the head was flushed into the body.
  bool merge(const SortedColumns& delta, const FlushPolicy& policy);

  // Full structural check: sortedness, head ∩ body = ∅, histogram matches a
  // rebuild. Linear in the relation size; meant for test mode.
  bool check_invariants() const;

  // Contents as one sorted block (head and body merged).
  SortedColumns flatten() const { return merge_sorted(body_, head_); }

 private:
  ColumnOrder order_;
  SortedColumns head_;
  SortedColumns body_;
  Histogram histogram_;
};

// sort_dedup(fresh) minus the full relation, in the relation's column order.
// `fresh` is in logical attribute order.
SortedColumns compute_delta(const TupleBuffer& fresh, const ColumnarRelation& full);

// Per-relation semi-naive state for one column order.
struct DeltaState {
  ColumnarRelation full;
  SortedColumns delta;
  Histogram delta_histogram;
  TupleBuffer staged;

  DeltaState() = default;
  DeltaState(std::size_t arity, ColumnOrder order)
      : full(arity, order), delta(arity), staged(arity) {}

  // compute_delta over the staged tuples; stages are cleared. Returns the
  // size of the new delta (0 signals a local fixpoint for this relation).
  std::size_t compute_delta_from_staged();
  // Merges the current delta into full (head or flush).
  bool merge(const FlushPolicy& policy);
  // Installs an externally computed delta, already sorted in this order and
  // disjoint from full. Does not merge.
  void set_delta(SortedColumns d);
};

}  // namespace flatlog
