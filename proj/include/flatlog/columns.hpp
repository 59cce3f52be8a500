#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "flatlog/value.hpp"

namespace flatlog {

// Column permutation: physical column k of a sorted store holds logical
// attribute order[k]. The identity permutation is the canonical order.
using ColumnOrder = std::vector<std::uint32_t>;

ColumnOrder identity_order(std::size_t arity);

// Row-major staging area for freshly derived tuples. Unsorted, may hold
// duplicates. Attributes are in logical (declaration) order.
class TupleBuffer {
 public:
  TupleBuffer() = default;
  explicit TupleBuffer(std::size_t arity) : arity_(arity) {}

  std::size_t arity() const { return arity_; }
  std::size_t size() const { return arity_ == 0 ? 0 : data_.size() / arity_; }
  bool empty() const { return data_.empty(); }

  void push(std::span<const Value> row) { data_.insert(data_.end(), row.begin(), row.end()); }
  void append(const TupleBuffer& other) { data_.insert(data_.end(), other.data_.begin(), other.data_.end()); }
  void reserve_rows(std::size_t n) { data_.reserve(n * arity_); }
  // Grows to exactly n rows; used by the materialize pass to pre-size output.
  void resize_rows(std::size_t n) { data_.resize(n * arity_); }

  std::span<const Value> row(std::size_t i) const { return {data_.data() + i * arity_, arity_}; }
  std::span<Value> row(std::size_t i) { return {data_.data() + i * arity_, arity_}; }
  const std::vector<Value>& data() const { return data_; }
  std::vector<Value>& data() { return data_; }

 private:
  std::size_t arity_ = 0;
  std::vector<Value> data_;
};

// Half-open row interval [begin, end).
struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin >= end; }
  friend bool operator==(const RowRange&, const RowRange&) = default;
};

// Structure-of-arrays block of rows sorted lexicographically by physical
// column and free of duplicates.
class SortedColumns {
 public:
  SortedColumns() = default;
  explicit SortedColumns(std::size_t arity) : cols_(arity) {}

  std::size_t arity() const { return cols_.size(); }
  std::size_t size() const { return cols_.empty() ? 0 : cols_[0].size(); }
  bool empty() const { return size() == 0; }
  RowRange all() const { return {0, size()}; }

  std::span<const Value> column(std::size_t k) const { return cols_[k]; }
  Value at(std::size_t row, std::size_t col) const { return cols_[col][row]; }

  void push_row(std::span<const Value> row);
  void push_row_from(const SortedColumns& src, std::size_t row);
  void reserve(std::size_t rows);
  void clear();

  // Lexicographic three-way comparison of row i here against row j in other.
  int compare_row(std::size_t i, const SortedColumns& other, std::size_t j) const;
  // Row index of an exact match, or size() if absent. Binary search.
  std::size_t find(std::span<const Value> row) const;
  bool contains(std::span<const Value> row) const { return find(row) != size(); }

  // Strictly increasing rows (sorted, duplicate-free).
  bool is_strictly_sorted() const;

  friend bool operator==(const SortedColumns&, const SortedColumns&) = default;

 private:
  std::vector<std::vector<Value>> cols_;
};

// Sorts the staged tuples under `order` and drops duplicates. Output column
// k holds attribute order[k].
SortedColumns sort_dedup(const TupleBuffer& tuples, const ColumnOrder& order);

// Re-sorts an already sorted block into another physical order. `from` and
// `to` are both given relative to logical attribute positions.
SortedColumns reorder(const SortedColumns& src, const ColumnOrder& from, const ColumnOrder& to);

// Rows of `within` whose column `level` equals `value`. Columns before
// `level` must already be constant over `within`.
RowRange narrow(const SortedColumns& rel, RowRange within, std::size_t level, Value value);

// Two-pointer merge of disjoint sorted blocks.
SortedColumns merge_sorted(const SortedColumns& a, const SortedColumns& b);

// Rows of `a` absent from `b`, both sorted in the same order.
SortedColumns difference_sorted(const SortedColumns& a, const SortedColumns& b);

// ---------------------------------------------------------------------------
// Leapfrog intersection over sorted columns.

// A sorted run of one column; positions [pos, end) are still unvisited.
struct ColumnRun {
  const Value* data = nullptr;
  std::size_t pos = 0;
  std::size_t end = 0;

  bool at_end() const { return pos >= end; }
  Value key() const { return data[pos]; }
  void seek(Value v);        // first position with data >= v
  void next_distinct();      // first position with data > key()
};

// Logical union of up to two sorted runs of the same column (the head and
// body of one relation), seen as a single sorted distinct sequence.
class UnionCursor {
 public:
  UnionCursor() = default;
  void reset(ColumnRun a, ColumnRun b);
  void reset(ColumnRun a) { reset(a, ColumnRun{}); }

  bool at_end() const { return a_.at_end() && b_.at_end(); }
  Value key() const;
  void next();
  void seek(Value v);

 private:
  ColumnRun a_;
  ColumnRun b_;
};

// Calls fn(v) for every value v present in all cursors, in increasing order.
// Cursors are consumed. fn must not touch the cursors.
template <typename Fn>
void leapfrog(std::span<UnionCursor* const> cursors, Fn&& fn);

// A source for intersect_level: column `column` of up to two row ranges
// (typically the head and body of a relation).
struct LevelSegment {
  const SortedColumns* rel = nullptr;
  RowRange rows;
};
struct IntersectSource {
  std::vector<LevelSegment> segments;  // at most two
  std::size_t column = 0;
};

// Sorted distinct values present in every source's column.
std::vector<Value> intersect_level(std::span<const IntersectSource> sources);

// ---------------------------------------------------------------------------

template <typename Fn>
void leapfrog(std::span<UnionCursor* const> cursors, Fn&& fn) {
  const std::size_t k = cursors.size();
  if (k == 0) return;
  for (auto* c : cursors) {
    if (c->at_end()) return;
  }
  if (k == 1) {
    UnionCursor& c = *cursors[0];
    while (!c.at_end()) {
      fn(c.key());
      c.next();
    }
    return;
  }
  // Round-robin over cursors ordered by their current key.
  UnionCursor* order[16];
  std::vector<UnionCursor*> spill;
  UnionCursor** ring = order;
  if (k > 16) {
    spill.resize(k);
    ring = spill.data();
  }
  for (std::size_t i = 0; i < k; ++i) ring[i] = cursors[i];
  for (std::size_t i = 1; i < k; ++i) {
    for (std::size_t j = i; j > 0 && ring[j - 1]->key() > ring[j]->key(); --j) std::swap(ring[j - 1], ring[j]);
  }
  std::size_t p = 0;
  Value hi = ring[k - 1]->key();
  while (true) {
    UnionCursor& c = *ring[p];
    if (c.key() == hi) {
      fn(hi);
      c.next();
    } else {
      c.seek(hi);
    }
    if (c.at_end()) return;
    hi = c.key();
    p = (p + 1) % k;
  }
}

}  // namespace flatlog
