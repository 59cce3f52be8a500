#include "flatlog/columns.hpp"

#include <algorithm>
#include <numeric>

#include "flatlog/error.hpp"

namespace flatlog {

namespace {

// Exponential then binary search for the first position in [pos, end) whose
// value satisfies !(data[i] < v) (lower bound) or data[i] > v (upper bound).
template <bool Upper>
std::size_t gallop(const Value* data, std::size_t pos, std::size_t end, Value v) {
  auto before = [&](std::size_t i) { return Upper ? data[i] <= v : data[i] < v; };
  if (pos >= end || !before(pos)) return pos;
  std::size_t step = 1;
  std::size_t lo = pos;  // before(lo) holds
  std::size_t hi = pos + 1;
  while (hi < end && before(hi)) {
    lo = hi;
    step <<= 1;
    hi = lo + step;
  }
  if (hi > end) hi = end;
  // Answer lies in (lo, hi].
  const Value* first = data + lo + 1;
  const Value* last = data + hi;
  const Value* it = Upper ? std::upper_bound(first, last, v) : std::lower_bound(first, last, v);
  return static_cast<std::size_t>(it - data);
}

}  // namespace

ColumnOrder identity_order(std::size_t arity) {
  ColumnOrder order(arity);
  std::iota(order.begin(), order.end(), 0u);
  return order;
}

void SortedColumns::push_row(std::span<const Value> row) {
  for (std::size_t k = 0; k < cols_.size(); ++k) cols_[k].push_back(row[k]);
}

void SortedColumns::push_row_from(const SortedColumns& src, std::size_t row) {
  for (std::size_t k = 0; k < cols_.size(); ++k) cols_[k].push_back(src.cols_[k][row]);
}

void SortedColumns::reserve(std::size_t rows) {
  for (auto& c : cols_) c.reserve(rows);
}

void SortedColumns::clear() {
  for (auto& c : cols_) c.clear();
}

int SortedColumns::compare_row(std::size_t i, const SortedColumns& other, std::size_t j) const {
  for (std::size_t k = 0; k < cols_.size(); ++k) {
    Value a = cols_[k][i];
    Value b = other.cols_[k][j];
    if (a != b) return a < b ? -1 : 1;
  }
  return 0;
}

std::size_t SortedColumns::find(std::span<const Value> row) const {
  RowRange r = all();
  for (std::size_t k = 0; k < cols_.size() && !r.empty(); ++k) r = narrow(*this, r, k, row[k]);
  return r.empty() ? size() : r.begin;
}

bool SortedColumns::is_strictly_sorted() const {
  for (std::size_t i = 1; i < size(); ++i) {
    if (compare_row(i - 1, *this, i) >= 0) return false;
  }
  return true;
}

SortedColumns sort_dedup(const TupleBuffer& tuples, const ColumnOrder& order) {
  const std::size_t m = tuples.arity();
  if (order.size() != m) throw InternalError("sort_dedup: column order does not match arity");
  const std::size_t n = tuples.size();
  SortedColumns out(m);
  if (n == 0) return out;

  // Row-major copy in physical order keeps the comparator cache-friendly.
  std::vector<Value> rows(n * m);
  const auto& src = tuples.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < m; ++k) rows[i * m + k] = src[i * m + order[k]];
  }
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  auto less = [&](std::uint32_t a, std::uint32_t b) {
    return std::lexicographical_compare(rows.begin() + a * m, rows.begin() + a * m + m, rows.begin() + b * m,
                                        rows.begin() + b * m + m);
  };
  auto equal = [&](std::uint32_t a, std::uint32_t b) {
    return std::equal(rows.begin() + a * m, rows.begin() + a * m + m, rows.begin() + b * m);
  };
  std::sort(idx.begin(), idx.end(), less);
  idx.erase(std::unique(idx.begin(), idx.end(), equal), idx.end());

  out.reserve(idx.size());
  for (auto i : idx) out.push_row({rows.data() + std::size_t{i} * m, m});
  return out;
}

SortedColumns reorder(const SortedColumns& src, const ColumnOrder& from, const ColumnOrder& to) {
  const std::size_t m = src.arity();
  if (from == to) return src;
  // physical position of each logical attribute in `src`
  std::vector<std::size_t> where(m);
  for (std::size_t k = 0; k < m; ++k) where[from[k]] = k;
  TupleBuffer logical(m);
  logical.reserve_rows(src.size());
  std::vector<Value> row(m);
  for (std::size_t i = 0; i < src.size(); ++i) {
    for (std::size_t a = 0; a < m; ++a) row[a] = src.at(i, where[a]);
    logical.push(row);
  }
  return sort_dedup(logical, to);
}

RowRange narrow(const SortedColumns& rel, RowRange within, std::size_t level, Value value) {
  if (within.empty()) return {within.begin, within.begin};
  auto col = rel.column(level);
  const Value* base = col.data();
  std::size_t lo = gallop<false>(base, within.begin, within.end, value);
  if (lo == within.end || base[lo] != value) return {lo, lo};
  std::size_t hi = gallop<true>(base, lo, within.end, value);
  return {lo, hi};
}

SortedColumns merge_sorted(const SortedColumns& a, const SortedColumns& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  SortedColumns out(a.arity());
  out.reserve(a.size() + b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    int c = a.compare_row(i, b, j);
    if (c < 0) {
      out.push_row_from(a, i++);
    } else if (c > 0) {
      out.push_row_from(b, j++);
    } else {
      // disjointness is a caller precondition; keep the set semantics anyway
      out.push_row_from(a, i++);
      ++j;
    }
  }
  for (; i < a.size(); ++i) out.push_row_from(a, i);
  for (; j < b.size(); ++j) out.push_row_from(b, j);
  return out;
}

SortedColumns difference_sorted(const SortedColumns& a, const SortedColumns& b) {
  if (b.empty()) return a;
  SortedColumns out(a.arity());
  std::size_t j = 0;
  std::vector<Value> row(a.arity());
  for (std::size_t i = 0; i < a.size(); ++i) {
    // Skip ahead in b with a binary search on the leading column first, so a
    // small delta against a large body stays sublinear in |b|.
    if (j < b.size() && b.at(j, 0) < a.at(i, 0)) {
      auto col = b.column(0);
      j = static_cast<std::size_t>(std::lower_bound(col.begin() + static_cast<std::ptrdiff_t>(j), col.end(), a.at(i, 0)) -
                                   col.begin());
    }
    while (j < b.size() && b.compare_row(j, a, i) < 0) ++j;
    if (j < b.size() && b.compare_row(j, a, i) == 0) continue;
    out.push_row_from(a, i);
  }
  return out;
}

// ---------------------------------------------------------------------------

void ColumnRun::seek(Value v) { pos = gallop<false>(data, pos, end, v); }

void ColumnRun::next_distinct() { pos = gallop<true>(data, pos, end, data[pos]); }

void UnionCursor::reset(ColumnRun a, ColumnRun b) {
  a_ = a;
  b_ = b;
}

Value UnionCursor::key() const {
  if (a_.at_end()) return b_.key();
  if (b_.at_end()) return a_.key();
  return std::min(a_.key(), b_.key());
}

void UnionCursor::next() {
  Value k = key();
  if (!a_.at_end() && a_.key() == k) a_.next_distinct();
  if (!b_.at_end() && b_.key() == k) b_.next_distinct();
}

void UnionCursor::seek(Value v) {
  a_.seek(v);
  b_.seek(v);
}

std::vector<Value> intersect_level(std::span<const IntersectSource> sources) {
  std::vector<UnionCursor> cursors(sources.size());
  std::vector<UnionCursor*> ptrs;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const auto& src = sources[s];
    if (src.segments.size() > 2) throw InternalError("intersect_level: more than two segments per source");
    ColumnRun runs[2];
    for (std::size_t g = 0; g < src.segments.size(); ++g) {
      const auto& seg = src.segments[g];
      runs[g] = ColumnRun{seg.rel->column(src.column).data(), seg.rows.begin, seg.rows.end};
    }
    cursors[s].reset(runs[0], runs[1]);
    ptrs.push_back(&cursors[s]);
  }
  std::vector<Value> out;
  leapfrog(std::span<UnionCursor* const>(ptrs), [&](Value v) { out.push_back(v); });
  return out;
}

}  // namespace flatlog
