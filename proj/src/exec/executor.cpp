#include "flatlog/executor.hpp"

#include <algorithm>
#include <array>
#include <chrono>

#include "flatlog/error.hpp"

namespace flatlog {

namespace {

using Ranges = std::array<RowRange, 2>;  // [0] head segment, [1] body segment

const SortedColumns* segment(const SourceView& v, std::size_t g) { return g == 0 ? v.head : v.body; }

Ranges full_ranges(const SourceView& v) {
  return {v.head ? v.head->all() : RowRange{}, v.body ? v.body->all() : RowRange{}};
}

Ranges narrow_both(const SourceView& v, const Ranges& r, std::size_t column, Value value) {
  Ranges out;
  for (std::size_t g = 0; g < 2; ++g) {
    const SortedColumns* s = segment(v, g);
    out[g] = (s && !r[g].empty()) ? narrow(*s, r[g], column, value) : RowRange{r[g].begin, r[g].begin};
  }
  return out;
}

bool empty(const Ranges& r) { return r[0].empty() && r[1].empty(); }
std::size_t rows(const Ranges& r) { return r[0].size() + r[1].size(); }

// Logical rows [a, b) of the concatenation head-rows ++ body-rows.
Ranges slice_rows(const Ranges& r, std::uint64_t a, std::uint64_t b) {
  const std::uint64_t h = r[0].size();
  Ranges out;
  out[0] = {r[0].begin + std::min(a, h), r[0].begin + std::min(b, h)};
  std::uint64_t ba = a > h ? a - h : 0;
  std::uint64_t bb = b > h ? b - h : 0;
  out[1] = {r[1].begin + ba, r[1].begin + bb};
  return out;
}

// Depth-first leapfrog enumeration of one plan over pinned source ranges.
class Enumerator {
 public:
  Enumerator(const JoinPlan& plan, const PlanInputs& in) : plan_(plan), in_(in) {
    const std::size_t m = plan.levels.size();
    binding_.resize(m);
    cursors_.resize(m);
    cursor_ptrs_.resize(m);
    saved_.resize(m);
    negated_at_.resize(m);
    inequalities_at_.resize(m);
    for (std::size_t l = 0; l < m; ++l) {
      cursors_[l].resize(plan.levels[l].size());
      for (auto& c : cursors_[l]) cursor_ptrs_[l].push_back(&c);
      saved_[l].resize(plan.levels[l].size());
    }
    for (std::size_t i = 0; i < plan.negated.size(); ++i) {
      if (plan.negated[i].level == kGroundLevel) ground_negated_.push_back(i);
      else negated_at_[plan.negated[i].level].push_back(i);
    }
    for (std::size_t i = 0; i < plan.inequalities.size(); ++i) {
      if (plan.inequalities[i].level == kGroundLevel) ground_inequalities_.push_back(i);
      else inequalities_at_[plan.inequalities[i].level].push_back(i);
    }

    // Constant prefixes are narrowed once; ground checks decide whether the
    // plan can produce anything at all.
    base_.resize(plan.sources.size());
    viable_ = true;
    for (std::size_t s = 0; s < plan.sources.size(); ++s) {
      const auto& src = plan.sources[s];
      Ranges r = full_ranges(in.sources[s]);
      for (std::size_t c = 0; c < src.const_prefix; ++c) r = narrow_both(in.sources[s], r, c, src.columns[c].value);
      base_[s] = r;
      if (empty(r)) viable_ = false;
    }
    for (auto i : ground_negated_) viable_ = viable_ && !negated_hit(i);
    for (auto i : ground_inequalities_) viable_ = viable_ && inequality_holds(i);
  }

  bool viable() const { return viable_; }
  const Ranges& base(std::size_t s) const { return base_[s]; }

  // Enumerates all bindings with the given per-source starting ranges.
  template <typename Emit>
  void run(const std::vector<Ranges>& start, Emit& emit) {
    state_ = start;
    descend(0, emit);
  }

  const std::vector<Value>& binding() const { return binding_; }

 private:
  bool negated_hit(std::size_t i) const {
    const auto& probe = plan_.negated[i];
    const SourceView& v = in_.negated[i];
    Ranges r = full_ranges(v);
    for (std::size_t c = 0; c < probe.bound_prefix && !empty(r); ++c) {
      const Binding& b = probe.columns[c];
      r = narrow_both(v, r, c, b.constant ? b.value : binding_[b.level]);
    }
    return !empty(r);
  }

  bool inequality_holds(std::size_t i) const {
    const auto& q = plan_.inequalities[i];
    Value a = q.lhs.constant ? q.lhs.value : binding_[q.lhs.level];
    Value b = q.rhs.constant ? q.rhs.value : binding_[q.rhs.level];
    return a != b;
  }

  template <typename Emit>
  void descend(std::size_t level, Emit& emit) {
    if (level == plan_.levels.size()) {
      emit(binding_);
      return;
    }
    const auto& probes = plan_.levels[level];
    for (std::size_t k = 0; k < probes.size(); ++k) {
      const auto& p = probes[k];
      const SourceView& v = in_.sources[p.source];
      const Ranges& r = state_[p.source];
      ColumnRun runs[2];
      for (std::size_t g = 0; g < 2; ++g) {
        const SortedColumns* s = segment(v, g);
        if (s && !r[g].empty()) runs[g] = ColumnRun{s->column(p.first_column).data(), r[g].begin, r[g].end};
      }
      cursors_[level][k].reset(runs[0], runs[1]);
    }
    leapfrog(std::span<UnionCursor* const>(cursor_ptrs_[level]), [&](Value value) {
      binding_[level] = value;
      bool alive = true;
      for (std::size_t k = 0; k < probes.size(); ++k) {
        const auto& p = probes[k];
        saved_[level][k] = state_[p.source];
        if (!alive) continue;
        Ranges r = state_[p.source];
        for (std::size_t c = p.first_column; c < p.end_column && !empty(r); ++c) {
          r = narrow_both(in_.sources[p.source], r, c, value);
        }
        state_[p.source] = r;
        alive = !empty(r);
      }
      if (alive) {
        for (auto i : negated_at_[level]) alive = alive && !negated_hit(i);
        for (auto i : inequalities_at_[level]) alive = alive && inequality_holds(i);
      }
      if (alive) descend(level + 1, emit);
      for (std::size_t k = 0; k < probes.size(); ++k) state_[probes[k].source] = saved_[level][k];
    });
  }

  const JoinPlan& plan_;
  const PlanInputs& in_;
  std::vector<Ranges> base_;
  std::vector<Ranges> state_;
  std::vector<Value> binding_;
  std::vector<std::vector<UnionCursor>> cursors_;
  std::vector<std::vector<UnionCursor*>> cursor_ptrs_;
  std::vector<std::vector<Ranges>> saved_;
  std::vector<std::vector<std::size_t>> negated_at_;
  std::vector<std::vector<std::size_t>> inequalities_at_;
  std::vector<std::size_t> ground_negated_;
  std::vector<std::size_t> ground_inequalities_;
  bool viable_ = true;
};

// Runs one worker's slice of the root work space through the enumerator.
// Consecutive units under one key collapse into at most three pinned runs:
// the tail of the first outer row, whole middle outer rows, and the head of
// the last outer row.
template <typename Emit>
void run_slice(const JoinPlan& plan, const PlanInputs& in, const WorkPartition& part, std::size_t w, Emit& emit) {
  const Slice& slice = part.slices.at(w);
  if (slice.empty()) return;
  Enumerator e(plan, in);
  if (!e.viable()) return;

  std::vector<Ranges> start(plan.sources.size());
  for (std::size_t s = 0; s < plan.sources.size(); ++s) start[s] = e.base(s);

  if (plan.levels.empty()) {
    // Ground rule: a single unit.
    e.run(start, emit);
    return;
  }

  const WorkHistogram& h = part.histogram;
  const std::size_t outer = *plan.outer;
  const std::size_t outer_col = plan.sources[outer].const_prefix;
  const std::size_t inner_col = plan.inner ? plan.sources[*plan.inner].const_prefix : 0;

  auto pinned_run = [&](const Ranges& outer_rows, std::uint64_t o0, std::uint64_t o1, const Ranges* inner_rows,
                        std::uint64_t i0, std::uint64_t i1) {
    std::vector<Ranges> pinned = start;
    pinned[outer] = slice_rows(outer_rows, o0, o1);
    if (inner_rows) pinned[*plan.inner] = slice_rows(*inner_rows, i0, i1);
    e.run(pinned, emit);
  };

  std::uint64_t pos = slice.begin;
  for (std::size_t key = slice.first_key; pos < slice.end && key < h.size(); ++key) {
    const std::uint64_t key_begin = h.key_begin(key);
    const std::uint64_t key_end = h.prefix[key];
    const std::uint64_t lo = pos - key_begin;
    const std::uint64_t hi = std::min(slice.end, key_end) - key_begin;
    pos = key_begin + hi;
    const Value k = h.keys[key];

    Ranges outer_rows = narrow_both(in.sources[outer], start[outer], outer_col, k);
    if (!plan.inner) {
      pinned_run(outer_rows, lo, hi, nullptr, 0, 0);
      continue;
    }
    Ranges inner_rows = narrow_both(in.sources[*plan.inner], start[*plan.inner], inner_col, k);
    const std::uint64_t d2 = h.inner_degree[key];
    const std::uint64_t a1 = lo / d2, a2 = lo % d2;
    const std::uint64_t b1 = (hi - 1) / d2, b2 = (hi - 1) % d2;
    if (a1 == b1) {
      pinned_run(outer_rows, a1, a1 + 1, &inner_rows, a2, b2 + 1);
      continue;
    }
    pinned_run(outer_rows, a1, a1 + 1, &inner_rows, a2, d2);
    if (b1 > a1 + 1) pinned_run(outer_rows, a1 + 1, b1, &inner_rows, 0, d2);
    pinned_run(outer_rows, b1, b1 + 1, &inner_rows, 0, b2 + 1);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

WorkHistogram root_work(const JoinPlan& plan, const PlanInputs& in) {
  if (in.sources.size() != plan.sources.size() || in.negated.size() != plan.negated.size()) {
    throw InternalError("plan inputs do not match the plan: " + plan.text);
  }
  if (plan.levels.empty()) return WorkHistogram::from_degrees({0}, {1}, {1});

  const std::size_t outer = *plan.outer;
  const auto& osrc = plan.sources[outer];
  const SourceView& ov = in.sources[outer];

  Histogram hist;
  if (osrc.const_prefix == 0 && ov.histogram) {
    hist = *ov.histogram;
  } else {
    Ranges r = full_ranges(ov);
    for (std::size_t c = 0; c < osrc.const_prefix; ++c) r = narrow_both(ov, r, c, osrc.columns[c].value);
    auto col = [&](std::size_t g) -> std::span<const Value> {
      const SortedColumns* s = segment(ov, g);
      if (!s || r[g].empty()) return {};
      return s->column(osrc.const_prefix).subspan(r[g].begin, r[g].size());
    };
    hist = histogram_build(col(0), col(1));
  }

  std::vector<std::uint64_t> inner(hist.size(), 1);
  if (plan.inner) {
    const auto& isrc = plan.sources[*plan.inner];
    const SourceView& iv = in.sources[*plan.inner];
    Ranges base = full_ranges(iv);
    for (std::size_t c = 0; c < isrc.const_prefix; ++c) base = narrow_both(iv, base, c, isrc.columns[c].value);
    for (std::size_t i = 0; i < hist.size(); ++i) {
      inner[i] = rows(narrow_both(iv, base, isrc.const_prefix, hist.keys[i]));
    }
  }
  return WorkHistogram::from_degrees(hist.keys, hist.degrees, std::move(inner));
}

WorkPartition build_partition(const JoinPlan& plan, const PlanInputs& inputs, std::size_t workers) {
  return partition_work(root_work(plan, inputs), workers);
}

PlanExecution::PlanExecution(const JoinPlan& plan, PlanInputs inputs, ExecOptions options)
    : plan_(plan), inputs_(std::move(inputs)), options_(options) {
  if (options_.workers == 0) throw InternalError("plan execution needs at least one worker");
}

PlanExecution::~PlanExecution() = default;

PlanExecution::PlanExecution(PlanExecution&& o) noexcept
    : plan_(o.plan_),
      inputs_(std::move(o.inputs_)),
      options_(o.options_),
      partition_(std::move(o.partition_)),
      count_(std::move(o.count_)),
      output_(std::move(o.output_)),
      emitted_(std::move(o.emitted_)),
      written_(std::move(o.written_)),
      double_writes_(o.double_writes_.load()),
      report_(std::move(o.report_)) {}

const WorkPartition& PlanExecution::build_partition() {
  use_partition(flatlog::build_partition(plan_, inputs_, options_.workers));
  return partition_;
}

void PlanExecution::use_partition(WorkPartition partition) {
  partition_ = std::move(partition);
  report_.work_total = partition_.total();
  report_.workers = options_.workers;
  report_.max_slice = partition_.max_slice();
}

std::uint64_t PlanExecution::count_worker(std::size_t w) const {
  std::uint64_t n = 0;
  auto emit = [&](const std::vector<Value>&) { ++n; };
  run_slice(plan_, inputs_, partition_, w, emit);
  return n;
}

const CountResult& PlanExecution::finish_count(std::vector<std::uint64_t> counts) {
  count_.counts = std::move(counts);
  count_.offsets.assign(count_.counts.size(), 0);
  std::uint64_t running = 0;
  for (std::size_t w = 0; w < count_.counts.size(); ++w) {
    count_.offsets[w] = running;
    running += count_.counts[w];
  }
  count_.total = running;
  report_.counted = count_.counts;
  return count_;
}

void PlanExecution::allocate() {
  output_ = TupleBuffer(plan_.head.size());
  output_.resize_rows(count_.total);
  emitted_.assign(options_.workers, 0);
  report_.instrumented = options_.instrument;
  if (options_.instrument) {
    written_ = std::make_unique<std::atomic<std::uint8_t>[]>(count_.total);
    for (std::uint64_t i = 0; i < count_.total; ++i) written_[i].store(0, std::memory_order_relaxed);
    const std::size_t arity = std::max<std::size_t>(1, output_.arity());
    report_.peak_aux_tuples = std::max(report_.peak_aux_tuples, output_.data().capacity() / arity);
  }
}

void PlanExecution::materialize_worker(std::size_t w) {
  const std::uint64_t begin = count_.offsets.at(w);
  const std::uint64_t limit = count_.counts.at(w);
  std::uint64_t n = 0;
  auto emit = [&](const std::vector<Value>& binding) {
    if (n >= limit) {
      throw InternalError("materialize emitted more tuples than counted for worker " + std::to_string(w) + " of " +
                          plan_.text);
    }
    const std::uint64_t slot = begin + n;
    auto row = output_.row(slot);
    for (std::size_t c = 0; c < plan_.head.size(); ++c) {
      const Binding& b = plan_.head[c];
      row[c] = b.constant ? b.value : binding[b.level];
    }
    if (written_ && written_[slot].fetch_add(1, std::memory_order_relaxed) != 0) ++double_writes_;
    ++n;
  };
  run_slice(plan_, inputs_, partition_, w, emit);
  emitted_[w] = n;
}

TupleBuffer PlanExecution::finish() {
  report_.emitted = emitted_;
  report_.output_tuples = count_.total;
  for (std::size_t w = 0; w < emitted_.size(); ++w) {
    if (emitted_[w] != count_.counts[w]) {
      throw InternalError("count/materialize divergence in worker " + std::to_string(w) + " of " + plan_.text +
                          ": counted " + std::to_string(count_.counts[w]) + ", emitted " +
                          std::to_string(emitted_[w]));
    }
  }
  if (written_) {
    report_.double_writes = double_writes_.load();
    std::uint64_t gaps = 0;
    for (std::uint64_t i = 0; i < count_.total; ++i) gaps += written_[i].load() == 0;
    report_.gaps = gaps;
    written_.reset();
  }
  return std::move(output_);
}

CountResult count_pass(const JoinPlan& plan, const PlanInputs& inputs, const WorkPartition& partition,
                       ThreadPool* pool) {
  PlanExecution exec(plan, inputs, ExecOptions{partition.workers, pool, false});
  exec.use_partition(partition);
  std::vector<std::uint64_t> counts(partition.workers, 0);
  auto task = [&](std::size_t w) { counts[w] = exec.count_worker(w); };
  if (pool) pool->parallel_for(partition.workers, task);
  else for (std::size_t w = 0; w < partition.workers; ++w) task(w);
  return exec.finish_count(std::move(counts));
}

TupleBuffer materialize_pass(const JoinPlan& plan, const PlanInputs& inputs, const WorkPartition& partition,
                             const CountResult& count, ThreadPool* pool) {
  PlanExecution exec(plan, inputs, ExecOptions{partition.workers, pool, false});
  exec.use_partition(partition);
  exec.finish_count(count.counts);
  exec.allocate();
  auto task = [&](std::size_t w) { exec.materialize_worker(w); };
  if (pool) pool->parallel_for(partition.workers, task);
  else for (std::size_t w = 0; w < partition.workers; ++w) task(w);
  return exec.finish();
}

TupleBuffer execute_plan(const JoinPlan& plan, const PlanInputs& inputs, const ExecOptions& options,
                         ExecReport* report) {
  using Clock = std::chrono::steady_clock;
  auto micros = [](Clock::time_point t0) {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - t0).count());
  };
  auto each_worker = [&](const std::function<void(std::size_t)>& fn) {
    if (options.pool) {
      options.pool->parallel_for(options.workers, fn);
    } else {
      for (std::size_t w = 0; w < options.workers; ++w) fn(w);
    }
  };

  PlanExecution exec(plan, inputs, options);
  auto t0 = Clock::now();
  exec.build_partition();
  exec.report().histogram_micros = micros(t0);

  t0 = Clock::now();
  std::vector<std::uint64_t> counts(options.workers, 0);
  each_worker([&](std::size_t w) { counts[w] = exec.count_worker(w); });
  exec.finish_count(std::move(counts));
  exec.report().count_micros = micros(t0);

  t0 = Clock::now();
  exec.allocate();
  each_worker([&](std::size_t w) { exec.materialize_worker(w); });
  TupleBuffer out = exec.finish();
  exec.report().materialize_micros = micros(t0);
  if (report) *report = exec.report();
  return out;
}

}  // namespace flatlog
