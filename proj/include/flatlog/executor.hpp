#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "flatlog/columns.hpp"
#include "flatlog/histogram.hpp"
#include "flatlog/partition.hpp"
#include "flatlog/plan.hpp"
#include "flatlog/relation.hpp"
#include "flatlog/thread_pool.hpp"

namespace flatlog {

// Read-only view of one relation version in a plan's required column order:
// up to two sorted segments plus, when maintained, their root histogram.
struct SourceView {
  const SortedColumns* head = nullptr;
  const SortedColumns* body = nullptr;
  const Histogram* histogram = nullptr;

  static SourceView of(const ColumnarRelation& rel) { return {&rel.head(), &rel.body(), &rel.root_histogram()}; }
  static SourceView of(const SortedColumns& single, const Histogram* histogram = nullptr) {
    return {&single, nullptr, histogram};
  }
  std::size_t size() const { return (head ? head->size() : 0) + (body ? body->size() : 0); }
};

struct PlanInputs {
  std::vector<SourceView> sources;  // parallel to JoinPlan::sources
  std::vector<SourceView> negated;  // parallel to JoinPlan::negated
};

struct ExecOptions {
  std::size_t workers = 1;     // p, the number of work slices
  ThreadPool* pool = nullptr;  // null runs every worker on the calling thread
  bool instrument = false;     // write-once bitmap and allocation accounting
};

struct CountResult {
  std::vector<std::uint64_t> counts;   // tc per worker
  std::vector<std::uint64_t> offsets;  // exclusive prefix sum of counts
  std::uint64_t total = 0;
};

// Per-execution accounting. The instrumented fields stay zero unless
// ExecOptions::instrument is set.
struct ExecReport {
  std::uint64_t work_total = 0;  // T
  std::size_t workers = 0;
  std::uint64_t max_slice = 0;
  std::vector<std::uint64_t> counted;
  std::vector<std::uint64_t> emitted;
  std::uint64_t output_tuples = 0;
  bool instrumented = false;
  std::uint64_t double_writes = 0;
  std::uint64_t gaps = 0;
  std::uint64_t peak_aux_tuples = 0;  // tuple slots allocated during the execution
  // Wall time per phase. In phase-aligned runs every plan of the group
  // reports the group's phase time.
  std::uint64_t histogram_micros = 0;
  std::uint64_t count_micros = 0;
  std::uint64_t materialize_micros = 0;
};

// One plan over one set of relation versions, driven phase by phase:
//   build_partition -> count_worker(w) for all w -> finish_count
//   -> allocate -> materialize_worker(w) for all w -> finish
// The runtime interleaves these across plans in phase-aligned mode; every
// worker call is independent and may run on any thread.
class PlanExecution {
 public:
  PlanExecution(const JoinPlan& plan, PlanInputs inputs, ExecOptions options);
  ~PlanExecution();
  PlanExecution(PlanExecution&&) noexcept;
  PlanExecution& operator=(PlanExecution&&) = delete;

  const WorkPartition& build_partition();
  // Installs a partition computed elsewhere instead of building one.
  void use_partition(WorkPartition partition);
  const WorkPartition& partition() const { return partition_; }
  std::uint64_t count_worker(std::size_t w) const;
  const CountResult& finish_count(std::vector<std::uint64_t> counts);
  void allocate();
  void materialize_worker(std::size_t w);
  TupleBuffer finish();

  std::size_t workers() const { return options_.workers; }
  const CountResult& count() const { return count_; }
  const ExecReport& report() const { return report_; }
  ExecReport& report() { return report_; }

 private:
  const JoinPlan& plan_;
  PlanInputs inputs_;
  ExecOptions options_;
  WorkPartition partition_;
  CountResult count_;
  TupleBuffer output_;
  std::vector<std::uint64_t> emitted_;
  std::unique_ptr<std::atomic<std::uint8_t>[]> written_;
  std::atomic<std::uint64_t> double_writes_{0};
  ExecReport report_;
};

// Histogram phase: root keys of the outer source, per-key fan-out, slices.
WorkPartition build_partition(const JoinPlan& plan, const PlanInputs& inputs, std::size_t workers);

// Root work histogram alone (the outer source's degrees times the inner's).
WorkHistogram root_work(const JoinPlan& plan, const PlanInputs& inputs);

CountResult count_pass(const JoinPlan& plan, const PlanInputs& inputs, const WorkPartition& partition,
                       ThreadPool* pool = nullptr);

// Writes exactly count.total head tuples, worker w at [offsets[w], ...).
// Throws InternalError if a worker's output diverges from its count.
TupleBuffer materialize_pass(const JoinPlan& plan, const PlanInputs& inputs, const WorkPartition& partition,
                             const CountResult& count, ThreadPool* pool = nullptr);

// partition -> count -> one bulk allocation -> materialize.
TupleBuffer execute_plan(const JoinPlan& plan, const PlanInputs& inputs, const ExecOptions& options,
                         ExecReport* report = nullptr);

}  // namespace flatlog
