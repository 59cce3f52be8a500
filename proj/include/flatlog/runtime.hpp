#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "flatlog/ast.hpp"
#include "flatlog/executor.hpp"
#include "flatlog/plan.hpp"
#include "flatlog/relation.hpp"
#include "flatlog/store.hpp"
#include "flatlog/stratify.hpp"
#include "flatlog/thread_pool.hpp"
#include "flatlog/value.hpp"

namespace flatlog {

// One timing record. `subject` is the rule text for join phases and the
// relation name for delta/build_index/merge.
struct StatRecord {
  std::size_t stratum = 0;
  std::size_t iteration = 0;
  std::string subject;
  std::string phase;  // histogram | count | materialize | build_index | delta | merge
  std::uint64_t micros = 0;
  std::uint64_t tuples = 0;
};

struct StratumStats {
  std::size_t stratum = 0;
  std::vector<std::string> relations;
  bool recursive = false;
  std::size_t iterations = 0;
};

struct EngineOptions {
  std::size_t workers = 1;  // p: work slices per plan
  std::size_t threads = 1;  // OS threads executing those slices
  ScheduleMode schedule = ScheduleMode::Sequential;
  FlushPolicy flush;
  bool instrument = false;        // write-once bitmaps, allocation accounting
  bool check_invariants = false;  // full storage verification after each merge
  std::function<void(const StatRecord&)> on_stat;
  std::function<void(const JoinPlan&, const ExecReport&)> on_exec;

  // Turns on instrumentation and invariant checks when FLATLOG_TEST_MODE is
  // set to a non-empty value other than "0".
  void apply_environment();
};

struct RunSummary {
  std::vector<StratumStats> strata;
  std::map<std::string, std::size_t> cardinalities;
  double seconds = 0;
};

// Shared state of one evaluation.
struct EvalContext {
  const Program& program;
  RelationStore& store;
  Interner& interner;
  const EngineOptions& options;
  ThreadPool* pool = nullptr;
};

// Iterates one stratum to its local fixpoint.
StratumStats evaluate_stratum(EvalContext& ctx, const Stratum& stratum);

// Evaluates all strata in order; afterwards every relation is closed.
std::vector<StratumStats> evaluate_program(EvalContext& ctx, const std::vector<Stratum>& strata);

// Runs one round of a group of plans phase by phase: all histograms, then
// all count passes, then all allocations, then all materialize passes.
// Returns one staging buffer per plan.
std::vector<TupleBuffer> run_phase_aligned(EvalContext& ctx, const std::vector<const JoinPlan*>& plans,
                                           const std::vector<PlanInputs>& inputs, std::vector<ExecReport>* reports);

// Same contract, one plan after another.
std::vector<TupleBuffer> run_sequential(EvalContext& ctx, const std::vector<const JoinPlan*>& plans,
                                        const std::vector<PlanInputs>& inputs, std::vector<ExecReport>* reports);

// Program-level driver: applies .split directives, stratifies, loads facts
// and runs the fixpoint.
class Engine {
 public:
  explicit Engine(Program program, EngineOptions options = {});
  static Engine from_source(std::string_view source, EngineOptions options = {});

  const Program& program() const { return program_; }
  const std::vector<Stratum>& strata() const { return strata_; }
  Interner& interner() { return interner_; }
  const Interner& interner() const { return interner_; }
  const RelationStore& store() const { return store_; }
  EngineOptions& options() { return options_; }

  void add_fact(const std::string& relation, const std::vector<std::string>& row);
  void add_facts(const std::string& relation, const std::vector<std::vector<std::string>>& rows);

  RunSummary run();

  // Relation contents as text, sorted lexicographically by column strings.
  std::vector<std::vector<std::string>> rows(const std::string& relation) const;

 private:
  Program program_;
  std::vector<Stratum> strata_;
  EngineOptions options_;
  Interner interner_;
  RelationStore store_;
  std::unique_ptr<ThreadPool> pool_;
  bool ran_ = false;
};

}  // namespace flatlog
