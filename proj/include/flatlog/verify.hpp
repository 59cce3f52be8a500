#pragma once

#include <map>
#include <string>
#include <vector>

#include "flatlog/oracle.hpp"
#include "flatlog/runtime.hpp"
#include "flatlog/workloads.hpp"

namespace flatlog::verify {

struct EngineRun {
  std::map<std::string, TextRows> relations;  // every declared relation, sorted text rows
  RunSummary summary;
  std::vector<ExecReport> reports;            // one per plan execution, in order
};

// Parses the workload, loads its facts and runs it to fixpoint.
EngineRun run_engine(const workloads::Workload& w, EngineOptions options);

oracle::FactSet fact_set(const workloads::Workload& w);
oracle::FixpointResult run_oracle(const workloads::Workload& w);
TextRows rows_of(const oracle::Relation& rel);

// Empty when the engine agrees with the oracle on every relation the
// program declares (helpers excluded) and on the round count of every
// recursive stratum; otherwise a description of the first disagreement.
std::string compare_fixpoint(const workloads::Workload& w, const EngineRun& run, const oracle::FixpointResult& ref);

// Empty when every report satisfies the count/materialize contract: per
// worker emitted == counted, no double writes or gaps, peak auxiliary tuples
// equal to the output size, and max slice <= ceil(T/p) when T >= p.
std::string check_reports(const std::vector<ExecReport>& reports);

// Evaluates the single rule of a one-rule workload (see
// workloads::random_join) with execute_plan directly and returns its raw
// output rows, sorted but not deduplicated.
struct JoinRun {
  TextRows rows;
  ExecReport report;
};
JoinRun run_single_rule(const workloads::Workload& w, std::size_t workers, ThreadPool* pool, bool instrument = true);

// The same rule through bruteforce_join, sorted.
TextRows bruteforce_single_rule(const workloads::Workload& w);

// Per-criterion violation counters over a set of reports.
struct ReportTally {
  std::size_t executions = 0;
  std::size_t count_mismatches = 0;
  std::size_t write_violations = 0;
  std::size_t aux_violations = 0;
  std::size_t balance_checked = 0;
  std::size_t balance_violations = 0;
  void add(const std::vector<ExecReport>& reports);
};

}  // namespace flatlog::verify
