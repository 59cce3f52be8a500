#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "flatlog/error.hpp"
#include "flatlog/runtime.hpp"
#include "flatlog/verify.hpp"
#include "flatlog/workloads.hpp"

using namespace flatlog;
using verify::run_engine;

namespace {

EngineOptions opts(std::size_t p, ScheduleMode mode, bool instrument = true) {
  EngineOptions o;
  o.workers = p;
  o.threads = std::min<std::size_t>(p, 4);
  o.schedule = mode;
  o.instrument = instrument;
  o.check_invariants = instrument;
  return o;
}

void expect_matches_oracle(const workloads::Workload& w, const EngineOptions& o) {
  auto ref = verify::run_oracle(w);
  auto run = run_engine(w, o);
  EXPECT_EQ(verify::compare_fixpoint(w, run, ref), "") << w.name;
  EXPECT_EQ(verify::check_reports(run.reports), "") << w.name;
}

const StratumStats& recursive_stratum(const RunSummary& s, const std::string& rel) {
  for (const auto& st : s.strata) {
    if (st.recursive && std::find(st.relations.begin(), st.relations.end(), rel) != st.relations.end()) return st;
  }
  throw std::runtime_error("no recursive stratum for " + rel);
}

}  // namespace

TEST(Fixpoint, ThreeCycleClosure) {
  workloads::Workload w{"cycle", workloads::kTcProgram, {{"Edge", {{"1", "2"}, {"2", "3"}, {"3", "1"}}}}, {"TC"}};
  for (std::size_t p : {1, 2, 5}) {
    auto run = run_engine(w, opts(p, ScheduleMode::Sequential));
    EXPECT_EQ(run.relations.at("TC").size(), 9u);
    // Base copy, two productive rounds, one empty round.
    EXPECT_EQ(recursive_stratum(run.summary, "TC").iterations, 3u);
  }
}

TEST(Fixpoint, PathClosureSize) {
  for (std::size_t n : {2, 7, 40}) {
    auto run = run_engine(workloads::tc_path(n), opts(3, ScheduleMode::Sequential));
    EXPECT_EQ(run.relations.at("TC").size(), n * (n - 1) / 2);
    EXPECT_EQ(recursive_stratum(run.summary, "TC").iterations, n - 1);
  }
}

TEST(Fixpoint, EmptyInput) {
  workloads::Workload w{"empty", workloads::kTcProgram, {}, {"TC"}};
  auto run = run_engine(w, opts(2, ScheduleMode::Sequential));
  EXPECT_TRUE(run.relations.at("TC").empty());
}

TEST(Fixpoint, SameGenerationOnTree) { expect_matches_oracle(workloads::sg_tree(31), opts(3, ScheduleMode::Sequential)); }

TEST(Fixpoint, RandomWorkloadsMatchOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (auto mode : {ScheduleMode::Sequential, ScheduleMode::PhaseAligned}) {
      expect_matches_oracle(workloads::tc(30, 60, seed), opts(3, mode));
      expect_matches_oracle(workloads::sg(25, 40, seed), opts(2, mode));
      expect_matches_oracle(workloads::andersen(60, seed), opts(4, mode));
      expect_matches_oracle(workloads::unreach(30, 35, seed), opts(3, mode));
      expect_matches_oracle(workloads::neg2hop(20, 50, seed), opts(2, mode));
    }
  }
}

TEST(Fixpoint, UnreachableNodes) {
  workloads::Workload w{"unreach",
                        workloads::kUnreachProgram,
                        {{"Edge", {{"a", "b"}, {"b", "c"}, {"d", "e"}, {"e", "a"}}}, {"Root", {{"a"}}}},
                        {"Unreach"}};
  auto run = run_engine(w, opts(2, ScheduleMode::Sequential));
  // a is not reachable from itself: no cycle through a.
  EXPECT_EQ(run.relations.at("Unreach"), (TextRows{{"a"}, {"d"}, {"e"}}));
}

TEST(Fixpoint, AndersenSmallProgram) {
  workloads::Workload w{"andersen",
                        workloads::kAndersenProgram,
                        {{"AddressOf", {{"p", "a"}, {"q", "b"}}},
                         {"Assign", {{"r", "p"}}},
                         {"Store", {{"r", "q"}}},
                         {"Load", {{"s", "p"}}}},
                        {"PointsTo"}};
  auto run = run_engine(w, opts(2, ScheduleMode::PhaseAligned));
  // r = p; *r = q (so a -> b); s = *p (so s -> b).
  EXPECT_EQ(run.relations.at("PointsTo"), (TextRows{{"a", "b"}, {"p", "a"}, {"q", "b"}, {"r", "a"}, {"s", "b"}}));
  EXPECT_EQ(verify::compare_fixpoint(w, run, verify::run_oracle(w)), "");
}

TEST(Schedule, PhaseAlignedEqualsSequential) {
  std::vector<workloads::Workload> ws = {workloads::fractured(12, 3), workloads::andersen(120, 4),
                                         workloads::call_graph(3, 5, false), workloads::call_graph(3, 5, true)};
  for (const auto& w : ws) {
    auto seq = run_engine(w, opts(4, ScheduleMode::Sequential));
    auto stream = run_engine(w, opts(4, ScheduleMode::PhaseAligned));
    EXPECT_EQ(seq.relations, stream.relations) << w.name;
    ASSERT_EQ(seq.summary.strata.size(), stream.summary.strata.size());
    for (std::size_t i = 0; i < seq.summary.strata.size(); ++i) {
      EXPECT_EQ(seq.summary.strata[i].iterations, stream.summary.strata[i].iterations);
    }
  }
}

TEST(Schedule, FracturedStratumHasTwelveRecursiveRules) {
  auto w = workloads::fractured(6, 1);
  auto e = Engine::from_source(w.program);
  std::size_t widest = 0;
  for (const auto& s : e.strata()) {
    if (s.recursive) widest = std::max(widest, s.rules.size());
  }
  EXPECT_EQ(widest, 12u);
  expect_matches_oracle(w, opts(3, ScheduleMode::PhaseAligned));
}

TEST(Schedule, SingleRuleStratumRunsSequentially) {
  auto w = workloads::tc(20, 40, 2);
  auto seq = run_engine(w, opts(2, ScheduleMode::Sequential));
  auto stream = run_engine(w, opts(2, ScheduleMode::PhaseAligned));
  EXPECT_EQ(seq.relations, stream.relations);
  EXPECT_EQ(seq.reports.size(), stream.reports.size());
}

TEST(Determinism, IterationCountsIndependentOfWorkersAndSchedule) {
  auto w = workloads::andersen(150, 11);
  auto base = run_engine(w, opts(1, ScheduleMode::Sequential));
  for (std::size_t p : {2, 3, 8}) {
    for (auto mode : {ScheduleMode::Sequential, ScheduleMode::PhaseAligned}) {
      auto run = run_engine(w, opts(p, mode));
      EXPECT_EQ(run.relations, base.relations);
      for (std::size_t i = 0; i < base.summary.strata.size(); ++i) {
        EXPECT_EQ(run.summary.strata[i].iterations, base.summary.strata[i].iterations);
      }
    }
  }
}

TEST(Flush, ThresholdDoesNotChangeResults) {
  auto w = workloads::tc(40, 80, 6);
  auto ref = verify::run_oracle(w);
  for (std::size_t t : {0, 1, 16, 1000000}) {
    EngineOptions o = opts(3, ScheduleMode::Sequential);
    o.flush.fixed = t;
    auto run = run_engine(w, o);
    EXPECT_EQ(verify::compare_fixpoint(w, run, ref), "") << "threshold " << t;
  }
}

TEST(Stats, RecordsEveryPhase) {
  auto w = workloads::tc(15, 30, 1);
  std::vector<StatRecord> records;
  EngineOptions o = opts(2, ScheduleMode::Sequential, false);
  o.on_stat = [&](const StatRecord& r) { records.push_back(r); };
  run_engine(w, o);
  std::set<std::string> phases;
  for (const auto& r : records) phases.insert(r.phase);
  EXPECT_EQ(phases, (std::set<std::string>{"histogram", "count", "materialize", "build_index", "delta", "merge"}));
}

TEST(Engine, RejectsUnknownRelationAndArity) {
  auto e = Engine::from_source(workloads::kTcProgram);
  EXPECT_THROW(e.add_fact("Nope", {"1", "2"}), ProgramError);
  EXPECT_THROW(e.add_fact("Edge", {"1"}), ProgramError);
}

TEST(Engine, FactsInProgramText) {
  auto e = Engine::from_source(R"(
.decl Edge(x:symbol, y:symbol)
.decl TC(x:symbol, y:symbol)
Edge("a", "b").
Edge("b", "c").
TC(x, y) :- Edge(x, y).
TC(x, y) :- TC(x, z), Edge(z, y).
)");
  e.run();
  EXPECT_EQ(e.rows("TC"), (TextRows{{"a", "b"}, {"a", "c"}, {"b", "c"}}));
}

TEST(Engine, RunsOnlyOnce) {
  auto e = Engine::from_source(workloads::kTcProgram);
  e.run();
  EXPECT_THROW(e.run(), InternalError);
}
