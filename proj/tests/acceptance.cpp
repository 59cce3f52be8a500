// Acceptance run: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero when any criterion fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "flatlog/io.hpp"
#include "flatlog/partition.hpp"
#include "flatlog/relation.hpp"
#include "flatlog/runtime.hpp"
#include "flatlog/verify.hpp"
#include "flatlog/workloads.hpp"

using namespace flatlog;
namespace fs = std::filesystem;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status = Status::Pass;
  std::string detail;
};

Outcome pass(std::string d) { return {Status::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Status::Fail, std::move(d)}; }
Outcome skip(std::string d) { return {Status::Skip, std::move(d)}; }

int failures = 0;

// Runs one criterion, enforces its time budget (0 = none) and prints the line.
void criterion(int id, const std::string& name, double budget_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = fail(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.status == Status::Pass && budget_seconds > 0 && secs > budget_seconds) {
    o = fail(o.detail + "; over time budget of " + std::to_string(budget_seconds) + " s");
  }
  const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
  if (o.status == Status::Fail) ++failures;
  std::printf("criterion %2d %-4s %-34s %9.3f s  %s\n", id, tag, name.c_str(), secs, o.detail.c_str());
  std::fflush(stdout);
}

// Tallies shared between criteria 3-6 and 11.
verify::ReportTally join_tally;      // executions from criterion 3
verify::ReportTally fixpoint_tally;  // executions from criterion 4
std::vector<workloads::Workload> fixpoint_fixtures;
std::size_t fixpoint_mismatches = 0;
std::size_t join_mismatches = 0;
bool joins_ran = false;
bool fixpoints_ran = false;

// ---------------------------------------------------------------------------

Outcome four_keys() {
  WorkHistogram h = WorkHistogram::from_degrees({0, 1, 2, 3}, {2, 3, 1, 4}, {2, 3, 1, 1});
  std::vector<std::uint64_t> fanout;
  for (std::size_t k = 0; k < h.keys.size(); ++k) fanout.push_back(h.outer_degree[k] * h.inner_degree[k]);
  if (fanout != std::vector<std::uint64_t>{4, 9, 1, 4}) return fail("fan-outs differ");
  if (h.prefix != std::vector<std::uint64_t>{4, 13, 14, 18}) return fail("prefix differs");
  if (h.total() != 18) return fail("T differs");
  WorkPartition p = partition_work(h, 4);
  const std::vector<std::pair<std::uint64_t, std::uint64_t>> expect = {{0, 5}, {5, 10}, {10, 15}, {15, 18}};
  if (p.slices.size() != 4) return fail("slice count");
  for (std::size_t w = 0; w < 4; ++w) {
    if (p.slices[w].begin != expect[w].first || p.slices[w].end != expect[w].second) {
      return fail("slice " + std::to_string(w) + " differs");
    }
  }
  // Slice 0: all four units of key A, then unit (0, 0) of key B.
  for (std::uint64_t g = 0; g < 4; ++g) {
    if (decode_workunit(g, h).key != 0) return fail("slice 0 does not cover A");
  }
  if (!(decode_workunit(4, h) == WorkUnit{1, 0, 0})) return fail("slice 0 does not end with one unit of B");
  return pass("C=(4,13,14,18) T=18 slices [0,5) [5,10) [10,15) [15,18)");
}

Outcome bijection() {
  workloads::Rng rng(2024);
  std::uint64_t units = 0;
  for (int round = 0; round < 200; ++round) {
    const std::size_t k = 1 + rng.below(64);
    std::vector<Value> keys;
    std::vector<std::uint64_t> outer, inner;
    for (std::size_t i = 0; i < k; ++i) {
      keys.push_back(static_cast<Value>(i));
      outer.push_back(1 + rng.below(32));
      inner.push_back(1 + rng.below(32));
    }
    WorkHistogram h = WorkHistogram::from_degrees(keys, outer, inner);
    std::set<std::tuple<std::size_t, std::uint64_t, std::uint64_t>> image;
    for (std::uint64_t g = 0; g < h.total(); ++g) {
      WorkUnit u = decode_workunit(g, h);
      if (u.key >= h.keys.size() || u.outer >= h.outer_degree[u.key] || u.inner >= h.inner_degree[u.key]) {
        return fail("unit out of range in histogram " + std::to_string(round));
      }
      if (encode_workunit(u, h) != g) return fail("round trip broken in histogram " + std::to_string(round));
      image.insert({u.key, u.outer, u.inner});
    }
    std::uint64_t domain = 0;
    for (std::size_t i = 0; i < h.keys.size(); ++i) domain += h.outer_degree[i] * h.inner_degree[i];
    if (image.size() != h.total() || domain != h.total()) return fail("not onto in histogram " + std::to_string(round));
    units += h.total();
  }
  return pass("200 histograms, " + std::to_string(units) + " units");
}

Outcome random_joins(ThreadPool& pool) {
  workloads::Rng rng(3);
  std::size_t rows = 0;
  for (int i = 0; i < 500; ++i) {
    auto w = workloads::random_join(rng, 6, 500);
    // Both sides come back sorted; the oracle's rows are distinct, so any
    // duplicate from the engine also counts as a mismatch.
    auto expect = verify::bruteforce_single_rule(w);
    for (std::size_t p : {1, 2, 8}) {
      auto run = verify::run_single_rule(w, p, &pool);
      join_tally.add({run.report});
      if (run.rows != expect) ++join_mismatches;
    }
    rows += expect.size();
  }
  joins_ran = true;
  if (join_mismatches) return fail(std::to_string(join_mismatches) + " mismatching executions");
  return pass("500 joins x p in {1,2,8}, " + std::to_string(rows) + " result rows, 0 mismatches");
}

std::string serialize(const verify::EngineRun& run) {
  // The bytes of every relation as write_tsv produces them.
  const fs::path tmp = fs::temp_directory_path() / ("flatlog_accept_" + std::to_string(::getpid()) + ".tsv");
  std::string out;
  for (const auto& [name, rows] : run.relations) {
    write_tsv(tmp, rows);
    std::ifstream in(tmp, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out += name + "\n" + ss.str();
  }
  fs::remove(tmp);
  return out;
}

std::vector<workloads::Workload> make_fixtures() {
  std::vector<workloads::Workload> out;
  workloads::Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 8 + rng.below(50);
    out.push_back(workloads::tc(n, n + rng.below(2 * n), rng.next()));
  }
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 8 + rng.below(40);
    out.push_back(workloads::sg(n, n + rng.below(n), rng.next()));
  }
  for (int i = 0; i < 100; ++i) out.push_back(workloads::andersen(20 + rng.below(300), rng.next()));
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 8 + rng.below(50);
    out.push_back(workloads::unreach(n, n + rng.below(n), rng.next()));
  }
  return out;
}

EngineOptions engine_options(std::size_t p, ScheduleMode mode) {
  EngineOptions o;
  o.workers = p;
  o.threads = std::min<std::size_t>(p, 4);
  o.schedule = mode;
  o.instrument = true;
  return o;
}

// Sequential and phase-aligned runs of every fixture, kept for criterion 8.
std::vector<std::pair<std::string, std::string>> schedule_bytes;

Outcome fixpoints() {
  fixpoint_fixtures = make_fixtures();
  const std::size_t ps[] = {1, 2, 3, 8};
  std::size_t largest = 0;
  std::map<std::string, std::size_t> per_kind;
  std::string first;
  for (std::size_t i = 0; i < fixpoint_fixtures.size(); ++i) {
    const auto& w = fixpoint_fixtures[i];
    largest = std::max(largest, workloads::fact_count(w));
    auto ref = verify::run_oracle(w);
    std::string bytes[2];
    int m = 0;
    for (auto mode : {ScheduleMode::Sequential, ScheduleMode::PhaseAligned}) {
      auto run = verify::run_engine(w, engine_options(ps[i % 4], mode));
      fixpoint_tally.add(run.reports);
      auto problem = verify::compare_fixpoint(w, run, ref);
      if (!problem.empty()) {
        ++fixpoint_mismatches;
        if (first.empty()) first = w.name + " #" + std::to_string(i) + ": " + problem;
      }
      bytes[m++] = serialize(run);
    }
    schedule_bytes.emplace_back(bytes[0], bytes[1]);
    ++per_kind[w.name];
  }
  fixpoints_ran = true;
  std::string kinds;
  for (const auto& [k, n] : per_kind) kinds += (kinds.empty() ? "" : " ") + k + "=" + std::to_string(n);
  if (largest > 1000) return fail("fixture above 10^3 facts: " + std::to_string(largest));
  if (fixpoint_mismatches) return fail(std::to_string(fixpoint_mismatches) + " mismatches, first " + first);
  return pass(kinds + ", relations and rounds equal, max " + std::to_string(largest) + " facts");
}

Outcome determinism() {
  if (!joins_ran || !fixpoints_ran) return fail("criteria 3 and 4 did not complete");
  const auto c = join_tally.count_mismatches + fixpoint_tally.count_mismatches;
  const auto wv = join_tally.write_violations + fixpoint_tally.write_violations;
  const auto n = join_tally.executions + fixpoint_tally.executions;
  if (c || wv) return fail(std::to_string(c) + " count mismatches, " + std::to_string(wv) + " write violations");
  return pass(std::to_string(n) + " executions, 0 count mismatches, 0 double writes or gaps");
}

Outcome aux_storage() {
  if (!joins_ran) return fail("criterion 3 did not complete");
  if (join_tally.aux_violations) return fail(std::to_string(join_tally.aux_violations) + " violations");
  return pass(std::to_string(join_tally.executions) + " executions, peak auxiliary tuples == count total");
}

using Row = std::vector<Value>;

Outcome merges() {
  workloads::Rng rng(7);
  std::size_t steps = 0;
  for (int seq = 0; seq < 1000; ++seq) {
    const std::size_t arity = 1 + rng.below(3);
    ColumnOrder order = identity_order(arity);
    for (std::size_t i = arity; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    FlushPolicy policy;
    switch (rng.below(3)) {
      case 0: break;
      case 1: policy.fixed = 0; break;
      default: policy.fixed = rng.below(64); break;
    }
    ColumnarRelation rel(arity, order);
    std::set<Row> expect;  // physical rows
    const Value domain = static_cast<Value>(4 + rng.below(30));
    const std::size_t len = 5 + rng.below(20);
    for (std::size_t step = 0; step < len; ++step, ++steps) {
      TupleBuffer fresh(arity);
      const std::size_t n = rng.below(40);
      for (std::size_t i = 0; i < n; ++i) {
        Row r;
        for (std::size_t k = 0; k < arity; ++k) r.push_back(static_cast<Value>(rng.below(domain)));
        fresh.push(r);
        Row phys;
        for (std::size_t k = 0; k < arity; ++k) phys.push_back(r[order[k]]);
        expect.insert(phys);
      }
      rel.merge(compute_delta(fresh, rel), policy);

      auto rows = [](const SortedColumns& c) {
        std::vector<Row> out;
        for (std::size_t i = 0; i < c.size(); ++i) {
          Row r;
          for (std::size_t k = 0; k < c.arity(); ++k) r.push_back(c.at(i, k));
          out.push_back(r);
        }
        return out;
      };
      auto head = rows(rel.head());
      auto body = rows(rel.body());
      auto strictly_sorted = [](const std::vector<Row>& v) { return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end(); };
      if (!strictly_sorted(head) || !strictly_sorted(body)) return fail("unsorted segment in sequence " + std::to_string(seq));
      std::vector<Row> both;
      std::set_intersection(head.begin(), head.end(), body.begin(), body.end(), std::back_inserter(both));
      if (!both.empty()) return fail("head and body overlap in sequence " + std::to_string(seq));
      std::set<Row> contents(head.begin(), head.end());
      contents.insert(body.begin(), body.end());
      if (contents != expect) return fail("contents differ from set union in sequence " + std::to_string(seq));
      std::map<Value, std::uint64_t> counts;
      for (const auto& r : expect) ++counts[r[0]];
      const Histogram& h = rel.root_histogram();
      std::uint64_t acc = 0;
      std::size_t i = 0;
      bool same = h.keys.size() == counts.size();
      for (auto it = counts.begin(); same && it != counts.end(); ++it, ++i) {
        acc += it->second;
        same = h.keys[i] == it->first && h.degrees[i] == it->second && h.prefix[i] == acc;
      }
      if (!same) return fail("histogram differs from rebuild in sequence " + std::to_string(seq));
    }
  }
  return pass("1000 sequences, " + std::to_string(steps) + " merges");
}

Outcome schedules() {
  if (!fixpoints_ran) return fail("criterion 4 did not complete");
  std::size_t diffs = 0;
  for (const auto& [a, b] : schedule_bytes) diffs += a != b;
  std::size_t fractured = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto w = workloads::fractured(6 + 4 * seed, seed);
    auto seq = serialize(verify::run_engine(w, engine_options(3, ScheduleMode::Sequential)));
    auto stream = serialize(verify::run_engine(w, engine_options(3, ScheduleMode::PhaseAligned)));
    diffs += seq != stream;
    ++fractured;
  }
  auto rules = Engine::from_source(workloads::kFracturedProgram).strata();
  std::size_t widest = 0;
  for (const auto& s : rules) widest = std::max(widest, s.recursive ? s.rules.size() : 0);
  if (widest != 12) return fail("fractured stratum has " + std::to_string(widest) + " rules");
  if (diffs) return fail(std::to_string(diffs) + " fixtures differ");
  return pass(std::to_string(schedule_bytes.size()) + " fixtures + " + std::to_string(fractured) +
              " fractured (12-rule stratum), 0 diffs");
}

Outcome split() {
  std::size_t checked = 0, largest = 0, edges = 0;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    for (std::size_t scale : {4, 16, 60}) {
      auto plain = workloads::call_graph(scale, seed, false);
      auto split = workloads::call_graph(scale, seed, true);
      largest = std::max(largest, workloads::fact_count(plain));
      auto a = verify::run_engine(plain, engine_options(4, ScheduleMode::Sequential));
      auto b = verify::run_engine(split, engine_options(4, ScheduleMode::PhaseAligned));
      if (a.relations.at("CallGraphEdge") != b.relations.at("CallGraphEdge")) {
        return fail("CallGraphEdge differs at scale " + std::to_string(scale) + " seed " + std::to_string(seed));
      }
      if (!b.relations.count("HelpNT")) return fail("split program has no helper relation");
      edges = std::max(edges, a.relations.at("CallGraphEdge").size());
      ++checked;
    }
  }
  if (largest > 10000) return fail("fixture above 10^4 facts: " + std::to_string(largest));
  return pass(std::to_string(checked) + " fixtures, up to " + std::to_string(largest) + " facts and " +
              std::to_string(edges) + " CallGraphEdge tuples, identical");
}

// Edge lists: Matrix Market coordinate files, or whitespace separated
// "id src dst ..." lines for .cedge files.
TextRows load_graph(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  TextRows edges;
  std::string line;
  const bool mtx = path.extension() == ".mtx";
  bool header_done = !mtx;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '%' || line[0] == '#') continue;
    std::istringstream ss(line);
    if (!header_done) {
      header_done = true;  // rows cols nnz
      continue;
    }
    std::string a, b, c;
    if (mtx) {
      ss >> a >> b;
      edges.push_back({a, b});
    } else {
      ss >> a >> b >> c;
      edges.push_back({b, c});
    }
  }
  return edges;
}

Outcome same_generation() {
  const char* dir = std::getenv("FLATLOG_SG_DATASETS");
  if (!dir || !*dir) return skip("set FLATLOG_SG_DATASETS to a directory with the four graphs (needs >= 16 GB)");
  struct Expect {
    const char* file;
    std::size_t iterations;
    std::uint64_t millions;
  };
  const Expect table[] = {{"fe_sphere.mtx", 127, 206},
                          {"SF.cedge", 269, 382},
                          {"fe_body.mtx", 125, 408},
                          {"vsp_finan512_scagr7-2c_rlfddd.mtx", 513, 865}};
  std::string detail;
  bool ok = true;
  for (const auto& e : table) {
    const fs::path path = fs::path(dir) / e.file;
    if (!fs::exists(path)) return skip(std::string("missing ") + path.string());
    workloads::Workload w{"sg", workloads::kSgProgram, {{"Edge", load_graph(path)}}, {"SG"}};
    EngineOptions o;
    o.workers = o.threads = std::max(1u, std::thread::hardware_concurrency());
    auto e_ = Engine::from_source(w.program, o);
    e_.add_facts("Edge", w.facts.at("Edge"));
    RunSummary s = e_.run();
    std::size_t iterations = 0;
    for (const auto& st : s.strata) {
      if (st.recursive) iterations = st.iterations;
    }
    const std::uint64_t size = s.cardinalities.at("SG");
    const std::uint64_t millions = (size + 500000) / 1000000;
    ok = ok && iterations == e.iterations && millions == e.millions;
    detail += std::string(e.file) + ": " + std::to_string(iterations) + " it, " + std::to_string(size) + " tuples; ";
  }
  return ok ? pass(detail) : fail(detail);
}

Outcome balance() {
  if (!joins_ran) return fail("criterion 3 did not complete");
  if (join_tally.balance_violations) return fail(std::to_string(join_tally.balance_violations) + " violations");
  return pass(std::to_string(join_tally.balance_checked) + " of " + std::to_string(join_tally.executions) +
              " executions with T >= p, max slice <= ceil(T/p)");
}

}  // namespace

int main() {
  ThreadPool pool(4);
  criterion(1, "partition example", 0.001, four_keys);
  criterion(2, "decode bijection", 1, bijection);
  criterion(3, "join oracle equivalence", 60, [&] { return random_joins(pool); });
  criterion(4, "fixpoint oracle equivalence", 120, fixpoints);
  criterion(5, "count/materialize determinism", 0, determinism);
  criterion(6, "no intermediate materialization", 0, aux_storage);
  criterion(7, "merge/histogram consistency", 30, merges);
  criterion(8, "schedule equivalence", 0, schedules);
  criterion(9, "helper split soundness", 10, split);
  criterion(10, "same generation datasets", 0, same_generation);
  criterion(11, "partition balance", 0, balance);
  std::printf("%s\n", failures ? "acceptance: FAIL" : "acceptance: PASS");
  return failures ? 1 : 0;
}
