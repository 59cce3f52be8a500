#include "flatlog/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <set>

#include "flatlog/error.hpp"
#include "flatlog/parser.hpp"
#include "flatlog/split.hpp"

namespace flatlog {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t micros_since(Clock::time_point t0) {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - t0).count());
}

void parallel(ThreadPool* pool, std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (pool) {
    pool->parallel_for(n, fn);
  } else {
    for (std::size_t i = 0; i < n; ++i) fn(i);
  }
}

struct Timer {
  EvalContext& ctx;
  std::size_t stratum;
  std::size_t iteration;

  void record(const std::string& subject, const char* phase, Clock::time_point t0, std::uint64_t tuples) const {
    if (!ctx.options.on_stat) return;
    emit(subject, phase, micros_since(t0), tuples);
  }
  void emit(const std::string& subject, const char* phase, std::uint64_t micros, std::uint64_t tuples) const {
    if (!ctx.options.on_stat) return;
    ctx.options.on_stat(StatRecord{stratum, iteration, subject, phase, micros, tuples});
  }
};

ExecOptions exec_options(const EvalContext& ctx) {
  return ExecOptions{std::max<std::size_t>(1, ctx.options.workers), ctx.pool, ctx.options.instrument};
}

PlanInputs bind_inputs(RelationStore& store, const JoinPlan& plan) {
  PlanInputs in;
  for (const auto& src : plan.sources) {
    DeltaState& st = store.index(src.relation, src.order);
    in.sources.push_back(src.version == Version::Delta ? SourceView::of(st.delta, &st.delta_histogram)
                                                       : SourceView::of(st.full));
  }
  for (const auto& probe : plan.negated) in.negated.push_back(SourceView::of(store.index(probe.relation, probe.order).full));
  return in;
}

}  // namespace

void EngineOptions::apply_environment() {
  const char* v = std::getenv("FLATLOG_TEST_MODE");
  if (v && *v && std::string_view(v) != "0") {
    instrument = true;
    check_invariants = true;
  }
}

// ---------------------------------------------------------------------------

std::vector<TupleBuffer> run_sequential(EvalContext& ctx, const std::vector<const JoinPlan*>& plans,
                                        const std::vector<PlanInputs>& inputs, std::vector<ExecReport>* reports) {
  std::vector<TupleBuffer> out;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    ExecReport report;
    out.push_back(execute_plan(*plans[i], inputs[i], exec_options(ctx), &report));
    if (reports) reports->push_back(std::move(report));
  }
  return out;
}

std::vector<TupleBuffer> run_phase_aligned(EvalContext& ctx, const std::vector<const JoinPlan*>& plans,
                                           const std::vector<PlanInputs>& inputs, std::vector<ExecReport>* reports) {
  const ExecOptions opts = exec_options(ctx);
  std::vector<PlanExecution> execs;
  execs.reserve(plans.size());
  for (std::size_t i = 0; i < plans.size(); ++i) execs.emplace_back(*plans[i], inputs[i], opts);

  // Histogram phase, one task per plan.
  auto t0 = Clock::now();
  parallel(ctx.pool, execs.size(), [&](std::size_t i) { execs[i].build_partition(); });
  const std::uint64_t histogram_us = micros_since(t0);

  // Count phase over every (plan, worker) pair, then scan.
  t0 = Clock::now();
  const std::size_t p = opts.workers;
  std::vector<std::vector<std::uint64_t>> counts(execs.size(), std::vector<std::uint64_t>(p, 0));
  parallel(ctx.pool, execs.size() * p, [&](std::size_t t) { counts[t / p][t % p] = execs[t / p].count_worker(t % p); });
  for (std::size_t i = 0; i < execs.size(); ++i) execs[i].finish_count(std::move(counts[i]));
  const std::uint64_t count_us = micros_since(t0);

  // Resize (one allocation per plan), then materialize everything.
  t0 = Clock::now();
  for (auto& e : execs) e.allocate();
  parallel(ctx.pool, execs.size() * p, [&](std::size_t t) { execs[t / p].materialize_worker(t % p); });

  std::vector<TupleBuffer> out;
  for (auto& e : execs) out.push_back(e.finish());
  const std::uint64_t materialize_us = micros_since(t0);
  for (auto& e : execs) {
    e.report().histogram_micros = histogram_us;
    e.report().count_micros = count_us;
    e.report().materialize_micros = materialize_us;
    if (reports) reports->push_back(e.report());
  }
  return out;
}

// ---------------------------------------------------------------------------

StratumStats evaluate_stratum(EvalContext& ctx, const Stratum& stratum) {
  StratumStats stats;
  stats.stratum = stratum.index;
  stats.relations = stratum.relations;
  stats.recursive = stratum.recursive;

  std::vector<JoinPlan> plans;
  for (const auto& inst : seminaive_rewrite(ctx.program, stratum)) {
    plans.push_back(compile_plan(ctx.program, inst, ctx.interner));
    if (!check_prefix_property(plans.back())) throw InternalError("plan violates the prefix property: " + plans.back().text);
  }
  // Head relations in first-appearance order; their staging buffers are
  // concatenated in plan order so the result is schedule-independent.
  std::vector<std::string> heads;
  for (const auto& plan : plans) {
    if (std::find(heads.begin(), heads.end(), plan.head_relation) == heads.end()) heads.push_back(plan.head_relation);
  }
  // Materialize every index the plans need before the loop starts.
  for (const auto& plan : plans) {
    for (const auto& src : plan.sources) ctx.store.index(src.relation, src.order);
    for (const auto& probe : plan.negated) ctx.store.index(probe.relation, probe.order);
  }
  if (stratum.recursive) {
    for (const auto& rel : stratum.relations) ctx.store.reset_delta_to_full(rel);
  }

  std::vector<const JoinPlan*> plan_ptrs;
  for (const auto& p : plans) plan_ptrs.push_back(&p);
  const bool phase_aligned = stratum.schedule == ScheduleMode::PhaseAligned && plans.size() > 1;

  while (true) {
    ++stats.iterations;
    Timer timer{ctx, stratum.index, stats.iterations};

    std::vector<PlanInputs> inputs;
    for (const auto& plan : plans) inputs.push_back(bind_inputs(ctx.store, plan));

    std::vector<ExecReport> reports;
    std::vector<TupleBuffer> staged = phase_aligned ? run_phase_aligned(ctx, plan_ptrs, inputs, &reports)
                                                    : run_sequential(ctx, plan_ptrs, inputs, &reports);
    for (std::size_t i = 0; i < plans.size(); ++i) {
      if (ctx.options.on_exec) ctx.options.on_exec(plans[i], reports[i]);
      timer.emit(plans[i].text, "histogram", reports[i].histogram_micros, reports[i].work_total);
      timer.emit(plans[i].text, "count", reports[i].count_micros, reports[i].output_tuples);
      timer.emit(plans[i].text, "materialize", reports[i].materialize_micros, reports[i].output_tuples);
    }

    // Compute delta per head relation over the union of all plan outputs.
    std::map<std::string, SortedColumns> deltas;
    std::size_t produced = 0;
    for (const auto& head : heads) {
      DeltaState& canon = ctx.store.canonical(head);
      TupleBuffer all(canon.full.arity());
      for (std::size_t i = 0; i < plans.size(); ++i) {
        if (plans[i].head_relation == head) all.append(staged[i]);
      }
      auto tb = Clock::now();
      SortedColumns sorted = sort_dedup(all, canon.full.column_order());
      timer.record(head, "build_index", tb, sorted.size());
      auto td = Clock::now();
      SortedColumns d = difference_sorted(difference_sorted(sorted, canon.full.body()), canon.full.head());
      timer.record(head, "delta", td, d.size());
      if (ctx.options.check_invariants && !d.is_strictly_sorted()) {
        throw InternalError("delta of " + head + " is not sorted and duplicate-free");
      }
      produced += d.size();
      deltas.emplace(head, std::move(d));
    }

    if (produced == 0) {
      // Local fixpoint: nothing new anywhere. Clear deltas so that later
      // readers never see stale ones.
      for (const auto& rel : stratum.relations) {
        for (auto& [order, st] : ctx.store.entry(rel).indexes) st.set_delta(SortedColumns(st.full.arity()));
      }
      break;
    }
    for (auto& [head, d] : deltas) {
      auto tm = Clock::now();
      std::size_t n = ctx.store.apply_delta(head, std::move(d), ctx.options.flush);
      timer.record(head, "merge", tm, n);
    }
    // Relations of the stratum that gained nothing this round carry an empty delta.
    for (const auto& rel : stratum.relations) {
      if (!deltas.count(rel)) {
        for (auto& [order, st] : ctx.store.entry(rel).indexes) st.set_delta(SortedColumns(st.full.arity()));
      }
    }
    if (ctx.options.check_invariants && !ctx.store.check_invariants()) {
      throw InternalError("storage invariants violated after merge in stratum " + std::to_string(stratum.index));
    }
    if (!stratum.recursive) break;
  }
  return stats;
}

std::vector<StratumStats> evaluate_program(EvalContext& ctx, const std::vector<Stratum>& strata) {
  std::vector<StratumStats> out;
  for (const auto& s : strata) out.push_back(evaluate_stratum(ctx, s));
  return out;
}

// ---------------------------------------------------------------------------

Engine::Engine(Program program, EngineOptions options)
    : program_(apply_splits(std::move(program))), options_(std::move(options)) {
  strata_ = stratify(program_);
  for (const auto& d : program_.relations) store_.declare(d.name, d.arity());
  for (const auto& r : program_.rules) {
    if (!r.is_fact()) continue;
    std::vector<std::string> row;
    for (const auto& t : r.head.args) {
      if (!t.is_constant()) throw ProgramError("fact with a variable: " + r.to_string(), r.line, 1);
      row.push_back(t.text);
    }
    add_fact(r.head.relation, row);
  }
}

Engine Engine::from_source(std::string_view source, EngineOptions options) {
  return Engine(parse(source), std::move(options));
}

void Engine::add_fact(const std::string& relation, const std::vector<std::string>& row) {
  add_facts(relation, {row});
}

void Engine::add_facts(const std::string& relation, const std::vector<std::vector<std::string>>& rows) {
  if (!store_.has(relation)) throw ProgramError("facts for undeclared relation '" + relation + "'");
  const std::size_t arity = store_.entry(relation).arity;
  TupleBuffer buf(arity);
  buf.reserve_rows(rows.size());
  std::vector<Value> ids(arity);
  for (const auto& row : rows) {
    if (row.size() != arity) {
      throw ProgramError("fact for '" + relation + "' has " + std::to_string(row.size()) + " columns, expected " +
                         std::to_string(arity));
    }
    for (std::size_t c = 0; c < arity; ++c) ids[c] = interner_.intern(row[c]);
    buf.push(ids);
  }
  store_.insert(relation, buf, options_.flush);
}

RunSummary Engine::run() {
  if (ran_) throw InternalError("Engine::run called twice");
  ran_ = true;
  auto t0 = Clock::now();
  for (auto& s : strata_) s.schedule = options_.schedule;
  if (options_.threads > 1) pool_ = std::make_unique<ThreadPool>(options_.threads);
  EvalContext ctx{program_, store_, interner_, options_, pool_.get()};
  RunSummary summary;
  summary.strata = evaluate_program(ctx, strata_);
  for (const auto& d : program_.relations) summary.cardinalities[d.name] = store_.size(d.name);
  summary.seconds = static_cast<double>(micros_since(t0)) / 1e6;
  return summary;
}

std::vector<std::vector<std::string>> Engine::rows(const std::string& relation) const {
  SortedColumns c = store_.contents(relation);
  std::vector<std::vector<std::string>> out(c.size(), std::vector<std::string>(c.arity()));
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t k = 0; k < c.arity(); ++k) out[i][k] = interner_.name(c.at(i, k));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace flatlog
