#include "flatlog/verify.hpp"

#include <algorithm>
#include <set>

#include "flatlog/parser.hpp"

namespace flatlog::verify {

EngineRun run_engine(const workloads::Workload& w, EngineOptions options) {
  EngineRun run;
  auto user_hook = options.on_exec;
  options.on_exec = [&run, user_hook](const JoinPlan& plan, const ExecReport& report) {
    run.reports.push_back(report);
    if (user_hook) user_hook(plan, report);
  };
  Engine engine = Engine::from_source(w.program, std::move(options));
  for (const auto& [name, rows] : w.facts) engine.add_facts(name, rows);
  run.summary = engine.run();
  for (const auto& d : engine.program().relations) run.relations[d.name] = engine.rows(d.name);
  return run;
}

oracle::FactSet fact_set(const workloads::Workload& w) {
  oracle::FactSet out;
  for (const auto& [name, rows] : w.facts) out[name].insert(rows.begin(), rows.end());
  return out;
}

oracle::FixpointResult run_oracle(const workloads::Workload& w) { return oracle::naive_fixpoint(parse(w.program), fact_set(w)); }

TextRows rows_of(const oracle::Relation& rel) { return oracle::sorted(rel); }

namespace {

std::string show(const std::vector<std::string>& row) {
  std::string s = "(";
  for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + row[i];
  return s + ")";
}

}  // namespace

std::string compare_fixpoint(const workloads::Workload& w, const EngineRun& run, const oracle::FixpointResult& ref) {
  for (const auto& [name, rel] : ref.relations) {
    auto it = run.relations.find(name);
    if (it == run.relations.end()) return "engine lacks relation " + name;
    TextRows expect = rows_of(rel);
    if (it->second != expect) {
      std::string msg = w.name + ": relation " + name + " differs: engine " + std::to_string(it->second.size()) +
                        " tuples, oracle " + std::to_string(expect.size());
      std::vector<std::vector<std::string>> diff;
      std::set_symmetric_difference(it->second.begin(), it->second.end(), expect.begin(), expect.end(),
                                    std::back_inserter(diff));
      if (!diff.empty()) msg += "; first difference " + show(diff.front());
      return msg;
    }
  }
  for (const auto& st : run.summary.strata) {
    if (!st.recursive) continue;
    std::vector<std::string> rels = st.relations;
    std::sort(rels.begin(), rels.end());
    auto comp = std::find_if(ref.components.begin(), ref.components.end(),
                             [&](const oracle::ComponentRounds& c) { return c.relations == rels; });
    if (comp == ref.components.end()) return w.name + ": oracle has no component matching stratum " + std::to_string(st.stratum);
    if (comp->rounds != st.iterations) {
      return w.name + ": stratum " + std::to_string(st.stratum) + " took " + std::to_string(st.iterations) +
             " iterations, oracle " + std::to_string(comp->rounds) + " rounds";
    }
  }
  return {};
}

JoinRun run_single_rule(const workloads::Workload& w, std::size_t workers, ThreadPool* pool, bool instrument) {
  Program program = parse(w.program);
  Interner interner;
  RelationStore store;
  for (const auto& d : program.relations) store.declare(d.name, d.arity());
  for (const auto& [name, rows] : w.facts) {
    TupleBuffer buf(store.entry(name).arity);
    std::vector<Value> ids;
    for (const auto& row : rows) {
      ids.clear();
      for (const auto& v : row) ids.push_back(interner.intern(v));
      buf.push(ids);
    }
    store.insert(name, buf, FlushPolicy{});
  }
  const auto rule = static_cast<std::size_t>(
      std::find_if(program.rules.begin(), program.rules.end(), [](const Rule& r) { return !r.is_fact(); }) -
      program.rules.begin());
  JoinPlan plan = compile_plan(program, RuleInstance{rule, std::nullopt}, interner);
  PlanInputs inputs;
  for (const auto& src : plan.sources) inputs.sources.push_back(SourceView::of(store.index(src.relation, src.order).full));
  for (const auto& probe : plan.negated) inputs.negated.push_back(SourceView::of(store.index(probe.relation, probe.order).full));

  JoinRun run;
  TupleBuffer out = execute_plan(plan, inputs, ExecOptions{workers, pool, instrument}, &run.report);
  // Sort by the text order of the values: rank every interned id by its
  // string, sort row indices on ranks, then decode.
  std::vector<Value> ids(interner.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<Value>(i);
  std::sort(ids.begin(), ids.end(), [&](Value a, Value b) { return interner.name(a) < interner.name(b); });
  std::vector<std::uint32_t> rank(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) rank[ids[i]] = static_cast<std::uint32_t>(i);
  const std::size_t arity = out.arity();
  std::vector<std::size_t> order(out.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto ra = out.row(a), rb = out.row(b);
    for (std::size_t k = 0; k < arity; ++k) {
      if (ra[k] != rb[k]) return rank[ra[k]] < rank[rb[k]];
    }
    return false;
  });
  run.rows.reserve(out.size());
  for (std::size_t i : order) {
    std::vector<std::string> row;
    row.reserve(arity);
    for (Value v : out.row(i)) row.push_back(interner.name(v));
    run.rows.push_back(std::move(row));
  }
  return run;
}

TextRows bruteforce_single_rule(const workloads::Workload& w) {
  Program program = parse(w.program);
  const Rule& rule = *std::find_if(program.rules.begin(), program.rules.end(), [](const Rule& r) { return !r.is_fact(); });
  std::vector<std::string> projection;
  for (const auto& t : rule.head.args) projection.push_back(t.text);
  return oracle::sorted(oracle::bruteforce_join(rule.body, rule.inequalities, fact_set(w), projection));
}

void ReportTally::add(const std::vector<ExecReport>& reports) {
  for (const auto& r : reports) {
    ++executions;
    if (r.counted != r.emitted) ++count_mismatches;
    if (!r.instrumented || r.double_writes != 0 || r.gaps != 0) ++write_violations;
    if (!r.instrumented || r.peak_aux_tuples != r.output_tuples) ++aux_violations;
    if (r.work_total >= r.workers) {
      ++balance_checked;
      const std::uint64_t bound = (r.work_total + r.workers - 1) / r.workers;
      if (r.max_slice > bound) ++balance_violations;
    }
  }
}

std::string check_reports(const std::vector<ExecReport>& reports) {
  ReportTally t;
  t.add(reports);
  if (t.count_mismatches) return std::to_string(t.count_mismatches) + " executions with count/materialize divergence";
  if (t.write_violations) return std::to_string(t.write_violations) + " executions with overlapping writes or gaps";
  if (t.aux_violations) return std::to_string(t.aux_violations) + " executions with auxiliary storage beyond the output";
  if (t.balance_violations) return std::to_string(t.balance_violations) + " executions with a slice above ceil(T/p)";
  return {};
}

}  // namespace flatlog::verify
