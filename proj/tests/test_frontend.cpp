#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "flatlog/error.hpp"
#include "flatlog/oracle.hpp"
#include "flatlog/parser.hpp"
#include "flatlog/plan.hpp"
#include "flatlog/runtime.hpp"
#include "flatlog/split.hpp"
#include "flatlog/stratify.hpp"
#include "flatlog/verify.hpp"
#include "flatlog/workloads.hpp"

using namespace flatlog;

namespace {

const char* kTc = R"(
.decl Edge(x:symbol, y:symbol)
.decl TC(x:symbol, y:symbol)
.input Edge
.output TC
TC(x, y) :- Edge(x, y).
TC(x, y) :- TC(x, z), Edge(z, y).
)";

const char* kCge = R"(
.decl Reachable(j:symbol)
.decl Instruction_Method(i:symbol, j:symbol)
.decl VirtualMethodInvoc(i:symbol, b:symbol, sn:symbol, dsc:symbol)
.decl VarPointsTo(h:symbol, b:symbol)
.decl HeapAllocation_Type(h:symbol, t:symbol)
.decl MethodLookup(sn:symbol, dsc:symbol, t:symbol, m:symbol)
.decl CallGraphEdge(i:symbol, m:symbol)
cge: CallGraphEdge(i, m) :-
    Reachable(j), Instruction_Method(i, j),
    VirtualMethodInvoc(i, b, sn, dsc),
    VarPointsTo(h, b), HeapAllocation_Type(h, t),
    MethodLookup(sn, dsc, t, m).
)";

std::string decls(const std::string& extra) {
  return ".decl A(x:symbol)\n.decl B(x:symbol)\n.decl C(x:symbol)\n.decl E(x:symbol, y:symbol)\n" + extra;
}

std::size_t error_line(const std::string& src) {
  try {
    parse(src);
  } catch (const ProgramError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// parse

TEST(Parse, TransitiveClosure) {
  Program p = parse(kTc);
  ASSERT_EQ(p.rules.size(), 2u);
  EXPECT_EQ(p.find("TC")->arity(), 2u);
  EXPECT_EQ(p.find("Edge")->arity(), 2u);
  EXPECT_TRUE(p.find("Edge")->input);
  EXPECT_TRUE(p.find("TC")->output);
  EXPECT_EQ(p.rules[1].to_string(), "TC(x, y) :- TC(x, z), Edge(z, y).");
}

TEST(Parse, CallGraphRuleShape) {
  Program p = parse(kCge);
  ASSERT_EQ(p.rules.size(), 1u);
  const Rule& r = p.rules[0];
  EXPECT_EQ(r.label, "cge");
  EXPECT_EQ(r.body.size(), 6u);
  std::map<std::string, int> atoms_per_var;
  for (const auto& a : r.body) {
    for (const auto& v : a.variables()) ++atoms_per_var[v];
  }
  // Seven variables are intersected (shared by two or more atoms); m only
  // appears in MethodLookup and is enumerated, not intersected.
  EXPECT_EQ(atoms_per_var.size(), 8u);
  EXPECT_EQ(std::count_if(atoms_per_var.begin(), atoms_per_var.end(), [](const auto& kv) { return kv.second >= 2; }), 7);
  EXPECT_EQ(atoms_per_var.at("m"), 1);
}

TEST(Parse, FactsConstantsComments) {
  Program p = parse(decls(R"(
    // line comment
    E("a b", 3). # hash comment
    /* block
       comment */
    A(x) :- E(x, "c"), !B(x).
  )"));
  ASSERT_EQ(p.rules.size(), 2u);
  EXPECT_TRUE(p.rules[0].is_fact());
  EXPECT_EQ(p.rules[0].head.args[0].text, "a b");
  EXPECT_TRUE(p.rules[0].head.args[1].is_constant());
  EXPECT_TRUE(p.rules[1].body[1].negated);
}

TEST(Parse, Errors) {
  EXPECT_THROW(parse(decls("A(x) :- E(y, z).")), ProgramError);               // unbound head variable
  EXPECT_THROW(parse(decls("A(x) :- E(x).")), ProgramError);                  // arity mismatch
  EXPECT_THROW(parse(decls("A(x) :- D(x).")), ProgramError);                  // undeclared
  EXPECT_THROW(parse(decls("A(x) :- B(x), !E(x, y).")), ProgramError);        // unsafe negation
  EXPECT_THROW(parse(decls("A(_) :- B(x).")), ProgramError);                  // anonymous head
  EXPECT_THROW(parse(decls("A(x) :- B(x), x != y.")), ProgramError);          // unbound inequality
  EXPECT_THROW(parse(decls(".frobnicate A")), ProgramError);
  EXPECT_NO_THROW(parse(decls("A(x) :- B(x), !E(x, _).")));
  EXPECT_EQ(error_line(decls("A(x) :- B(x).\n\nA(x) :- B(x)")), 7u);        // missing final '.'
  EXPECT_EQ(error_line(decls("A(x) :- B(x) C(x).")), 5u);
}

// ---------------------------------------------------------------------------
// stratify

TEST(Stratify, TransitiveClosureHasBaseAndRecursiveStrata) {
  auto strata = stratify(parse(kTc));
  ASSERT_EQ(strata.size(), 2u);
  EXPECT_FALSE(strata[0].recursive);
  EXPECT_TRUE(strata[1].recursive);
  EXPECT_EQ(strata[0].relations, std::vector<std::string>{"TC"});
  EXPECT_EQ(strata[1].rules, std::vector<std::size_t>{1});
}

TEST(Stratify, AcyclicChain) {
  auto strata = stratify(parse(decls("C(x) :- B(x).\nB(x) :- A(x).\nA(x) :- E(x, _).")));
  ASSERT_EQ(strata.size(), 3u);
  EXPECT_EQ(strata[0].relations, std::vector<std::string>{"A"});
  EXPECT_EQ(strata[1].relations, std::vector<std::string>{"B"});
  EXPECT_EQ(strata[2].relations, std::vector<std::string>{"C"});
}

TEST(Stratify, NegationInsideCycleIsRejected) {
  EXPECT_THROW(stratify(parse(decls("A(x) :- B(x), !A(x)."))), ProgramError);
  EXPECT_THROW(stratify(parse(decls("A(x) :- C(x), !B(x).\nB(x) :- A(x).\nC(x) :- E(x, _)."))), ProgramError);
}

TEST(Stratify, NegationReadsOnlyLowerStrata) {
  auto w = workloads::unreach(10, 20, 1);
  Program p = parse(w.program);
  auto strata = stratify(p);
  for (std::size_t i = 0; i < strata.size(); ++i) {
    for (std::size_t r : strata[i].rules) {
      for (const auto& a : p.rules[r].body) {
        if (!a.negated) continue;
        bool lower = false;
        for (std::size_t j = 0; j < i; ++j) {
          const auto& rels = strata[j].relations;
          lower |= std::find(rels.begin(), rels.end(), a.relation) != rels.end();
        }
        EXPECT_TRUE(lower) << a.relation;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// semi-naive rewrite

TEST(Seminaive, InstanceCountEqualsRecursiveAtoms) {
  Program sg = parse(workloads::kSgProgram);
  auto strata = stratify(sg);
  const Stratum& rec = *std::find_if(strata.begin(), strata.end(), [](const Stratum& s) { return s.recursive; });
  auto inst = seminaive_rewrite(sg, rec);
  ASSERT_EQ(inst.size(), 1u);
  EXPECT_EQ(inst[0].delta_atom, std::optional<std::size_t>{1});

  Program andersen = parse(workloads::kAndersenProgram);
  auto astrata = stratify(andersen);
  const Stratum& arec = *std::find_if(astrata.begin(), astrata.end(), [](const Stratum& s) { return s.recursive; });
  // Assign rule: one recursive atom; Load and Store rules: two each.
  EXPECT_EQ(seminaive_rewrite(andersen, arec).size(), 5u);

  const Stratum& base = *std::find_if(astrata.begin(), astrata.end(), [](const Stratum& s) { return !s.recursive; });
  auto b = seminaive_rewrite(andersen, base);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_FALSE(b[0].delta_atom.has_value());
}

TEST(Seminaive, EqualsNaiveOnRandomGraphs) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (auto w : {workloads::tc(15, 30, seed), workloads::sg(15, 30, seed), workloads::andersen(60, seed)}) {
      auto run = verify::run_engine(w, EngineOptions{});
      EXPECT_EQ(verify::compare_fixpoint(w, run, verify::run_oracle(w)), "") << w.name << " seed " << seed;
    }
  }
}

// ---------------------------------------------------------------------------
// variable order and plans

TEST(VariableOrder, DeltaAtomFirst) {
  Program p = parse(kTc);
  EXPECT_EQ(choose_variable_order(p.rules[1], 0), (std::vector<std::string>{"x", "z", "y"}));
}

TEST(VariableOrder, SingleAtomKeepsArgumentOrder) {
  Program p = parse(kTc);
  EXPECT_EQ(choose_variable_order(p.rules[0], std::nullopt), (std::vector<std::string>{"x", "y"}));
}

TEST(VariableOrder, TriangleTieBreakByFirstOccurrence) {
  Program p = parse(decls(".decl T3(x:symbol, y:symbol, z:symbol)\nT3(x, y, z) :- E(x, y), E(y, z), E(z, x)."));
  EXPECT_EQ(choose_variable_order(p.rules[0], std::nullopt), (std::vector<std::string>{"x", "y", "z"}));
}

TEST(VariableOrder, MostConstrainedFirst) {
  Program p = parse(decls("A(y) :- E(x, y), E(y, z), B(y), C(z)."));
  // y: 3 atoms, then z: 2, then x: 1.
  EXPECT_EQ(choose_variable_order(p.rules[0], std::nullopt), (std::vector<std::string>{"y", "z", "x"}));
}

TEST(Plan, TransitiveClosureDeltaInstance) {
  Program p = parse(kTc);
  Interner in;
  JoinPlan plan = compile_plan(p, RuleInstance{1, 0}, in);
  EXPECT_EQ(plan.variable_order, (std::vector<std::string>{"x", "z", "y"}));
  ASSERT_EQ(plan.sources.size(), 2u);
  EXPECT_EQ(plan.sources[0].version, Version::Delta);
  EXPECT_EQ(plan.sources[0].order, (ColumnOrder{0, 1}));
  EXPECT_EQ(plan.sources[1].version, Version::Full);
  EXPECT_EQ(plan.delta_source, std::optional<std::size_t>{0});
  EXPECT_EQ(plan.outer, std::optional<std::size_t>{0});
  EXPECT_TRUE(check_prefix_property(plan));
}

TEST(Plan, ConstantsComeFirstAndNegationAttachesAtLastVariable) {
  Program p = parse(decls("A(y) :- E(\"k\", y), !E(y, y), B(y)."));
  Interner in;
  JoinPlan plan = compile_plan(p, RuleInstance{0, std::nullopt}, in);
  ASSERT_EQ(plan.sources.size(), 2u);
  EXPECT_EQ(plan.sources[0].const_prefix, 1u);
  EXPECT_TRUE(plan.sources[0].columns[0].constant);
  ASSERT_EQ(plan.negated.size(), 1u);
  EXPECT_EQ(plan.negated[0].level, 0u);
  EXPECT_TRUE(check_prefix_property(plan));
}

TEST(Plan, EveryWorkloadPlanHasThePrefixProperty) {
  for (const auto& name : workloads::suite_names()) {
    auto w = workloads::suite(name, "tiny", 1);
    Engine e = Engine::from_source(w.program);
    for (const auto& s : e.strata()) {
      for (const auto& inst : seminaive_rewrite(e.program(), s)) {
        EXPECT_TRUE(check_prefix_property(compile_plan(e.program(), inst, e.interner()))) << name;
      }
    }
  }
}

TEST(Plan, BrokenPrefixIsDetected) {
  Program p = parse(kTc);
  Interner in;
  JoinPlan plan = compile_plan(p, RuleInstance{1, 0}, in);
  std::swap(plan.sources[1].columns[0], plan.sources[1].columns[1]);
  EXPECT_FALSE(check_prefix_property(plan));
}

// ---------------------------------------------------------------------------
// helper splitting

TEST(Split, CallGraphHelper) {
  Program p = parse(std::string(kCge) + ".split cge { MethodLookup, HeapAllocation_Type } -> HelpNT(sn, dsc, m, h)\n");
  ASSERT_EQ(p.splits.size(), 1u);
  auto [helper, consumer] = split_helper(p, p.rules[0], p.splits[0]);
  EXPECT_EQ(helper.to_string(), "HelpNT(sn, dsc, m, h) :- MethodLookup(sn, dsc, t, m), HeapAllocation_Type(h, t).");
  EXPECT_EQ(consumer.to_string(),
            "CallGraphEdge(i, m) :- Reachable(j), Instruction_Method(i, j), VirtualMethodInvoc(i, b, sn, dsc), "
            "VarPointsTo(h, b), HelpNT(sn, dsc, m, h).");
  EXPECT_EQ(consumer.body.size(), 5u);

  Program applied = apply_splits(p);
  ASSERT_NE(applied.find("HelpNT"), nullptr);
  EXPECT_TRUE(applied.find("HelpNT")->helper);
  EXPECT_EQ(applied.rules.size(), 2u);
}

TEST(Split, WholeBodyGivesCopyRule) {
  Program p = parse(decls("r: A(x) :- E(x, y), B(y).\n.split r { E, B } -> H(x)\n"));
  auto [helper, consumer] = split_helper(p, p.rules[0], p.splits[0]);
  EXPECT_EQ(helper.body.size(), 2u);
  EXPECT_EQ(consumer.to_string(), "A(x) :- H(x).");
}

TEST(Split, Rejections) {
  auto bad = [](const std::string& directive) {
    Program p = parse(decls(".decl D(x:symbol, y:symbol)\nr: A(x) :- E(x, y), B(y), D(z, w), C(x).\n" + directive));
    return [p] { apply_splits(p); };
  };
  EXPECT_THROW(bad(".split r { D } -> H(z, w)")(), ProgramError);     // disconnected: cross product
  EXPECT_THROW(bad(".split r { Q } -> H(x)")(), ProgramError);        // unknown atom
  EXPECT_THROW(bad(".split r { B } -> H(x)")(), ProgramError);        // wrong boundary
  EXPECT_THROW(bad(".split nope { B } -> H(y)")(), ProgramError);     // unknown rule
  EXPECT_THROW(bad(".split r { B, B } -> H(y)")(), ProgramError);     // repeated atom
  EXPECT_NO_THROW(bad(".split r { B } -> H(y)")());

  Program rec = parse(decls("r: A(x) :- A(x), B(x).\n.split r { A } -> H(x)\n"));
  EXPECT_THROW(apply_splits(rec), ProgramError);                      // recursive atom
}

TEST(Split, SoundOnRandomFourAtomRules) {
  const char* program = R"(
.decl P(a:symbol, b:symbol)
.decl Q(b:symbol, c:symbol)
.decl S(c:symbol, d:symbol)
.decl U(d:symbol, a:symbol)
.decl Out(a:symbol, c:symbol)
.input P, Q, S, U
r: Out(a, c) :- P(a, b), Q(b, c), S(c, d), U(d, a).
)";
  const std::string split = std::string(program) + ".split r { S, U } -> H(c, a)\n";
  workloads::Rng rng(99);
  for (int round = 0; round < 20; ++round) {
    workloads::Workload w{"four", program, {}, {"Out"}};
    for (const char* rel : {"P", "Q", "S", "U"}) w.facts[rel] = workloads::random_graph(8, 20, rng);
    workloads::Workload ws = w;
    ws.program = split;
    auto plain = verify::run_engine(w, EngineOptions{});
    auto splitted = verify::run_engine(ws, EngineOptions{});
    EXPECT_EQ(plain.relations.at("Out"), splitted.relations.at("Out"));
    EXPECT_EQ(verify::compare_fixpoint(ws, splitted, verify::run_oracle(w)), "");
  }
}
