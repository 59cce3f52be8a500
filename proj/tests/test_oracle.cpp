#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "flatlog/oracle.hpp"
#include "flatlog/parser.hpp"
#include "flatlog/verify.hpp"
#include "flatlog/workloads.hpp"

using namespace flatlog;

namespace {

oracle::FixpointResult fixpoint(const workloads::Workload& w) { return verify::run_oracle(w); }

}  // namespace

TEST(Oracle, PathClosureIsTriangularNumber) {
  for (std::size_t n : {1, 2, 5, 30}) {
    auto ref = fixpoint(workloads::tc_path(n));
    EXPECT_EQ(ref.relations.at("TC").size(), n * (n - 1) / 2);
  }
}

TEST(Oracle, ThreeCycle) {
  workloads::Workload w{"cycle", workloads::kTcProgram, {{"Edge", {{"1", "2"}, {"2", "3"}, {"3", "1"}}}}, {"TC"}};
  auto ref = fixpoint(w);
  EXPECT_EQ(ref.relations.at("TC").size(), 9u);
  for (const auto& c : ref.components) {
    if (c.recursive) EXPECT_EQ(c.rounds, 3u);
  }
}

TEST(Oracle, EmptyRelations) {
  workloads::Workload w{"empty", workloads::kUnreachProgram, {}, {"Unreach"}};
  auto ref = fixpoint(w);
  EXPECT_TRUE(ref.relations.at("TC").empty());
  EXPECT_TRUE(ref.relations.at("Unreach").empty());
}

TEST(Oracle, RuleOrderDoesNotMatter) {
  auto w = workloads::andersen(80, 3);
  auto base = fixpoint(w);
  Program p = parse(w.program);
  std::mt19937 rng(5);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(p.rules.begin(), p.rules.end(), rng);
    auto shuffled = oracle::naive_fixpoint(p, verify::fact_set(w));
    EXPECT_EQ(shuffled.relations, base.relations);
  }
}

TEST(Oracle, StarJoin) {
  auto star = R"(
.decl A(k:symbol, a:symbol)
.decl B(k:symbol, b:symbol)
.decl C(k:symbol, c:symbol)
.decl Out(k:symbol, a:symbol, b:symbol, c:symbol)
Out(k, a, b, c) :- A(k, a), B(k, b), C(k, c).
)";
  Program p = parse(star);
  oracle::FactSet facts = {{"A", {{"1", "x"}, {"1", "y"}, {"2", "z"}}}, {"B", {{"1", "u"}, {"2", "v"}}},
                           {"C", {{"1", "s"}, {"1", "t"}, {"3", "w"}}}};
  auto out = oracle::bruteforce_join(p.rules[0].body, {}, facts, {"k", "a", "b", "c"});
  EXPECT_EQ(out.size(), 4u);  // key 1: 2 x 1 x 2; key 2 has no C row
}

TEST(Oracle, NegationWithWildcards) {
  Program p = parse(R"(
.decl A(x:symbol)
.decl B(x:symbol, y:symbol)
.decl Out(x:symbol)
Out(x) :- A(x), !B(x, _).
)");
  oracle::FactSet facts = {{"A", {{"1"}, {"2"}, {"3"}}}, {"B", {{"2", "9"}}}};
  auto ref = oracle::naive_fixpoint(p, facts);
  EXPECT_EQ(oracle::sorted(ref.relations.at("Out")), (std::vector<oracle::Tuple>{{"1"}, {"3"}}));
}

TEST(Oracle, ConstantsAndInequality) {
  Program p = parse(R"(
.decl E(x:symbol, y:symbol)
.decl Out(y:symbol)
Out(y) :- E("a", y), y != "c".
)");
  oracle::FactSet facts = {{"E", {{"a", "b"}, {"a", "c"}, {"b", "d"}}}};
  auto ref = oracle::naive_fixpoint(p, facts);
  EXPECT_EQ(oracle::sorted(ref.relations.at("Out")), (std::vector<oracle::Tuple>{{"b"}}));
}
