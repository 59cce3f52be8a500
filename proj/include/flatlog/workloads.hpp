#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flatlog/io.hpp"

// Deterministic synthetic programs and fact sets for tests and benchmarks.
namespace flatlog::workloads {

struct Workload {
  std::string name;
  std::string program;                   // Datalog source
  std::map<std::string, TextRows> facts; // input relations
  std::vector<std::string> outputs;      // relations worth comparing
};

// Small portable generator: splitmix64, so instances are identical on every
// platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Zipf(s) over [0, n).
class Zipf {
 public:
  Zipf(std::size_t n, double s);
  std::size_t operator()(Rng& rng) const;

 private:
  std::vector<double> cdf_;
};

// Directed graphs over nodes "0" .. "n-1", no self loops, no duplicates.
TextRows random_graph(std::size_t nodes, std::size_t edges, Rng& rng);
TextRows path_graph(std::size_t nodes);
TextRows binary_tree(std::size_t nodes);  // parent -> child edges

// Program texts.
extern const char* const kTcProgram;
extern const char* const kSgProgram;
extern const char* const kAndersenProgram;
extern const char* const kUnreachProgram;
extern const char* const kTriangleProgram;
extern const char* const kStarProgram;
extern const char* const kNeg2HopProgram;
extern const char* const kFracturedProgram;  // 12 recursive rules in one stratum
// Recursive CallGraphEdge fragment; with `split` the six-atom rule carries
// a .split directive isolating MethodLookup and HeapAllocation_Type.
std::string call_graph_program(bool split);

Workload tc(std::size_t nodes, std::size_t edges, std::uint64_t seed);
Workload tc_path(std::size_t nodes);
Workload sg(std::size_t nodes, std::size_t edges, std::uint64_t seed);
Workload sg_tree(std::size_t nodes);
Workload andersen(std::size_t statements, std::uint64_t seed);
Workload unreach(std::size_t nodes, std::size_t edges, std::uint64_t seed);
Workload triangle(std::size_t nodes, std::size_t edges, std::uint64_t seed);
Workload star(std::size_t keys, std::size_t tuples, std::uint64_t seed);
Workload neg2hop(std::size_t nodes, std::size_t edges, std::uint64_t seed);
Workload fractured(std::size_t scale, std::uint64_t seed);
Workload call_graph(std::size_t scale, std::uint64_t seed, bool split);

// Random connected conjunctive query: 2..max_atoms positive atoms of arity
// 2 or 3 over relations R0.., leading columns drawn from a Zipf
// distribution, occasional self-joins, repeated variables and constants.
// The program has one rule `Out(<all variables>) :- ...`.
Workload random_join(Rng& rng, std::size_t max_atoms, std::size_t max_tuples);

// Named suite at a named scale (tiny, small, medium, large) for `bench`.
// Throws std::invalid_argument for unknown names.
Workload suite(const std::string& name, const std::string& scale, std::uint64_t seed);
const std::vector<std::string>& suite_names();

std::size_t fact_count(const Workload& w);

}  // namespace flatlog::workloads
