#include "flatlog/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace flatlog::workloads {

std::uint64_t Rng::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Zipf::Zipf(std::size_t n, double s) : cdf_(n) {
  double acc = 0;
  for (std::size_t k = 0; k < n; ++k) {
    acc += 1.0 / std::pow(static_cast<double>(k + 1), s);
    cdf_[k] = acc;
  }
  for (auto& c : cdf_) c /= acc;
}

std::size_t Zipf::operator()(Rng& rng) const {
  const double u = rng.unit();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

namespace {

std::string node(std::size_t i) { return std::to_string(i); }

std::string tag(const char* prefix, std::size_t i) { return prefix + std::to_string(i); }

// Distinct rows, emitted in generation order.
class RowSet {
 public:
  bool add(std::vector<std::string> row) {
    if (!seen_.insert(row).second) return false;
    rows_.push_back(std::move(row));
    return true;
  }
  std::size_t size() const { return rows_.size(); }
  TextRows take() { return std::move(rows_); }

 private:
  std::set<std::vector<std::string>> seen_;
  TextRows rows_;
};

}  // namespace

TextRows random_graph(std::size_t nodes, std::size_t edges, Rng& rng) {
  RowSet out;
  if (nodes < 2) return {};
  edges = std::min(edges, nodes * (nodes - 1));
  while (out.size() < edges) {
    std::size_t a = rng.below(nodes), b = rng.below(nodes);
    if (a != b) out.add({node(a), node(b)});
  }
  return out.take();
}

TextRows path_graph(std::size_t nodes) {
  TextRows out;
  for (std::size_t i = 0; i + 1 < nodes; ++i) out.push_back({node(i), node(i + 1)});
  return out;
}

TextRows binary_tree(std::size_t nodes) {
  TextRows out;
  for (std::size_t i = 1; i < nodes; ++i) out.push_back({node((i - 1) / 2), node(i)});
  return out;
}

const char* const kTcProgram = R"(.decl Edge(x:symbol, y:symbol)
.decl TC(x:symbol, y:symbol)
.input Edge
.output TC

TC(x, y) :- Edge(x, y).
TC(x, y) :- TC(x, z), Edge(z, y).
)";

const char* const kSgProgram = R"(.decl Edge(x:symbol, y:symbol)
.decl SG(x:symbol, y:symbol)
.input Edge
.output SG

SG(x, y) :- Edge(p, x), Edge(p, y), x != y.
SG(x, y) :- Edge(a, x), SG(a, b), Edge(b, y).
)";

const char* const kAndersenProgram = R"(.decl AddressOf(y:symbol, x:symbol)
.decl Assign(y:symbol, x:symbol)
.decl Load(y:symbol, x:symbol)
.decl Store(y:symbol, x:symbol)
.decl PointsTo(y:symbol, x:symbol)
.input AddressOf, Assign, Load, Store
.output PointsTo

// y = &x
PointsTo(y, x) :- AddressOf(y, x).
// y = z
PointsTo(y, x) :- Assign(y, z), PointsTo(z, x).
// y = *x
PointsTo(y, w) :- Load(y, x), PointsTo(x, z), PointsTo(z, w).
// *y = x
PointsTo(z, w) :- Store(y, x), PointsTo(y, z), PointsTo(x, w).
)";

const char* const kUnreachProgram = R"(.decl Edge(x:symbol, y:symbol)
.decl Root(x:symbol)
.decl Node(x:symbol)
.decl TC(x:symbol, y:symbol)
.decl Unreach(x:symbol)
.input Edge, Root
.output TC, Unreach

Node(x) :- Edge(x, _).
Node(y) :- Edge(_, y).
TC(x, y) :- Edge(x, y).
TC(x, y) :- TC(x, z), Edge(z, y).
Unreach(x) :- Node(x), Root(r), !TC(r, x).
)";

const char* const kTriangleProgram = R"(.decl Edge(x:symbol, y:symbol)
.decl Triangle(x:symbol, y:symbol, z:symbol)
.input Edge
.output Triangle

Triangle(x, y, z) :- Edge(x, y), Edge(y, z), Edge(z, x).
)";

const char* const kStarProgram = R"(.decl Hub(x:symbol)
.decl R1(x:symbol, a:symbol)
.decl R2(x:symbol, b:symbol)
.decl R3(x:symbol, c:symbol)
.decl Star(x:symbol, a:symbol, b:symbol, c:symbol)
.input Hub, R1, R2, R3
.output Star

Star(x, a, b, c) :- Hub(x), R1(x, a), R2(x, b), R3(x, c).
)";

const char* const kNeg2HopProgram = R"(.decl Knows(a:symbol, b:symbol)
.decl TwoHop(a:symbol, c:symbol)
.input Knows
.output TwoHop

TwoHop(a, c) :- Knows(a, b), Knows(b, c), a != c, !Knows(a, c).
)";

const char* const kFracturedProgram = R"(// Pointer analysis fragment whose main stratum holds twelve independent
// recursive rules.
.decl MainMethod(m:symbol)
.decl Alloc(h:symbol, v:symbol, m:symbol)
.decl Move(to:symbol, from:symbol)
.decl LoadField(to:symbol, base:symbol, f:symbol)
.decl StoreField(base:symbol, f:symbol, from:symbol)
.decl ArrayLoad(to:symbol, base:symbol)
.decl ArrayStore(base:symbol, from:symbol)
.decl StaticLoad(to:symbol, f:symbol)
.decl StaticStore(f:symbol, from:symbol)
.decl InsnMethod(i:symbol, m:symbol)
.decl VirtualCall(i:symbol, b:symbol, sig:symbol)
.decl HeapType(h:symbol, t:symbol)
.decl Lookup(sig:symbol, t:symbol, m:symbol)
.decl ActualArg(i:symbol, n:symbol, a:symbol)
.decl FormalParam(m:symbol, n:symbol, p:symbol)
.decl ReturnVar(m:symbol, v:symbol)
.decl AssignReturn(i:symbol, r:symbol)
.decl Reachable(m:symbol)
.decl CallGraphEdge(i:symbol, m:symbol)
.decl VarPointsTo(h:symbol, v:symbol)
.decl FieldPointsTo(bh:symbol, f:symbol, h:symbol)
.decl ArrayPointsTo(bh:symbol, h:symbol)
.decl StaticPointsTo(f:symbol, h:symbol)
.input MainMethod, Alloc, Move, LoadField, StoreField, ArrayLoad, ArrayStore, StaticLoad, StaticStore
.input InsnMethod, VirtualCall, HeapType, Lookup, ActualArg, FormalParam, ReturnVar, AssignReturn
.output Reachable, CallGraphEdge, VarPointsTo, FieldPointsTo, ArrayPointsTo, StaticPointsTo

Reachable(m) :- MainMethod(m).

VarPointsTo(h, v) :- Alloc(h, v, m), Reachable(m).
VarPointsTo(h, to) :- Move(to, from), VarPointsTo(h, from).
VarPointsTo(h, to) :- LoadField(to, base, f), VarPointsTo(bh, base), FieldPointsTo(bh, f, h).
FieldPointsTo(bh, f, h) :- StoreField(base, f, from), VarPointsTo(h, from), VarPointsTo(bh, base).
ArrayPointsTo(bh, h) :- ArrayStore(base, from), VarPointsTo(h, from), VarPointsTo(bh, base).
VarPointsTo(h, to) :- ArrayLoad(to, base), VarPointsTo(bh, base), ArrayPointsTo(bh, h).
StaticPointsTo(f, h) :- StaticStore(f, from), VarPointsTo(h, from).
VarPointsTo(h, to) :- StaticLoad(to, f), StaticPointsTo(f, h).
Reachable(m) :- CallGraphEdge(_, m).
CallGraphEdge(i, m) :- Reachable(j), InsnMethod(i, j), VirtualCall(i, b, sig), VarPointsTo(h, b), HeapType(h, t), Lookup(sig, t, m).
VarPointsTo(h, p) :- CallGraphEdge(i, m), ActualArg(i, n, a), FormalParam(m, n, p), VarPointsTo(h, a).
VarPointsTo(h, r) :- CallGraphEdge(i, m), ReturnVar(m, v), AssignReturn(i, r), VarPointsTo(h, v).
)";

namespace {

const char* const kCallGraphBody = R"(.decl MainMethod(m:symbol)
.decl Reachable(j:symbol)
.decl Instruction_Method(i:symbol, j:symbol)
.decl VirtualMethodInvoc(i:symbol, b:symbol, sn:symbol, dsc:symbol)
.decl VarPointsTo(h:symbol, b:symbol)
.decl HeapAllocation_Type(h:symbol, t:symbol)
.decl MethodLookup(sn:symbol, dsc:symbol, t:symbol, m:symbol)
.decl AssignHeapAllocation(h:symbol, v:symbol, m:symbol)
.decl Assign(from:symbol, to:symbol)
.decl ActualParam(i:symbol, a:symbol)
.decl FormalParam(m:symbol, p:symbol)
.decl CallGraphEdge(i:symbol, m:symbol)
.input MainMethod, Instruction_Method, VirtualMethodInvoc, HeapAllocation_Type, MethodLookup
.input AssignHeapAllocation, Assign, ActualParam, FormalParam
.output CallGraphEdge, VarPointsTo, Reachable

Reachable(m) :- MainMethod(m).
Reachable(m) :- CallGraphEdge(_, m).
VarPointsTo(h, v) :- AssignHeapAllocation(h, v, m), Reachable(m).
VarPointsTo(h, to) :- Assign(from, to), VarPointsTo(h, from).
VarPointsTo(h, p) :- CallGraphEdge(i, m), ActualParam(i, a), FormalParam(m, p), VarPointsTo(h, a).
cge: CallGraphEdge(i, m) :-
    Reachable(j), Instruction_Method(i, j),
    VirtualMethodInvoc(i, b, sn, dsc),
    VarPointsTo(h, b), HeapAllocation_Type(h, t),
    MethodLookup(sn, dsc, t, m).
)";

}  // namespace

std::string call_graph_program(bool split) {
  std::string out = kCallGraphBody;
  if (split) out += ".split cge { MethodLookup, HeapAllocation_Type } -> HelpNT(sn, dsc, m, h)\n";
  return out;
}

// ---------------------------------------------------------------------------

Workload tc(std::size_t nodes, std::size_t edges, std::uint64_t seed) {
  Rng rng(seed);
  return {"tc", kTcProgram, {{"Edge", random_graph(nodes, edges, rng)}}, {"TC"}};
}

Workload tc_path(std::size_t nodes) { return {"tc", kTcProgram, {{"Edge", path_graph(nodes)}}, {"TC"}}; }

Workload sg(std::size_t nodes, std::size_t edges, std::uint64_t seed) {
  Rng rng(seed);
  return {"sg", kSgProgram, {{"Edge", random_graph(nodes, edges, rng)}}, {"SG"}};
}

Workload sg_tree(std::size_t nodes) { return {"sg", kSgProgram, {{"Edge", binary_tree(nodes)}}, {"SG"}}; }

Workload andersen(std::size_t statements, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t vars = std::max<std::size_t>(4, statements / 2);
  Zipf pick(vars, 0.8);
  RowSet addr, assign, load, store;
  for (std::size_t s = 0; s < statements; ++s) {
    std::vector<std::string> row = {tag("v", pick(rng)), tag("v", pick(rng))};
    switch (rng.below(10)) {
      case 0: case 1: case 2: addr.add(std::move(row)); break;
      case 3: case 4: case 5: case 6: assign.add(std::move(row)); break;
      case 7: case 8: load.add(std::move(row)); break;
      default: store.add(std::move(row)); break;
    }
  }
  return {"andersen",
          kAndersenProgram,
          {{"AddressOf", addr.take()}, {"Assign", assign.take()}, {"Load", load.take()}, {"Store", store.take()}},
          {"PointsTo"}};
}

Workload unreach(std::size_t nodes, std::size_t edges, std::uint64_t seed) {
  Rng rng(seed);
  return {"unreach",
          kUnreachProgram,
          {{"Edge", random_graph(nodes, edges, rng)}, {"Root", {{node(0)}}}},
          {"TC", "Unreach"}};
}

Workload triangle(std::size_t nodes, std::size_t edges, std::uint64_t seed) {
  // Power-law endpoints so a few hubs carry most of the triangles.
  Rng rng(seed);
  Zipf pick(nodes, 0.9);
  RowSet out;
  edges = std::min(edges, nodes * (nodes - 1) / 2);
  for (std::size_t tries = 0; out.size() < edges && tries < edges * 50; ++tries) {
    std::size_t a = pick(rng), b = rng.below(nodes);
    if (a != b) out.add({node(a), node(b)});
  }
  return {"triangle", kTriangleProgram, {{"Edge", out.take()}}, {"Triangle"}};
}

Workload star(std::size_t keys, std::size_t tuples, std::uint64_t seed) {
  Rng rng(seed);
  Zipf pick(keys, 1.0);
  RowSet hub;
  for (std::size_t k = 0; k < keys; k += 2) hub.add({tag("k", k)});
  Workload w{"star", kStarProgram, {{"Hub", hub.take()}}, {"Star"}};
  for (const char* r : {"R1", "R2", "R3"}) {
    RowSet rows;
    for (std::size_t tries = 0; rows.size() < tuples && tries < tuples * 50; ++tries) {
      rows.add({tag("k", pick(rng)), tag("a", rng.below(tuples))});
    }
    w.facts[r] = rows.take();
  }
  return w;
}

Workload neg2hop(std::size_t nodes, std::size_t edges, std::uint64_t seed) {
  Rng rng(seed);
  return {"neg2hop", kNeg2HopProgram, {{"Knows", random_graph(nodes, edges, rng)}}, {"TwoHop"}};
}

Workload fractured(std::size_t scale, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t methods = std::max<std::size_t>(2, scale);
  const std::size_t vars_per = 4;
  const std::size_t vars = methods * vars_per;
  const std::size_t heaps = methods * 2;
  const std::size_t types = std::max<std::size_t>(2, methods / 3);
  const std::size_t sigs = std::max<std::size_t>(2, methods / 2);
  const std::size_t fields = 3;
  Zipf type_pick(types, 1.2);
  auto var_of = [&](std::size_t m) { return tag("v", m * vars_per + rng.below(vars_per)); };
  auto any_var = [&] { return tag("v", rng.below(vars)); };

  std::map<std::string, RowSet> f;
  f["MainMethod"].add({tag("m", 0)});
  for (std::size_t h = 0; h < heaps; ++h) {
    std::size_t m = rng.below(methods);
    f["Alloc"].add({tag("h", h), var_of(m), tag("m", m)});
    f["HeapType"].add({tag("h", h), tag("t", type_pick(rng))});
  }
  for (std::size_t s = 0; s < sigs; ++s) {
    for (std::size_t t = 0; t < types; ++t) {
      if (rng.below(3) != 0) f["Lookup"].add({tag("s", s), tag("t", t), tag("m", rng.below(methods))});
    }
  }
  std::size_t insn = 0;
  for (std::size_t m = 0; m < methods; ++m) {
    f["ReturnVar"].add({tag("m", m), var_of(m)});
    f["FormalParam"].add({tag("m", m), "0", var_of(m)});
    for (std::size_t k = 0; k < 2; ++k) {
      std::string i = tag("i", insn++);
      f["InsnMethod"].add({i, tag("m", m)});
      f["VirtualCall"].add({i, var_of(m), tag("s", rng.below(sigs))});
      f["ActualArg"].add({i, "0", var_of(m)});
      f["AssignReturn"].add({i, var_of(m)});
    }
    f["Move"].add({var_of(m), var_of(m)});
    f["Move"].add({any_var(), var_of(m)});
    const std::string fld = tag("f", rng.below(fields));
    f["StoreField"].add({var_of(m), fld, var_of(m)});
    f["LoadField"].add({var_of(m), any_var(), fld});
    f["ArrayStore"].add({var_of(m), var_of(m)});
    f["ArrayLoad"].add({var_of(m), any_var()});
    const std::string sf = tag("g", rng.below(fields));
    f["StaticStore"].add({sf, var_of(m)});
    f["StaticLoad"].add({var_of(m), sf});
  }
  Workload w{"fractured", kFracturedProgram, {},
             {"Reachable", "CallGraphEdge", "VarPointsTo", "FieldPointsTo", "ArrayPointsTo", "StaticPointsTo"}};
  for (auto& [name, rows] : f) w.facts[name] = rows.take();
  return w;
}

Workload call_graph(std::size_t scale, std::uint64_t seed, bool split) {
  Rng rng(seed);
  const std::size_t methods = std::max<std::size_t>(2, scale);
  const std::size_t vars_per = 4;
  const std::size_t heaps = methods * 3;
  const std::size_t types = std::max<std::size_t>(3, methods / 4);
  const std::size_t names = std::max<std::size_t>(2, methods / 3);
  // A handful of base types dominate the allocations, which is the skew the
  // helper split is meant to lift to the root.
  Zipf type_pick(types, 1.5);
  auto var_of = [&](std::size_t m) { return tag("v", m * vars_per + rng.below(vars_per)); };

  std::map<std::string, RowSet> f;
  f["MainMethod"].add({tag("m", 0)});
  for (std::size_t h = 0; h < heaps; ++h) {
    std::size_t m = rng.below(methods);
    f["AssignHeapAllocation"].add({tag("h", h), var_of(m), tag("m", m)});
    f["HeapAllocation_Type"].add({tag("h", h), tag("t", type_pick(rng))});
  }
  for (std::size_t sn = 0; sn < names; ++sn) {
    const std::string dsc = tag("d", sn % 3);
    for (std::size_t t = 0; t < types; ++t) {
      if (t == 0 || rng.below(2) == 0) f["MethodLookup"].add({tag("n", sn), dsc, tag("t", t), tag("m", rng.below(methods))});
    }
  }
  std::size_t insn = 0;
  for (std::size_t m = 0; m < methods; ++m) {
    f["FormalParam"].add({tag("m", m), var_of(m)});
    f["Assign"].add({var_of(m), var_of(m)});
    f["Assign"].add({var_of(rng.below(methods)), var_of(m)});
    for (std::size_t k = 0; k < 3; ++k) {
      std::string i = tag("i", insn++);
      const std::size_t sn = rng.below(names);
      f["Instruction_Method"].add({i, tag("m", m)});
      f["VirtualMethodInvoc"].add({i, var_of(m), tag("n", sn), tag("d", sn % 3)});
      f["ActualParam"].add({i, var_of(m)});
    }
  }
  Workload w{split ? "callgraph_split" : "callgraph", call_graph_program(split), {},
             {"CallGraphEdge", "VarPointsTo", "Reachable"}};
  for (auto& [name, rows] : f) w.facts[name] = rows.take();
  return w;
}

Workload random_join(Rng& rng, std::size_t max_atoms, std::size_t max_tuples) {
  const std::size_t atoms = 2 + rng.below(std::max<std::size_t>(1, max_atoms - 1));
  const std::size_t domain = 40 + rng.below(120);
  Zipf skew(domain, 0.6 + rng.unit() * 0.6);

  std::vector<std::size_t> arity;  // per relation
  std::vector<std::string> vars;
  std::string body;
  for (std::size_t a = 0; a < atoms; ++a) {
    std::size_t rel = arity.size();
    if (a > 0 && rng.below(5) == 0) {
      rel = rng.below(arity.size());  // self-join on an earlier relation
    } else {
      arity.push_back(2 + rng.below(2));
    }
    std::vector<std::string> args;
    for (std::size_t c = 0; c < arity[rel]; ++c) {
      const bool must_link = a > 0 && c == 0;
      std::string arg;
      if (must_link || (!vars.empty() && rng.below(3) == 0)) {
        arg = vars[rng.below(vars.size())];
      } else if (c > 0 && rng.below(12) == 0) {
        arg = "\"" + std::to_string(skew(rng)) + "\"";
      } else {
        vars.push_back("x" + std::to_string(vars.size()));
        arg = vars.back();
      }
      args.push_back(arg);
    }
    // Linking through the first argument only keeps the query connected.
    if (a > 0) std::rotate(args.begin(), args.begin() + static_cast<long>(rng.below(args.size())), args.end());
    body += (a ? ", R" : "R") + std::to_string(rel) + "(";
    for (std::size_t c = 0; c < args.size(); ++c) body += (c ? ", " : "") + args[c];
    body += ")";
  }

  Workload w;
  w.name = "join";
  for (std::size_t r = 0; r < arity.size(); ++r) {
    w.program += ".decl R" + std::to_string(r) + "(";
    for (std::size_t c = 0; c < arity[r]; ++c) w.program += (c ? ", c" : "c") + std::to_string(c) + ":symbol";
    w.program += ")\n.input R" + std::to_string(r) + "\n";
    RowSet rows;
    const std::size_t n = 1 + rng.below(max_tuples);
    for (std::size_t tries = 0; rows.size() < n && tries < n * 20; ++tries) {
      std::vector<std::string> row{std::to_string(skew(rng))};
      for (std::size_t c = 1; c < arity[r]; ++c) row.push_back(std::to_string(rng.below(domain)));
      rows.add(std::move(row));
    }
    w.facts["R" + std::to_string(r)] = rows.take();
  }
  w.program += ".decl Out(";
  for (std::size_t v = 0; v < vars.size(); ++v) w.program += (v ? ", " : "") + vars[v] + ":symbol";
  w.program += ")\n.output Out\nOut(";
  for (std::size_t v = 0; v < vars.size(); ++v) w.program += (v ? ", " : "") + vars[v];
  w.program += ") :- " + body + ".\n";
  w.outputs = {"Out"};
  return w;
}

// ---------------------------------------------------------------------------

namespace {

std::size_t scale_factor(const std::string& scale) {
  if (scale == "tiny") return 1;
  if (scale == "small") return 4;
  if (scale == "medium") return 32;
  if (scale == "large") return 256;
  throw std::invalid_argument("unknown scale '" + scale + "' (expected tiny, small, medium or large)");
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"tc", "sg", "triangle", "star", "neg2hop", "andersen", "fractured", "callgraph"};
  return names;
}

Workload suite(const std::string& name, const std::string& scale, std::uint64_t seed) {
  const std::size_t s = scale_factor(scale);
  if (name == "tc") return tc(25 * s, 60 * s, seed);
  if (name == "sg") return sg(30 * s, 50 * s, seed);
  if (name == "triangle") return triangle(60 * s, 400 * s, seed);
  if (name == "star") return star(20 * s, 60 * s, seed);
  if (name == "neg2hop") return neg2hop(40 * s, 200 * s, seed);
  if (name == "andersen") return andersen(100 * s, seed);
  if (name == "fractured") return fractured(12 * s, seed);
  if (name == "callgraph") return call_graph(12 * s, seed, true);
  throw std::invalid_argument("unknown suite '" + name + "'");
}

std::size_t fact_count(const Workload& w) {
  std::size_t n = 0;
  for (const auto& [name, rows] : w.facts) n += rows.size();
  return n;
}

}  // namespace flatlog::workloads
