#include "flatlog/stratify.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "flatlog/error.hpp"

namespace flatlog {

namespace {

struct Graph {
  std::vector<std::string> names;
  std::map<std::string, std::size_t> id;
  std::vector<std::vector<std::size_t>> succ;  // body relation -> head relation
};

Graph dependency_graph(const Program& p) {
  Graph g;
  for (const auto& d : p.relations) {
    g.id.emplace(d.name, g.names.size());
    g.names.push_back(d.name);
  }
  g.succ.resize(g.names.size());
  for (const auto& r : p.rules) {
    std::size_t h = g.id.at(r.head.relation);
    for (const auto& a : r.body) {
      auto& out = g.succ[g.id.at(a.relation)];
      if (std::find(out.begin(), out.end(), h) == out.end()) out.push_back(h);
    }
  }
  return g;
}

// Tarjan's algorithm; returns component id per node with components numbered
// in reverse topological order (sinks first).
std::vector<std::size_t> tarjan(const Graph& g, std::size_t& count) {
  const std::size_t n = g.names.size();
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0;
  count = 0;

  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : g.succ[v]) {
      if (index[w] == kUnvisited) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = count;
      } while (w != v);
      ++count;
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] == kUnvisited) visit(v);
  }
  return comp;
}

}  // namespace

std::vector<std::vector<std::string>> relation_sccs(const Program& program) {
  Graph g = dependency_graph(program);
  std::size_t count = 0;
  auto comp = tarjan(g, count);
  std::vector<std::vector<std::string>> out(count);
  // Tarjan numbers sinks first; flip so dependencies come first.
  for (std::size_t v = 0; v < g.names.size(); ++v) out[count - 1 - comp[v]].push_back(g.names[v]);
  return out;
}

std::vector<Stratum> stratify(const Program& program) {
  auto sccs = relation_sccs(program);
  std::map<std::string, std::size_t> scc_of;
  for (std::size_t c = 0; c < sccs.size(); ++c) {
    for (const auto& r : sccs[c]) scc_of[r] = c;
  }

  std::vector<Stratum> out;
  for (std::size_t c = 0; c < sccs.size(); ++c) {
    Stratum base, rec;
    for (std::size_t i = 0; i < program.rules.size(); ++i) {
      const Rule& r = program.rules[i];
      if (r.is_fact() || scc_of.at(r.head.relation) != c) continue;
      bool recursive = false;
      for (const auto& a : r.body) {
        if (scc_of.at(a.relation) != c) continue;
        if (a.negated) {
          std::string cycle;
          for (const auto& n : sccs[c]) cycle += (cycle.empty() ? "" : ", ") + n;
          throw ProgramError("non-stratifiable program: '" + r.head.relation + "' depends negatively on '" +
                                 a.relation + "' inside the recursive cycle {" + cycle + "}",
                             a.line, a.column);
        }
        recursive = true;
      }
      (recursive ? rec : base).rules.push_back(i);
    }
    for (Stratum* s : {&base, &rec}) {
      if (s->rules.empty()) continue;
      s->relations = sccs[c];
      s->recursive = (s == &rec);
      s->index = out.size();
      out.push_back(std::move(*s));
    }
  }
  return out;
}

}  // namespace flatlog
