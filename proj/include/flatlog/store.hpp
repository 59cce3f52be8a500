#pragma once

#include <map>
#include <string>
#include <vector>

#include "flatlog/relation.hpp"

namespace flatlog {

// All relations of a running program. Each relation keeps one DeltaState per
// column order a plan has asked for; the canonical (identity) order always
// exists and is the one compute_delta runs against.
class RelationStore {
 public:
  struct Entry {
    std::string name;
    std::size_t arity = 0;
    std::map<ColumnOrder, DeltaState> indexes;
  };

  void declare(const std::string& name, std::size_t arity);
  bool has(const std::string& name) const { return entries_.count(name) != 0; }

  Entry& entry(const std::string& name);
  const Entry& entry(const std::string& name) const;

  DeltaState& canonical(const std::string& name);
  const DeltaState& canonical(const std::string& name) const;

  // The index for `order`, built from the canonical copy on first request.
  // Its delta mirrors the canonical delta.
  DeltaState& index(const std::string& name, const ColumnOrder& order);

  // Adds tuples (logical order) to every index of the relation, bypassing
  // semi-naive bookkeeping. Used for input facts.
  void insert(const std::string& name, const TupleBuffer& tuples, const FlushPolicy& policy);

  // Installs `delta` (canonical order) as the relation's delta in every
  // index and merges it. Returns the number of tuples added.
  std::size_t apply_delta(const std::string& name, SortedColumns delta, const FlushPolicy& policy);

  // Makes every index's delta equal to its full contents (iteration 1 of a
  // recursive stratum).
  void reset_delta_to_full(const std::string& name);

  std::size_t size(const std::string& name) const { return canonical(name).full.size(); }
  SortedColumns contents(const std::string& name) const { return canonical(name).full.flatten(); }
  std::vector<std::string> names() const;

  bool check_invariants() const;

 private:
  std::map<std::string, Entry> entries_;
};

}  // namespace flatlog
