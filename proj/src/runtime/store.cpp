#include "flatlog/store.hpp"

#include "flatlog/error.hpp"

namespace flatlog {

namespace {

const FlushPolicy kBulkLoad{0, 0, std::size_t{0}};

}  // namespace

void RelationStore::declare(const std::string& name, std::size_t arity) {
  if (entries_.count(name)) throw InternalError("relation declared twice in store: " + name);
  Entry e;
  e.name = name;
  e.arity = arity;
  auto order = identity_order(arity);
  e.indexes.emplace(order, DeltaState(arity, order));
  entries_.emplace(name, std::move(e));
}

RelationStore::Entry& RelationStore::entry(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw InternalError("unknown relation in store: " + name);
  return it->second;
}

const RelationStore::Entry& RelationStore::entry(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw InternalError("unknown relation in store: " + name);
  return it->second;
}

DeltaState& RelationStore::canonical(const std::string& name) {
  auto& e = entry(name);
  return e.indexes.at(identity_order(e.arity));
}

const DeltaState& RelationStore::canonical(const std::string& name) const {
  const auto& e = entry(name);
  return e.indexes.at(identity_order(e.arity));
}

DeltaState& RelationStore::index(const std::string& name, const ColumnOrder& order) {
  auto& e = entry(name);
  if (auto it = e.indexes.find(order); it != e.indexes.end()) return it->second;
  if (order.size() != e.arity) throw InternalError("index order does not match arity of " + name);
  const auto identity = identity_order(e.arity);
  const DeltaState& canon = e.indexes.at(identity);
  DeltaState built(e.arity, order);
  built.full.merge(reorder(canon.full.flatten(), identity, order), kBulkLoad);
  built.set_delta(reorder(canon.delta, identity, order));
  return e.indexes.emplace(order, std::move(built)).first->second;
}

void RelationStore::insert(const std::string& name, const TupleBuffer& tuples, const FlushPolicy& policy) {
  auto& e = entry(name);
  if (tuples.arity() != e.arity) throw ProgramError("arity mismatch loading facts into " + name);
  for (auto& [order, st] : e.indexes) {
    SortedColumns d = compute_delta(tuples, st.full);
    st.full.merge(d, policy);
  }
}

std::size_t RelationStore::apply_delta(const std::string& name, SortedColumns delta, const FlushPolicy& policy) {
  auto& e = entry(name);
  const auto identity = identity_order(e.arity);
  const std::size_t n = delta.size();
  for (auto& [order, st] : e.indexes) {
    if (order == identity) continue;
    st.set_delta(reorder(delta, identity, order));
    st.merge(policy);
  }
  auto& canon = e.indexes.at(identity);
  canon.set_delta(std::move(delta));
  canon.merge(policy);
  return n;
}

void RelationStore::reset_delta_to_full(const std::string& name) {
  for (auto& [order, st] : entry(name).indexes) st.set_delta(st.full.flatten());
}

std::vector<std::string> RelationStore::names() const {
  std::vector<std::string> out;
  for (const auto& [name, e] : entries_) out.push_back(name);
  return out;
}

bool RelationStore::check_invariants() const {
  for (const auto& [name, e] : entries_) {
    std::size_t n = static_cast<std::size_t>(-1);
    for (const auto& [order, st] : e.indexes) {
      if (!st.full.check_invariants() || !st.delta.is_strictly_sorted()) return false;
      if (n != static_cast<std::size_t>(-1) && st.full.size() != n) return false;
      n = st.full.size();
    }
  }
  return true;
}

}  // namespace flatlog
