#include "joinsim/join_engine.hpp"

#include <algorithm>
#include <bit>
#include <mutex>
#include <unordered_set>

#include <boost/container/small_vector.hpp>
#include <boost/container_hash/hash.hpp>

#include "joinsim/errors.hpp"

namespace joinsim {

namespace {

// A compiled filter: integer cells compared against resolved literal ids.
struct CompiledFilter {
  FilterKind kind = FilterKind::equals;
  std::size_t position = 0;
  bool never = false;  // string literal absent from the pool
  std::vector<std::int64_t> values;
  std::vector<CompiledFilter> children;

  bool matches(const Relation& relation, std::size_t row) const {
    switch (kind) {
      case FilterKind::conjunction:
        return std::all_of(children.begin(), children.end(),
                           [&](const CompiledFilter& c) { return c.matches(relation, row); });
      case FilterKind::equals:
      case FilterKind::in_set: {
        if (never) return false;
        std::int64_t cell = relation.value(row, position);
        return std::find(values.begin(), values.end(), cell) != values.end();
      }
      case FilterKind::less:
        return relation.value(row, position) < values.front();
      case FilterKind::greater:
        return relation.value(row, position) > values.front();
    }
    return false;
  }
};

CompiledFilter compile(const FilterPredicate& predicate, const Catalog& catalog, const AliasRegistry& registry,
                       SlotIndex slot) {
  CompiledFilter out;
  out.kind = predicate.kind;
  if (predicate.kind == FilterKind::conjunction) {
    for (const auto& child : predicate.children) out.children.push_back(compile(child, catalog, registry, slot));
    return out;
  }
  if (predicate.column.index >= registry.column_count()) throw BindError("filter column out of range");
  const ColumnInfo& info = registry.column(predicate.column);
  if (info.slot != slot) {
    throw BindError("filter on column " + info.name + " does not belong to slot " + std::to_string(slot));
  }
  out.position = info.position;
  if (predicate.values.empty()) throw BindError("filter on " + info.name + " has no values");
  bool ordered = predicate.kind == FilterKind::less || predicate.kind == FilterKind::greater;
  if (ordered && info.domain != ValueDomain::integer) {
    throw BindError("range comparison on string column " + info.name);
  }
  bool any_found = false;
  for (const Literal& literal : predicate.values) {
    if (info.domain == ValueDomain::integer) {
      if (!std::holds_alternative<std::int64_t>(literal)) {
        throw BindError("string literal compared with integer column " + info.name);
      }
      out.values.push_back(std::get<std::int64_t>(literal));
      any_found = true;
    } else {
      if (!std::holds_alternative<std::string>(literal)) {
        throw BindError("integer literal compared with string column " + info.name);
      }
      if (auto id = catalog.strings().find(std::get<std::string>(literal))) {
        out.values.push_back(*id);
        any_found = true;
      }
    }
  }
  out.never = !any_found;
  return out;
}

using Key = boost::container::small_vector<std::int64_t, 4>;

struct KeyHash {
  std::size_t operator()(const Key& key) const { return boost::hash_range(key.begin(), key.end()); }
};

// (local table, column position) pair carried through the join.
struct LiveColumn {
  std::size_t table;
  std::size_t position;

  bool operator==(const LiveColumn&) const = default;
};

}  // namespace

FilteredTable apply_filter(const Catalog& catalog, const AliasRegistry& registry, SlotIndex slot,
                           const FilterPredicate* predicate) {
  const Relation& relation = catalog.relation(registry.slot(slot).base_table);
  FilteredTable out;
  out.slot = slot;
  out.base_row_count = relation.row_count();
  if (predicate == nullptr) {
    out.rows.resize(relation.row_count());
    for (std::size_t r = 0; r < relation.row_count(); ++r) out.rows[r] = static_cast<std::uint32_t>(r);
  } else {
    CompiledFilter filter = compile(*predicate, catalog, registry, slot);
    for (std::size_t r = 0; r < relation.row_count(); ++r) {
      if (filter.matches(relation, r)) out.rows.push_back(static_cast<std::uint32_t>(r));
    }
  }
  out.selectivity = out.base_row_count == 0 ? 1.0
                                             : static_cast<double>(out.rows.size()) /
                                                   static_cast<double>(out.base_row_count);
  return out;
}

CardinalityOracle::CardinalityOracle(const Catalog& catalog, const AliasRegistry& registry, Query query)
    : catalog_(catalog), registry_(registry), query_(std::move(query)), graph_(query_, registry_) {
  for (SlotIndex slot : graph_.slots()) {
    auto it = query_.filters.find(slot);
    filtered_.push_back(apply_filter(catalog_, registry_, slot, it == query_.filters.end() ? nullptr : &it->second));
    relations_.push_back(&catalog_.relation(registry_.slot(slot).base_table));
  }
}

Cardinality CardinalityOracle::subset_cardinality(SubsetKey subset) const {
  std::uint64_t local = graph_.to_local(subset.bits);
  if (graph_.to_global(local) != subset.bits) throw LimitError("subset contains slots outside the query");
  return local_cardinality(local);
}

Cardinality CardinalityOracle::local_cardinality(std::uint64_t local_mask) const {
  if (local_mask == 0 || (local_mask & ~graph_.full_mask()) != 0) throw LimitError("invalid subset");
  {
    std::shared_lock lock(memo_mutex_);
    auto it = memo_.find(local_mask);
    if (it != memo_.end()) return it->second;
  }
  Cardinality result{1};
  for (std::uint64_t component : graph_.components(local_mask)) {
    result *= count_connected(component);
    if (result.is_zero()) break;
  }
  std::unique_lock lock(memo_mutex_);
  memo_.emplace(local_mask, result);
  return result;
}

struct CardinalityOracle::ProbeIndex {
  std::unordered_map<Key, std::vector<std::pair<Key, Cardinality>>, KeyHash> buckets;
};

std::shared_ptr<const CardinalityOracle::ProbeIndex> CardinalityOracle::probe_index(
    std::size_t table, const std::vector<std::size_t>& probe_columns,
    const std::vector<std::size_t>& carried_columns) const {
  std::vector<std::size_t> id{table, probe_columns.size()};
  id.insert(id.end(), probe_columns.begin(), probe_columns.end());
  id.insert(id.end(), carried_columns.begin(), carried_columns.end());
  {
    std::lock_guard lock(index_mutex_);
    auto it = indexes_.find(id);
    if (it != indexes_.end()) return it->second;
  }
  std::unordered_map<Key, std::unordered_map<Key, Cardinality, KeyHash>, KeyHash> grouped;
  const Relation& rel = *relations_[table];
  Key probe(probe_columns.size());
  Key rest(carried_columns.size());
  for (std::uint32_t row : filtered_[table].rows) {
    for (std::size_t k = 0; k < probe_columns.size(); ++k) probe[k] = rel.value(row, probe_columns[k]);
    for (std::size_t k = 0; k < carried_columns.size(); ++k) rest[k] = rel.value(row, carried_columns[k]);
    grouped[probe][rest] += Cardinality{1};
  }
  auto index = std::make_shared<ProbeIndex>();
  for (auto& [key, inner] : grouped) index->buckets.emplace(key, std::vector<std::pair<Key, Cardinality>>(inner.begin(), inner.end()));
  std::lock_guard lock(index_mutex_);
  return indexes_.emplace(std::move(id), std::move(index)).first->second;
}

Cardinality CardinalityOracle::count_connected(std::uint64_t mask) const {
  for (std::uint64_t m = mask; m != 0; m &= m - 1) {
    if (filtered_[std::countr_zero(m)].size() == 0) return Cardinality{};
  }
  if (std::popcount(mask) == 1) return Cardinality{filtered_[std::countr_zero(mask)].size()};

  // Edges internal to the subset.
  std::vector<QueryGraph::Edge> edges;
  for (const auto& e : graph_.edges()) {
    if ((mask >> e.left & 1) && (mask >> e.right & 1)) edges.push_back(e);
  }
  auto position = [&](ColumnId id) { return static_cast<std::size_t>(registry_.column(id).position); };

  auto smallest = [&](std::uint64_t candidates) {
    std::size_t best = std::countr_zero(candidates);
    for (std::uint64_t m = candidates; m != 0; m &= m - 1) {
      std::size_t t = std::countr_zero(m);
      if (filtered_[t].size() < filtered_[best].size()) best = t;
    }
    return best;
  };

  // Columns of `joined` tables still needed by predicates to tables outside `joined`.
  auto live_columns = [&](std::uint64_t joined) {
    std::vector<LiveColumn> live;
    auto add = [&](LiveColumn c) {
      if (std::find(live.begin(), live.end(), c) == live.end()) live.push_back(c);
    };
    for (const auto& e : edges) {
      bool l = joined >> e.left & 1;
      bool r = joined >> e.right & 1;
      if (l && !r) add({e.left, position(e.left_column)});
      if (r && !l) add({e.right, position(e.right_column)});
    }
    return live;
  };

  std::size_t first = smallest(mask);
  std::uint64_t joined = 1ULL << first;
  std::vector<LiveColumn> layout = live_columns(joined);
  std::unordered_map<Key, Cardinality, KeyHash> groups;
  {
    const Relation& rel = *relations_[first];
    Key key(layout.size());
    for (std::uint32_t row : filtered_[first].rows) {
      for (std::size_t k = 0; k < layout.size(); ++k) key[k] = rel.value(row, layout[k].position);
      groups[key] += Cardinality{1};
    }
  }

  while (joined != mask) {
    std::uint64_t frontier = 0;
    for (std::uint64_t m = joined; m != 0; m &= m - 1) frontier |= graph_.neighbors(std::countr_zero(m));
    frontier &= mask & ~joined;
    std::size_t next = smallest(frontier);
    std::uint64_t after = joined | (1ULL << next);

    // Probe pairs: (index into current layout, column position in the new table).
    std::vector<std::pair<std::size_t, std::size_t>> probes;
    for (const auto& e : edges) {
      std::size_t other;
      ColumnId mine, theirs;
      if (e.left == next && (joined >> e.right & 1)) {
        other = e.right, mine = e.left_column, theirs = e.right_column;
      } else if (e.right == next && (joined >> e.left & 1)) {
        other = e.left, mine = e.right_column, theirs = e.left_column;
      } else {
        continue;
      }
      LiveColumn c{other, position(theirs)};
      auto at = std::find(layout.begin(), layout.end(), c);
      probes.emplace_back(static_cast<std::size_t>(at - layout.begin()), position(mine));
    }

    std::vector<LiveColumn> next_layout = live_columns(after);
    std::vector<std::size_t> carried;       // positions in the old layout
    std::vector<std::size_t> new_columns;   // positions in the new table
    for (const LiveColumn& c : next_layout) {
      if (c.table == next) {
        new_columns.push_back(c.position);
      } else {
        carried.push_back(static_cast<std::size_t>(std::find(layout.begin(), layout.end(), c) - layout.begin()));
      }
    }
    // next_layout lists carried columns and new-table columns interleaved; the
    // output key uses carried columns first, then new-table ones.
    std::vector<LiveColumn> ordered;
    for (std::size_t i : carried) ordered.push_back(layout[i]);
    for (std::size_t p : new_columns) ordered.push_back({next, p});

    std::vector<std::size_t> probe_columns;
    for (const auto& p : probes) probe_columns.push_back(p.second);
    std::shared_ptr<const ProbeIndex> index = probe_index(next, probe_columns, new_columns);

    std::unordered_map<Key, Cardinality, KeyHash> next_groups;
    Key probe(probes.size());
    Key out(carried.size() + new_columns.size());
    for (const auto& [key, count] : groups) {
      for (std::size_t k = 0; k < probes.size(); ++k) probe[k] = key[probes[k].first];
      auto hit = index->buckets.find(probe);
      if (hit == index->buckets.end()) continue;
      for (std::size_t k = 0; k < carried.size(); ++k) out[k] = key[carried[k]];
      for (const auto& [rest, rest_count] : hit->second) {
        std::copy(rest.begin(), rest.end(), out.begin() + static_cast<std::ptrdiff_t>(carried.size()));
        next_groups[out] += count * rest_count;
      }
    }
    groups = std::move(next_groups);
    layout = std::move(ordered);
    joined = after;
    if (groups.empty()) return Cardinality{};
  }

  Cardinality total;
  for (const auto& [key, count] : groups) total += count;
  return total;
}

Trace build_full_trace(const CardinalityOracle& oracle, std::size_t table_limit) {
  const QueryGraph& graph = oracle.graph();
  std::size_t n = graph.size();
  if (n > table_limit) {
    throw LimitError("query " + oracle.query().id + " joins " + std::to_string(n) + " tables; limit is " +
                     std::to_string(table_limit));
  }
  std::vector<double> selectivities;
  for (std::size_t k = 0; k < n; ++k) selectivities.push_back(oracle.filtered(k).selectivity);
  Trace trace(oracle.query().id, graph.slots(), std::move(selectivities));
  for (std::uint64_t mask = 1; mask <= graph.full_mask(); ++mask) trace.set_local(mask, oracle.local_cardinality(mask));
  return trace;
}

}  // namespace joinsim
