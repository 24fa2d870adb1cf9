#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "joinsim/cardinality.hpp"
#include "joinsim/catalog.hpp"
#include "joinsim/query.hpp"
#include "joinsim/regime.hpp"
#include "joinsim/trace.hpp"

namespace joinsim {

/// Rows of one slot's base relation that survive its filter.
struct FilteredTable {
  SlotIndex slot = 0;
  std::vector<std::uint32_t> rows;
  std::size_t base_row_count = 0;
  double selectivity = 1.0;  // rows.size() / base_row_count; 1 for an empty base table

  std::size_t size() const { return rows.size(); }
};

/// Evaluates `predicate` (nullptr keeps every row) over the relation behind `slot`.
/// Throws BindError when a predicate column belongs to another slot or a literal's
/// type does not match its column.
FilteredTable apply_filter(const Catalog& catalog, const AliasRegistry& registry, SlotIndex slot,
                           const FilterPredicate* predicate);

/// Exact intermediate-result sizes for one query. The cardinality of a table
/// subset is the bag-semantics size of joining those tables under every join
/// predicate internal to the subset; unlinked components multiply.
///
/// Results are memoised. Many threads may query concurrently; two threads can
/// compute the same key at once, both write the same value.
class CardinalityOracle {
 public:
  /// `catalog` and `registry` must outlive the oracle.
  CardinalityOracle(const Catalog& catalog, const AliasRegistry& registry, Query query);

  const Query& query() const { return query_; }
  const QueryGraph& graph() const { return graph_; }
  const FilteredTable& filtered(std::size_t local) const { return filtered_[local]; }

  Cardinality subset_cardinality(SubsetKey subset) const;
  Cardinality local_cardinality(std::uint64_t local_mask) const;

 private:
  struct ProbeIndex;

  Cardinality count_connected(std::uint64_t local_mask) const;
  /// Rows of one table grouped by probe-column values, then by carried columns.
  std::shared_ptr<const ProbeIndex> probe_index(std::size_t table, const std::vector<std::size_t>& probe_columns,
                                                const std::vector<std::size_t>& carried_columns) const;

  const Catalog& catalog_;
  const AliasRegistry& registry_;
  Query query_;
  QueryGraph graph_;
  std::vector<FilteredTable> filtered_;
  std::vector<const Relation*> relations_;

  mutable std::shared_mutex memo_mutex_;
  mutable std::unordered_map<std::uint64_t, Cardinality> memo_;
  mutable std::mutex index_mutex_;
  mutable std::map<std::vector<std::size_t>, std::shared_ptr<const ProbeIndex>> indexes_;
};

inline constexpr std::size_t kDefaultTraceTableLimit = 14;

/// Every non-empty subset of the query's tables, plus per-slot selectivities.
Trace build_full_trace(const CardinalityOracle& oracle, std::size_t table_limit = kDefaultTraceTableLimit);

}  // namespace joinsim
