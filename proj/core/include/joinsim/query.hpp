#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "joinsim/catalog.hpp"
#include "joinsim/sql.hpp"

namespace joinsim {

using FilterPredicate = BasicFilter<ColumnId>;

/// Equality between two columns of different slots, stored with the smaller
/// slot on the left.
struct JoinPredicate {
  ColumnId left;
  ColumnId right;

  friend auto operator<=>(const JoinPredicate&, const JoinPredicate&) = default;
};

/// A query bound to an alias registry: q = (I, U, J).
struct Query {
  std::string id;
  std::string sql;
  std::vector<SlotIndex> tables;                  // I, ascending
  std::map<SlotIndex, FilterPredicate> filters;   // U; slots without a filter are absent
  std::vector<JoinPredicate> joins;               // J, canonical and sorted
  std::map<SlotIndex, std::string> aliases;       // source alias per slot

  std::uint64_t table_mask() const;

  bool operator==(const Query&) const = default;
};

/// Resolves aliases to slots (the k-th FROM occurrence of a base table is that
/// table's k-th slot), columns to global ids, and canonicalises J. Several
/// filters on one alias become a conjunction. Throws BindError.
Query bind_query(const ParsedQuery& parsed, const AliasRegistry& registry);

/// Convenience: parse then bind; `id` overrides the parsed id when non-empty.
Query parse_and_bind(std::string_view sql, const AliasRegistry& registry, std::string id = {});

/// Dense local view of a query's join graph. Local index k refers to
/// `tables[k]`; masks in this class are over local indices.
class QueryGraph {
 public:
  struct Edge {
    std::size_t left = 0;   // local index, left < right
    std::size_t right = 0;
    ColumnId left_column;
    ColumnId right_column;
  };

  QueryGraph(const Query& query, const AliasRegistry& registry);

  std::size_t size() const { return slots_.size(); }
  std::uint64_t full_mask() const { return size() == 64 ? ~0ULL : (1ULL << size()) - 1; }
  SlotIndex slot(std::size_t local) const { return slots_[local]; }
  const std::vector<SlotIndex>& slots() const { return slots_; }
  std::optional<std::size_t> local_index(SlotIndex slot) const;

  std::uint64_t neighbors(std::size_t local) const { return adjacency_[local]; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// True when at least one join predicate links the two (disjoint) sets.
  bool linked(std::uint64_t a, std::uint64_t b) const;
  bool is_connected(std::uint64_t mask) const;
  /// Connected components of the induced subgraph on `mask`, ascending by lowest member.
  std::vector<std::uint64_t> components(std::uint64_t mask) const;

  std::uint64_t to_global(std::uint64_t local_mask) const;
  std::uint64_t to_local(std::uint64_t global_mask) const;

 private:
  std::vector<SlotIndex> slots_;
  std::vector<std::uint64_t> adjacency_;
  std::vector<Edge> edges_;
};

std::string to_string(const FilterPredicate& filter, const AliasRegistry& registry);

}  // namespace joinsim
