#include "joinsim/query.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

#include "joinsim/errors.hpp"

namespace joinsim {

std::uint64_t Query::table_mask() const {
  std::uint64_t mask = 0;
  for (const SlotIndex slot : tables) mask |= 1ULL << slot;
  return mask;
}

namespace {

struct Binder {
  const ParsedQuery& parsed;
  const AliasRegistry& registry;
  std::map<std::string, SlotIndex> slot_of_alias;

  ColumnId resolve(const ColumnRef& ref) const {
    const auto it = slot_of_alias.find(ref.alias);
    if (it == slot_of_alias.end()) throw BindError("undeclared alias '" + ref.alias + "'");
    const auto id = registry.column_id(it->second, ref.column);
    if (!id) {
      throw BindError("relation " + registry.slot(it->second).base_table + " has no column '" + ref.column + "'");
    }
    return *id;
  }

  FilterPredicate bind_filter(const ParsedFilter& filter) const {
    FilterPredicate out;
    out.kind = filter.kind;
    out.values = filter.values;
    if (filter.kind == FilterKind::conjunction) {
      for (const auto& child : filter.children) out.children.push_back(bind_filter(child));
    } else {
      out.column = resolve(filter.column);
    }
    return out;
  }
};

}  // namespace

Query bind_query(const ParsedQuery& parsed, const AliasRegistry& registry) {
  Binder binder{parsed, registry, {}};
  Query query;
  query.id = parsed.id;
  query.sql = to_sql(parsed);

  std::map<std::string, std::uint32_t> occurrences;
  for (const auto& ref : parsed.from) {
    const std::uint32_t occurrence = ++occurrences[ref.table];
    const auto slot = registry.find_slot(ref.table, occurrence);
    if (!slot) {
      throw BindError("alias registry has no slot for occurrence " + std::to_string(occurrence) + " of '" +
                      ref.table + "'");
    }
    if (!binder.slot_of_alias.emplace(ref.alias, *slot).second) {
      throw BindError("duplicate alias '" + ref.alias + "'");
    }
    query.tables.push_back(*slot);
    query.aliases[*slot] = ref.alias;
  }
  std::sort(query.tables.begin(), query.tables.end());
  if (query.tables.size() < 2) throw BindError("a query must reference at least two tables");

  for (const auto& join : parsed.joins) {
    ColumnId a = binder.resolve(join.left);
    ColumnId b = binder.resolve(join.right);
    const auto& ia = registry.column(a);
    const auto& ib = registry.column(b);
    if (ia.slot == ib.slot) throw BindError("join predicate within a single alias '" + join.left.alias + "'");
    if (ia.domain != ib.domain) {
      throw BindError("join predicate " + join.left.alias + "." + join.left.column + " = " + join.right.alias + "." +
                      join.right.column + " compares different value domains");
    }
    if (ia.slot > ib.slot) std::swap(a, b);
    query.joins.push_back(JoinPredicate{a, b});
  }
  std::sort(query.joins.begin(), query.joins.end());
  query.joins.erase(std::unique(query.joins.begin(), query.joins.end()), query.joins.end());

  std::map<SlotIndex, std::vector<FilterPredicate>> per_slot;
  for (const auto& filter : parsed.filters) {
    FilterPredicate bound = binder.bind_filter(filter);
    const ColumnRef* any = &filter.column;
    const ParsedFilter* cursor = &filter;
    while (cursor->kind == FilterKind::conjunction) {
      if (cursor->children.empty()) throw BindError("empty conjunction");
      cursor = &cursor->children.front();
      any = &cursor->column;
    }
    per_slot[binder.slot_of_alias.at(any->alias)].push_back(std::move(bound));
  }
  for (auto& [slot, filters] : per_slot) {
    if (filters.size() == 1) {
      query.filters.emplace(slot, std::move(filters.front()));
    } else {
      FilterPredicate conjunction;
      conjunction.kind = FilterKind::conjunction;
      conjunction.children = std::move(filters);
      query.filters.emplace(slot, std::move(conjunction));
    }
  }
  return query;
}

Query parse_and_bind(std::string_view sql, const AliasRegistry& registry, std::string id) {
  ParsedQuery parsed = parse_query(sql);
  if (!id.empty()) parsed.id = std::move(id);
  return bind_query(parsed, registry);
}

QueryGraph::QueryGraph(const Query& query, const AliasRegistry& registry)
    : slots_(query.tables), adjacency_(query.tables.size(), 0) {
  if (slots_.size() > 64) throw LimitError("queries with more than 64 tables are not supported");
  for (const auto& join : query.joins) {
    const auto a = local_index(registry.column(join.left).slot);
    const auto b = local_index(registry.column(join.right).slot);
    if (!a || !b) throw BindError("join predicate references a table outside the query");
    edges_.push_back(Edge{*a, *b, join.left, join.right});
    adjacency_[*a] |= 1ULL << *b;
    adjacency_[*b] |= 1ULL << *a;
  }
}

std::optional<std::size_t> QueryGraph::local_index(SlotIndex slot) const {
  const auto it = std::lower_bound(slots_.begin(), slots_.end(), slot);
  if (it == slots_.end() || *it != slot) return std::nullopt;
  return static_cast<std::size_t>(it - slots_.begin());
}

bool QueryGraph::linked(std::uint64_t a, std::uint64_t b) const {
  for (std::uint64_t rest = a; rest != 0; rest &= rest - 1) {
    if (adjacency_[std::countr_zero(rest)] & b) return true;
  }
  return false;
}

bool QueryGraph::is_connected(std::uint64_t mask) const {
  if (mask == 0) return false;
  std::uint64_t reached = mask & (~mask + 1);
  for (;;) {
    std::uint64_t grown = reached;
    for (std::uint64_t rest = reached; rest != 0; rest &= rest - 1) {
      grown |= adjacency_[std::countr_zero(rest)] & mask;
    }
    if (grown == reached) return reached == mask;
    reached = grown;
  }
}

std::vector<std::uint64_t> QueryGraph::components(std::uint64_t mask) const {
  std::vector<std::uint64_t> out;
  std::uint64_t remaining = mask;
  while (remaining != 0) {
    std::uint64_t reached = remaining & (~remaining + 1);
    for (;;) {
      std::uint64_t grown = reached;
      for (std::uint64_t rest = reached; rest != 0; rest &= rest - 1) {
        grown |= adjacency_[std::countr_zero(rest)] & mask;
      }
      if (grown == reached) break;
      reached = grown;
    }
    out.push_back(reached);
    remaining &= ~reached;
  }
  return out;
}

std::uint64_t QueryGraph::to_global(std::uint64_t local_mask) const {
  std::uint64_t global = 0;
  for (std::uint64_t rest = local_mask; rest != 0; rest &= rest - 1) {
    global |= 1ULL << slots_[std::countr_zero(rest)];
  }
  return global;
}

std::uint64_t QueryGraph::to_local(std::uint64_t global_mask) const {
  std::uint64_t local = 0;
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    if (global_mask & (1ULL << slots_[k])) local |= 1ULL << k;
  }
  return local;
}

std::string to_string(const FilterPredicate& filter, const AliasRegistry& registry) {
  std::ostringstream out;
  if (filter.kind == FilterKind::conjunction) {
    for (std::size_t i = 0; i < filter.children.size(); ++i) {
      if (i != 0) out << " AND ";
      out << to_string(filter.children[i], registry);
    }
    return out.str();
  }
  const ColumnInfo& info = registry.column(filter.column);
  out << registry.slot(info.slot).base_table << "#" << registry.slot(info.slot).occurrence << "." << info.name;
  switch (filter.kind) {
    case FilterKind::equals:
      out << " = " << format_literal(filter.values.at(0));
      break;
    case FilterKind::less:
      out << " < " << format_literal(filter.values.at(0));
      break;
    case FilterKind::greater:
      out << " > " << format_literal(filter.values.at(0));
      break;
    default: {
      out << " IN (";
      for (std::size_t i = 0; i < filter.values.size(); ++i) out << (i ? ", " : "") << format_literal(filter.values[i]);
      out << ")";
    }
  }
  return out.str();
}

}  // namespace joinsim
