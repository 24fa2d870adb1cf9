#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace joinsim {

using Literal = std::variant<std::int64_t, std::string>;

enum class FilterKind { equals, in_set, less, greater, conjunction };

/// Unary filter AST, parameterised on how a column is named: `alias.column`
/// before binding, a global ColumnId after.
template <class ColumnRefT>
struct BasicFilter {
  FilterKind kind = FilterKind::equals;
  ColumnRefT column{};
  std::vector<Literal> values;
  std::vector<BasicFilter> children;

  bool operator==(const BasicFilter&) const = default;
};

struct ColumnRef {
  std::string alias;
  std::string column;

  bool operator==(const ColumnRef&) const = default;
};

struct TableRef {
  std::string table;
  std::string alias;

  bool operator==(const TableRef&) const = default;
};

/// One SELECT entry. Parsed and printed, never evaluated.
struct SelectItem {
  std::string function;  // e.g. "MIN"; empty for a bare column
  bool star = false;     // COUNT(*) or bare *
  ColumnRef column;
  std::string output_alias;

  bool operator==(const SelectItem&) const = default;
};

struct ParsedJoin {
  ColumnRef left;
  ColumnRef right;

  bool operator==(const ParsedJoin&) const = default;
};

using ParsedFilter = BasicFilter<ColumnRef>;

/// Unbound query: FROM entries and WHERE conjuncts in source order.
struct ParsedQuery {
  std::string id;
  std::vector<SelectItem> select;
  std::vector<TableRef> from;
  std::vector<ParsedJoin> joins;
  std::vector<ParsedFilter> filters;

  bool operator==(const ParsedQuery&) const = default;

  std::vector<std::string> base_tables() const;
};

/// Parses SELECT ... FROM t AS a, ... WHERE conj AND conj ...; where each
/// conjunct is `a.x = b.y`, `a.x = lit`, `a.x IN (lit, ...)`, `a.x < int` or
/// `a.x > int`. Anything else (OR, NOT, LIKE, subqueries, explicit JOIN) is a
/// ParseError.
ParsedQuery parse_query(std::string_view text);

/// Canonical SQL text; parse_query(to_sql(q)) == q for any parsed q (ids aside).
std::string to_sql(const ParsedQuery& query);

std::string format_literal(const Literal& literal);

}  // namespace joinsim
