#include "joinsim/sql.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <set>
#include <sstream>

#include "joinsim/errors.hpp"

namespace joinsim {

std::vector<std::string> ParsedQuery::base_tables() const {
  std::vector<std::string> tables;
  for (const auto& ref : from) tables.push_back(ref.table);
  return tables;
}

namespace {

enum class TokenKind { identifier, integer, string, symbol, end };

struct Token {
  TokenKind kind = TokenKind::end;
  std::string text;  // identifiers keep their spelling; strings are unescaped
  std::size_t offset = 0;
};

std::string upper(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
  return out;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
      tokens.push_back({TokenKind::identifier, std::string(text.substr(start, i - start)), start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      ++i;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      if (i < text.size() && (text[i] == '.' || std::isalpha(static_cast<unsigned char>(text[i])))) {
        throw ParseError("only integer numeric literals are supported", start);
      }
      tokens.push_back({TokenKind::integer, std::string(text.substr(start, i - start)), start});
      continue;
    }
    if (c == '\'') {
      std::string value;
      ++i;
      for (;;) {
        if (i >= text.size()) throw ParseError("unterminated string literal", start);
        if (text[i] == '\'') {
          if (i + 1 < text.size() && text[i + 1] == '\'') {
            value.push_back('\'');
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        value.push_back(text[i++]);
      }
      tokens.push_back({TokenKind::string, std::move(value), start});
      continue;
    }
    if (c == '<' || c == '>' || c == '!') {
      if (i + 1 < text.size() && (text[i + 1] == '=' || text[i + 1] == '>')) {
        throw ParseError("unsupported comparison operator '" + std::string(text.substr(i, 2)) + "'", start);
      }
    }
    if (std::string_view(",.()=<>;*").find(c) != std::string_view::npos) {
      tokens.push_back({TokenKind::symbol, std::string(1, c), start});
      ++i;
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", start);
  }
  tokens.push_back({TokenKind::end, "", text.size()});
  return tokens;
}

const std::set<std::string> kUnsupportedKeywords{
    "OR", "NOT", "LIKE", "BETWEEN", "JOIN", "ON", "LEFT", "RIGHT", "OUTER", "INNER", "FULL", "CROSS", "UNION",
    "GROUP", "ORDER", "HAVING", "LIMIT", "IS", "NULL", "EXISTS", "ILIKE", "DISTINCT"};

const std::set<std::string> kReservedKeywords{"SELECT", "FROM", "WHERE", "AND", "AS", "IN"};

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

  ParsedQuery parse() {
    ParsedQuery query;
    expect_keyword("SELECT");
    do {
      query.select.push_back(parse_select_item());
    } while (accept_symbol(","));

    expect_keyword("FROM");
    do {
      query.from.push_back(parse_table_ref());
    } while (accept_symbol(","));
    check_unsupported();

    for (std::size_t i = 0; i < query.from.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (query.from[i].alias == query.from[j].alias) {
          throw ParseError("duplicate alias '" + query.from[i].alias + "'", from_offsets_[i]);
        }
      }
    }

    if (accept_keyword("WHERE")) {
      do {
        parse_condition(query);
        check_unsupported();
      } while (accept_keyword("AND"));
    }
    accept_symbol(";");
    if (peek().kind != TokenKind::end) {
      check_unsupported();
      throw ParseError("unexpected token '" + peek().text + "'", peek().offset);
    }
    return query;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }

  bool is_keyword(const Token& t, std::string_view keyword) const {
    return t.kind == TokenKind::identifier && upper(t.text) == keyword;
  }
  bool accept_keyword(std::string_view keyword) {
    if (!is_keyword(peek(), keyword)) return false;
    next();
    return true;
  }
  void expect_keyword(std::string_view keyword) {
    if (!accept_keyword(keyword)) {
      check_unsupported();
      throw ParseError("expected " + std::string(keyword), peek().offset);
    }
  }
  bool accept_symbol(std::string_view symbol) {
    if (peek().kind != TokenKind::symbol || peek().text != symbol) return false;
    next();
    return true;
  }
  void expect_symbol(std::string_view symbol) {
    if (!accept_symbol(symbol)) throw ParseError("expected '" + std::string(symbol) + "'", peek().offset);
  }

  void check_unsupported() const {
    const Token& t = peek();
    if (t.kind == TokenKind::identifier && kUnsupportedKeywords.contains(upper(t.text))) {
      throw ParseError(upper(t.text) + " is not supported", t.offset);
    }
  }

  std::string expect_identifier(const char* what) {
    check_unsupported();
    const Token& t = peek();
    if (t.kind != TokenKind::identifier || kReservedKeywords.contains(upper(t.text))) {
      throw ParseError(std::string("expected ") + what, t.offset);
    }
    return next().text;
  }

  ColumnRef parse_column_ref() {
    ColumnRef ref;
    ref.alias = expect_identifier("table alias");
    expect_symbol(".");
    ref.column = expect_identifier("column name");
    return ref;
  }

  SelectItem parse_select_item() {
    SelectItem item;
    if (accept_symbol("*")) {
      item.star = true;
      return item;
    }
    if (peek().kind == TokenKind::identifier && peek(1).kind == TokenKind::symbol && peek(1).text == "(") {
      item.function = upper(expect_identifier("function name"));
      next();
      if (accept_symbol("*")) {
        item.star = true;
      } else {
        item.column = parse_column_ref();
      }
      expect_symbol(")");
    } else {
      item.column = parse_column_ref();
    }
    if (accept_keyword("AS")) item.output_alias = expect_identifier("output alias");
    return item;
  }

  TableRef parse_table_ref() {
    if (peek().kind == TokenKind::symbol && peek().text == "(") {
      throw ParseError("subqueries are not supported", peek().offset);
    }
    from_offsets_.push_back(peek().offset);
    TableRef ref;
    ref.table = expect_identifier("table name");
    accept_keyword("AS");
    check_unsupported();
    if (peek().kind == TokenKind::identifier && !kReservedKeywords.contains(upper(peek().text))) {
      ref.alias = next().text;
    } else {
      ref.alias = ref.table;
    }
    aliases_.insert(ref.alias);
    return ref;
  }

  void require_alias(const ColumnRef& ref, std::size_t offset) const {
    if (!aliases_.contains(ref.alias)) throw ParseError("undeclared alias '" + ref.alias + "'", offset);
  }

  Literal parse_literal() {
    const Token& t = peek();
    if (t.kind == TokenKind::string) return next().text;
    if (t.kind == TokenKind::integer) return parse_integer(next());
    if (t.kind == TokenKind::symbol && t.text == "(" && is_keyword(peek(1), "SELECT")) {
      throw ParseError("subqueries are not supported", t.offset);
    }
    check_unsupported();
    throw ParseError("expected literal", t.offset);
  }

  std::int64_t parse_integer(const Token& t) const {
    std::int64_t value = 0;
    const auto* end = t.text.data() + t.text.size();
    const auto [ptr, ec] = std::from_chars(t.text.data(), end, value);
    if (ec != std::errc{} || ptr != end) throw ParseError("integer literal out of range", t.offset);
    return value;
  }

  void parse_condition(ParsedQuery& query) {
    if (peek().kind == TokenKind::symbol && peek().text == "(") {
      throw ParseError("parenthesised conditions are not supported", peek().offset);
    }
    const std::size_t offset = peek().offset;
    const ColumnRef column = parse_column_ref();
    require_alias(column, offset);
    check_unsupported();

    if (accept_symbol("=")) {
      const Token& rhs = peek();
      if (rhs.kind == TokenKind::identifier) {
        const std::size_t rhs_offset = rhs.offset;
        ColumnRef other = parse_column_ref();
        require_alias(other, rhs_offset);
        if (other.alias == column.alias) {
          throw ParseError("join predicate within a single alias '" + column.alias + "'", offset);
        }
        query.joins.push_back(ParsedJoin{column, std::move(other)});
        return;
      }
      query.filters.push_back(ParsedFilter{FilterKind::equals, column, {parse_literal()}, {}});
      return;
    }
    if (accept_keyword("IN")) {
      expect_symbol("(");
      if (is_keyword(peek(), "SELECT")) throw ParseError("subqueries are not supported", peek().offset);
      ParsedFilter filter{FilterKind::in_set, column, {}, {}};
      do {
        filter.values.push_back(parse_literal());
      } while (accept_symbol(","));
      expect_symbol(")");
      query.filters.push_back(std::move(filter));
      return;
    }
    const bool less = accept_symbol("<");
    if (less || accept_symbol(">")) {
      const Token& t = peek();
      if (t.kind != TokenKind::integer) throw ParseError("expected integer literal", t.offset);
      query.filters.push_back(
          ParsedFilter{less ? FilterKind::less : FilterKind::greater, column, {parse_integer(next())}, {}});
      return;
    }
    check_unsupported();
    throw ParseError("expected '=', '<', '>' or IN", peek().offset);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::set<std::string> aliases_;
  std::vector<std::size_t> from_offsets_;
};

std::string format_column(const ColumnRef& ref) { return ref.alias + "." + ref.column; }

void format_filter(std::ostringstream& out, const ParsedFilter& filter, bool& first) {
  if (filter.kind == FilterKind::conjunction) {
    for (const auto& child : filter.children) format_filter(out, child, first);
    return;
  }
  out << (first ? "WHERE " : "\n  AND ");
  first = false;
  out << format_column(filter.column);
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
    case FilterKind::in_set: {
      out << " IN (";
      for (std::size_t i = 0; i < filter.values.size(); ++i) {
        if (i != 0) out << ", ";
        out << format_literal(filter.values[i]);
      }
      out << ")";
      break;
    }
    case FilterKind::conjunction:
      break;
  }
}

}  // namespace

ParsedQuery parse_query(std::string_view text) { return Parser(text).parse(); }

std::string format_literal(const Literal& literal) {
  if (const auto* number = std::get_if<std::int64_t>(&literal)) return std::to_string(*number);
  std::string out = "'";
  for (const char c : std::get<std::string>(literal)) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

std::string to_sql(const ParsedQuery& query) {
  std::ostringstream out;
  out << "SELECT ";
  for (std::size_t i = 0; i < query.select.size(); ++i) {
    const SelectItem& item = query.select[i];
    if (i != 0) out << ",\n       ";
    const std::string inner = item.star ? "*" : format_column(item.column);
    out << (item.function.empty() ? inner : item.function + "(" + inner + ")");
    if (!item.output_alias.empty()) out << " AS " << item.output_alias;
  }
  out << "\nFROM ";
  for (std::size_t i = 0; i < query.from.size(); ++i) {
    if (i != 0) out << ",\n     ";
    out << query.from[i].table << " AS " << query.from[i].alias;
  }
  out << "\n";
  bool first = true;
  for (const auto& join : query.joins) {
    out << (first ? "WHERE " : "\n  AND ") << format_column(join.left) << " = " << format_column(join.right);
    first = false;
  }
  for (const auto& filter : query.filters) format_filter(out, filter, first);
  out << ";\n";
  return out.str();
}

}  // namespace joinsim
