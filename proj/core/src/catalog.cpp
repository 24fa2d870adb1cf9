#include "joinsim/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "joinsim/errors.hpp"
#include "joinsim/random.hpp"

namespace joinsim {

std::string_view to_string(ValueDomain domain) {
  return domain == ValueDomain::integer ? "int" : "str";
}

ValueDomain parse_value_domain(std::string_view text) {
  if (text == "int") return ValueDomain::integer;
  if (text == "str") return ValueDomain::string;
  throw FormatError("unknown value domain '" + std::string(text) + "'");
}

std::int64_t StringPool::intern(std::string_view text) {
  const auto it = ids_.find(std::string(text));
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<std::int64_t>(strings_.size());
  strings_.emplace_back(text);
  ids_.emplace(strings_.back(), id);
  return id;
}

std::optional<std::int64_t> StringPool::find(std::string_view text) const {
  const auto it = ids_.find(std::string(text));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& StringPool::text(std::int64_t id) const {
  return strings_.at(static_cast<std::size_t>(id));
}

Relation::Relation(std::string name, std::vector<ColumnSpec> columns)
    : name_(std::move(name)), columns_(std::move(columns)), data_(columns_.size()) {}

std::optional<std::size_t> Relation::column_index(std::string_view column) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == column) return i;
  }
  return std::nullopt;
}

void Relation::append_row(std::span<const std::int64_t> row) {
  if (row.size() != columns_.size()) {
    throw FormatError("relation " + name_ + ": row has " + std::to_string(row.size()) + " values, expected " +
                      std::to_string(columns_.size()));
  }
  for (std::size_t c = 0; c < row.size(); ++c) data_[c].push_back(row[c]);
  ++row_count_;
}

Relation& Catalog::add_relation(Relation relation) {
  const std::string name = relation.name();
  auto [it, inserted] = relations_.emplace(name, std::move(relation));
  if (!inserted) throw FormatError("duplicate relation " + name);
  return it->second;
}

const Relation& Catalog::relation(std::string_view name) const {
  const Relation* found = find_relation(name);
  if (found == nullptr) throw BindError("unknown relation '" + std::string(name) + "'");
  return *found;
}

const Relation* Catalog::find_relation(std::string_view name) const {
  const auto it = relations_.find(name);
  return it == relations_.end() ? nullptr : &it->second;
}

std::vector<std::string> Catalog::relation_names() const {
  std::vector<std::string> names;
  for (const auto& [name, _] : relations_) names.push_back(name);
  return names;
}

namespace {

std::int64_t parse_int64(std::string_view text, const std::string& where) {
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw FormatError(where + ": '" + std::string(text) + "' is not an integer");
  }
  return value;
}

}  // namespace

Catalog load_catalog(const std::filesystem::path& schema_descriptor, const std::filesystem::path& data_dir) {
  const auto schema_lines = csv::read_lines(schema_descriptor);
  if (schema_lines.empty() || csv::split_line(schema_lines.front()) !=
                                  std::vector<std::string>{"relation", "column", "domain"}) {
    throw FormatError(schema_descriptor.string() + ": expected header 'relation,column,domain'");
  }

  // Relation order follows first appearance; columns keep descriptor order.
  std::vector<std::pair<std::string, std::vector<ColumnSpec>>> declared;
  for (std::size_t i = 1; i < schema_lines.size(); ++i) {
    if (schema_lines[i].empty()) continue;
    const auto fields = csv::split_line(schema_lines[i]);
    const std::string where = schema_descriptor.string() + ":" + std::to_string(i + 1);
    if (fields.size() != 3) throw FormatError(where + ": expected 3 fields");
    ValueDomain domain;
    try {
      domain = parse_value_domain(fields[2]);
    } catch (const FormatError& e) {
      throw FormatError(where + ": " + e.what());
    }
    auto it = std::find_if(declared.begin(), declared.end(), [&](const auto& d) { return d.first == fields[0]; });
    if (it == declared.end()) {
      declared.emplace_back(fields[0], std::vector<ColumnSpec>{});
      it = std::prev(declared.end());
    }
    it->second.push_back(ColumnSpec{fields[1], domain});
  }

  Catalog catalog;
  std::vector<std::int64_t> row;
  for (auto& [name, columns] : declared) {
    const auto path = data_dir / (name + ".csv");
    if (!std::filesystem::exists(path)) throw IoError("missing data file " + path.string());
    const auto lines = csv::read_lines(path);
    Relation relation(name, columns);
    if (!lines.empty()) {
      const auto header = csv::split_line(lines.front());
      std::vector<std::string> expected;
      for (const auto& column : columns) expected.push_back(column.name);
      if (header != expected) throw FormatError(path.string() + ":1: header does not match schema descriptor");
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const std::string where = path.string() + ":" + std::to_string(i + 1);
      const auto fields = csv::split_line(lines[i]);
      if (fields.size() != columns.size()) {
        throw FormatError(where + ": arity mismatch (" + std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(columns.size()) + ")");
      }
      row.clear();
      for (std::size_t c = 0; c < fields.size(); ++c) {
        row.push_back(columns[c].domain == ValueDomain::integer ? parse_int64(fields[c], where)
                                                                : catalog.strings().intern(fields[c]));
      }
      relation.append_row(row);
    }
    catalog.add_relation(std::move(relation));
  }
  return catalog;
}

void save_catalog(const Catalog& catalog, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream schema;
  schema << "relation,column,domain\n";
  for (const auto& name : catalog.relation_names()) {
    const Relation& relation = catalog.relation(name);
    std::ostringstream data;
    std::vector<std::string> fields;
    for (const auto& column : relation.columns()) {
      schema << csv::join_fields({name, column.name, std::string(to_string(column.domain))}) << '\n';
      fields.push_back(column.name);
    }
    data << csv::join_fields(fields) << '\n';
    for (std::size_t r = 0; r < relation.row_count(); ++r) {
      fields.clear();
      for (std::size_t c = 0; c < relation.column_count(); ++c) {
        const std::int64_t v = relation.value(r, c);
        fields.push_back(relation.columns()[c].domain == ValueDomain::integer ? std::to_string(v)
                                                                              : catalog.strings().text(v));
      }
      data << csv::join_fields(fields) << '\n';
    }
    csv::write_file(dir / (name + ".csv"), data.str());
  }
  csv::write_file(dir / "schema.csv", schema.str());
}

Catalog generate_synthetic_db(std::span<const SyntheticTable> tables, std::uint64_t seed) {
  Catalog catalog;
  for (std::size_t t = 0; t < tables.size(); ++t) {
    const SyntheticTable& table = tables[t];
    std::vector<ColumnSpec> specs;
    for (const auto& column : table.columns) {
      if (column.domain_size == 0 && !column.serial) {
        throw ConfigError("table " + table.name + " column " + column.name + ": domain size must be >= 1");
      }
      if (column.skew < 0.0) throw ConfigError("table " + table.name + " column " + column.name + ": negative skew");
      if (!column.vocabulary.empty() && column.vocabulary.size() < column.domain_size) {
        throw ConfigError("table " + table.name + " column " + column.name + ": vocabulary smaller than domain");
      }
      specs.push_back(ColumnSpec{column.name, column.serial ? ValueDomain::integer : column.domain});
    }

    std::vector<std::vector<std::int64_t>> columns(table.columns.size());
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const SyntheticColumn& column = table.columns[c];
      auto& values = columns[c];
      values.reserve(table.row_count);
      if (column.serial) {
        for (std::uint64_t r = 0; r < table.row_count; ++r) values.push_back(static_cast<std::int64_t>(r));
        continue;
      }
      Rng rng(derive_seed(seed, (static_cast<std::uint64_t>(t) << 32) | c));
      std::vector<std::int64_t> by_rank(column.domain_size);
      for (std::uint64_t k = 0; k < column.domain_size; ++k) {
        if (column.domain == ValueDomain::integer) {
          by_rank[k] = static_cast<std::int64_t>(k);
        } else if (!column.vocabulary.empty()) {
          by_rank[k] = catalog.strings().intern(column.vocabulary[k]);
        } else {
          by_rank[k] = catalog.strings().intern(column.name + "_" + std::to_string(k));
        }
      }
      if (column.skew == 0.0) {
        std::uniform_int_distribution<std::uint64_t> pick(0, column.domain_size - 1);
        for (std::uint64_t r = 0; r < table.row_count; ++r) values.push_back(by_rank[pick(rng)]);
      } else {
        std::vector<double> weights(column.domain_size);
        for (std::uint64_t k = 0; k < column.domain_size; ++k) {
          weights[k] = 1.0 / std::pow(static_cast<double>(k + 1), column.skew);
        }
        std::discrete_distribution<std::uint64_t> pick(weights.begin(), weights.end());
        for (std::uint64_t r = 0; r < table.row_count; ++r) values.push_back(by_rank[pick(rng)]);
      }
    }

    Relation relation(table.name, std::move(specs));
    std::vector<std::int64_t> row(table.columns.size());
    for (std::uint64_t r = 0; r < table.row_count; ++r) {
      for (std::size_t c = 0; c < columns.size(); ++c) row[c] = columns[c][r];
      relation.append_row(row);
    }
    catalog.add_relation(std::move(relation));
  }
  return catalog;
}

std::vector<SyntheticTable> load_synthetic_spec(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  const std::vector<std::string> header{"relation", "rows", "column", "domain", "size", "skew", "vocab"};
  if (lines.empty() || csv::split_line(lines.front()) != header) {
    throw FormatError(path.string() + ": expected header 'relation,rows,column,domain,size,skew,vocab'");
  }
  std::vector<SyntheticTable> tables;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i].front() == '#') continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    const auto fields = csv::split_line(lines[i]);
    if (fields.size() != header.size()) throw FormatError(where + ": expected 7 fields");

    auto it = std::find_if(tables.begin(), tables.end(), [&](const auto& t) { return t.name == fields[0]; });
    const auto rows = static_cast<std::uint64_t>(parse_int64(fields[1], where));
    if (it == tables.end()) {
      tables.push_back(SyntheticTable{fields[0], rows, {}});
      it = std::prev(tables.end());
    } else if (it->row_count != rows) {
      throw FormatError(where + ": conflicting row count for " + fields[0]);
    }

    SyntheticColumn column;
    column.name = fields[2];
    if (fields[3] == "serial") {
      column.serial = true;
    } else {
      column.domain = parse_value_domain(fields[3]);
    }
    if (!fields[6].empty()) {
      for (auto& value : csv::read_lines(path.parent_path() / fields[6])) {
        if (!value.empty()) column.vocabulary.push_back(std::move(value));
      }
      // Sampling is over distinct values.
      std::vector<std::string> distinct;
      std::set<std::string> seen;
      for (auto& value : column.vocabulary) {
        if (seen.insert(value).second) distinct.push_back(value);
      }
      column.vocabulary = std::move(distinct);
    }
    if (!column.serial) {
      column.domain_size = fields[4].empty() ? column.vocabulary.size()
                                             : static_cast<std::uint64_t>(parse_int64(fields[4], where));
    }
    if (!fields[5].empty()) {
      try {
        column.skew = std::stod(fields[5]);
      } catch (const std::exception&) {
        throw FormatError(where + ": bad skew '" + fields[5] + "'");
      }
    }
    it->columns.push_back(std::move(column));
  }
  return tables;
}

// ---------------------------------------------------------------------------

AliasRegistry::AliasRegistry(std::vector<SlotLayout> layouts) {
  for (std::size_t i = 0; i < layouts.size(); ++i) {
    auto& layout = layouts[i];
    if (layout.slot.index != i) throw FormatError("alias slots must be numbered 0..n-1 in order");
    for (std::uint32_t p = 0; p < layout.columns.size(); ++p) {
      columns_.push_back(ColumnInfo{layout.slot.index, layout.columns[p].name, layout.columns[p].domain, p});
    }
    first_column_.push_back(static_cast<std::uint32_t>(columns_.size()));
    slots_.push_back(std::move(layout.slot));
  }
  if (slots_.size() > 64) throw LimitError("at most 64 alias slots are supported");
}

std::optional<SlotIndex> AliasRegistry::find_slot(std::string_view base_table, std::uint32_t occurrence) const {
  for (const auto& slot : slots_) {
    if (slot.base_table == base_table && slot.occurrence == occurrence) return slot.index;
  }
  return std::nullopt;
}

std::uint32_t AliasRegistry::slots_for_table(std::string_view base_table) const {
  return static_cast<std::uint32_t>(
      std::count_if(slots_.begin(), slots_.end(), [&](const AliasSlot& s) { return s.base_table == base_table; }));
}

std::optional<ColumnId> AliasRegistry::column_id(SlotIndex slot, std::string_view column) const {
  if (slot >= slots_.size()) return std::nullopt;
  for (std::uint32_t c = first_column_[slot]; c < first_column_[slot + 1]; ++c) {
    if (columns_[c].name == column) return ColumnId{c};
  }
  return std::nullopt;
}

std::vector<AliasRegistry::SlotLayout> AliasRegistry::layouts() const {
  std::vector<SlotLayout> out;
  for (const auto& slot : slots_) {
    SlotLayout layout{slot, {}};
    for (std::uint32_t c = first_column_[slot.index]; c < first_column_[slot.index + 1]; ++c) {
      layout.columns.push_back(ColumnSpec{columns_[c].name, columns_[c].domain});
    }
    out.push_back(std::move(layout));
  }
  return out;
}

AliasRegistry build_alias_registry(const Catalog& catalog,
                                   std::span<const std::vector<std::string>> template_tables) {
  std::map<std::string, std::uint32_t> max_occurrences;
  for (const auto& tables : template_tables) {
    std::map<std::string, std::uint32_t> counts;
    for (const auto& table : tables) {
      if (catalog.find_relation(table) == nullptr) throw BindError("unknown relation '" + table + "'");
      ++counts[table];
    }
    for (const auto& [table, count] : counts) {
      auto& best = max_occurrences[table];
      best = std::max(best, count);
    }
  }
  std::vector<AliasRegistry::SlotLayout> layouts;
  for (const auto& [table, count] : max_occurrences) {
    for (std::uint32_t k = 1; k <= count; ++k) {
      const auto index = static_cast<SlotIndex>(layouts.size());
      layouts.push_back({AliasSlot{index, table, k}, catalog.relation(table).columns()});
    }
  }
  return AliasRegistry(std::move(layouts));
}

}  // namespace joinsim
