#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace joinsim {

enum class ValueDomain { integer, string };

std::string_view to_string(ValueDomain domain);
ValueDomain parse_value_domain(std::string_view text);

/// Interns cell strings to dense 64-bit ids. Ids are only meaningful within one Catalog.
class StringPool {
 public:
  std::int64_t intern(std::string_view text);
  std::optional<std::int64_t> find(std::string_view text) const;
  const std::string& text(std::int64_t id) const;
  std::size_t size() const { return strings_.size(); }

 private:
  std::vector<std::string> strings_;
  std::unordered_map<std::string, std::int64_t> ids_;
};

struct ColumnSpec {
  std::string name;
  ValueDomain domain = ValueDomain::integer;

  bool operator==(const ColumnSpec&) const = default;
};

/// A base table. Cells are stored column-major as interned 64-bit values.
class Relation {
 public:
  Relation(std::string name, std::vector<ColumnSpec> columns);

  const std::string& name() const { return name_; }
  const std::vector<ColumnSpec>& columns() const { return columns_; }
  std::size_t column_count() const { return columns_.size(); }
  std::size_t row_count() const { return row_count_; }
  std::optional<std::size_t> column_index(std::string_view column) const;

  std::int64_t value(std::size_t row, std::size_t column) const { return data_[column][row]; }
  std::span<const std::int64_t> column_values(std::size_t column) const { return data_[column]; }

  /// Appends one row; throws FormatError when the arity does not match.
  void append_row(std::span<const std::int64_t> row);

 private:
  std::string name_;
  std::vector<ColumnSpec> columns_;
  std::vector<std::vector<std::int64_t>> data_;
  std::size_t row_count_ = 0;
};

/// Named relations plus the string pool shared by all of them. Built once,
/// then only read (concurrent readers are safe).
class Catalog {
 public:
  Relation& add_relation(Relation relation);

  const Relation& relation(std::string_view name) const;
  const Relation* find_relation(std::string_view name) const;
  std::vector<std::string> relation_names() const;

  StringPool& strings() { return strings_; }
  const StringPool& strings() const { return strings_; }

 private:
  std::map<std::string, Relation, std::less<>> relations_;
  StringPool strings_;
};

/// Reads a schema descriptor (CSV with header `relation,column,domain`) and one
/// `<relation>.csv` per relation from `data_dir`.
Catalog load_catalog(const std::filesystem::path& schema_descriptor, const std::filesystem::path& data_dir);

/// Writes `schema.csv` and one data file per relation into `dir`.
void save_catalog(const Catalog& catalog, const std::filesystem::path& dir);

struct SyntheticColumn {
  std::string name;
  ValueDomain domain = ValueDomain::integer;
  std::uint64_t domain_size = 1;
  double skew = 0.0;  // 0 = uniform, > 0 = Zipf exponent over value ranks
  bool serial = false;  // value = row number; ignores domain_size/skew
  std::vector<std::string> vocabulary;  // string values by rank; empty = "<column>_<rank>"
};

struct SyntheticTable {
  std::string name;
  std::uint64_t row_count = 0;
  std::vector<SyntheticColumn> columns;
};

/// Deterministic for a fixed (tables, seed); every column draws from its own stream.
Catalog generate_synthetic_db(std::span<const SyntheticTable> tables, std::uint64_t seed);

/// CSV with header `relation,rows,column,domain,size,skew,vocab`. `domain` is
/// int, str, or serial; `vocab` is an optional path (relative to the file) to a
/// one-value-per-line list.
std::vector<SyntheticTable> load_synthetic_spec(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Alias slots and global column numbering
// ---------------------------------------------------------------------------

using SlotIndex = std::uint32_t;

/// Global column number in [0, N_cols).
struct ColumnId {
  std::uint32_t index = 0;

  friend auto operator<=>(ColumnId, ColumnId) = default;
};

struct AliasSlot {
  SlotIndex index = 0;
  std::string base_table;
  std::uint32_t occurrence = 1;  // 1-based

  bool operator==(const AliasSlot&) const = default;
};

struct ColumnInfo {
  SlotIndex slot = 0;
  std::string name;
  ValueDomain domain = ValueDomain::integer;
  std::uint32_t position = 0;  // column position within the base relation

  bool operator==(const ColumnInfo&) const = default;
};

/// Positional identity for base-table occurrences. A table used at most k times
/// by any template gets k slots; slots are sorted by (table name, occurrence) and
/// each slot contributes all of its base table's columns, in schema order, to the
/// global column numbering.
class AliasRegistry {
 public:
  struct SlotLayout {
    AliasSlot slot;
    std::vector<ColumnSpec> columns;
  };

  AliasRegistry() = default;

  /// `layouts` must already be in slot order with indices 0..n-1.
  explicit AliasRegistry(std::vector<SlotLayout> layouts);

  std::size_t slot_count() const { return slots_.size(); }
  std::size_t column_count() const { return columns_.size(); }
  const std::vector<AliasSlot>& slots() const { return slots_; }
  const AliasSlot& slot(SlotIndex index) const { return slots_.at(index); }
  std::optional<SlotIndex> find_slot(std::string_view base_table, std::uint32_t occurrence) const;
  std::uint32_t slots_for_table(std::string_view base_table) const;

  const ColumnInfo& column(ColumnId id) const { return columns_.at(id.index); }
  std::optional<ColumnId> column_id(SlotIndex slot, std::string_view column) const;
  std::uint32_t first_column(SlotIndex slot) const { return first_column_.at(slot); }
  std::uint32_t column_count(SlotIndex slot) const { return first_column_.at(slot + 1) - first_column_.at(slot); }

  std::vector<SlotLayout> layouts() const;

  bool operator==(const AliasRegistry& other) const {
    return slots_ == other.slots_ && columns_ == other.columns_;
  }

 private:
  std::vector<AliasSlot> slots_;
  std::vector<ColumnInfo> columns_;
  std::vector<std::uint32_t> first_column_{0};
};

/// `template_tables` holds, per template, the base-table name of every FROM
/// entry (duplicates allowed). Throws BindError on names missing from the catalog.
AliasRegistry build_alias_registry(const Catalog& catalog,
                                   std::span<const std::vector<std::string>> template_tables);

}  // namespace joinsim
