#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "joinsim/cardinality.hpp"
#include "joinsim/catalog.hpp"
#include "joinsim/errors.hpp"
#include "joinsim/regime.hpp"

namespace joinsim {

class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// C* per (plan type, CP setting); absent until a planner fills it in.
struct OptimalCosts {
  std::optional<Cardinality> left_deep_cp;
  std::optional<Cardinality> left_deep_no_cp;
  std::optional<Cardinality> bushy_cp;
  std::optional<Cardinality> bushy_no_cp;

  std::optional<Cardinality>& operator[](Regime regime);
  const std::optional<Cardinality>& operator[](Regime regime) const;

  bool operator==(const OptimalCosts&) const = default;
};

/// Subset-to-cardinality table for one query. Subsets are keyed by global slot
/// masks; storage is dense over the query's own tables.
class Trace {
 public:
  Trace() = default;
  /// `slots` ascending; `selectivities[k]` belongs to `slots[k]`.
  Trace(std::string query_id, std::vector<SlotIndex> slots, std::vector<double> selectivities);

  const std::string& query_id() const { return query_id_; }
  const std::vector<SlotIndex>& slots() const { return slots_; }
  std::size_t table_count() const { return slots_.size(); }
  const std::vector<double>& selectivities() const { return selectivities_; }
  SubsetKey full_set() const;

  void set(SubsetKey subset, Cardinality value);
  void set_local(std::uint64_t local_mask, Cardinality value);

  bool contains(SubsetKey subset) const;
  bool complete() const { return present_count_ + 1 == entries_.size(); }
  std::size_t entry_count() const { return present_count_; }

  /// Throws MissingEntryError for subsets a partial trace lacks, LimitError for
  /// empty subsets or slots outside the query.
  Cardinality lookup(SubsetKey subset) const;
  Cardinality lookup_local(std::uint64_t local_mask) const {
    if (!present_[local_mask]) missing(local_mask);
    return entries_[local_mask];
  }

  std::uint64_t to_local(SubsetKey subset) const;
  SubsetKey to_global(std::uint64_t local_mask) const;

  OptimalCosts& optimal() { return optimal_; }
  const OptimalCosts& optimal() const { return optimal_; }

  bool operator==(const Trace&) const = default;

 private:
  [[noreturn]] void missing(std::uint64_t local_mask) const;

  std::string query_id_;
  std::vector<SlotIndex> slots_;
  std::vector<double> selectivities_;
  std::vector<Cardinality> entries_;
  std::vector<std::uint8_t> present_;
  std::size_t present_count_ = 0;
  OptimalCosts optimal_;
};

/// Canonical text form: header `joinsim-trace v1`, `query_id,selectivities`,
/// one `subset_hex,cardinality,saturated` line per entry in ascending mask order,
/// `optimal,...`, `complete,...`, then `checksum,<fnv1a-64 of everything above>`.
std::string serialize_trace(const Trace& trace);
Trace parse_trace(std::string_view text, bool require_complete = false);

void save_trace(const Trace& trace, const std::filesystem::path& path);
Trace load_trace(const std::filesystem::path& path, bool require_complete = false);

/// Manifest: one `query_id relative/path` line per trace.
void save_manifest(const std::vector<std::pair<std::string, std::string>>& entries,
                   const std::filesystem::path& path);
std::vector<std::pair<std::string, std::string>> load_manifest(const std::filesystem::path& path);

/// Loaded traces by query id. Immutable once filled; share freely.
class TraceStore {
 public:
  static TraceStore from_manifest(const std::filesystem::path& manifest, bool require_complete = true);

  void add(std::shared_ptr<const Trace> trace);
  std::shared_ptr<const Trace> find(std::string_view query_id) const;
  const Trace& at(std::string_view query_id) const;
  std::vector<std::string> ids() const;
  std::size_t size() const { return traces_.size(); }

 private:
  std::map<std::string, std::shared_ptr<const Trace>, std::less<>> traces_;
};

}  // namespace joinsim
