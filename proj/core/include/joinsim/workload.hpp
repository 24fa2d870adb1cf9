#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "joinsim/catalog.hpp"
#include "joinsim/query.hpp"
#include "joinsim/random.hpp"
#include "joinsim/sql.hpp"

namespace joinsim {

/// A column that may receive a random IN filter, with the values to draw from.
struct FilterCandidate {
  ColumnRef column;
  std::vector<std::string> values;  // distinct, in list order
  bool numeric = false;             // values are emitted as integer literals
};

/// A fixed query skeleton (FROM list and joins) plus candidate filter columns.
struct QueryTemplate {
  std::string name;  // instances are named <name>_0, <name>_1, ...
  ParsedQuery skeleton;
  std::vector<FilterCandidate> candidates;
};

/// Randomness consumed by instance generation, in document order.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  /// Fair coin.
  virtual bool coin() = 0;
  /// Uniform integer in [lo, hi].
  virtual std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) = 0;
};

class SeededRandomSource final : public RandomSource {
 public:
  explicit SeededRandomSource(std::uint64_t seed) : rng_(seed) {}
  bool coin() override;
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) override;

 private:
  Rng rng_;
};

/// For each instance and each candidate column (in template order): flip a
/// coin; on heads draw n ~ Unif{1..5} (capped at the list size), sample n
/// distinct values by partial Fisher-Yates and append `column IN (...)`.
std::vector<ParsedQuery> generate_instances(const QueryTemplate& query_template, std::size_t count,
                                            RandomSource& random);
std::vector<ParsedQuery> generate_instances(const QueryTemplate& query_template, std::size_t count,
                                            std::uint64_t seed);

/// Reads a template file: SQL text, with candidate columns declared in leading
/// comment lines `-- candidate: <alias>.<column> <sidecar file>`. Sidecar paths
/// resolve against `sidecar_dir`; `catalog` decides which candidates are numeric.
QueryTemplate load_template(const std::filesystem::path& path, const std::filesystem::path& sidecar_dir,
                            const Catalog& catalog);

/// One value per line; blank lines skipped; duplicates dropped keeping the first.
std::vector<std::string> load_top_values(const std::filesystem::path& path);

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

struct WorkloadSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;

  const std::vector<std::string>& named(std::string_view name) const;
  bool operator==(const WorkloadSplit&) const = default;
};

/// Partitions every template's instances independently with the given sizes.
/// Each output list is sorted by id.
WorkloadSplit split_workload(std::span<const std::vector<std::string>> per_template_ids, SplitSizes sizes,
                             std::uint64_t seed);

void save_split(const WorkloadSplit& split, const std::filesystem::path& path);
WorkloadSplit load_split(const std::filesystem::path& path);

/// Registry plus bound queries; what the environment needs besides traces.
struct Workload {
  AliasRegistry registry;
  std::vector<Query> queries;

  const Query& query(std::string_view id) const;
  const Query* find(std::string_view id) const;
};

/// JSON-lines query-set file: a header record carrying the alias registry,
/// then one record per query with id, SQL and the bound (I, U, J).
void save_query_set(const Workload& workload, const std::filesystem::path& path);
/// Re-binds every record's SQL and rejects records whose stored (I, U, J) disagree.
Workload load_query_set(const std::filesystem::path& path);

}  // namespace joinsim
