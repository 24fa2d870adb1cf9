#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "joinsim/catalog.hpp"
#include "joinsim/env.hpp"
#include "joinsim/query.hpp"
#include "joinsim/random.hpp"
#include "joinsim/trace.hpp"
#include "joinsim/workload.hpp"

namespace joinsim::testing {

std::filesystem::path fixture_dir();
/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(std::string_view name);

/// Integer-only relation from literal rows.
Relation int_relation(std::string name, std::vector<std::string> columns,
                      const std::vector<std::vector<std::int64_t>>& rows);

/// A catalog and one bound query; the registry is built from that query alone.
struct Instance {
  std::shared_ptr<Catalog> catalog;
  AliasRegistry registry;
  Query query;
};

Instance make_instance(std::shared_ptr<Catalog> catalog, std::string_view sql, std::string id = "q");

/// Nested-loop join count over the query's tables in `local_mask`, filters
/// evaluated row by row. Shares no code with the join engine.
Cardinality brute_force_count(const Catalog& catalog, const AliasRegistry& registry, const Query& query,
                              std::uint64_t local_mask);

struct RandomInstanceOptions {
  std::size_t min_tables = 2;
  std::size_t max_tables = 5;
  std::size_t max_rows = 12;
  std::int64_t domain = 4;
  bool connected = true;
  double row_product_limit = 1e6;
};

/// Random tables (self-joins included), random join graph and filters.
Instance random_instance(Rng& rng, const RandomInstanceOptions& options, std::string id = "r");

/// Engine-built complete trace with all optimal costs filled.
Trace full_trace(const Instance& instance);

/// Single-query workload and trace store for `instance`.
EnvData instance_env_data(const Instance& instance);

/// Trace over `graph`'s tables with random cardinalities in [1, max_value].
Trace random_trace(const QueryGraph& graph, Rng& rng, std::uint64_t max_value = 1000000, std::string id = "t");

/// The repository fixtures run through gen-db, gen-queries, build-trace, optimal.
struct FixturePipeline {
  std::shared_ptr<Catalog> catalog;
  std::shared_ptr<Workload> workload;
  std::shared_ptr<TraceStore> traces;
  WorkloadSplit split;

  EnvData env_data() const { return {workload, traces}; }
  std::vector<std::string> ids_with_tables(std::size_t min_tables, std::size_t max_tables) const;
  /// Ids whose optimal cost is non-zero in every regime.
  std::vector<std::string> usable_ids() const;
};

/// `templates` empty = every template in fixtures/templates. Cached per argument set.
const FixturePipeline& fixture_pipeline(std::size_t per_template = 10, std::uint64_t seed = 7,
                                        std::vector<std::string> templates = {});

}  // namespace joinsim::testing
