#include "joinsim/workload.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "joinsim/errors.hpp"

namespace joinsim {

using nlohmann::json;

bool SeededRandomSource::coin() { return std::bernoulli_distribution(0.5)(rng_); }

std::uint64_t SeededRandomSource::uniform(std::uint64_t lo, std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng_);
}

std::vector<ParsedQuery> generate_instances(const QueryTemplate& query_template, std::size_t count,
                                            RandomSource& random) {
  for (const auto& candidate : query_template.candidates) {
    if (candidate.values.empty()) {
      throw ConfigError("template " + query_template.name + ": candidate " + candidate.column.alias + "." +
                        candidate.column.column + " has an empty value list");
    }
  }
  std::vector<ParsedQuery> instances;
  instances.reserve(count);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < count; ++i) {
    ParsedQuery instance = query_template.skeleton;
    instance.id = query_template.name + "_" + std::to_string(i);
    for (const auto& candidate : query_template.candidates) {
      if (!random.coin()) continue;
      const std::size_t list_size = candidate.values.size();
      const auto n = std::min<std::size_t>(random.uniform(1, 5), list_size);
      order.resize(list_size);
      for (std::size_t k = 0; k < list_size; ++k) order[k] = k;
      ParsedFilter filter{FilterKind::in_set, candidate.column, {}, {}};
      for (std::size_t k = 0; k < n; ++k) {
        const auto j = static_cast<std::size_t>(random.uniform(k, list_size - 1));
        std::swap(order[k], order[j]);
        const std::string& value = candidate.values[order[k]];
        if (candidate.numeric) {
          std::int64_t number = 0;
          const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), number);
          if (ec != std::errc{} || ptr != value.data() + value.size()) {
            throw ConfigError("candidate " + candidate.column.column + ": '" + value + "' is not an integer");
          }
          filter.values.emplace_back(number);
        } else {
          filter.values.emplace_back(value);
        }
      }
      instance.filters.push_back(std::move(filter));
    }
    instances.push_back(std::move(instance));
  }
  return instances;
}

std::vector<ParsedQuery> generate_instances(const QueryTemplate& query_template, std::size_t count,
                                            std::uint64_t seed) {
  SeededRandomSource random(seed);
  return generate_instances(query_template, count, random);
}

std::vector<std::string> load_top_values(const std::filesystem::path& path) {
  std::vector<std::string> values;
  std::set<std::string> seen;
  for (auto& line : csv::read_lines(path)) {
    if (line.empty()) continue;
    if (seen.insert(line).second) values.push_back(std::move(line));
  }
  return values;
}

QueryTemplate load_template(const std::filesystem::path& path, const std::filesystem::path& sidecar_dir,
                            const Catalog& catalog) {
  const std::string text = csv::read_file(path);
  QueryTemplate result;
  result.name = path.stem().string();
  result.skeleton = parse_query(text);
  result.skeleton.id = result.name;

  static const std::regex kCandidate(R"(^\s*--\s*candidate:\s*([A-Za-z_]\w*)\.([A-Za-z_]\w*)\s+(\S+)\s*$)");
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch match;
    if (!std::regex_match(line, match, kCandidate)) continue;
    FilterCandidate candidate;
    candidate.column = ColumnRef{match[1], match[2]};
    candidate.values = load_top_values(sidecar_dir / match[3].str());

    const auto table = std::find_if(result.skeleton.from.begin(), result.skeleton.from.end(),
                                    [&](const TableRef& ref) { return ref.alias == candidate.column.alias; });
    if (table == result.skeleton.from.end()) {
      throw BindError(path.string() + ": candidate alias '" + candidate.column.alias + "' is not in FROM");
    }
    const Relation& relation = catalog.relation(table->table);
    const auto position = relation.column_index(candidate.column.column);
    if (!position) {
      throw BindError(path.string() + ": relation " + table->table + " has no column '" + candidate.column.column +
                      "'");
    }
    candidate.numeric = relation.columns()[*position].domain == ValueDomain::integer;
    result.candidates.push_back(std::move(candidate));
  }
  return result;
}

const std::vector<std::string>& WorkloadSplit::named(std::string_view name) const {
  if (name == "train") return train;
  if (name == "val" || name == "validation") return validation;
  if (name == "test") return test;
  throw ConfigError("unknown split '" + std::string(name) + "' (expected train, val or test)");
}

WorkloadSplit split_workload(std::span<const std::vector<std::string>> per_template_ids, SplitSizes sizes,
                             std::uint64_t seed) {
  WorkloadSplit split;
  const std::size_t expected = sizes.train + sizes.validation + sizes.test;
  for (std::size_t t = 0; t < per_template_ids.size(); ++t) {
    std::vector<std::string> ids = per_template_ids[t];
    if (ids.size() != expected) {
      throw ConfigError("split sizes sum to " + std::to_string(expected) + " but template " + std::to_string(t) +
                        " has " + std::to_string(ids.size()) + " instances");
    }
    Rng rng(derive_seed(seed, t));
    for (std::size_t i = ids.size(); i > 1; --i) {
      const auto j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
      std::swap(ids[i - 1], ids[j]);
    }
    auto cursor = ids.begin();
    split.train.insert(split.train.end(), cursor, cursor + static_cast<std::ptrdiff_t>(sizes.train));
    cursor += static_cast<std::ptrdiff_t>(sizes.train);
    split.validation.insert(split.validation.end(), cursor, cursor + static_cast<std::ptrdiff_t>(sizes.validation));
    cursor += static_cast<std::ptrdiff_t>(sizes.validation);
    split.test.insert(split.test.end(), cursor, ids.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

void save_split(const WorkloadSplit& split, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& id : split.train) out << id << ",train\n";
  for (const auto& id : split.validation) out << id << ",val\n";
  for (const auto& id : split.test) out << id << ",test\n";
  csv::write_file(path, out.str());
}

WorkloadSplit load_split(const std::filesystem::path& path) {
  WorkloadSplit split;
  const auto lines = csv::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = csv::split_line(lines[i]);
    if (fields.size() != 2) throw FormatError(path.string() + ":" + std::to_string(i + 1) + ": expected id,split");
    if (fields[1] == "train") {
      split.train.push_back(fields[0]);
    } else if (fields[1] == "val") {
      split.validation.push_back(fields[0]);
    } else if (fields[1] == "test") {
      split.test.push_back(fields[0]);
    } else {
      throw FormatError(path.string() + ":" + std::to_string(i + 1) + ": unknown split '" + fields[1] + "'");
    }
  }
  return split;
}

const Query* Workload::find(std::string_view id) const {
  for (const auto& query : queries) {
    if (query.id == id) return &query;
  }
  return nullptr;
}

const Query& Workload::query(std::string_view id) const {
  const Query* found = find(id);
  if (found == nullptr) throw ConfigError("unknown query id '" + std::string(id) + "'");
  return *found;
}

namespace {

constexpr const char* kQuerySetFormat = "joinsim-queries v1";

json literal_to_json(const Literal& literal) {
  if (const auto* number = std::get_if<std::int64_t>(&literal)) return *number;
  return std::get<std::string>(literal);
}

json filter_to_json(const FilterPredicate& filter) {
  static const char* kNames[] = {"eq", "in", "lt", "gt", "and"};
  json out{{"kind", kNames[static_cast<int>(filter.kind)]}};
  if (filter.kind == FilterKind::conjunction) {
    out["children"] = json::array();
    for (const auto& child : filter.children) out["children"].push_back(filter_to_json(child));
  } else {
    out["column"] = filter.column.index;
    out["values"] = json::array();
    for (const auto& value : filter.values) out["values"].push_back(literal_to_json(value));
  }
  return out;
}

json query_to_json(const Query& query) {
  json out{{"id", query.id}, {"sql", query.sql}, {"tables", query.tables}};
  out["filters"] = json::array();
  for (const auto& [slot, filter] : query.filters) out["filters"].push_back({{"slot", slot}, {"filter", filter_to_json(filter)}});
  out["joins"] = json::array();
  for (const auto& join : query.joins) out["joins"].push_back({join.left.index, join.right.index});
  return out;
}

}  // namespace

void save_query_set(const Workload& workload, const std::filesystem::path& path) {
  std::ostringstream out;
  json header{{"format", kQuerySetFormat}, {"registry", json::array()}};
  for (const auto& layout : workload.registry.layouts()) {
    json columns = json::array();
    for (const auto& column : layout.columns) columns.push_back({column.name, to_string(column.domain)});
    header["registry"].push_back({{"slot", layout.slot.index},
                                  {"table", layout.slot.base_table},
                                  {"occurrence", layout.slot.occurrence},
                                  {"columns", columns}});
  }
  out << header.dump() << '\n';
  for (const auto& query : workload.queries) out << query_to_json(query).dump() << '\n';
  csv::write_file(path, out.str());
}

Workload load_query_set(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw FormatError(path.string() + ": empty query-set file");
  Workload workload;
  try {
    const json header = json::parse(lines.front());
    if (header.value("format", "") != kQuerySetFormat) {
      throw FormatError(path.string() + ": not a " + std::string(kQuerySetFormat) + " file");
    }
    std::vector<AliasRegistry::SlotLayout> layouts;
    for (const auto& entry : header.at("registry")) {
      AliasRegistry::SlotLayout layout;
      layout.slot = AliasSlot{entry.at("slot").get<SlotIndex>(), entry.at("table").get<std::string>(),
                              entry.at("occurrence").get<std::uint32_t>()};
      for (const auto& column : entry.at("columns")) {
        layout.columns.push_back(
            ColumnSpec{column.at(0).get<std::string>(), parse_value_domain(column.at(1).get<std::string>())});
      }
      layouts.push_back(std::move(layout));
    }
    workload.registry = AliasRegistry(std::move(layouts));

    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const json record = json::parse(lines[i]);
      Query query =
          parse_and_bind(record.at("sql").get<std::string>(), workload.registry, record.at("id").get<std::string>());
      if (query_to_json(query) != record) {
        throw FormatError(path.string() + ":" + std::to_string(i + 1) + ": stored (I, U, J) of " + query.id +
                          " disagree with its SQL");
      }
      if (workload.find(query.id) != nullptr) throw FormatError(path.string() + ": duplicate query id " + query.id);
      workload.queries.push_back(std::move(query));
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return workload;
}

}  // namespace joinsim
