#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace joinsim::cli {

/// Every flag of every subcommand. Unused fields keep their defaults.
struct RunConfig {
  std::string command;
  std::uint64_t seed = 0;
  std::string format = "text";

  std::string spec;
  std::string catalog;
  std::string templates;
  std::string sidecars;
  std::string template_file;
  std::string queries;
  std::string manifest;
  std::string plans;
  std::string split;
  std::string records;
  std::string output;
  std::string plan_file;
  std::string distribution;

  std::string plan_type = "left-deep";
  bool disable_cp = false;
  double clip_factor = 100.0;

  std::size_t per_template = 20;
  std::size_t jobs = 1;
  std::size_t table_limit = 14;
  std::size_t train_episodes = 0;
  std::size_t repeats = 1;
  std::string split_name = "test";
  std::string agent = "random";
  std::string query_id;
  std::string actions;

  bool operator==(const RunConfig&) const = default;
};

/// Parses `args` (without the program name) into a RunConfig. Throws on bad flags.
RunConfig parse_args(const std::vector<std::string>& args);

/// Config-file text that parse_args(--config <file>) turns back into `config`.
std::string to_config_text(const RunConfig& config);

/// Full driver: parse, run, report. Returns the process exit code; failures
/// print one line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace joinsim::cli
