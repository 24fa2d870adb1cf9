#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "joinsim/agents.hpp"
#include "joinsim/env.hpp"

namespace joinsim {

struct EpisodeRecord {
  std::string query_id;
  std::vector<std::size_t> actions;
  std::vector<Cardinality> costs;  // c_h per step, staging included
  Cardinality total_cost;          // unclipped, saturating
  Cardinality optimal_cost;
  double ccm = 0.0;
  double total_reward = 0.0;
};

struct CcmStats {
  std::size_t count = 0;
  double mean = 0.0;
  double p90 = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
};

struct Evaluation {
  std::vector<EpisodeRecord> records;
  CcmStats stats;
};

/// Runs one full episode. Throws ProtocolError naming the agent when it picks
/// a masked-out action.
EpisodeRecord run_episode(JoinEnv& env, Agent& agent, std::optional<std::string> query_id, Rng& rng);

/// `episodes` episodes on random queries of the environment, for learning agents.
void train_agent(JoinEnv& env, Agent& agent, std::size_t episodes, Rng& rng);

/// `repeats` episodes per query id, in the given order. Throws ConfigError on an empty set.
Evaluation evaluate_agent(JoinEnv& env, Agent& agent, std::span<const std::string> query_ids, Rng& rng,
                          std::size_t repeats = 1);

/// Value at rank ceil(percent * n / 100) of the sorted sequence.
double nearest_rank(std::span<const double> sorted, unsigned percent);
CcmStats ccm_stats(std::span<const EpisodeRecord> records);

/// (threshold, fraction of records with ccm >= threshold) for every distinct ccm, ascending.
std::vector<std::pair<double, double>> ccdf(std::span<const EpisodeRecord> records);
void export_ccdf(std::span<const EpisodeRecord> records, const std::filesystem::path& path);

/// One JSON object per record, then a `{"stats": ...}` line.
std::string format_records(const Evaluation& evaluation);
/// Human-readable summary.
std::string format_text(const Evaluation& evaluation);

}  // namespace joinsim
