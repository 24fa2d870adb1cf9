#include "joinsim/evaluation.hpp"

#include <algorithm>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "csv.hpp"

namespace joinsim {

namespace {

std::string fixed(double value, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, value);
  return buf;
}

}  // namespace

EpisodeRecord run_episode(JoinEnv& env, Agent& agent, std::optional<std::string> query_id, Rng& rng) {
  env.reset(std::move(query_id));
  agent.begin_episode(env);
  EpisodeRecord record;
  record.query_id = env.query_id();
  record.optimal_cost = env.optimal_cost();
  bool learn = agent.wants_transitions();
  while (!env.done()) {
    std::size_t action = agent.select_action({env, env.observation(), env.action_mask()}, rng);
    if (action >= env.action_mask().size() || !env.action_mask()[action]) {
      throw ProtocolError("agent '" + agent.name() + "' chose masked-out action " + std::to_string(action) +
                          " on query " + env.query_id());
    }
    std::string state = learn ? TabularQAgent::state_key(env) : std::string();
    StepResult result = env.step(action);
    record.actions.push_back(action);
    record.costs.push_back(result.info.ir_cardinality);
    record.total_cost += result.info.ir_cardinality;
    record.total_reward += result.reward;
    if (learn) {
      agent.observe({std::move(state), action, result.reward, result.done, TabularQAgent::state_key(env),
                     &env.action_mask()});
    }
  }
  record.ccm = static_cast<double>(record.total_cost.to_long_double() / record.optimal_cost.to_long_double());
  return record;
}

void train_agent(JoinEnv& env, Agent& agent, std::size_t episodes, Rng& rng) {
  for (std::size_t e = 0; e < episodes; ++e) {
    std::size_t pick = std::uniform_int_distribution<std::size_t>(0, env.query_ids().size() - 1)(rng);
    run_episode(env, agent, env.query_ids()[pick], rng);
  }
}

Evaluation evaluate_agent(JoinEnv& env, Agent& agent, std::span<const std::string> query_ids, Rng& rng,
                          std::size_t repeats) {
  if (query_ids.empty() || repeats == 0) throw ConfigError("evaluation needs at least one query");
  Evaluation out;
  for (const std::string& id : query_ids) {
    for (std::size_t r = 0; r < repeats; ++r) out.records.push_back(run_episode(env, agent, id, rng));
  }
  out.stats = ccm_stats(out.records);
  return out;
}

double nearest_rank(std::span<const double> sorted, unsigned percent) {
  if (sorted.empty()) throw ConfigError("quantile of an empty sequence");
  std::size_t rank = (percent * sorted.size() + 99) / 100;
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

CcmStats ccm_stats(std::span<const EpisodeRecord> records) {
  if (records.empty()) throw ConfigError("statistics of an empty record set");
  std::vector<double> values;
  long double sum = 0;
  for (const auto& r : records) {
    values.push_back(r.ccm);
    sum += r.ccm;
  }
  std::sort(values.begin(), values.end());
  CcmStats stats;
  stats.count = values.size();
  stats.mean = static_cast<double>(sum / static_cast<long double>(values.size()));
  stats.p90 = nearest_rank(values, 90);
  stats.p95 = nearest_rank(values, 95);
  stats.p99 = nearest_rank(values, 99);
  return stats;
}

std::vector<std::pair<double, double>> ccdf(std::span<const EpisodeRecord> records) {
  if (records.empty()) throw ConfigError("CCDF of an empty record set");
  std::vector<double> values;
  for (const auto& r : records) values.push_back(r.ccm);
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> out;
  double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0 && values[i] == values[i - 1]) continue;
    out.emplace_back(values[i], static_cast<double>(values.size() - i) / n);
  }
  return out;
}

void export_ccdf(std::span<const EpisodeRecord> records, const std::filesystem::path& path) {
  std::string out = "ccm,fraction\n";
  for (const auto& [threshold, fraction] : ccdf(records)) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", threshold, fraction);
    out += buf;
  }
  csv::write_file(path, out);
}

std::string format_records(const Evaluation& evaluation) {
  std::string out;
  for (const auto& r : evaluation.records) {
    nlohmann::json j = {{"query_id", r.query_id},
                        {"ccm", r.ccm},
                        {"cost", to_string(r.total_cost)},
                        {"optimal_cost", to_string(r.optimal_cost)},
                        {"reward", r.total_reward}};
    out += j.dump() + '\n';
  }
  const CcmStats& s = evaluation.stats;
  nlohmann::json stats = {{"stats", {{"count", s.count}, {"mean", s.mean}, {"p90", s.p90}, {"p95", s.p95}, {"p99", s.p99}}}};
  out += stats.dump() + '\n';
  return out;
}

std::string format_text(const Evaluation& evaluation) {
  std::string out;
  for (const auto& r : evaluation.records) {
    out += r.query_id + "  ccm " + fixed(r.ccm) + "  cost " + to_string(r.total_cost) + "  optimal " +
           to_string(r.optimal_cost) + '\n';
  }
  const CcmStats& s = evaluation.stats;
  out += "episodes " + std::to_string(s.count) + "  mean " + fixed(s.mean) + "  p90 " + fixed(s.p90) + "  p95 " +
         fixed(s.p95) + "  p99 " + fixed(s.p99) + '\n';
  return out;
}

}  // namespace joinsim
