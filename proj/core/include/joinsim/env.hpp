#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "joinsim/cardinality.hpp"
#include "joinsim/query.hpp"
#include "joinsim/random.hpp"
#include "joinsim/regime.hpp"
#include "joinsim/trace.hpp"
#include "joinsim/workload.hpp"

namespace joinsim {

inline constexpr double kDefaultClipFactor = 100.0;

struct EnvConfig {
  PlanType plan_type = PlanType::left_deep;
  bool disable_cp = false;
  std::vector<std::string> query_ids;  // empty = every query with a trace
  double clip_factor = kDefaultClipFactor;
  std::uint64_t seed = 0;
  /// Drop queries whose optimum is zero or saturated instead of failing.
  bool skip_unusable = false;
  bool record_log = false;

  Regime regime() const { return {plan_type, !disable_cp}; }
};

/// [selectivity per table | goal flag per column | partial-plan mark per column]
using Observation = std::vector<double>;
using ActionMask = std::vector<std::uint8_t>;

struct StepInfo {
  ActionMask action_mask;
  Cardinality ir_cardinality;
};

struct ResetResult {
  Observation observation;
  StepInfo info;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct EpisodeLogLine {
  std::string query_id;
  int h = 0;
  std::size_t action = 0;
  Cardinality cost;
  double reward = 0.0;
};

/// `query_id,h,action,c_h,reward`
std::string to_string(const EpisodeLogLine& line);

/// (C_min - min(c, C_max)) / C_max with C_max = clip * C* and C_min = C* / num_joins.
/// Throws ConfigError for a zero or saturated C* and LimitError for num_joins == 0.
double reward_from_cost(Cardinality cost, Cardinality optimal, std::size_t num_joins, double clip_factor);

/// Rank of (i, j), i < j < n, among all such pairs in lexicographic order.
std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n);
std::pair<std::size_t, std::size_t> pair_from_index(std::size_t index, std::size_t n);

/// Shared, immutable inputs of any number of environments.
struct EnvData {
  std::shared_ptr<const Workload> workload;
  std::shared_ptr<const TraceStore> traces;
};

EnvData load_env_data(const std::filesystem::path& query_set, const std::filesystem::path& manifest);

/// Join-order episode over one query at a time. Every cost comes from the
/// query's trace. Single-threaded; separate instances may share EnvData.
class JoinEnv {
 public:
  virtual ~JoinEnv() = default;

  const EnvConfig& config() const { return config_; }
  Regime regime() const { return config_.regime(); }
  virtual std::size_t action_count() const = 0;
  std::size_t observation_size() const { return table_count_ + 2 * column_count_; }
  std::size_t table_count() const { return table_count_; }
  std::size_t column_count() const { return column_count_; }
  const std::vector<std::string>& query_ids() const { return ids_; }
  const std::vector<std::string>& excluded() const { return excluded_; }

  ResetResult reset(std::optional<std::string> query_id = std::nullopt, std::optional<std::uint64_t> seed = std::nullopt);
  /// Throws InvalidActionError when the action's mask bit is clear or the episode is over.
  StepResult step(std::size_t action);
  /// c_h that `action` would produce now, without taking it.
  Cardinality preview_cost(std::size_t action) const;

  const std::string& query_id() const { return current().id; }
  const Query& query() const { return *current().query; }
  const QueryGraph& graph() const { return current().graph; }
  const Trace& trace() const { return *current().trace; }
  Cardinality optimal_cost() const { return current().optimal; }
  Cardinality optimal_cost(std::string_view query_id) const;
  /// Steps per episode: |I| left-deep, |I|-1 bushy.
  virtual int horizon() const = 0;
  /// 1-based index of the next step.
  int step_index() const { return h_; }
  bool done() const { return done_; }
  const Observation& observation() const { return observation_; }
  const ActionMask& action_mask() const { return mask_; }
  std::vector<std::size_t> valid_actions() const;
  /// Canonical text for the current partial plan (not including the query id).
  virtual std::string partition_key() const = 0;

  const std::vector<EpisodeLogLine>& log() const { return log_; }
  void write_log(std::ostream& os) const;

 protected:
  struct Context {
    std::string id;
    const Query* query = nullptr;
    std::shared_ptr<const Trace> trace;
    QueryGraph graph;
    Cardinality optimal;
    std::vector<double> selectivity;  // by slot
    std::vector<std::uint8_t> goal;   // by column
  };

  JoinEnv(EnvConfig config, EnvData data);

  const Context& current() const;
  virtual void start_episode() = 0;
  virtual Cardinality apply(std::size_t action) = 0;  // returns c_h
  virtual Cardinality cost_of(std::size_t action) const = 0;
  virtual void refresh_mask() = 0;
  /// Marks columns of every predicate between the two local sets as joined.
  void mark_joined(std::uint64_t a, std::uint64_t b);
  void encode();
  /// Component id (0-based, stable within the episode) of local table k, or -1 when not yet touched.
  virtual int component_of(std::size_t local) const = 0;
  virtual std::uint64_t component_mask(int component) const = 0;

  EnvConfig config_;
  EnvData data_;
  std::size_t table_count_ = 0;
  std::size_t column_count_ = 0;
  std::vector<std::string> ids_;
  std::vector<std::string> excluded_;
  std::vector<Context> contexts_;
  std::size_t active_ = static_cast<std::size_t>(-1);
  Rng rng_;

  int h_ = 1;
  bool done_ = false;
  Observation observation_;
  ActionMask mask_;
  std::vector<std::uint8_t> joined_columns_;
  std::vector<EpisodeLogLine> log_;
};

/// Action = slot of the next table; the first step only stages it.
class LeftDeepEnv final : public JoinEnv {
 public:
  LeftDeepEnv(EnvConfig config, EnvData data);

  std::size_t action_count() const override { return table_count_; }
  int horizon() const override { return static_cast<int>(graph().size()); }
  std::string partition_key() const override;
  std::uint64_t joined_local() const { return joined_; }

 private:
  void start_episode() override;
  Cardinality apply(std::size_t action) override;
  Cardinality cost_of(std::size_t action) const override;
  void refresh_mask() override;
  int component_of(std::size_t local) const override { return (joined_ >> local & 1) ? 0 : -1; }
  std::uint64_t component_mask(int) const override { return joined_; }

  std::uint64_t joined_ = 0;  // local mask
};

/// Action = pair_index(i, j) of two slots whose components get merged.
class BushyEnv final : public JoinEnv {
 public:
  BushyEnv(EnvConfig config, EnvData data);

  std::size_t action_count() const override { return table_count_ * (table_count_ - 1) / 2; }
  int horizon() const override { return static_cast<int>(graph().size()) - 1; }
  std::string partition_key() const override;
  /// Current forest as local masks, in creation order.
  const std::vector<std::uint64_t>& components() const { return components_; }

 private:
  void start_episode() override;
  Cardinality apply(std::size_t action) override;
  Cardinality cost_of(std::size_t action) const override;
  void refresh_mask() override;
  int component_of(std::size_t local) const override;
  std::uint64_t component_mask(int component) const override {
    return components_[static_cast<std::size_t>(component)];
  }
  std::pair<int, int> decode(std::size_t action) const;

  std::vector<std::uint64_t> components_;  // all of them, singletons included
  std::vector<int> owner_;                 // local table -> index into components_
};

std::unique_ptr<JoinEnv> make_env(EnvConfig config, EnvData data);
std::unique_ptr<JoinEnv> make_env(EnvConfig config, const std::filesystem::path& query_set,
                                  const std::filesystem::path& manifest);

}  // namespace joinsim
