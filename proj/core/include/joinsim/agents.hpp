#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "joinsim/env.hpp"
#include "joinsim/planner.hpp"
#include "joinsim/random.hpp"

namespace joinsim {

struct Decision {
  const JoinEnv& env;
  const Observation& observation;
  const ActionMask& mask;
};

struct Transition {
  std::string state;
  std::size_t action = 0;
  double reward = 0.0;
  bool done = false;
  std::string next_state;
  const ActionMask* next_mask = nullptr;
};

/// Chooses one action per step. The returned action must have its mask bit set.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  virtual void begin_episode(const JoinEnv&) {}
  virtual std::size_t select_action(const Decision& decision, Rng& rng) = 0;
  /// Agents that learn return true and receive every transition.
  virtual bool wants_transitions() const { return false; }
  virtual void observe(const Transition&) {}
};

/// Uniform over the set mask bits.
class RandomAgent final : public Agent {
 public:
  std::string name() const override { return "random"; }
  std::size_t select_action(const Decision& decision, Rng& rng) override;
};

/// Valid action with the smallest immediate cost; lowest index on ties.
class GreedyAgent final : public Agent {
 public:
  std::string name() const override { return "greedy"; }
  std::size_t select_action(const Decision& decision, Rng& rng) override;
};

/// Replays a fixed plan per query. Throws ConfigError when a plan cannot be
/// built in the environment's regime.
class OptimalReplayAgent final : public Agent {
 public:
  /// Queries without a supplied tree get the exact DP plan of the environment's regime.
  explicit OptimalReplayAgent(std::map<std::string, PlanTree, std::less<>> plans = {}) : plans_(std::move(plans)) {}

  std::string name() const override { return "optimal"; }
  void begin_episode(const JoinEnv& env) override;
  std::size_t select_action(const Decision& decision, Rng& rng) override;

 private:
  std::map<std::string, PlanTree, std::less<>> plans_;
  std::vector<std::size_t> script_;
  std::size_t next_ = 0;
};

/// Action sequence that builds `tree` in an environment of the given regime.
std::vector<std::size_t> plan_actions(const PlanTree& tree, const QueryGraph& graph, PlanType plan_type,
                                      std::size_t table_count);

struct TabularQParams {
  double step_size = 0.1;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::size_t decay_episodes = 10000;  // linear decay length
};

/// Epsilon-greedy Q-learning over (query id, partial plan) keys, undiscounted.
class TabularQAgent final : public Agent {
 public:
  explicit TabularQAgent(TabularQParams params = {}) : params_(params) {}

  std::string name() const override { return "tabular_q"; }
  void begin_episode(const JoinEnv& env) override;
  std::size_t select_action(const Decision& decision, Rng& rng) override;
  bool wants_transitions() const override { return training_; }
  void observe(const Transition& transition) override;

  void set_training(bool training) { training_ = training; }
  bool training() const { return training_; }
  double epsilon() const;
  std::size_t episodes() const { return episodes_; }
  std::size_t state_count() const { return table_.size(); }
  /// Query ids whose states were ever updated.
  std::vector<std::string> trained_queries() const;

  static std::string state_key(const JoinEnv& env);

 private:
  std::vector<double>& row(const std::string& key, std::size_t actions);
  std::size_t greedy(const std::string& key, const ActionMask& mask) const;

  TabularQParams params_;
  bool training_ = true;
  std::size_t episodes_ = 0;
  std::unordered_map<std::string, std::vector<double>> table_;
};

/// "random", "greedy", "optimal", "tabular_q".
std::unique_ptr<Agent> make_agent(const std::string& name, TabularQParams params = {});

}  // namespace joinsim
