#include "joinsim/agents.hpp"

#include <algorithm>
#include <bit>

namespace joinsim {

std::size_t RandomAgent::select_action(const Decision& decision, Rng& rng) {
  std::size_t count = static_cast<std::size_t>(std::count(decision.mask.begin(), decision.mask.end(), 1));
  if (count == 0) throw ProtocolError("random agent: empty action mask");
  std::size_t pick = std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
  for (std::size_t a = 0; a < decision.mask.size(); ++a) {
    if (decision.mask[a] && pick-- == 0) return a;
  }
  return 0;
}

std::size_t GreedyAgent::select_action(const Decision& decision, Rng&) {
  std::size_t best = decision.mask.size();
  Cardinality best_cost;
  for (std::size_t a = 0; a < decision.mask.size(); ++a) {
    if (!decision.mask[a]) continue;
    Cardinality c = decision.env.preview_cost(a);
    if (best == decision.mask.size() || c < best_cost) {
      best = a;
      best_cost = c;
    }
  }
  if (best == decision.mask.size()) throw ProtocolError("greedy agent: empty action mask");
  return best;
}

std::vector<std::size_t> plan_actions(const PlanTree& tree, const QueryGraph& graph, PlanType plan_type,
                                      std::size_t table_count) {
  std::vector<std::size_t> actions;
  if (plan_type == PlanType::left_deep) {
    for (SlotIndex s : tree.leaves()) actions.push_back(s);
    return actions;
  }
  for (int index : execution_order(tree, graph)) {
    const auto& n = tree.node(index);
    auto i = static_cast<std::size_t>(std::countr_zero(tree.node(n.left).mask));
    auto j = static_cast<std::size_t>(std::countr_zero(tree.node(n.right).mask));
    actions.push_back(pair_index(std::min(i, j), std::max(i, j), table_count));
  }
  return actions;
}

void OptimalReplayAgent::begin_episode(const JoinEnv& env) {
  auto it = plans_.find(env.query_id());
  if (it == plans_.end()) {
    it = plans_.emplace(env.query_id(), optimal_plan(env.trace(), env.graph(), env.regime()).tree).first;
  }
  if (!plan_feasible(it->second, env.graph(), env.regime())) {
    throw ConfigError("optimal agent: plan " + to_string(it->second) + " for " + env.query_id() +
                      " cannot be built under " + to_string(env.regime()));
  }
  script_ = plan_actions(it->second, env.graph(), env.regime().plan_type, env.table_count());
  next_ = 0;
}

std::size_t OptimalReplayAgent::select_action(const Decision&, Rng&) {
  if (next_ >= script_.size()) throw ProtocolError("optimal agent: plan exhausted");
  return script_[next_++];
}

double TabularQAgent::epsilon() const {
  if (params_.decay_episodes == 0 || episodes_ >= params_.decay_episodes) return params_.epsilon_end;
  double t = static_cast<double>(episodes_) / static_cast<double>(params_.decay_episodes);
  return params_.epsilon_start + (params_.epsilon_end - params_.epsilon_start) * t;
}

std::string TabularQAgent::state_key(const JoinEnv& env) { return env.query_id() + '#' + env.partition_key(); }

void TabularQAgent::begin_episode(const JoinEnv&) {
  if (training_) ++episodes_;
}

std::vector<double>& TabularQAgent::row(const std::string& key, std::size_t actions) {
  auto& r = table_[key];
  if (r.empty()) r.assign(actions, 0.0);
  return r;
}

std::size_t TabularQAgent::greedy(const std::string& key, const ActionMask& mask) const {
  auto it = table_.find(key);
  std::size_t best = mask.size();
  for (std::size_t a = 0; a < mask.size(); ++a) {
    if (!mask[a]) continue;
    double q = it == table_.end() ? 0.0 : it->second[a];
    if (best == mask.size() || q > (it == table_.end() ? 0.0 : it->second[best])) best = a;
  }
  if (best == mask.size()) throw ProtocolError("tabular_q agent: empty action mask");
  return best;
}

std::size_t TabularQAgent::select_action(const Decision& decision, Rng& rng) {
  if (training_ && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < epsilon()) {
    return RandomAgent().select_action(decision, rng);
  }
  return greedy(state_key(decision.env), decision.mask);
}

void TabularQAgent::observe(const Transition& t) {
  std::size_t actions = t.next_mask ? t.next_mask->size() : 0;
  auto& q = row(t.state, std::max(actions, t.action + 1));
  double target = t.reward;
  if (!t.done && t.next_mask) {
    auto it = table_.find(t.next_state);
    double best = 0.0;
    bool any = false;
    for (std::size_t a = 0; a < t.next_mask->size(); ++a) {
      if (!(*t.next_mask)[a]) continue;
      double v = it == table_.end() ? 0.0 : it->second[a];
      if (!any || v > best) best = v;
      any = true;
    }
    target += best;
  }
  q[t.action] += params_.step_size * (target - q[t.action]);
}

std::vector<std::string> TabularQAgent::trained_queries() const {
  std::vector<std::string> out;
  for (const auto& [key, values] : table_) out.push_back(key.substr(0, key.rfind('#')));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::unique_ptr<Agent> make_agent(const std::string& name, TabularQParams params) {
  if (name == "random") return std::make_unique<RandomAgent>();
  if (name == "greedy") return std::make_unique<GreedyAgent>();
  if (name == "optimal") return std::make_unique<OptimalReplayAgent>();
  if (name == "tabular_q") return std::make_unique<TabularQAgent>(params);
  throw ConfigError("unknown agent '" + name + "' (expected random, greedy, optimal or tabular_q)");
}

}  // namespace joinsim
