#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "joinsim/cardinality.hpp"
#include "joinsim/query.hpp"
#include "joinsim/regime.hpp"
#include "joinsim/trace.hpp"

namespace joinsim {

/// Binary join tree over alias slots, stored as a node array with the root last.
class PlanTree {
 public:
  struct Node {
    std::uint64_t mask = 0;  // global slot mask
    int left = -1;
    int right = -1;
    SlotIndex slot = 0;      // leaves only

    bool is_leaf() const { return left < 0; }
    bool operator==(const Node&) const = default;
  };

  PlanTree() = default;
  static PlanTree leaf(SlotIndex slot);
  /// Throws LimitError when the operands share a slot.
  static PlanTree join(const PlanTree& left, const PlanTree& right);

  bool empty() const { return nodes_.empty(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int index) const { return nodes_.at(static_cast<std::size_t>(index)); }
  int root() const { return static_cast<int>(nodes_.size()) - 1; }
  std::uint64_t mask() const { return nodes_.empty() ? 0 : nodes_.back().mask; }
  std::size_t leaf_count() const { return (nodes_.size() + 1) / 2; }

  /// Every join's right operand is a leaf.
  bool is_left_deep() const;
  /// Leaf slots in left-to-right order.
  std::vector<SlotIndex> leaves() const;

  bool operator==(const PlanTree&) const = default;

 private:
  std::vector<Node> nodes_;
};

/// "((0 3) 5)": leaves are slot numbers, joins are parenthesised pairs.
std::string to_string(const PlanTree& tree);
PlanTree parse_plan_tree(std::string_view text);

struct PlanCost {
  Cardinality total;
  std::vector<Cardinality> per_step;  // one per join, in execution order

  bool operator==(const PlanCost&) const = default;
};

struct Plan {
  PlanTree tree;
  PlanCost cost;
};

/// Internal nodes in the order a plan executes them: post-order, with joins
/// that apply a predicate ahead of Cartesian products whenever both are ready.
std::vector<int> execution_order(const PlanTree& tree, const QueryGraph& graph);

/// True cost of any tree over the query's tables. Throws MissingEntryError on
/// partial traces.
PlanCost plan_cost(const PlanTree& tree, const Trace& trace, const QueryGraph& graph);

/// Whether an environment in `regime` can build `tree`.
bool plan_feasible(const PlanTree& tree, const QueryGraph& graph, Regime regime);

/// Exact optimum by subset DP. Ties prefer the smaller added table (left-deep)
/// or the numerically smaller first part of the split (bushy). Requires a
/// complete trace.
Plan optimal_left_deep(const Trace& trace, const QueryGraph& graph, bool allow_cp);
Plan optimal_bushy(const Trace& trace, const QueryGraph& graph, bool allow_cp);
Plan optimal_plan(const Trace& trace, const QueryGraph& graph, Regime regime);

/// Fills all four optimal costs of `trace`.
void fill_optimal_costs(Trace& trace, const QueryGraph& graph);

inline constexpr std::size_t kEnumerationLimit = 8;

/// Cost of every distinct plan an environment in `regime` can produce, sorted
/// ascending. With Cartesian products allowed that is n! left-deep or
/// n!*Catalan(n-1) bushy plans. Throws LimitError above kEnumerationLimit tables.
std::vector<Cardinality> enumerate_all_plan_costs(const Trace& trace, const QueryGraph& graph, Regime regime);

struct PlanCounts {
  uint128 left_deep = 0;
  uint128 bushy = 0;
};

uint128 catalan(unsigned k);
/// n! and n!*Catalan(n-1) for 2 <= n <= 20.
PlanCounts count_plans(unsigned n);

/// Average observed join selectivity per table pair, keyed by the exact set of
/// join predicates between the two slots.
class SelectivityModel {
 public:
  using PairKey = std::vector<JoinPredicate>;

  void observe(const PairKey& key, double ratio);
  /// Mean of the observations; 1 for unseen keys.
  double estimate(const PairKey& key) const;
  std::size_t size() const { return sums_.size(); }
  std::size_t skipped() const { return skipped_; }
  void note_skipped() { ++skipped_; }

 private:
  std::map<PairKey, std::pair<double, std::size_t>> sums_;
  std::size_t skipped_ = 0;
};

struct TrainingExample {
  const Query* query = nullptr;
  const Trace* trace = nullptr;
};

/// For every predicate-linked table pair of every example: card({a,b}) /
/// (card({a}) * card({b})). Pairs with an empty side are skipped and counted.
SelectivityModel estimate_selectivities(std::span<const TrainingExample> examples, const AliasRegistry& registry);

/// Runs the exact planners' DP over estimated sizes: filtered singleton sizes
/// from the trace times the model selectivity of every linked pair inside the
/// subset. Only singleton entries of the trace are read.
PlanTree heuristic_dp_plan(const Trace& trace, const QueryGraph& graph, const SelectivityModel& model,
                           Regime regime);

/// Plan file: header, query id, regime, tree, total and per-step costs.
void save_plan(const std::filesystem::path& path, std::string_view query_id, Regime regime, const Plan& plan);

struct PlanFile {
  std::string query_id;
  Regime regime;
  Plan plan;
};

PlanFile load_plan(const std::filesystem::path& path);

}  // namespace joinsim
