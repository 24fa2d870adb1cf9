#include <algorithm>
#include <bit>
#include <cmath>

#include "joinsim/planner.hpp"
#include "subset_dp.hpp"

namespace joinsim {

namespace {

// Join predicates between two local tables, canonical order.
SelectivityModel::PairKey pair_key(const QueryGraph& graph, std::size_t a, std::size_t b) {
  SelectivityModel::PairKey key;
  for (const auto& e : graph.edges()) {
    if ((e.left == a && e.right == b) || (e.left == b && e.right == a)) key.push_back({e.left_column, e.right_column});
  }
  std::sort(key.begin(), key.end());
  return key;
}

}  // namespace

void SelectivityModel::observe(const PairKey& key, double ratio) {
  auto& [sum, count] = sums_[key];
  sum += ratio;
  ++count;
}

double SelectivityModel::estimate(const PairKey& key) const {
  auto it = sums_.find(key);
  if (it == sums_.end()) return 1.0;
  return it->second.first / static_cast<double>(it->second.second);
}

SelectivityModel estimate_selectivities(std::span<const TrainingExample> examples, const AliasRegistry& registry) {
  SelectivityModel model;
  for (const TrainingExample& example : examples) {
    QueryGraph graph(*example.query, registry);
    const Trace& trace = *example.trace;
    if (trace.slots() != graph.slots()) throw LimitError("trace " + trace.query_id() + " does not match its query");
    for (std::size_t a = 0; a < graph.size(); ++a) {
      for (std::size_t b = a + 1; b < graph.size(); ++b) {
        if (!(graph.neighbors(a) >> b & 1)) continue;
        long double left = trace.lookup_local(1ULL << a).to_long_double();
        long double right = trace.lookup_local(1ULL << b).to_long_double();
        if (left == 0 || right == 0) {
          model.note_skipped();
          continue;
        }
        long double joined = trace.lookup_local((1ULL << a) | (1ULL << b)).to_long_double();
        model.observe(pair_key(graph, a, b), static_cast<double>(joined / (left * right)));
      }
    }
  }
  return model;
}

PlanTree heuristic_dp_plan(const Trace& trace, const QueryGraph& graph, const SelectivityModel& model, Regime regime) {
  if (trace.slots() != graph.slots()) throw LimitError("trace " + trace.query_id() + " does not match the query");
  detail::SubsetGraph g(graph);
  std::size_t n = g.n;
  std::vector<long double> selectivity(n * n, 1.0L);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (g.adjacency[a] >> b & 1) {
        selectivity[a * n + b] = selectivity[b * n + a] = model.estimate(pair_key(graph, a, b));
      }
    }
  }
  // est(S) = est(S - i) * |i| * prod of selectivities between i and the rest of S.
  std::vector<long double> estimate(std::size_t{1} << n);
  for (std::uint64_t s = 1; s <= g.full; ++s) {
    std::size_t i = std::countr_zero(s);
    std::uint64_t rest = s & (s - 1);
    long double value = trace.lookup_local(1ULL << i).to_long_double();
    if (rest != 0) {
      value *= estimate[rest];
      for (std::uint64_t m = rest & g.adjacency[i]; m != 0; m &= m - 1) value *= selectivity[i * n + std::countr_zero(m)];
    }
    estimate[s] = value;
  }
  auto card = [&](std::uint64_t s) { return estimate[s]; };
  if (regime.plan_type == PlanType::left_deep) {
    auto r = detail::left_deep_dp<long double>(g, regime.allow_cp, card);
    return detail::rebuild(r, PlanType::left_deep, graph, g.full);
  }
  auto r = detail::bushy_dp<long double>(g, regime.allow_cp, card);
  return detail::rebuild(r, PlanType::bushy, graph, g.full);
}

}  // namespace joinsim
