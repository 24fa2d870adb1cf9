#include <algorithm>
#include <bit>
#include <numeric>
#include <string>
#include <unordered_map>

#include "joinsim/planner.hpp"

namespace joinsim {

namespace {

// Left-deep: every permutation the environment accepts.
void enumerate_left_deep(const Trace& trace, const QueryGraph& graph, bool allow_cp, std::vector<Cardinality>& out) {
  std::size_t n = graph.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  do {
    std::uint64_t joined = 1ULL << order[0];
    Cardinality total;
    bool legal = true;
    for (std::size_t k = 1; k < n && legal; ++k) {
      std::uint64_t next = 1ULL << order[k];
      if (!allow_cp && !graph.linked(joined, next)) {
        for (std::size_t u = 0; u < n; ++u) {
          if (!(joined >> u & 1) && graph.linked(joined, 1ULL << u)) legal = false;
        }
      }
      joined |= next;
      total += trace.lookup_local(joined);
    }
    if (legal) out.push_back(total);
  } while (std::next_permutation(order.begin(), order.end()));
}

struct Component {
  std::uint64_t mask;
  std::string shape;  // canonical unordered tree
};

// Bushy: walk every merge sequence, keep one cost per distinct unordered tree.
void walk(const Trace& trace, const QueryGraph& graph, bool allow_cp, std::vector<Component>& forest, Cardinality cost,
          std::unordered_map<std::string, Cardinality>& trees) {
  if (forest.size() == 1) {
    trees.emplace(forest[0].shape, cost);
    return;
  }
  bool restrict = false;
  if (!allow_cp) {
    for (std::size_t a = 0; a < forest.size() && !restrict; ++a) {
      for (std::size_t b = a + 1; b < forest.size(); ++b) {
        if (graph.linked(forest[a].mask, forest[b].mask)) {
          restrict = true;
          break;
        }
      }
    }
  }
  for (std::size_t a = 0; a < forest.size(); ++a) {
    for (std::size_t b = a + 1; b < forest.size(); ++b) {
      if (restrict && !graph.linked(forest[a].mask, forest[b].mask)) continue;
      Component x = forest[a];
      Component y = forest[b];
      Component merged{x.mask | y.mask, x.shape < y.shape ? "(" + x.shape + " " + y.shape + ")"
                                                          : "(" + y.shape + " " + x.shape + ")"};
      std::vector<Component> next;
      for (std::size_t k = 0; k < forest.size(); ++k) {
        if (k != a && k != b) next.push_back(forest[k]);
      }
      next.push_back(merged);
      walk(trace, graph, allow_cp, next, cost + trace.lookup_local(merged.mask), trees);
    }
  }
}

}  // namespace

std::vector<Cardinality> enumerate_all_plan_costs(const Trace& trace, const QueryGraph& graph, Regime regime) {
  std::size_t n = graph.size();
  if (n > kEnumerationLimit) {
    throw LimitError("enumeration limited to " + std::to_string(kEnumerationLimit) + " tables, query has " +
                     std::to_string(n));
  }
  if (!trace.complete()) throw MissingEntryError("enumeration needs a complete trace");
  std::vector<Cardinality> out;
  if (regime.plan_type == PlanType::left_deep) {
    enumerate_left_deep(trace, graph, regime.allow_cp, out);
  } else {
    std::vector<Component> forest;
    for (std::size_t k = 0; k < n; ++k) forest.push_back({1ULL << k, std::to_string(k)});
    std::unordered_map<std::string, Cardinality> trees;
    walk(trace, graph, regime.allow_cp, forest, Cardinality{}, trees);
    // Each unordered tree stands for 2^(n-1) ordered ones (swap any join's operands).
    std::size_t copies = std::size_t{1} << (n - 1);
    for (const auto& [shape, cost] : trees) out.insert(out.end(), copies, cost);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace joinsim
