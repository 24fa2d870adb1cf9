#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "joinsim/errors.hpp"
#include "joinsim/planner.hpp"
#include "joinsim/query.hpp"

namespace joinsim::detail {

inline constexpr std::size_t kDpTableLimit = 24;

/// Adjacency facts over local masks that both DPs need.
struct SubsetGraph {
  std::size_t n = 0;
  std::uint64_t full = 0;
  std::vector<std::uint64_t> adjacency;
  std::vector<std::uint64_t> components;  // of the whole query

  explicit SubsetGraph(const QueryGraph& graph)
      : n(graph.size()), full(graph.full_mask()), components(graph.components(graph.full_mask())) {
    if (n > kDpTableLimit) throw LimitError("planner: too many tables (" + std::to_string(n) + ")");
    for (std::size_t k = 0; k < n; ++k) adjacency.push_back(graph.neighbors(k));
  }

  std::uint64_t neighbors_of(std::uint64_t mask) const {
    std::uint64_t out = 0;
    for (std::uint64_t m = mask; m != 0; m &= m - 1) out |= adjacency[std::countr_zero(m)];
    return out & ~mask;
  }

  bool connected(std::uint64_t mask) const {
    std::uint64_t reached = mask & (~mask + 1);
    while (true) {
      std::uint64_t grown = reached | (neighbors_of(reached) & mask);
      if (grown == reached) return reached == mask;
      reached = grown;
    }
  }

  /// A union of whole components of the query graph.
  bool whole_components(std::uint64_t mask) const {
    for (std::uint64_t c : components) {
      if ((mask & c) != 0 && (mask & c) != c) return false;
    }
    return true;
  }
};

template <class Cost>
struct DpResult {
  std::vector<Cost> best;
  std::vector<std::uint64_t> choice;  // added table (left-deep) or first split part (bushy)
  std::vector<std::uint8_t> reachable;
};

/// best[S] = min_t best[S - t] + card(S). Without Cartesian products the added
/// table must be linked to the rest unless nothing outside the rest is.
template <class Cost, class CardFn>
DpResult<Cost> left_deep_dp(const SubsetGraph& g, bool allow_cp, CardFn card) {
  std::size_t size = std::size_t{1} << g.n;
  DpResult<Cost> r{std::vector<Cost>(size), std::vector<std::uint64_t>(size), std::vector<std::uint8_t>(size)};
  std::vector<std::uint64_t> outward(allow_cp ? 0 : size);  // neighbours outside the set
  for (std::uint64_t s = 1; s < size; ++s) {
    if (!allow_cp) outward[s] = g.neighbors_of(s);
    if (std::popcount(s) == 1) {
      r.best[s] = Cost{};
      r.reachable[s] = 1;
      continue;
    }
    for (std::uint64_t m = s; m != 0; m &= m - 1) {
      std::size_t t = std::countr_zero(m);
      std::uint64_t rest = s & ~(1ULL << t);
      if (!r.reachable[rest]) continue;
      if (!allow_cp && (g.adjacency[t] & rest) == 0 && outward[rest] != 0) continue;
      const Cost& cost = r.best[rest];
      if (!r.reachable[s] || cost < r.best[s]) {
        r.best[s] = cost;
        r.choice[s] = t;
        r.reachable[s] = 1;
      }
    }
    if (r.reachable[s]) r.best[s] = r.best[s] + card(s);
  }
  return r;
}

/// best[S] = min over unordered splits S1 < S2 of best[S1] + best[S2] + card(S).
/// Without Cartesian products a set is buildable when it is connected (split
/// into two connected halves) or is a union of whole query components (split
/// into two such unions).
template <class Cost, class CardFn>
DpResult<Cost> bushy_dp(const SubsetGraph& g, bool allow_cp, CardFn card) {
  std::size_t size = std::size_t{1} << g.n;
  DpResult<Cost> r{std::vector<Cost>(size), std::vector<std::uint64_t>(size), std::vector<std::uint8_t>(size)};
  std::vector<std::uint8_t> connected(allow_cp ? 0 : size);
  std::vector<std::uint8_t> whole(allow_cp ? 0 : size);
  for (std::uint64_t s = 1; s < size; ++s) {
    if (!allow_cp) {
      connected[s] = g.connected(s);
      whole[s] = g.whole_components(s);
    }
    if (std::popcount(s) == 1) {
      r.best[s] = Cost{};
      r.reachable[s] = 1;
      continue;
    }
    if (!allow_cp && !connected[s] && !whole[s]) continue;
    // Ascending submasks; only the half with the smaller mask is taken as S1.
    for (std::uint64_t sub = (0 - s) & s; sub != s; sub = (sub - s) & s) {
      std::uint64_t other = s ^ sub;
      if (sub > other) break;
      if (!r.reachable[sub] || !r.reachable[other]) continue;
      if (!allow_cp) {
        if (connected[s] ? !(connected[sub] && connected[other]) : !(whole[sub] && whole[other])) continue;
      }
      Cost cost = r.best[sub] + r.best[other];
      if (!r.reachable[s] || cost < r.best[s]) {
        r.best[s] = cost;
        r.choice[s] = sub;
        r.reachable[s] = 1;
      }
    }
    if (r.reachable[s]) r.best[s] = r.best[s] + card(s);
  }
  return r;
}

template <class Cost>
PlanTree rebuild(const DpResult<Cost>& r, PlanType plan_type, const QueryGraph& graph, std::uint64_t s) {
  if (std::popcount(s) == 1) return PlanTree::leaf(graph.slot(std::countr_zero(s)));
  if (plan_type == PlanType::left_deep) {
    std::uint64_t t = r.choice[s];
    return PlanTree::join(rebuild(r, plan_type, graph, s & ~(1ULL << t)), PlanTree::leaf(graph.slot(t)));
  }
  std::uint64_t sub = r.choice[s];
  return PlanTree::join(rebuild(r, plan_type, graph, sub), rebuild(r, plan_type, graph, s ^ sub));
}

}  // namespace joinsim::detail
