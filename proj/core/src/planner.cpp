#include "joinsim/planner.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <functional>

#include "csv.hpp"
#include "subset_dp.hpp"

namespace joinsim {

PlanTree PlanTree::leaf(SlotIndex slot) {
  if (slot >= 64) throw LimitError("plan: slot out of range");
  PlanTree tree;
  tree.nodes_.push_back({1ULL << slot, -1, -1, slot});
  return tree;
}

PlanTree PlanTree::join(const PlanTree& left, const PlanTree& right) {
  if (left.empty() || right.empty()) throw LimitError("plan: empty operand");
  if ((left.mask() & right.mask()) != 0) throw LimitError("plan: operands share a slot");
  PlanTree tree;
  tree.nodes_ = left.nodes_;
  int offset = static_cast<int>(left.nodes_.size());
  for (Node node : right.nodes_) {
    if (!node.is_leaf()) {
      node.left += offset;
      node.right += offset;
    }
    tree.nodes_.push_back(node);
  }
  tree.nodes_.push_back({left.mask() | right.mask(), left.root(), offset + right.root(), 0});
  return tree;
}

bool PlanTree::is_left_deep() const {
  return std::all_of(nodes_.begin(), nodes_.end(),
                     [&](const Node& n) { return n.is_leaf() || node(n.right).is_leaf(); });
}

std::vector<SlotIndex> PlanTree::leaves() const {
  std::vector<SlotIndex> out;
  for (const Node& n : nodes_) {
    if (n.is_leaf()) out.push_back(n.slot);
  }
  return out;
}

namespace {

void print(const PlanTree& tree, int index, std::string& out) {
  const auto& n = tree.node(index);
  if (n.is_leaf()) {
    out += std::to_string(n.slot);
    return;
  }
  out += '(';
  print(tree, n.left, out);
  out += ' ';
  print(tree, n.right, out);
  out += ')';
}

struct TreeParser {
  std::string_view text;
  std::size_t pos = 0;

  void skip() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  PlanTree parse() {
    skip();
    if (pos >= text.size()) throw FormatError("plan: unexpected end of tree");
    if (text[pos] == '(') {
      ++pos;
      PlanTree left = parse();
      PlanTree right = parse();
      skip();
      if (pos >= text.size() || text[pos] != ')') throw FormatError("plan: expected ')'");
      ++pos;
      return PlanTree::join(left, right);
    }
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (start == pos) throw FormatError("plan: expected slot number");
    return PlanTree::leaf(static_cast<SlotIndex>(std::stoul(std::string(text.substr(start, pos - start)))));
  }
};

}  // namespace

std::string to_string(const PlanTree& tree) {
  std::string out;
  if (!tree.empty()) print(tree, tree.root(), out);
  return out;
}

PlanTree parse_plan_tree(std::string_view text) {
  TreeParser parser{text};
  PlanTree tree = parser.parse();
  parser.skip();
  if (parser.pos != text.size()) throw FormatError("plan: trailing characters");
  return tree;
}

std::vector<int> execution_order(const PlanTree& tree, const QueryGraph& graph) {
  const auto& nodes = tree.nodes();
  std::vector<std::uint8_t> done(nodes.size());
  std::size_t pending = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) {
      done[i] = 1;
    } else {
      ++pending;
    }
  }
  auto applies_predicate = [&](const PlanTree::Node& n) {
    return graph.linked(graph.to_local(tree.node(n.left).mask), graph.to_local(tree.node(n.right).mask));
  };
  std::vector<int> order;
  while (pending > 0) {
    // Nodes are stored in post-order, so the first ready node is the post-order choice.
    int pick = -1;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto& n = nodes[i];
      if (done[i] || !done[n.left] || !done[n.right]) continue;
      if (applies_predicate(n)) {
        pick = static_cast<int>(i);
        break;
      }
      if (pick < 0) pick = static_cast<int>(i);
    }
    done[pick] = 1;
    order.push_back(pick);
    --pending;
  }
  return order;
}

PlanCost plan_cost(const PlanTree& tree, const Trace& trace, const QueryGraph& graph) {
  if (tree.mask() != graph.to_global(graph.full_mask())) throw LimitError("plan does not cover the query's tables");
  PlanCost cost;
  for (int index : execution_order(tree, graph)) {
    Cardinality c = trace.lookup({tree.node(index).mask});
    cost.per_step.push_back(c);
    cost.total += c;
  }
  return cost;
}

bool plan_feasible(const PlanTree& tree, const QueryGraph& graph, Regime regime) {
  if (tree.mask() != graph.to_global(graph.full_mask())) return false;
  if (regime.plan_type == PlanType::left_deep && !tree.is_left_deep()) return false;
  if (regime.allow_cp) return true;
  // Replay the merges against the environment's rule: a Cartesian product is
  // legal only when no two current components are linked.
  std::vector<std::uint64_t> forest;
  for (SlotIndex s : tree.leaves()) forest.push_back(graph.to_local(1ULL << s));
  auto any_linked = [&] {
    for (std::size_t a = 0; a < forest.size(); ++a) {
      for (std::size_t b = a + 1; b < forest.size(); ++b) {
        if (graph.linked(forest[a], forest[b])) return true;
      }
    }
    return false;
  };
  if (regime.plan_type == PlanType::left_deep) {
    std::vector<SlotIndex> order = tree.leaves();
    std::uint64_t joined = graph.to_local(1ULL << order[0]);
    for (std::size_t k = 1; k < order.size(); ++k) {
      std::uint64_t t = graph.to_local(1ULL << order[k]);
      if (!graph.linked(joined, t)) {
        for (std::size_t u = 0; u < graph.size(); ++u) {
          if (!(joined >> u & 1) && graph.linked(joined, 1ULL << u)) return false;
        }
      }
      joined |= t;
    }
    return true;
  }
  for (int index : execution_order(tree, graph)) {
    const auto& n = tree.node(index);
    std::uint64_t l = graph.to_local(tree.node(n.left).mask);
    std::uint64_t r = graph.to_local(tree.node(n.right).mask);
    if (!graph.linked(l, r) && any_linked()) return false;
    std::erase_if(forest, [&](std::uint64_t c) { return c == l || c == r; });
    forest.push_back(l | r);
  }
  return true;
}

namespace {

void require_complete(const Trace& trace, const QueryGraph& graph) {
  if (!trace.complete()) throw MissingEntryError("planner needs a complete trace for " + trace.query_id());
  if (trace.slots() != graph.slots()) throw LimitError("trace " + trace.query_id() + " does not match the query");
}

}  // namespace

Plan optimal_left_deep(const Trace& trace, const QueryGraph& graph, bool allow_cp) {
  require_complete(trace, graph);
  detail::SubsetGraph g(graph);
  auto r = detail::left_deep_dp<Cardinality>(g, allow_cp, [&](std::uint64_t s) { return trace.lookup_local(s); });
  PlanTree tree = detail::rebuild(r, PlanType::left_deep, graph, g.full);
  return {tree, plan_cost(tree, trace, graph)};
}

Plan optimal_bushy(const Trace& trace, const QueryGraph& graph, bool allow_cp) {
  require_complete(trace, graph);
  detail::SubsetGraph g(graph);
  auto r = detail::bushy_dp<Cardinality>(g, allow_cp, [&](std::uint64_t s) { return trace.lookup_local(s); });
  PlanTree tree = detail::rebuild(r, PlanType::bushy, graph, g.full);
  return {tree, plan_cost(tree, trace, graph)};
}

Plan optimal_plan(const Trace& trace, const QueryGraph& graph, Regime regime) {
  return regime.plan_type == PlanType::left_deep ? optimal_left_deep(trace, graph, regime.allow_cp)
                                                 : optimal_bushy(trace, graph, regime.allow_cp);
}

void fill_optimal_costs(Trace& trace, const QueryGraph& graph) {
  for (Regime regime : kAllRegimes) trace.optimal()[regime] = optimal_plan(trace, graph, regime).cost.total;
}

uint128 catalan(unsigned k) {
  // C(k+1) = C(k) * 2(2k+1) / (k+2); exact in 128 bits for the sizes we allow.
  uint128 c = 1;
  for (unsigned i = 0; i < k; ++i) c = c * 2 * (2 * i + 1) / (i + 2);
  return c;
}

PlanCounts count_plans(unsigned n) {
  if (n < 2 || n > 20) throw LimitError("count_plans: n must be in [2, 20], got " + std::to_string(n));
  uint128 factorial = 1;
  for (unsigned i = 2; i <= n; ++i) factorial *= i;
  return {factorial, factorial * catalan(n - 1)};
}

// ---------------------------------------------------------------------------
// Plan files

void save_plan(const std::filesystem::path& path, std::string_view query_id, Regime regime, const Plan& plan) {
  std::string out = "joinsim-plan v1\n";
  out += "query," + std::string(query_id) + '\n';
  out += "regime," + to_string(regime) + '\n';
  out += "tree," + to_string(plan.tree) + '\n';
  out += "cost," + to_string(plan.cost.total) + '\n';
  out += "steps";
  for (Cardinality c : plan.cost.per_step) out += ',' + to_string(c);
  out += '\n';
  csv::write_file(path, out);
}

PlanFile load_plan(const std::filesystem::path& path) {
  auto lines = csv::read_lines(path);
  auto field = [&](std::size_t i, std::string_view name) -> std::string {
    std::string prefix = std::string(name) + ",";
    if (i >= lines.size() || lines[i].rfind(prefix, 0) != 0) {
      throw FormatError(path.string() + ": expected '" + std::string(name) + "' line");
    }
    return lines[i].substr(prefix.size());
  };
  if (lines.empty() || lines[0] != "joinsim-plan v1") throw FormatError(path.string() + ": not a plan file");
  PlanFile file;
  file.query_id = field(1, "query");
  std::string regime = field(2, "regime");
  std::size_t slash = regime.find('/');
  if (slash == std::string::npos) throw FormatError(path.string() + ": bad regime");
  file.regime.plan_type = parse_plan_type(regime.substr(0, slash));
  std::string cp = regime.substr(slash + 1);
  if (cp != "enable-cp" && cp != "disable-cp") throw FormatError(path.string() + ": bad regime");
  file.regime.allow_cp = cp == "enable-cp";
  file.plan.tree = parse_plan_tree(field(3, "tree"));
  file.plan.cost.total = Cardinality{parse_uint128(field(4, "cost"))};
  if (lines.size() < 6 || lines[5].rfind("steps", 0) != 0) throw FormatError(path.string() + ": expected steps line");
  auto steps = csv::split_line(lines[5]);
  for (std::size_t i = 1; i < steps.size(); ++i) file.plan.cost.per_step.emplace_back(parse_uint128(steps[i]));
  return file;
}

}  // namespace joinsim
