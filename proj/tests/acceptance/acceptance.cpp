#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "joinsim/agents.hpp"
#include "joinsim/env.hpp"
#include "joinsim/evaluation.hpp"
#include "joinsim/join_engine.hpp"
#include "joinsim/planner.hpp"
#include "joinsim/sql.hpp"
#include "joinsim/workload.hpp"
#include "test_support.hpp"

using namespace joinsim;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
  std::string failure;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      failure = what;
    }
  }
};

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

// ---------------------------------------------------------------------------
// Constructed fixtures
// ---------------------------------------------------------------------------

// A-B-C-D chain whose two end joins are tiny while every three-table subset is large.
testing::Instance bushy_beats_left_deep() {
  auto catalog = std::make_shared<Catalog>();
  std::vector<std::vector<std::int64_t>> a, b, c, d;
  for (std::int64_t i = 0; i < 10; ++i) {
    a.push_back({i});
    d.push_back({i});
  }
  b.push_back({0, 0});
  c.push_back({0, 0});
  for (std::int64_t i = 1; i < 100; ++i) {
    b.push_back({100 + i, 0});
    c.push_back({0, 100 + i});
  }
  catalog->add_relation(testing::int_relation("ta", {"x"}, a));
  catalog->add_relation(testing::int_relation("tb", {"x", "y"}, b));
  catalog->add_relation(testing::int_relation("tc", {"y", "z"}, c));
  catalog->add_relation(testing::int_relation("td", {"z"}, d));
  return testing::make_instance(
      catalog, "SELECT * FROM ta AS a, tb AS b, tc AS c, td AS d WHERE a.x = b.x AND b.y = c.y AND c.z = d.z",
      "chain4");
}

// Fact table with two single-row dimensions; each dimension keeps half the
// facts but both together keep one.
testing::Instance cartesian_beats_linked() {
  auto catalog = std::make_shared<Catalog>();
  std::vector<std::vector<std::int64_t>> f{{0, 0}, {1, 1}};
  for (int i = 0; i < 49; ++i) {
    f.push_back({0, 1});
    f.push_back({1, 0});
  }
  catalog->add_relation(testing::int_relation("fact", {"d1", "d2"}, f));
  catalog->add_relation(testing::int_relation("dim1", {"id"}, {{0}}));
  catalog->add_relation(testing::int_relation("dim2", {"id"}, {{0}}));
  return testing::make_instance(
      catalog, "SELECT * FROM fact AS f, dim1 AS x, dim2 AS y WHERE f.d1 = x.id AND f.d2 = y.id", "star3");
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  Outcome o;
  const auto start = Clock::now();
  Rng rng(20240601);
  std::size_t queries = 0, subsets = 0, self_joins = 0, disconnected = 0;
  for (int i = 0; i < 60; ++i) {
    testing::RandomInstanceOptions opts;
    opts.max_tables = 5;
    opts.connected = i % 3 != 0;
    opts.row_product_limit = 1e6;
    const auto inst = testing::random_instance(rng, opts, "r" + std::to_string(i));
    double product = 1;
    for (SlotIndex s : inst.query.tables) {
      product *= static_cast<double>(inst.catalog->relation(inst.registry.slot(s).base_table).row_count());
    }
    o.require(inst.query.tables.size() <= 5 && product <= 1e6, "instance outside size bounds");
    CardinalityOracle oracle(*inst.catalog, inst.registry, inst.query);
    if (!oracle.graph().is_connected(oracle.graph().full_mask())) ++disconnected;
    std::set<std::string> bases;
    for (SlotIndex s : inst.query.tables) bases.insert(inst.registry.slot(s).base_table);
    if (bases.size() < inst.query.tables.size()) ++self_joins;
    for (std::uint64_t mask = 1; mask <= oracle.graph().full_mask(); ++mask) {
      const Cardinality engine = oracle.local_cardinality(mask);
      const Cardinality brute = testing::brute_force_count(*inst.catalog, inst.registry, inst.query, mask);
      o.require(engine == brute, inst.query.sql + " subset " + std::to_string(mask) + ": engine " +
                                     to_string(engine) + " vs nested loop " + to_string(brute));
      ++subsets;
    }
    ++queries;
  }
  const double elapsed = seconds_since(start);
  o.require(elapsed < 60, "took " + fmt("%.1f", elapsed) + " s");
  o.detail = std::to_string(queries) + " queries (" + std::to_string(self_joins) + " with self-joins, " +
             std::to_string(disconnected) + " disconnected), " + std::to_string(subsets) + " subsets, " +
             fmt("%.2f", elapsed) + " s";
  return o;
}

uint128 independent_factorial(unsigned n) {
  uint128 f = 1;
  for (unsigned k = 2; k <= n; ++k) f *= k;
  return f;
}

// Catalan(k) = binom(2k, k) / (k + 1).
uint128 independent_catalan(unsigned k) {
  uint128 c = 1;
  for (unsigned i = 0; i < k; ++i) c = c * (2 * k - i) / (i + 1);
  return c / (k + 1);
}

Outcome dp_vs_enumeration() {
  Outcome o;
  const auto start = Clock::now();
  std::size_t cases = 0;
  std::size_t max_n = 0;

  auto check = [&](const Trace& trace, const QueryGraph& graph, const std::string& label) {
    const auto n = static_cast<unsigned>(graph.size());
    max_n = std::max<std::size_t>(max_n, n);
    for (Regime regime : kAllRegimes) {
      const auto costs = enumerate_all_plan_costs(trace, graph, regime);
      const Plan plan = regime.plan_type == PlanType::left_deep ? optimal_left_deep(trace, graph, regime.allow_cp)
                                                                 : optimal_bushy(trace, graph, regime.allow_cp);
      o.require(!costs.empty() && plan.cost.total == costs.front(),
                label + " " + to_string(regime) + ": dp " + to_string(plan.cost.total) + " vs enumeration " +
                    (costs.empty() ? "none" : to_string(costs.front())));
      o.require(plan_cost(plan.tree, trace, graph) == plan.cost, label + ": plan cost does not re-evaluate");
      if (regime.allow_cp) {
        const uint128 expected = regime.plan_type == PlanType::left_deep
                                     ? independent_factorial(n)
                                     : independent_factorial(n) * independent_catalan(n - 1);
        o.require(costs.size() == expected, label + " " + to_string(regime) + ": enumerated " +
                                                std::to_string(costs.size()) + " plans, expected " +
                                                to_string(expected));
      }
      ++cases;
    }
  };

  Rng rng(77);
  for (int i = 0; i < 36; ++i) {
    testing::RandomInstanceOptions opts;
    opts.min_tables = 2 + static_cast<std::size_t>(i % 6);
    opts.max_tables = opts.min_tables;
    opts.max_rows = opts.min_tables >= 6 ? 5 : 8;
    opts.connected = i % 4 != 3;
    const auto inst = testing::random_instance(rng, opts, "r" + std::to_string(i));
    const QueryGraph graph(inst.query, inst.registry);
    check(testing::full_trace(inst), graph, inst.query.id + " exact");
    check(testing::random_trace(graph, rng), graph, inst.query.id + " synthetic");
  }
  const auto& pipeline = testing::fixture_pipeline();
  std::size_t seven = 0;
  for (const auto& id : pipeline.ids_with_tables(2, 7)) {
    const Query& q = pipeline.workload->query(id);
    if (q.tables.size() == 7 && ++seven > 3) continue;
    check(pipeline.traces->at(id), QueryGraph(q, pipeline.workload->registry), id);
  }

  for (unsigned n = 2; n <= 20; ++n) {
    const PlanCounts counts = count_plans(n);
    o.require(counts.left_deep == independent_factorial(n) &&
                  counts.bushy == independent_factorial(n) * independent_catalan(n - 1),
              "count_plans(" + std::to_string(n) + ") disagrees with n! and n! * Catalan(n-1)");
  }
  const double elapsed = seconds_since(start);
  o.require(elapsed < 120, "took " + fmt("%.1f", elapsed) + " s");
  o.detail = std::to_string(cases) + " (query, regime) cases up to " + std::to_string(max_n) + " tables, " +
             fmt("%.2f", elapsed) + " s";
  return o;
}

Outcome ordering_claims() {
  Outcome o;
  const auto& pipeline = testing::fixture_pipeline();
  const Regime ld_cp{PlanType::left_deep, true}, ld_no{PlanType::left_deep, false};
  const Regime bu_cp{PlanType::bushy, true}, bu_no{PlanType::bushy, false};
  std::size_t checked = 0;
  for (const Query& q : pipeline.workload->queries) {
    const OptimalCosts& c = pipeline.traces->at(q.id).optimal();
    o.require(*c[bu_cp] <= *c[ld_cp] && *c[bu_no] <= *c[ld_no], q.id + ": bushy optimum above left-deep");
    o.require(*c[ld_cp] <= *c[ld_no] && *c[bu_cp] <= *c[bu_no], q.id + ": enable-CP optimum above disable-CP");
    ++checked;
  }

  const auto chain = bushy_beats_left_deep();
  const Trace chain_trace = testing::full_trace(chain);
  const auto& cc = chain_trace.optimal();
  o.require(*cc[bu_cp] < *cc[ld_cp] && *cc[bu_no] < *cc[ld_no], "chain fixture: bushy not strictly cheaper");

  const auto star = cartesian_beats_linked();
  const Trace star_trace = testing::full_trace(star);
  const auto& sc = star_trace.optimal();
  o.require(*sc[ld_cp] < *sc[ld_no] && *sc[bu_cp] < *sc[bu_no], "star fixture: enable-CP not strictly cheaper");

  o.detail = std::to_string(checked) + " fixture queries; chain bushy " + to_string(*cc[bu_cp]) + " < left-deep " +
             to_string(*cc[ld_cp]) + " (CP), " + to_string(*cc[bu_no]) + " < " + to_string(*cc[ld_no]) +
             " (no CP); star enable-CP " + to_string(*sc[ld_cp]) + " < disable-CP " + to_string(*sc[ld_no]);
  return o;
}

Outcome reward_telescoping() {
  Outcome o;
  const auto& pipeline = testing::fixture_pipeline();
  std::size_t episodes = 0;
  double worst = 0;
  auto replay = [&](const EnvData& data, const std::vector<std::string>& ids) {
    for (Regime regime : kAllRegimes) {
      EnvConfig config;
      config.plan_type = regime.plan_type;
      config.disable_cp = !regime.allow_cp;
      config.query_ids = ids;
      config.skip_unusable = true;
      auto env = make_env(config, data);
      for (const auto& id : env->query_ids()) {
        env->reset(id);
        const Plan plan = optimal_plan(env->trace(), env->graph(), regime);
        const auto actions = plan_actions(plan.tree, env->graph(), regime.plan_type, env->table_count());
        o.require(actions.size() == static_cast<std::size_t>(env->horizon()), id + ": plan length differs from horizon");
        double sum = 0;
        Cardinality total;
        for (std::size_t h = 0; h < actions.size(); ++h) {
          if (!env->action_mask()[actions[h]]) {
            o.require(false, id + " " + to_string(regime) + ": optimal action masked out");
            break;
          }
          const StepResult r = env->step(actions[h]);
          if (h == 0 && regime.plan_type == PlanType::left_deep) {
            o.require(r.reward == 0.0, id + ": staging reward is not 0");
          }
          sum += r.reward;
          total += r.info.ir_cardinality;
        }
        const double ccm = static_cast<double>(total.to_long_double() / env->optimal_cost().to_long_double());
        worst = std::max(worst, std::abs(sum));
        o.require(std::abs(sum) <= 1e-9, id + " " + to_string(regime) + ": cumulative reward " + fmt("%.3g", sum));
        o.require(ccm == 1.0, id + " " + to_string(regime) + ": ccm " + fmt("%.17g", ccm));
        ++episodes;
      }
    }
  };
  replay(pipeline.env_data(), pipeline.usable_ids());
  replay(testing::instance_env_data(bushy_beats_left_deep()), {"chain4"});
  replay(testing::instance_env_data(cartesian_beats_linked()), {"star3"});
  o.detail = std::to_string(episodes) + " optimal replays, max |sum r| = " + fmt("%.3g", worst);
  return o;
}

Outcome reward_formula() {
  Outcome o;
  const double r = reward_from_cost(Cardinality{50}, Cardinality{100}, 4, 100);
  o.require(r == -0.0025, "reward(50) = " + fmt("%.17g", r));
  // C_min = 100 / 4 = 25, C_max = 100 * 100 = 10000.
  const double clipped_expected = (25.0 - 10000.0) / 10000.0;
  const double clipped = reward_from_cost(Cardinality{20000}, Cardinality{100}, 4, 100);
  const double at_cap = reward_from_cost(Cardinality{10000}, Cardinality{100}, 4, 100);
  const double huge = reward_from_cost(Cardinality::saturated_value(), Cardinality{100}, 4, 100);
  o.require(clipped == clipped_expected && at_cap == clipped_expected && huge == clipped_expected,
            "clipped branch = " + fmt("%.17g", clipped));
  o.detail = "reward(50) = " + fmt("%.6g", r) + ", clipped = " + fmt("%.6g", clipped);
  return o;
}

Outcome encoding_invariants() {
  Outcome o;
  const auto& pipeline = testing::fixture_pipeline();
  const AliasRegistry& registry = pipeline.workload->registry;
  std::size_t episodes = 0, steps = 0;
  Rng rng(4242);
  RandomAgent agent;
  for (Regime regime : kAllRegimes) {
    EnvConfig config;
    config.plan_type = regime.plan_type;
    config.disable_cp = !regime.allow_cp;
    config.skip_unusable = true;
    config.seed = 99;
    auto env = make_env(config, pipeline.env_data());
    const std::size_t nt = env->table_count(), nc = env->column_count();
    for (int e = 0; e < 2500; ++e) {
      const ResetResult start = env->reset();
      const Query& q = env->query();
      const Trace& trace = env->trace();
      std::vector<double> sel(nt, 0.0);
      for (std::size_t k = 0; k < trace.table_count(); ++k) sel[trace.slots()[k]] = trace.selectivities()[k];
      std::vector<double> goal(nc, 0.0);
      for (const auto& j : q.joins) goal[j.left.index] = goal[j.right.index] = 1.0;
      o.require(std::equal(sel.begin(), sel.end(), start.observation.begin()), q.id + ": selectivity block");
      o.require(std::equal(goal.begin(), goal.end(), start.observation.begin() + nt), q.id + ": goal block");
      int length = 0;
      Observation obs = start.observation;
      ActionMask mask = start.info.action_mask;
      bool done = false;
      while (!done) {
        o.require(std::find(mask.begin(), mask.end(), 1) != mask.end(), q.id + ": empty mask before done");
        if (!o.pass) return o;
        const std::size_t a = agent.select_action({*env, obs, mask}, rng);
        StepResult r = env->step(a);
        ++length;
        ++steps;
        obs = r.observation;
        mask = r.info.action_mask;
        done = r.done;
        o.require(std::equal(start.observation.begin(), start.observation.begin() + nt + nc, obs.begin()),
                  q.id + ": selectivity or goal block changed mid-episode");
        std::set<double> positive;
        for (std::size_t c = nt + nc; c < obs.size(); ++c) {
          if (obs[c] > 0) positive.insert(obs[c]);
          o.require(obs[c] == 0 || obs[c] == -1 || obs[c] >= 1, q.id + ": unexpected partial-plan value");
          const ColumnInfo& info = registry.column(ColumnId{static_cast<std::uint32_t>(c - nt - nc)});
          if (obs[c] != 0) {
            o.require(std::find(q.tables.begin(), q.tables.end(), info.slot) != q.tables.end(),
                      q.id + ": partial-plan mark on a table outside the query");
          }
        }
        if (regime.plan_type == PlanType::left_deep) {
          o.require(positive.empty() || positive == std::set<double>{1.0}, q.id + ": left-deep mark other than 1");
        } else {
          double expect = 1;
          for (double v : positive) o.require(v == expect++, q.id + ": bushy component ids not contiguous");
        }
      }
      const int horizon = static_cast<int>(q.tables.size()) - (regime.plan_type == PlanType::bushy ? 1 : 0);
      o.require(length == horizon, q.id + ": episode length " + std::to_string(length) + " vs " +
                                       std::to_string(horizon));
      o.require(std::count(mask.begin(), mask.end(), 1) == 0, q.id + ": mask not cleared at done");
      ++episodes;
    }
  }
  o.detail = std::to_string(episodes) + " random trajectories, " + std::to_string(steps) + " steps";
  return o;
}

class ScriptedSource final : public RandomSource {
 public:
  ScriptedSource(std::deque<bool> coins, std::deque<std::uint64_t> draws)
      : coins_(std::move(coins)), draws_(std::move(draws)) {}
  bool coin() override {
    const bool c = coins_.front();
    coins_.pop_front();
    return c;
  }
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) override {
    const std::uint64_t v = draws_.front();
    draws_.pop_front();
    if (v < lo || v > hi) throw std::logic_error("scripted draw out of range");
    return v;
  }

 private:
  std::deque<bool> coins_;
  std::deque<std::uint64_t> draws_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Outcome determinism_and_round_trips() {
  Outcome o;
  const auto& pipeline = testing::fixture_pipeline();
  const fs::path dir = testing::scratch_dir("acceptance_traces");
  for (const auto& id : pipeline.traces->ids()) {
    const Trace& t = pipeline.traces->at(id);
    save_trace(t, dir / "a.trace");
    const Trace back = load_trace(dir / "a.trace", true);
    save_trace(back, dir / "b.trace");
    o.require(back == t, id + ": loaded trace differs");
    o.require(slurp(dir / "a.trace") == slurp(dir / "b.trace"), id + ": re-saved trace not byte-identical");
  }

  const Catalog catalog = generate_synthetic_db(load_synthetic_spec(testing::fixture_dir() / "dbspec.csv"), 7);
  std::vector<std::vector<std::string>> ids_a, ids_b;
  for (const auto& entry : fs::directory_iterator(testing::fixture_dir() / "templates")) {
    const QueryTemplate t = load_template(entry.path(), testing::fixture_dir() / "sidecars", catalog);
    const auto a = generate_instances(t, 25, 123);
    const auto b = generate_instances(t, 25, 123);
    o.require(a == b, t.name + ": instances differ under the same seed");
    ids_a.emplace_back();
    for (const auto& q : a) ids_a.back().push_back(q.id);
  }
  ids_b = ids_a;
  o.require(split_workload(ids_a, {15, 5, 5}, 9) == split_workload(ids_b, {15, 5, 5}, 9), "split not reproducible");
  const auto& again = testing::fixture_pipeline(10, 7);
  o.require(&again == &pipeline, "pipeline cache");

  const QueryTemplate q1 =
      load_template(testing::fixture_dir() / "templates" / "q1.sql", testing::fixture_dir() / "sidecars", catalog);
  ScriptedSource source({true, false, false, false}, {2, 0, 2});
  ParsedQuery generated = generate_instances(q1, 1, source).front();
  const ParsedQuery reference = parse_query(R"(SELECT MIN(mc.note) AS production_note,
    MIN(t.title) AS movie_title,
    MIN(t.production_year) AS movie_year
FROM company_type AS ct,
    info_type AS it,
    movie_companies AS mc,
    movie_info_idx AS mi_idx,
    title AS t
WHERE ct.id = mc.company_type_id
    AND t.id = mc.movie_id
    AND t.id = mi_idx.movie_id
    AND mc.movie_id = mi_idx.movie_id
    AND it.id = mi_idx.info_type_id
    AND ct.kind in ('production companies',
        'special effects companies'))");
  o.require(generated.id == "q1_0", "worked example id " + generated.id);
  generated.id.clear();
  o.require(to_sql(generated) == to_sql(reference), "worked example: " + to_sql(generated));
  o.require(generated.filters.size() == 1 && generated.filters[0].values.size() == 2, "worked example IN list");
  o.detail = std::to_string(pipeline.traces->size()) + " traces round-tripped; worked example gives " +
             format_literal(generated.filters.at(0).values.at(0)) + ", " +
             format_literal(generated.filters.at(0).values.at(1));
  return o;
}

Outcome throughput() {
  Outcome o;
  const auto& pipeline = testing::fixture_pipeline();
  const auto ids = pipeline.ids_with_tables(10, 12);
  o.require(!ids.empty(), "no 10-12 table fixture queries");
  if (!o.pass) return o;
  std::string detail;
  double slowest = 1e300;
  for (PlanType type : {PlanType::left_deep, PlanType::bushy}) {
    EnvConfig config;
    config.plan_type = type;
    config.query_ids = ids;
    config.skip_unusable = true;
    auto env = make_env(config, pipeline.env_data());
    RandomAgent agent;
    Rng rng(1);
    for (int i = 0; i < 200; ++i) run_episode(*env, agent, std::nullopt, rng);
    std::size_t episodes = 0;
    const auto start = Clock::now();
    double elapsed = 0;
    while (elapsed < 2.0) {
      for (int i = 0; i < 500; ++i) run_episode(*env, agent, std::nullopt, rng);
      episodes += 500;
      elapsed = seconds_since(start);
    }
    const double rate = static_cast<double>(episodes) / elapsed;
    slowest = std::min(slowest, rate);
    detail += std::string(detail.empty() ? "" : ", ") + std::string(to_string(type)) + " " + fmt("%.0f", rate) +
              " episodes/s";
  }
  o.require(slowest >= 100, "below 100 episodes/s");
  o.detail = detail + " (" + std::to_string(pipeline.workload->query(ids.front()).tables.size()) +
             "-table queries; target 1000, floor 100)";
  return o;
}

Outcome heuristic_baseline() {
  Outcome o;
  const auto& pipeline = testing::fixture_pipeline();
  std::vector<TrainingExample> train;
  for (const auto& id : pipeline.split.train) {
    train.push_back({&pipeline.workload->query(id), &pipeline.traces->at(id)});
  }
  const SelectivityModel model = estimate_selectivities(train, pipeline.workload->registry);
  std::size_t scored = 0, worse = 0;
  for (const auto& id : pipeline.split.test) {
    const Query& q = pipeline.workload->query(id);
    const QueryGraph graph(q, pipeline.workload->registry);
    const Trace& trace = pipeline.traces->at(id);
    for (Regime regime : kAllRegimes) {
      const PlanTree tree = heuristic_dp_plan(trace, graph, model, regime);
      const Cardinality cost = plan_cost(tree, trace, graph).total;
      o.require(plan_feasible(tree, graph, regime), id + ": heuristic plan infeasible");
      o.require(cost >= *trace.optimal()[regime], id + ": heuristic plan beats the optimum");
      if (cost > *trace.optimal()[regime]) ++worse;
      ++scored;
    }
  }

  // Correlated fixture: in training only 'cold' rows of A exist and each joins
  // one B row; the held-out 'hot' row joins a hundred.
  auto catalog = std::make_shared<Catalog>();
  Relation a("ta", {{"id", ValueDomain::integer}, {"f", ValueDomain::string}});
  for (std::int64_t i = 0; i <= 100; ++i) {
    std::vector<std::int64_t> row{i, catalog->strings().intern(i == 0 ? "hot" : "cold")};
    a.append_row(row);
  }
  std::vector<std::vector<std::int64_t>> b;
  for (std::int64_t r = 0; r < 200; ++r) b.push_back({r < 100 ? 0 : r - 99, r % 100});
  Relation c("tc", {{"id", ValueDomain::integer}, {"g", ValueDomain::string}});
  for (std::int64_t i = 0; i < 100; ++i) {
    std::vector<std::int64_t> row{i, catalog->strings().intern("g" + std::to_string(i / 10))};
    c.append_row(row);
  }
  catalog->add_relation(std::move(a));
  catalog->add_relation(testing::int_relation("tb", {"aid", "cid"}, b));
  catalog->add_relation(std::move(c));
  const std::string skeleton = "SELECT * FROM ta AS a, tb AS b, tc AS c WHERE a.id = b.aid AND b.cid = c.id";
  std::vector<std::vector<std::string>> tables{{"ta", "tb", "tc"}};
  const AliasRegistry registry = build_alias_registry(*catalog, tables);
  std::vector<Query> queries;
  std::vector<Trace> traces;
  for (int g = 0; g <= 10; ++g) {
    const bool held_out = g == 10;
    const std::string sql = skeleton + " AND a.f = '" + (held_out ? "hot" : "cold") + "' AND c.g = 'g" +
                            std::to_string(held_out ? 0 : g) + "'";
    queries.push_back(parse_and_bind(sql, registry, held_out ? "hot" : "cold" + std::to_string(g)));
  }
  for (const Query& q : queries) {
    CardinalityOracle oracle(*catalog, registry, q);
    traces.push_back(build_full_trace(oracle));
    fill_optimal_costs(traces.back(), oracle.graph());
  }
  std::vector<TrainingExample> cold;
  for (std::size_t i = 0; i + 1 < queries.size(); ++i) cold.push_back({&queries[i], &traces[i]});
  const SelectivityModel correlated = estimate_selectivities(cold, registry);
  const Query& hot = queries.back();
  const Trace& hot_trace = traces.back();
  const QueryGraph hot_graph(hot, registry);
  std::string strict;
  for (Regime regime : kAllRegimes) {
    const PlanTree tree = heuristic_dp_plan(hot_trace, hot_graph, correlated, regime);
    const Cardinality cost = plan_cost(tree, hot_trace, hot_graph).total;
    const Cardinality best = *hot_trace.optimal()[regime];
    o.require(cost > best, "correlated fixture " + to_string(regime) + ": heuristic cost " + to_string(cost) +
                               " not above optimum " + to_string(best));
    if (strict.empty()) strict = to_string(cost) + " vs optimum " + to_string(best);
  }
  o.detail = std::to_string(scored) + " held-out (query, regime) scores, " + std::to_string(worse) +
             " strictly worse; correlated fixture " + strict;
  return o;
}

Outcome learning_sanity() {
  Outcome o;
  const auto& pipeline = testing::fixture_pipeline();
  std::string id;
  for (const auto& candidate : pipeline.usable_ids()) {
    if (pipeline.workload->query(candidate).tables.size() == 6) {
      id = candidate;
      break;
    }
  }
  o.require(!id.empty(), "no usable 6-table fixture query");
  if (!o.pass) return o;
  EnvConfig config;
  config.query_ids = {id};
  auto env = make_env(config, pipeline.env_data());
  Rng rng(31337);
  TabularQAgent learner({0.1, 1.0, 0.05, 25000});
  train_agent(*env, learner, 50000, rng);
  learner.set_training(false);
  const std::vector<std::string> ids{id};
  const Evaluation learned = evaluate_agent(*env, learner, ids, rng, 100);
  RandomAgent random;
  const Evaluation baseline = evaluate_agent(*env, random, ids, rng, 2000);
  o.require(learned.stats.mean < baseline.stats.mean, "tabular_q mean ccm " + fmt("%.4f", learned.stats.mean) +
                                                         " not below random " + fmt("%.4f", baseline.stats.mean));
  o.detail = id + ": tabular_q mean ccm " + fmt("%.4f", learned.stats.mean) + " vs random " +
             fmt("%.4f", baseline.stats.mean);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "oracle equivalence", oracle_equivalence},
      {2, "dp vs enumeration", dp_vs_enumeration},
      {3, "ordering claims", ordering_claims},
      {4, "reward telescoping", reward_telescoping},
      {5, "reward formula", reward_formula},
      {6, "encoding invariants", encoding_invariants},
      {7, "determinism and round-trips", determinism_and_round_trips},
      {8, "throughput", throughput},
      {9, "heuristic baseline", heuristic_baseline},
      {10, "learning sanity", learning_sanity},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.failure = std::string("exception: ") + e.what();
    }
    if (!outcome.pass) ++failures;
    std::printf("%s %d %s: %s\n", outcome.pass ? "PASS" : "FAIL", c.number, c.name,
                outcome.pass ? outcome.detail.c_str() : outcome.failure.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
