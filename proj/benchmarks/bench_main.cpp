#include <benchmark/benchmark.h>

#include <filesystem>
#include <map>
#include <memory>

#include "joinsim/agents.hpp"
#include "joinsim/env.hpp"
#include "joinsim/evaluation.hpp"
#include "joinsim/join_engine.hpp"
#include "joinsim/planner.hpp"
#include "joinsim/workload.hpp"

namespace fs = std::filesystem;
using namespace joinsim;

namespace {

struct Fixture {
  Catalog catalog;
  std::shared_ptr<Workload> workload = std::make_shared<Workload>();
  std::shared_ptr<TraceStore> traces = std::make_shared<TraceStore>();
};

// One template, a handful of instances, traces and optima in memory.
const Fixture& fixture(const std::string& name) {
  static std::map<std::string, std::unique_ptr<Fixture>> cache;
  auto& slot = cache[name];
  if (slot) return *slot;
  slot = std::make_unique<Fixture>();
  const fs::path dir(JOINSIM_FIXTURE_DIR);
  slot->catalog = generate_synthetic_db(load_synthetic_spec(dir / "dbspec.csv"), 7);
  const QueryTemplate tmpl = load_template(dir / "templates" / (name + ".sql"), dir / "sidecars", slot->catalog);
  std::vector<std::vector<std::string>> tables{tmpl.skeleton.base_tables()};
  slot->workload->registry = build_alias_registry(slot->catalog, tables);
  for (const ParsedQuery& parsed : generate_instances(tmpl, 4, 7)) {
    slot->workload->queries.push_back(bind_query(parsed, slot->workload->registry));
    CardinalityOracle oracle(slot->catalog, slot->workload->registry, slot->workload->queries.back());
    auto trace = std::make_shared<Trace>(build_full_trace(oracle));
    fill_optimal_costs(*trace, oracle.graph());
    slot->traces->add(std::move(trace));
  }
  return *slot;
}

void BM_RandomEpisodes(benchmark::State& state) {
  const Fixture& f = fixture("q5");
  EnvConfig config;
  config.plan_type = state.range(0) ? PlanType::bushy : PlanType::left_deep;
  config.skip_unusable = true;
  auto env = make_env(config, EnvData{f.workload, f.traces});
  RandomAgent agent;
  Rng rng(1);
  for (auto _ : state) {
    EpisodeRecord r = run_episode(*env, agent, std::nullopt, rng);
    benchmark::DoNotOptimize(r.total_cost);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RandomEpisodes)->Arg(0)->Arg(1);

void BM_FullTrace(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0) ? "q5" : "q3");
  const Query& q = f.workload->queries.front();
  for (auto _ : state) {
    CardinalityOracle oracle(f.catalog, f.workload->registry, q);
    Trace t = build_full_trace(oracle);
    benchmark::DoNotOptimize(t.entry_count());
  }
}
BENCHMARK(BM_FullTrace)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_OptimalPlan(benchmark::State& state) {
  const Fixture& f = fixture("q5");
  const Query& q = f.workload->queries.front();
  const QueryGraph graph(q, f.workload->registry);
  const Trace& trace = f.traces->at(q.id);
  const Regime regime = kAllRegimes[state.range(0)];
  for (auto _ : state) {
    Plan p = optimal_plan(trace, graph, regime);
    benchmark::DoNotOptimize(p.cost.total);
  }
  state.SetLabel(to_string(regime));
}
BENCHMARK(BM_OptimalPlan)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
