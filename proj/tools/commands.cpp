#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "joinsim/agents.hpp"
#include "joinsim/catalog.hpp"
#include "joinsim/env.hpp"
#include "joinsim/errors.hpp"
#include "joinsim/evaluation.hpp"
#include "joinsim/join_engine.hpp"
#include "joinsim/planner.hpp"
#include "joinsim/trace.hpp"
#include "joinsim/workload.hpp"

namespace fs = std::filesystem;

namespace joinsim::cli {

namespace {

constexpr const char* kCommands[] = {"gen-db", "gen-queries", "build-trace", "optimal",
                                     "stats",  "play",        "evaluate",    "export-ccdf"};

void build_app(CLI::App& app, RunConfig& c) {
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read flags from a TOML/INI file");
  app.add_option("--seed", c.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"text", "records"}))
      ->capture_default_str();

  auto regime = [&](CLI::App* sub) {
    sub->add_option("--plan-type", c.plan_type, "left-deep or bushy")
        ->check(CLI::IsMember({"left-deep", "bushy"}))
        ->capture_default_str();
    sub->add_flag("--disable-cp", c.disable_cp, "Forbid Cartesian products when a linked join exists");
  };

  auto* gen_db = app.add_subcommand("gen-db", "Generate a synthetic catalog");
  gen_db->add_option("--spec", c.spec, "Synthetic table spec CSV")->required();
  gen_db->add_option("--out", c.output, "Output catalog directory")->required();

  auto* gen_queries = app.add_subcommand("gen-queries", "Instantiate query templates");
  gen_queries->add_option("--catalog", c.catalog, "Catalog directory")->required();
  gen_queries->add_option("--templates", c.templates, "Directory of *.sql templates")->required();
  gen_queries->add_option("--sidecars", c.sidecars, "Directory of value lists (default: <templates>/../sidecars)");
  gen_queries->add_option("--per-template", c.per_template, "Instances per template")->capture_default_str();
  gen_queries->add_option("--out", c.output, "Query-set file")->required();
  gen_queries->add_option("--split", c.split, "Also write a 60/20/20 train/val/test split here");

  auto* build_trace = app.add_subcommand("build-trace", "Compute subset cardinalities for every query");
  build_trace->add_option("--catalog", c.catalog, "Catalog directory")->required();
  build_trace->add_option("--queries", c.queries, "Query-set file")->required();
  build_trace->add_option("--out", c.output, "Trace directory (manifest.txt goes here)")->required();
  build_trace->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  build_trace->add_option("--limit", c.table_limit, "Maximum tables per query")->capture_default_str();

  auto* optimal = app.add_subcommand("optimal", "Fill optimal costs into traces and write plan files");
  optimal->add_option("--queries", c.queries, "Query-set file")->required();
  optimal->add_option("--manifest", c.manifest, "Trace manifest")->required();
  optimal->add_option("--plans", c.plans, "Directory for plan files");

  auto* stats = app.add_subcommand("stats", "Table counts, search-space sizes, cost distributions");
  stats->add_option("--queries", c.queries, "Query-set file");
  stats->add_option("--template", c.template_file, "A single SQL template or query");
  stats->add_option("--manifest", c.manifest, "Trace manifest (needed for --distribution)");
  stats->add_option("--distribution", c.distribution, "Write every plan cost of --query here");
  stats->add_option("--query", c.query_id, "Query for --distribution");
  regime(stats);

  auto* play = app.add_subcommand("play", "Replay an action list or plan file in the environment");
  play->add_option("--queries", c.queries, "Query-set file")->required();
  play->add_option("--manifest", c.manifest, "Trace manifest")->required();
  play->add_option("--query", c.query_id, "Query id")->required();
  play->add_option("--actions", c.actions, "Comma-separated actions");
  play->add_option("--plan", c.plan_file, "Plan file to replay");
  play->add_option("--clip", c.clip_factor, "Cost clip factor")->capture_default_str();
  regime(play);

  auto* evaluate = app.add_subcommand("evaluate", "CCM statistics of a baseline on a split");
  evaluate->add_option("--queries", c.queries, "Query-set file")->required();
  evaluate->add_option("--manifest", c.manifest, "Trace manifest")->required();
  evaluate->add_option("--split", c.split, "Split file")->required();
  evaluate->add_option("--split-name", c.split_name, "train, val or test")->capture_default_str();
  evaluate->add_option("--agent", c.agent, "random, greedy, optimal or tabular_q")->capture_default_str();
  evaluate->add_option("--train-episodes", c.train_episodes, "Training episodes on the train split")
      ->capture_default_str();
  evaluate->add_option("--repeats", c.repeats, "Episodes per query")->capture_default_str();
  evaluate->add_option("--clip", c.clip_factor, "Cost clip factor")->capture_default_str();
  evaluate->add_option("--out", c.records, "Write per-query records (JSON lines) here");
  regime(evaluate);

  auto* export_ccdf_cmd = app.add_subcommand("export-ccdf", "CCDF of the ccm values in a records file");
  export_ccdf_cmd->add_option("--records", c.records, "Records file from evaluate")->required();
  export_ccdf_cmd->add_option("--out", c.output, "Output CSV")->required();

  for (auto* sub : app.get_subcommands({})) sub->configurable();
}

std::string selected(const CLI::App& app) {
  for (const char* name : kCommands) {
    if (app.got_subcommand(name)) return name;
  }
  return {};
}

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

std::string fixed(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

Catalog open_catalog(const fs::path& dir) { return load_catalog(dir / "schema.csv", dir); }

EnvConfig env_config(const RunConfig& c) {
  EnvConfig config;
  config.plan_type = parse_plan_type(c.plan_type);
  config.disable_cp = c.disable_cp;
  config.clip_factor = c.clip_factor;
  config.seed = c.seed;
  return config;
}

// ---------------------------------------------------------------------------

void gen_db(const RunConfig& c, std::ostream& out) {
  auto tables = load_synthetic_spec(c.spec);
  Catalog catalog = generate_synthetic_db(tables, c.seed);
  save_catalog(catalog, c.output);
  out << "wrote " << tables.size() << " relations to " << c.output << '\n';
}

void gen_queries(const RunConfig& c, std::ostream& out) {
  Catalog catalog = open_catalog(c.catalog);
  fs::path sidecars = c.sidecars.empty() ? fs::path(c.templates).parent_path() / "sidecars" : fs::path(c.sidecars);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(c.templates)) {
    if (entry.path().extension() == ".sql") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no *.sql templates in " + c.templates);

  std::vector<QueryTemplate> templates;
  std::vector<std::vector<std::string>> tables;
  for (const auto& file : files) {
    templates.push_back(load_template(file, sidecars, catalog));
    tables.push_back(templates.back().skeleton.base_tables());
  }
  Workload workload;
  workload.registry = build_alias_registry(catalog, tables);
  std::vector<std::vector<std::string>> ids(templates.size());
  for (std::size_t t = 0; t < templates.size(); ++t) {
    for (const ParsedQuery& parsed : generate_instances(templates[t], c.per_template, derive_seed(c.seed, t))) {
      workload.queries.push_back(bind_query(parsed, workload.registry));
      ids[t].push_back(parsed.id);
    }
  }
  save_query_set(workload, c.output);
  out << "wrote " << workload.queries.size() << " queries from " << templates.size() << " templates to " << c.output
      << '\n';
  if (!c.split.empty()) {
    SplitSizes sizes{c.per_template * 60 / 100, c.per_template * 20 / 100, 0};
    sizes.test = c.per_template - sizes.train - sizes.validation;
    WorkloadSplit split = split_workload(ids, sizes, c.seed);
    save_split(split, c.split);
    out << "split " << split.train.size() << '/' << split.validation.size() << '/' << split.test.size() << " -> "
        << c.split << '\n';
  }
}

void build_trace(const RunConfig& c, std::ostream& out) {
  Catalog catalog = open_catalog(c.catalog);
  Workload workload = load_query_set(c.queries);
  fs::path dir = c.output;
  fs::create_directories(dir);
  for (const Query& q : workload.queries) {
    if (q.tables.size() > c.table_limit) {
      throw LimitError("query " + q.id + " joins " + std::to_string(q.tables.size()) + " tables; --limit is " +
                       std::to_string(c.table_limit));
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::vector<std::size_t> entries(workload.queries.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < workload.queries.size(); i = next++) {
      try {
        const Query& q = workload.queries[i];
        CardinalityOracle oracle(catalog, workload.registry, q);
        Trace trace = build_full_trace(oracle, c.table_limit);
        save_trace(trace, dir / (q.id + ".trace"));
        entries[i] = trace.entry_count();
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = workload.queries.size();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < c.jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  std::vector<std::pair<std::string, std::string>> manifest;
  for (std::size_t i = 0; i < workload.queries.size(); ++i) {
    const Query& q = workload.queries[i];
    manifest.emplace_back(q.id, q.id + ".trace");
    if (c.format == "records") {
      out << nlohmann::json{{"query_id", q.id}, {"tables", q.tables.size()}, {"entries", entries[i]}}.dump() << '\n';
    } else {
      out << q.id << "  tables " << q.tables.size() << "  entries " << entries[i] << '\n';
    }
  }
  save_manifest(manifest, dir / "manifest.txt");
  if (c.format == "text") out << "wrote " << manifest.size() << " traces and " << (dir / "manifest.txt").string() << '\n';
}

void optimal(const RunConfig& c, std::ostream& out) {
  Workload workload = load_query_set(c.queries);
  fs::path base = fs::path(c.manifest).parent_path();
  if (!c.plans.empty()) fs::create_directories(c.plans);
  for (const auto& [id, relpath] : load_manifest(c.manifest)) {
    Trace trace = load_trace(base / relpath, true);
    QueryGraph graph(workload.query(id), workload.registry);
    for (Regime regime : kAllRegimes) {
      Plan plan = optimal_plan(trace, graph, regime);
      trace.optimal()[regime] = plan.cost.total;
      if (!c.plans.empty()) {
        std::string name = id + '.' + std::string(to_string(regime.plan_type)) +
                           (regime.allow_cp ? ".enable-cp" : ".disable-cp") + ".plan";
        save_plan(fs::path(c.plans) / name, id, regime, plan);
      }
      if (c.format == "records") {
        out << nlohmann::json{{"query_id", id},
                              {"regime", to_string(regime)},
                              {"cost", to_string(plan.cost.total)},
                              {"tree", to_string(plan.tree)}}
                   .dump()
            << '\n';
      } else {
        out << id << "  " << to_string(regime) << "  " << to_string(plan.cost.total) << "  " << to_string(plan.tree)
            << '\n';
      }
    }
    save_trace(trace, base / relpath);
  }
}

void print_counts(std::ostream& out, const RunConfig& c, const std::string& id, std::size_t n) {
  std::string left = "-";
  std::string bushy = "-";
  if (n >= 2 && n <= 20) {
    PlanCounts counts = count_plans(static_cast<unsigned>(n));
    left = to_string(counts.left_deep);
    bushy = to_string(counts.bushy);
  }
  if (c.format == "records") {
    out << nlohmann::json{{"query_id", id}, {"tables", n}, {"left_deep_plans", left}, {"bushy_plans", bushy}}.dump()
        << '\n';
  } else {
    out << id << "  tables " << n << "  left-deep plans " << left << "  bushy plans " << bushy << '\n';
  }
}

void stats(const RunConfig& c, std::ostream& out) {
  if (c.queries.empty() && c.template_file.empty()) throw ConfigError("stats needs --queries or --template");
  if (!c.template_file.empty()) {
    std::ifstream in(c.template_file);
    if (!in) throw IoError("cannot read " + c.template_file);
    std::stringstream text;
    text << in.rdbuf();
    ParsedQuery parsed = parse_query(text.str());
    print_counts(out, c, fs::path(c.template_file).stem().string(), parsed.from.size());
  }
  if (c.queries.empty()) return;
  Workload workload = load_query_set(c.queries);
  for (const Query& q : workload.queries) print_counts(out, c, q.id, q.tables.size());
  if (!c.distribution.empty()) {
    if (c.manifest.empty() || c.query_id.empty()) throw ConfigError("--distribution needs --manifest and --query");
    TraceStore store = TraceStore::from_manifest(c.manifest);
    const Query& q = workload.query(c.query_id);
    QueryGraph graph(q, workload.registry);
    Regime regime{parse_plan_type(c.plan_type), !c.disable_cp};
    auto costs = enumerate_all_plan_costs(store.at(q.id), graph, regime);
    std::string text = "rank,cost\n";
    for (std::size_t i = 0; i < costs.size(); ++i) text += std::to_string(i) + ',' + to_string(costs[i]) + '\n';
    std::ofstream file(c.distribution, std::ios::binary);
    if (!(file << text)) throw IoError("cannot write " + c.distribution);
    out << "wrote " << costs.size() << " plan costs to " << c.distribution << '\n';
  }
}

void play(const RunConfig& c, std::ostream& out) {
  EnvConfig config = env_config(c);
  config.query_ids = {c.query_id};
  auto env = make_env(config, c.queries, c.manifest);
  env->reset(c.query_id);
  std::vector<std::size_t> actions;
  if (!c.plan_file.empty()) {
    PlanFile plan = load_plan(c.plan_file);
    if (plan.query_id != c.query_id) throw ConfigError("plan file is for " + plan.query_id + ", not " + c.query_id);
    if (!plan_feasible(plan.plan.tree, env->graph(), env->regime())) {
      throw ConfigError("plan " + to_string(plan.plan.tree) + " cannot be built under " + to_string(env->regime()));
    }
    actions = plan_actions(plan.plan.tree, env->graph(), env->regime().plan_type, env->table_count());
  } else {
    if (c.actions.empty()) throw ConfigError("play needs --actions or --plan");
    std::stringstream list(c.actions);
    std::string item;
    while (std::getline(list, item, ',')) {
      std::size_t pos = 0;
      unsigned long value = 0;
      try {
        value = std::stoul(item, &pos);
      } catch (const std::exception&) {
        pos = std::string::npos;
      }
      if (pos != item.size()) throw ConfigError("bad action '" + item + "'");
      actions.push_back(value);
    }
  }
  double total_reward = 0.0;
  Cardinality total_cost;
  for (std::size_t a : actions) {
    int h = env->step_index();
    StepResult r = env->step(a);
    total_reward += r.reward;
    total_cost += r.info.ir_cardinality;
    if (c.format == "records") {
      out << nlohmann::json{{"h", h}, {"action", a}, {"cost", to_string(r.info.ir_cardinality)}, {"reward", r.reward}}
                 .dump()
          << '\n';
    } else {
      out << "h=" << h << "  action " << a << "  c_h " << to_string(r.info.ir_cardinality) << "  reward "
          << fixed(r.reward) << '\n';
    }
  }
  if (!env->done()) throw ConfigError("episode incomplete after " + std::to_string(actions.size()) + " actions");
  double ccm = static_cast<double>(total_cost.to_long_double() / env->optimal_cost().to_long_double());
  if (c.format == "records") {
    out << nlohmann::json{{"cumulative_reward", total_reward}, {"cost", to_string(total_cost)}, {"ccm", ccm}}.dump()
        << '\n';
  } else {
    out << "cumulative reward " << fixed(total_reward) << '\n';
    out << "cumulative cost " << to_string(total_cost) << "  optimal " << to_string(env->optimal_cost()) << "  ccm "
        << fixed(ccm) << '\n';
  }
}

void evaluate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  EnvData data = load_env_data(c.queries, c.manifest);
  WorkloadSplit split = load_split(c.split);
  const auto& ids = split.named(c.split_name);
  EnvConfig config = env_config(c);
  config.skip_unusable = true;
  config.query_ids = ids;
  auto env = make_env(config, data);
  if (!env->excluded().empty()) {
    err << "note: " << env->excluded().size() << " queries excluded (zero or saturated optimal cost)\n";
  }
  Rng rng(derive_seed(c.seed, 1));
  auto agent = make_agent(c.agent);
  if (c.train_episodes > 0) {
    EnvConfig train = config;
    train.query_ids = split.train;
    auto train_env = make_env(train, data);
    train_agent(*train_env, *agent, c.train_episodes, rng);
  }
  if (auto* q = dynamic_cast<TabularQAgent*>(agent.get())) q->set_training(false);
  Evaluation result = evaluate_agent(*env, *agent, env->query_ids(), rng, c.repeats);
  if (!c.records.empty()) {
    std::ofstream file(c.records, std::ios::binary);
    if (!(file << format_records(result))) throw IoError("cannot write " + c.records);
  }
  out << (c.format == "records" ? format_records(result) : format_text(result));
}

void export_ccdf_command(const RunConfig& c, std::ostream& out) {
  std::ifstream in(c.records);
  if (!in) throw IoError("cannot read " + c.records);
  std::vector<EpisodeRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    if (!j.contains("ccm")) continue;
    EpisodeRecord r;
    r.query_id = j.value("query_id", "");
    r.ccm = j.at("ccm").get<double>();
    records.push_back(std::move(r));
  }
  export_ccdf(records, c.output);
  out << "wrote CCDF of " << records.size() << " records to " << c.output << '\n';
}

}  // namespace

RunConfig parse_args(const std::vector<std::string>& args) {
  RunConfig config;
  CLI::App app{"joinsim"};
  build_app(app, config);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  app.parse(reversed);
  config.command = selected(app);
  return config;
}

std::string to_config_text(const RunConfig& config) {
  RunConfig copy = config;
  CLI::App app{"joinsim"};
  build_app(app, copy);
  auto quoted = [](const std::string& value) {
    std::string out = "\"";
    for (char ch : value) {
      if (ch == '"' || ch == '\\') out += '\\';
      out += ch;
    }
    return out + '"';
  };
  auto write = [&](const CLI::App& scope, std::string& out) {
    for (const CLI::Option* opt : scope.get_options()) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string& name = opt->get_lnames().front();
      if (name == "help" || name == "config") continue;
      if (name == "disable-cp") {
        out += name + '=' + (copy.disable_cp ? "true" : "false") + '\n';
        continue;
      }
      const_cast<CLI::Option*>(opt)->capture_default_str();
      out += name + '=' + quoted(opt->get_default_str()) + '\n';
    }
  };
  std::string out;
  write(app, out);
  if (!config.command.empty()) {
    out += "[" + config.command + "]\n";
    write(*app.get_subcommand(config.command), out);
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  std::string save_config;
  try {
    CLI::App app{"joinsim: join-order selection simulator"};
    build_app(app, c);
    app.add_option("--save-config", save_config, "Write the parsed flags as a config file and continue");
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    }
    c.command = selected(app);
    if (!save_config.empty()) {
      std::ofstream file(save_config, std::ios::binary);
      if (!(file << to_config_text(c))) throw IoError("cannot write " + save_config);
    }
    if (c.command == "gen-db") gen_db(c, out);
    else if (c.command == "gen-queries") gen_queries(c, out);
    else if (c.command == "build-trace") build_trace(c, out);
    else if (c.command == "optimal") optimal(c, out);
    else if (c.command == "stats") stats(c, out);
    else if (c.command == "play") play(c, out);
    else if (c.command == "evaluate") evaluate(c, out, err);
    else if (c.command == "export-ccdf") export_ccdf_command(c, out);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "joinsim: " << one_line(e.what()) << '\n';
  } catch (const std::exception& e) {
    err << "joinsim: " << (c.command.empty() ? "" : c.command + ": ") << one_line(e.what()) << '\n';
  }
  return 1;
}

}  // namespace joinsim::cli
