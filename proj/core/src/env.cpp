#include "joinsim/env.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>

#include "joinsim/planner.hpp"

namespace joinsim {

std::string to_string(const EpisodeLogLine& line) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, line.reward);
  return line.query_id + ',' + std::to_string(line.h) + ',' + std::to_string(line.action) + ',' +
         to_string(line.cost) + ',' + std::string(buf, end);
}

double reward_from_cost(Cardinality cost, Cardinality optimal, std::size_t num_joins, double clip_factor) {
  if (optimal.is_zero() || optimal.saturated()) throw ConfigError("reward needs a finite, non-zero optimal cost");
  if (num_joins == 0) throw LimitError("reward needs at least one join");
  if (!(clip_factor > 0)) throw ConfigError("clip factor must be positive");
  long double c_star = optimal.to_long_double();
  long double c_max = static_cast<long double>(clip_factor) * c_star;
  long double c_min = c_star / static_cast<long double>(num_joins);
  long double c = cost.saturated() ? c_max : std::min(cost.to_long_double(), c_max);
  return static_cast<double>((c_min - c) / c_max);
}

std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n) {
  if (i >= j || j >= n) {
    throw LimitError("pair_index: need i < j < n, got (" + std::to_string(i) + ", " + std::to_string(j) + "), n=" +
                     std::to_string(n));
  }
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

std::pair<std::size_t, std::size_t> pair_from_index(std::size_t index, std::size_t n) {
  if (n < 2 || index >= n * (n - 1) / 2) throw LimitError("pair index out of range");
  std::size_t i = 0;
  std::size_t row = n - 1;  // pairs starting at i
  while (index >= row) {
    index -= row;
    ++i;
    --row;
  }
  return {i, i + 1 + index};
}

EnvData load_env_data(const std::filesystem::path& query_set, const std::filesystem::path& manifest) {
  EnvData data;
  data.workload = std::make_shared<Workload>(load_query_set(query_set));
  data.traces = std::make_shared<TraceStore>(TraceStore::from_manifest(manifest, true));
  return data;
}

// ---------------------------------------------------------------------------

JoinEnv::JoinEnv(EnvConfig config, EnvData data) : config_(std::move(config)), data_(std::move(data)), rng_(config_.seed) {
  if (!data_.workload || !data_.traces) throw ConfigError("environment needs a workload and a trace store");
  if (!(config_.clip_factor > 0)) throw ConfigError("clip factor must be positive");
  const AliasRegistry& registry = data_.workload->registry;
  table_count_ = registry.slot_count();
  column_count_ = registry.column_count();
  if (table_count_ < 2) throw ConfigError("registry needs at least two slots");

  std::vector<std::string> wanted = config_.query_ids;
  if (wanted.empty()) wanted = data_.traces->ids();
  Regime regime = config_.regime();
  for (const std::string& id : wanted) {
    const Query* query = data_.workload->find(id);
    if (query == nullptr) throw ConfigError("unknown query id '" + id + "'");
    auto trace = data_.traces->find(id);
    if (!trace) throw ConfigError("no trace for query '" + id + "'");
    if (!trace->complete()) throw ConfigError("trace for query '" + id + "' is partial");
    QueryGraph graph(*query, registry);
    if (trace->slots() != graph.slots()) throw ConfigError("trace for '" + id + "' does not match its query");
    std::optional<Cardinality> optimal = trace->optimal()[regime];
    if (!optimal) optimal = optimal_plan(*trace, graph, regime).cost.total;
    if (optimal->is_zero() || optimal->saturated()) {
      if (config_.skip_unusable) {
        excluded_.push_back(id);
        continue;
      }
      throw ConfigError("query '" + id + "' has " + (optimal->is_zero() ? "zero" : "saturated") + " optimal cost under " +
                        to_string(regime));
    }
    Context ctx{id, query, trace, std::move(graph), *optimal, std::vector<double>(table_count_),
                std::vector<std::uint8_t>(column_count_)};
    for (std::size_t k = 0; k < trace->table_count(); ++k) ctx.selectivity[trace->slots()[k]] = trace->selectivities()[k];
    for (const auto& join : query->joins) ctx.goal[join.left.index] = ctx.goal[join.right.index] = 1;
    contexts_.push_back(std::move(ctx));
    ids_.push_back(id);
  }
  if (contexts_.empty()) throw ConfigError("environment has no usable queries");
}

const JoinEnv::Context& JoinEnv::current() const {
  if (active_ >= contexts_.size()) throw ProtocolError("environment used before reset");
  return contexts_[active_];
}

Cardinality JoinEnv::optimal_cost(std::string_view query_id) const {
  auto it = std::find(ids_.begin(), ids_.end(), query_id);
  if (it == ids_.end()) throw ConfigError("unknown query id '" + std::string(query_id) + "'");
  return contexts_[static_cast<std::size_t>(it - ids_.begin())].optimal;
}

ResetResult JoinEnv::reset(std::optional<std::string> query_id, std::optional<std::uint64_t> seed) {
  if (seed) rng_.seed(*seed);
  if (query_id) {
    auto it = std::find(ids_.begin(), ids_.end(), *query_id);
    if (it == ids_.end()) throw ConfigError("unknown query id '" + *query_id + "'");
    active_ = static_cast<std::size_t>(it - ids_.begin());
  } else {
    active_ = std::uniform_int_distribution<std::size_t>(0, ids_.size() - 1)(rng_);
  }
  h_ = 1;
  done_ = false;
  joined_columns_.assign(column_count_, 0);
  mask_.assign(action_count(), 0);
  log_.clear();
  const Context& ctx = current();
  observation_.assign(observation_size(), 0.0);
  std::copy(ctx.selectivity.begin(), ctx.selectivity.end(), observation_.begin());
  std::copy(ctx.goal.begin(), ctx.goal.end(), observation_.begin() + static_cast<std::ptrdiff_t>(table_count_));
  start_episode();
  encode();
  refresh_mask();
  return {observation_, {mask_, Cardinality{}}};
}

StepResult JoinEnv::step(std::size_t action) {
  if (done_) throw InvalidActionError("episode is over");
  if (action >= mask_.size() || !mask_[action]) {
    throw InvalidActionError("action " + std::to_string(action) + " is masked out at step " + std::to_string(h_) +
                             " of query " + query_id());
  }
  int h = h_;
  Cardinality cost = apply(action);
  bool staging = regime().plan_type == PlanType::left_deep && h == 1;
  double reward = staging ? 0.0
                          : reward_from_cost(cost, current().optimal, graph().size() - 1, config_.clip_factor);
  ++h_;
  done_ = h == horizon();
  encode();
  if (done_) {
    std::fill(mask_.begin(), mask_.end(), 0);
  } else {
    refresh_mask();
  }
  if (config_.record_log) log_.push_back({query_id(), h, action, cost, reward});
  return {observation_, reward, done_, {mask_, cost}};
}

Cardinality JoinEnv::preview_cost(std::size_t action) const {
  if (done_ || action >= mask_.size() || !mask_[action]) {
    throw InvalidActionError("cannot preview masked-out action " + std::to_string(action));
  }
  return cost_of(action);
}

std::vector<std::size_t> JoinEnv::valid_actions() const {
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < mask_.size(); ++a) {
    if (mask_[a]) out.push_back(a);
  }
  return out;
}

void JoinEnv::write_log(std::ostream& os) const {
  for (const auto& line : log_) os << to_string(line) << '\n';
}

void JoinEnv::mark_joined(std::uint64_t a, std::uint64_t b) {
  for (const auto& e : graph().edges()) {
    bool across = ((a >> e.left & 1) && (b >> e.right & 1)) || ((b >> e.left & 1) && (a >> e.right & 1));
    if (across) joined_columns_[e.left_column.index] = joined_columns_[e.right_column.index] = 1;
  }
}

void JoinEnv::encode() {
  const QueryGraph& g = graph();
  const AliasRegistry& registry = data_.workload->registry;
  double* pp = observation_.data() + table_count_ + column_count_;
  std::fill(pp, pp + column_count_, 0.0);

  // Components holding a joined column get indices 1..k by their lowest slot.
  std::vector<int> ranked;
  for (std::size_t k = 0; k < g.size(); ++k) {
    int comp = component_of(k);
    if (comp < 0 || std::find(ranked.begin(), ranked.end(), comp) != ranked.end()) continue;
    std::uint64_t members = component_mask(comp);
    bool any = false;
    for (std::uint64_t m = members; m != 0 && !any; m &= m - 1) {
      SlotIndex s = g.slot(std::countr_zero(m));
      for (std::uint32_t c = registry.first_column(s); c < registry.first_column(s) + registry.column_count(s); ++c) {
        if (joined_columns_[c]) {
          any = true;
          break;
        }
      }
    }
    if (any) ranked.push_back(comp);
  }

  for (std::size_t k = 0; k < g.size(); ++k) {
    int comp = component_of(k);
    if (comp < 0) continue;
    auto at = std::find(ranked.begin(), ranked.end(), comp);
    double index = static_cast<double>(at - ranked.begin() + 1);
    SlotIndex slot = g.slot(k);
    std::uint32_t first = registry.first_column(slot);
    std::uint32_t last = first + registry.column_count(slot);
    for (std::uint32_t c = first; c < last; ++c) pp[c] = joined_columns_[c] ? index : -1.0;
  }
}

// ---------------------------------------------------------------------------

LeftDeepEnv::LeftDeepEnv(EnvConfig config, EnvData data) : JoinEnv(std::move(config), std::move(data)) {}

void LeftDeepEnv::start_episode() { joined_ = 0; }

std::string LeftDeepEnv::partition_key() const {
  char buf[17];
  auto [end, ec] = std::to_chars(buf, buf + 16, joined_, 16);
  return std::string(buf, end);
}

Cardinality LeftDeepEnv::cost_of(std::size_t action) const {
  if (joined_ == 0) return Cardinality{};
  return trace().lookup_local(joined_ | (1ULL << *graph().local_index(static_cast<SlotIndex>(action))));
}

Cardinality LeftDeepEnv::apply(std::size_t action) {
  std::uint64_t t = 1ULL << *graph().local_index(static_cast<SlotIndex>(action));
  if (joined_ == 0) {
    joined_ = t;
    return Cardinality{};
  }
  mark_joined(joined_, t);
  joined_ |= t;
  return trace().lookup_local(joined_);
}

void LeftDeepEnv::refresh_mask() {
  const QueryGraph& g = graph();
  std::fill(mask_.begin(), mask_.end(), 0);
  std::uint64_t open = g.full_mask() & ~joined_;
  std::uint64_t allowed = open;
  if (joined_ != 0 && config_.disable_cp) {
    std::uint64_t linked = 0;
    for (std::uint64_t m = joined_; m != 0; m &= m - 1) linked |= g.neighbors(std::countr_zero(m));
    linked &= open;
    if (linked != 0) allowed = linked;
  }
  for (std::uint64_t m = allowed; m != 0; m &= m - 1) mask_[g.slot(std::countr_zero(m))] = 1;
}

// ---------------------------------------------------------------------------

BushyEnv::BushyEnv(EnvConfig config, EnvData data) : JoinEnv(std::move(config), std::move(data)) {}

void BushyEnv::start_episode() {
  std::size_t n = graph().size();
  components_.resize(n);
  owner_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    components_[k] = 1ULL << k;
    owner_[k] = static_cast<int>(k);
  }
}

int BushyEnv::component_of(std::size_t local) const {
  int c = owner_[local];
  return std::popcount(components_[static_cast<std::size_t>(c)]) > 1 ? c : -1;
}

std::string BushyEnv::partition_key() const {
  std::vector<std::uint64_t> parts;
  for (std::uint64_t c : components_) {
    if (std::popcount(c) > 1) parts.push_back(c);
  }
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::uint64_t c : parts) {
    char buf[17];
    auto [end, ec] = std::to_chars(buf, buf + 16, c, 16);
    if (!out.empty()) out += '|';
    out.append(buf, end);
  }
  return out;
}

std::pair<int, int> BushyEnv::decode(std::size_t action) const {
  auto [i, j] = pair_from_index(action, table_count_);
  auto a = graph().local_index(static_cast<SlotIndex>(i));
  auto b = graph().local_index(static_cast<SlotIndex>(j));
  return {owner_[*a], owner_[*b]};
}

Cardinality BushyEnv::cost_of(std::size_t action) const {
  auto [a, b] = decode(action);
  return trace().lookup_local(components_[static_cast<std::size_t>(a)] | components_[static_cast<std::size_t>(b)]);
}

Cardinality BushyEnv::apply(std::size_t action) {
  auto [a, b] = decode(action);
  std::uint64_t& keep = components_[static_cast<std::size_t>(std::min(a, b))];
  std::uint64_t& gone = components_[static_cast<std::size_t>(std::max(a, b))];
  mark_joined(keep, gone);
  keep |= gone;
  for (std::uint64_t m = gone; m != 0; m &= m - 1) owner_[std::countr_zero(m)] = std::min(a, b);
  gone = 0;
  return trace().lookup_local(keep);
}

void BushyEnv::refresh_mask() {
  const QueryGraph& g = graph();
  std::fill(mask_.begin(), mask_.end(), 0);
  std::size_t n = g.size();
  bool restrict = false;
  if (config_.disable_cp) {
    for (std::size_t a = 0; a < n && !restrict; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (owner_[a] != owner_[b] && (g.neighbors(a) >> b & 1)) {
          restrict = true;
          break;
        }
      }
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (owner_[a] == owner_[b]) continue;
      if (restrict && !g.linked(components_[static_cast<std::size_t>(owner_[a])],
                                components_[static_cast<std::size_t>(owner_[b])])) {
        continue;
      }
      mask_[pair_index(g.slot(a), g.slot(b), table_count_)] = 1;
    }
  }
}

// ---------------------------------------------------------------------------

std::unique_ptr<JoinEnv> make_env(EnvConfig config, EnvData data) {
  if (config.plan_type == PlanType::left_deep) return std::make_unique<LeftDeepEnv>(std::move(config), std::move(data));
  return std::make_unique<BushyEnv>(std::move(config), std::move(data));
}

std::unique_ptr<JoinEnv> make_env(EnvConfig config, const std::filesystem::path& query_set,
                                  const std::filesystem::path& manifest) {
  return make_env(std::move(config), load_env_data(query_set, manifest));
}

}  // namespace joinsim
