#include "explorium/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace explorium {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename Int>
Int parse_int(std::string_view v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigurationError("expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

double parse_double(std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigurationError("expected a finite number, got '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigurationError("expected true or false, got '" + std::string(v) + "'");
}

std::size_t positive(std::string_view v) {
  const auto n = parse_int<std::size_t>(v);
  if (n == 0) throw ConfigurationError("must be >= 1");
  return n;
}

double non_negative(std::string_view v) {
  const double x = parse_double(v);
  if (x < 0.0) throw ConfigurationError("must be >= 0");
  return x;
}

double strictly_positive(std::string_view v) {
  const double x = parse_double(v);
  if (!(x > 0.0)) throw ConfigurationError("must be > 0");
  return x;
}

double probability(std::string_view v) {
  const double x = parse_double(v);
  if (x < 0.0 || x > 1.0) throw ConfigurationError("must be in [0, 1]");
  return x;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

using FieldTable = std::vector<std::pair<std::string, Field>>;

#define EXPLORIUM_SIZE(key, member, parser)                                                        \
  {key, Field{[](const RunConfig& c) { return std::to_string(c.member); },                       \
              [](RunConfig& c, std::string_view v) { c.member = parser(v); }}}
#define EXPLORIUM_DOUBLE(key, member, parser)                                                      \
  {key, Field{[](const RunConfig& c) { return format_double(c.member); },                        \
              [](RunConfig& c, std::string_view v) { c.member = parser(v); }}}
#define EXPLORIUM_BOOL(key, member)                                                                \
  {key, Field{[](const RunConfig& c) { return bool_text(c.member); },                            \
              [](RunConfig& c, std::string_view v) { c.member = parse_bool(v); }}}

std::size_t any_size(std::string_view v) { return parse_int<std::size_t>(v); }
std::uint64_t any_u64(std::string_view v) { return parse_int<std::uint64_t>(v); }
std::uint64_t positive_u64(std::string_view v) {
  const auto n = parse_int<std::uint64_t>(v);
  if (n == 0) throw ConfigurationError("must be >= 1");
  return n;
}

std::string checked_arch(std::string_view v) {
  const std::string s(v);
  parse_arch(s);
  return s;
}

std::string non_empty(std::string_view v) {
  if (v.empty()) throw ConfigurationError("must not be empty");
  return std::string(v);
}

const FieldTable& fields() {
  static const FieldTable table = {
      EXPLORIUM_SIZE("seed", seed, any_u64),
      EXPLORIUM_SIZE("max_steps", max_steps, any_u64),
      {"out_dir", Field{[](const RunConfig& c) { return c.out_dir; },
                        [](RunConfig& c, std::string_view v) { c.out_dir = non_empty(v); }}},
      EXPLORIUM_SIZE("checkpoint_every", checkpoint_every, positive_u64),
      EXPLORIUM_BOOL("strict", strict),
      EXPLORIUM_BOOL("log.diagnostics", diagnostics),
      EXPLORIUM_DOUBLE("eval.epsilon", eval_epsilon, probability),

      {"env.map", Field{[](const RunConfig& c) { return c.env.map; },
                        [](RunConfig& c, std::string_view v) { c.env.map = non_empty(v); }}},
      EXPLORIUM_SIZE("env.size", env.size, positive),
      EXPLORIUM_SIZE("env.cell_px", env.cell_px, positive),
      EXPLORIUM_SIZE("env.frame", env.frame, any_size),
      EXPLORIUM_SIZE("env.actions", env.actions, positive),
      EXPLORIUM_SIZE("env.max_episode_steps", env.max_episode_steps, positive),

      EXPLORIUM_SIZE("pre.frame_skip", pre.frame_skip, positive),
      EXPLORIUM_SIZE("pre.max_over", pre.max_over, positive),
      EXPLORIUM_SIZE("pre.stack_m", pre.stack_m, positive),

      EXPLORIUM_SIZE("q.K", q.K, positive),
      {"q.arch", Field{[](const RunConfig& c) { return c.q.arch; },
                       [](RunConfig& c, std::string_view v) { c.q.arch = checked_arch(v); }}},
      EXPLORIUM_SIZE("q.batch", q.batch, positive),
      EXPLORIUM_SIZE("q.train_freq", q.train_freq, positive),
      EXPLORIUM_DOUBLE("q.gamma", q.gamma, probability),
      EXPLORIUM_SIZE("q.target_sync", q.target_sync, positive),
      EXPLORIUM_DOUBLE("q.lr", q.lr, strictly_positive),
      EXPLORIUM_DOUBLE("q.clip", q.clip, strictly_positive),
      EXPLORIUM_DOUBLE("q.weight_decay", q.weight_decay, non_negative),

      EXPLORIUM_SIZE("replay.capacity", replay.capacity, positive),
      EXPLORIUM_BOOL("replay.bootstrap", replay.bootstrap),

      {"explore.strategy", Field{[](const RunConfig& c) { return to_string(c.explore.strategy); },
                                 [](RunConfig& c, std::string_view v) { c.explore.strategy = parse_strategy(v); }}},
      EXPLORIUM_DOUBLE("explore.eps_initial", explore.eps_initial, probability),
      EXPLORIUM_DOUBLE("explore.eps_final", explore.eps_final, probability),
      EXPLORIUM_SIZE("explore.eps_steps", explore.eps_steps, positive_u64),
      EXPLORIUM_DOUBLE("explore.lambda", explore.lambda, non_negative),
      EXPLORIUM_SIZE("explore.warmup_steps", explore.warmup_steps, any_u64),
      {"explore.decay_factor",
       Field{[](const RunConfig& c) { return format_double(c.explore.decay_factor); },
             [](RunConfig& c, std::string_view v) {
               const double x = parse_double(v);
               if (!(x > 1.0)) throw ConfigurationError("must be > 1");
               c.explore.decay_factor = x;
             }}},

      {"method1.uncertainty",
       Field{[](const RunConfig& c) {
               return std::string(c.method1.kind == UncertaintyKind::kPerAction ? "per_action" : "value");
             },
             [](RunConfig& c, std::string_view v) {
               if (v == "per_action") c.method1.kind = UncertaintyKind::kPerAction;
               else if (v == "value") c.method1.kind = UncertaintyKind::kValue;
               else throw ConfigurationError("expected per_action or value, got '" + std::string(v) + "'");
             }}},
      EXPLORIUM_SIZE("method1.repeat_k", method1.repeat_k, positive),
      EXPLORIUM_BOOL("method1.combine_eps", method1.combine_with_eps_greedy),
      {"method1.aggregate",
       Field{[](const RunConfig& c) {
               return std::string(c.method1.aggregate == RolloutAggregate::kFinal ? "final" : "mean");
             },
             [](RunConfig& c, std::string_view v) {
               if (v == "final") c.method1.aggregate = RolloutAggregate::kFinal;
               else if (v == "mean") c.method1.aggregate = RolloutAggregate::kMean;
               else throw ConfigurationError("expected final or mean, got '" + std::string(v) + "'");
             }}},

      {"dyn.arch", Field{[](const RunConfig& c) { return c.dyn.arch; },
                         [](RunConfig& c, std::string_view v) { c.dyn.arch = checked_arch(v); }}},
      EXPLORIUM_SIZE("dyn.factor_dim", dyn.factor_dim, any_size),
      EXPLORIUM_DOUBLE("dyn.lr", dyn.lr, strictly_positive),
      EXPLORIUM_SIZE("dyn.batch", dyn.batch, positive),
      EXPLORIUM_DOUBLE("dyn.clip", dyn.clip, strictly_positive),
      EXPLORIUM_SIZE("dyn.train_steps", dyn.train_steps, any_size),
      EXPLORIUM_SIZE("dyn.eval_every", dyn.eval_every, positive),

      EXPLORIUM_SIZE("mem.d", mem.d, positive),
      EXPLORIUM_DOUBLE("mem.delta", mem.delta, strictly_positive),
      EXPLORIUM_DOUBLE("mem.sigma", mem.sigma, strictly_positive),
  };
  return table;
}

#undef EXPLORIUM_SIZE
#undef EXPLORIUM_DOUBLE
#undef EXPLORIUM_BOOL

const Field& find_field(std::string_view key) {
  for (const auto& [name, field] : fields()) {
    if (name == key) return field;
  }
  throw ConfigurationError("unknown key");
}

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kEpsGreedy: return "eps-greedy";
    case Strategy::kUcb: return "ucb";
    case Strategy::kMajority: return "majority";
    case Strategy::kMethod1: return "method1";
    case Strategy::kMethod2: return "method2";
  }
  return "?";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "eps-greedy" || text == "eps_greedy") return Strategy::kEpsGreedy;
  if (text == "ucb") return Strategy::kUcb;
  if (text == "majority") return Strategy::kMajority;
  if (text == "method1") return Strategy::kMethod1;
  if (text == "method2") return Strategy::kMethod2;
  throw ConfigurationError("unknown strategy '" + std::string(text) +
                           "' (expected eps-greedy, ucb, majority, method1 or method2)");
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw ConfigurationError("cannot format number");
  return std::string(buf, ptr);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.first);
    return k;
  }();
  return keys;
}

void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  find_field(key).set(config, value);
}

std::size_t RunConfig::frame_side() const {
  if (env.frame != 0) return env.frame;
  const auto level = load_level(env.map, env.size);
  return std::max(level.rows, level.cols) * env.cell_px;
}

void validate(const RunConfig& c) {
  if (c.explore.eps_final > c.explore.eps_initial) {
    throw ConfigurationError("explore.eps_final must not exceed explore.eps_initial");
  }
  if (c.env.actions < 2 || c.env.actions > kMaxActions) throw ConfigurationError("env.actions must be in [2, 9]");
  const bool needs_spread = c.explore.strategy == Strategy::kMethod1;
  if (needs_spread && c.q.K < 2) throw ConfigurationError("method1 needs q.K >= 2");
  if (parse_arch(c.dyn.arch).hidden.size() != 1) {
    throw ConfigurationError("dyn.arch must end in exactly one linear layer");
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::map<std::string, std::size_t, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigParseError(line_no, "", "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigParseError(line_no, "", "missing key");
    if (seen.contains(key)) {
      throw ConfigParseError(line_no, key, "duplicate key (first set on line " + std::to_string(seen[key]) + ")");
    }
    seen[key] = line_no;
    try {
      set_config_value(config, key, value);
    } catch (const ConfigurationError& e) {
      throw ConfigParseError(line_no, key, e.what());
    }
    if (end == text.size()) break;
  }
  try {
    validate(config);
  } catch (const ConfigurationError& e) {
    throw ConfigParseError(0, "", e.what());
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string resolved_config(const RunConfig& config) {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + " = " + field.get(config) + "\n";
  return out;
}

bool strict_from_environment() {
  const char* v = std::getenv("EXPLORIUM_STRICT_DETERMINISM");
  return v != nullptr && std::string_view(v) == "1";
}

TrainingConfig RunConfig::training() const {
  TrainingConfig t;
  t.batch_size = q.batch;
  t.train_freq = q.train_freq;
  t.gamma = q.gamma;
  t.target_sync = q.target_sync;
  t.replay_capacity = replay.capacity;
  t.learning_rate = q.lr;
  t.clip_norm = q.clip;
  t.weight_decay = q.weight_decay;
  t.bootstrap = replay.bootstrap;
  return t;
}

AdamOptions RunConfig::q_adam() const {
  AdamOptions a;
  a.learning_rate = q.lr;
  a.weight_decay = q.weight_decay;
  return a;
}

QNetworkConfig RunConfig::q_network() const {
  QNetworkConfig n;
  n.stack_m = pre.stack_m;
  n.height = n.width = frame_side();
  n.arch = parse_arch(q.arch);
  n.n_actions = env.actions;
  return n;
}

DynamicsConfig RunConfig::dynamics() const {
  DynamicsConfig d;
  d.stack_m = pre.stack_m;
  d.height = d.width = frame_side();
  d.n_actions = env.actions;
  d.encoder = parse_arch(dyn.arch);
  d.factor_dim = dyn.factor_dim;
  return d;
}

Method2Config RunConfig::method2() const {
  return Method2Config{explore.lambda, 1.0, explore.decay_factor};
}

GridWorld RunConfig::make_world() const {
  RenderConfig render;
  render.cell_px = env.cell_px;
  render.frame_height = render.frame_width = frame_side();
  return GridWorld(load_level(env.map, env.size), env.actions, render, seed + seed_stream::kEnv);
}

}  // namespace explorium
