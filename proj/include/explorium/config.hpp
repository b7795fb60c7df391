#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "explorium/explore.hpp"

namespace explorium {

enum class Strategy { kEpsGreedy, kUcb, kMajority, kMethod1, kMethod2 };

std::string to_string(Strategy s);
Strategy parse_strategy(std::string_view text);

struct EnvSection {
  std::string map = "builtin:open";
  std::size_t size = 10;
  std::size_t cell_px = 3;
  std::size_t frame = 32;  // square frame side; 0 = natural level size
  std::size_t actions = 5;
  std::size_t max_episode_steps = 500;
  bool operator==(const EnvSection&) const = default;
};

struct QSection {
  std::size_t K = 5;
  std::string arch = "toy";
  std::size_t batch = 32;
  std::size_t train_freq = 4;
  double gamma = 0.99;
  std::size_t target_sync = 1000;
  double lr = 1e-4;
  double clip = 10.0;
  double weight_decay = 0.0;
  bool operator==(const QSection&) const = default;
};

struct ReplaySection {
  std::size_t capacity = 10000;
  bool bootstrap = false;
  bool operator==(const ReplaySection&) const = default;
};

struct ExploreSection {
  Strategy strategy = Strategy::kEpsGreedy;
  double eps_initial = 1.0;
  double eps_final = 0.01;
  std::uint64_t eps_steps = 1'000'000;
  double lambda = 0.1;
  double decay_factor = 1.0001;
  std::uint64_t warmup_steps = 0;  // uniform random actions before the strategy takes over
  bool operator==(const ExploreSection&) const = default;
};

struct DynSection {
  std::string arch = "toy";
  std::size_t factor_dim = 0;
  double lr = 1e-4;
  std::size_t batch = 32;
  double clip = 10.0;
  std::size_t train_steps = 2000;  // train-model only
  std::size_t eval_every = 100;    // train-model only
  bool operator==(const DynSection&) const = default;
};

struct MemSection {
  std::size_t d = 20;
  double delta = 50.0;
  double sigma = 100.0;
  bool operator==(const MemSection&) const = default;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::uint64_t max_steps = 1'000'000;
  std::string out_dir = "runs/default";
  std::uint64_t checkpoint_every = 50'000;
  bool strict = false;
  bool diagnostics = true;
  double eval_epsilon = 0.0;

  EnvSection env;
  PreprocessConfig pre;
  QSection q;
  ReplaySection replay;
  ExploreSection explore;
  Method1Config method1;
  DynSection dyn;
  MemSection mem;

  bool operator==(const RunConfig&) const = default;

  /// Square frame side the networks see.
  std::size_t frame_side() const;
  TrainingConfig training() const;
  AdamOptions q_adam() const;
  QNetworkConfig q_network() const;
  DynamicsConfig dynamics() const;
  Method2Config method2() const;
  GridWorld make_world() const;
};

/// `key = value` lines; `#` starts a comment. Unknown keys, bad values and
/// violated invariants throw ConfigParseError naming the line and key.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Every key with its effective value, one per line, in a form parse_config
/// reads back to an equal RunConfig.
std::string resolved_config(const RunConfig& config);

/// Sets one key; throws ConfigurationError on a bad key or value.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);

/// Cross-field checks; throws ConfigurationError.
void validate(const RunConfig& config);

/// All recognised keys in echo order.
const std::vector<std::string>& config_keys();

/// True when EXPLORIUM_STRICT_DETERMINISM=1.
bool strict_from_environment();

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace explorium
