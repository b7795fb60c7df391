#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "explorium/config.hpp"

namespace explorium {

struct Counters {
  std::uint64_t env_steps = 0;
  std::uint64_t episodes = 0;
  std::uint64_t train_calls = 0;
  std::uint64_t q_updates = 0;
  std::uint64_t target_syncs = 0;
  std::uint64_t model_updates = 0;
};

/// One row of the per-selection diagnostics stream. nD is empty unless the
/// strategy computed visit frequencies of predicted frames.
struct Selection {
  std::uint64_t step = 0;
  ActionId action = 0;
  std::vector<double> mu;
  std::vector<double> sigma;
  std::vector<double> nD;
  double epsilon = 0.0;
  double score_chosen = 0.0;
  double uncertainty = 0.0;  // per-action ensemble variance at the current state
};

struct EpisodeRecord {
  double reward = 0.0;
  std::uint64_t steps = 0;
  bool finished = false;  // terminal or truncated, as opposed to cut by the step budget
  double q_loss_sum = 0.0;
  std::uint64_t q_loss_count = 0;
  double model_loss_sum = 0.0;
  std::uint64_t model_loss_count = 0;
  double uncertainty_sum = 0.0;
  double visits_sum = 0.0;
  std::uint64_t selections = 0;
  double epsilon = 0.0;  // exploration rate after the last step
};

/// Ties environment, ensemble, dynamics model, replay and trajectory memory
/// together and runs the act / store / train loop.
class Agent {
 public:
  explicit Agent(const RunConfig& config);

  /// Plays until the episode ends or `step_budget` environment steps were
  /// taken. With `learn` false nothing is stored in replay and nothing trains.
  /// A numeric error propagates after the episode's partial totals were
  /// passed to `on_abort`.
  EpisodeRecord run_episode(std::uint64_t step_budget, bool learn,
                            const std::function<void(const Selection&)>& on_select = {},
                            const std::function<void(const EpisodeRecord&)>& on_abort = {});

  /// Chooses an action for the current state and advances exploration state.
  Selection select(const FrameStack& stack, bool learn);

  /// Exploration rate the strategy would use now.
  double epsilon(bool learn) const;

  const RunConfig& config() const { return config_; }
  const Counters& counters() const { return counters_; }
  PreprocessedEnv& env() { return env_; }
  QEnsemble& ensemble() { return ensemble_; }
  const QEnsemble& ensemble() const { return ensemble_; }
  DynamicsModel<float>* dynamics() { return dynamics_.get(); }
  TrajectoryMemory& memory() { return memory_; }
  ReplayMemory& replay() { return replay_; }
  std::optional<Method2Selector>& method2() { return method2_; }

  /// Q-ensemble records plus "dyn/..." records when a dynamics model exists.
  std::vector<NamedTensor> export_params() const;
  void import_params(const std::vector<NamedTensor>& records);

  /// One dynamics update on a replay batch; nullopt if replay is too small.
  std::optional<double> train_dynamics();

 private:
  RunConfig config_;
  TrainingConfig training_;
  PreprocessedEnv env_;
  QEnsemble ensemble_;
  std::unique_ptr<DynamicsModel<float>> dynamics_;
  ReplayMemory replay_;
  TrajectoryMemory memory_;
  std::optional<Method2Selector> method2_;
  Rng replay_rng_;
  Rng policy_rng_;
  Rng dyn_replay_rng_;
  Counters counters_;
};

/// True when the strategy needs a dynamics model.
bool uses_dynamics(Strategy s);

/// Dynamics parameter records, named "dyn/...".
std::vector<NamedTensor> export_dynamics(const DynamicsModel<float>& model);
void import_dynamics(DynamicsModel<float>& model, const std::vector<NamedTensor>& records);

/// Training batch from replay: stacks [B,m,H,W], actions and newest next
/// frames [B,1,H,W].
struct DynamicsBatch {
  Tensor<float> stacks;
  std::vector<ActionId> actions;
  Tensor<float> targets;
};
DynamicsBatch make_dynamics_batch(std::span<const Transition* const> transitions);

}  // namespace explorium
