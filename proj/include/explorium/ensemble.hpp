#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "explorium/checkpoint.hpp"
#include "explorium/optim.hpp"
#include "explorium/qnetwork.hpp"
#include "explorium/replay.hpp"
#include "explorium/uncertainty.hpp"

namespace explorium {

struct TrainingConfig {
  std::size_t batch_size = 32;
  std::size_t train_freq = 4;
  double gamma = 0.99;
  std::size_t target_sync = 1000;
  std::size_t replay_capacity = 10000;
  double learning_rate = 1e-4;
  double clip_norm = 10.0;
  double weight_decay = 0.0;
  bool bootstrap = false;  // true: every member draws its own batch
  bool operator==(const TrainingConfig&) const = default;
};

/// K online Q-networks, K target networks, one Adam state per member.
class QEnsemble {
 public:
  QEnsemble(const QNetworkConfig& config, std::size_t members, std::uint64_t init_seed, AdamOptions adam = {});

  std::size_t size() const { return online_.size(); }
  std::size_t n_actions() const { return config_.n_actions; }
  const QNetworkConfig& config() const { return config_; }

  /// Row k = Q_k(s, .) from the online networks.
  QMatrix q_values(const FrameStack& stack) const;
  QMatrix q_values(const Tensor<float>& stack) const;
  QMatrix target_q_values(const Tensor<float>& stack) const;

  /// One Double-DQN update of every member on a uniformly sampled batch.
  /// Returns per-member losses, or nullopt when the replay holds fewer than
  /// batch_size transitions.
  std::optional<std::vector<double>> ddqn_train_step(const ReplayMemory& replay, const TrainingConfig& config,
                                                     Rng& rng);

  /// target_k := online_k for every member.
  void sync_targets();

  QNetwork<float>& online(std::size_t k) { return online_.at(k); }
  const QNetwork<float>& online(std::size_t k) const { return online_.at(k); }
  QNetwork<float>& target(std::size_t k) { return target_.at(k); }
  const QNetwork<float>& target(std::size_t k) const { return target_.at(k); }

  /// Records named "q/online/{k}/..." and "q/target/{k}/...".
  std::vector<NamedTensor> export_params() const;
  /// Requires every exported name to be present with a matching shape.
  void import_params(const std::vector<NamedTensor>& records);

 private:
  double train_member(std::size_t k, const std::vector<const Transition*>& batch, const TrainingConfig& config);

  QNetworkConfig config_;
  std::vector<QNetwork<float>> online_;
  std::vector<QNetwork<float>> target_;
  std::vector<Adam<float>> adam_;
};

}  // namespace explorium
