#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "explorium/metrics.hpp"

namespace explorium {

struct TrainResult {
  Counters counters;
  std::vector<double> episode_rewards;
  double total_reward = 0.0;
  /// Area under the running-average reward curve, normalised by the step
  /// count: each step carries the running average as of the end of its
  /// episode.
  double reward_auc = 0.0;
  bool aborted = false;
  std::string status = "ok";
};

/// Runs the act/store/train loop for config.max_steps environment steps.
/// Writes config.resolved, metrics.csv, diagnostics.csv (if enabled),
/// checkpoints/step_<n>.qens every checkpoint_every steps, final.qens and
/// status.txt into `out_dir`. A numeric failure ends the run with status
/// "aborted: ..." instead of throwing.
TrainResult run_training(const RunConfig& config, const std::filesystem::path& out_dir);

/// Same loop without any file output.
TrainResult run_training_in_memory(const RunConfig& config);

struct ModelLossRow {
  std::uint64_t step = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct ModelTrainResult {
  std::size_t train_transitions = 0;
  std::size_t val_transitions = 0;
  std::size_t episodes = 0;
  std::vector<ModelLossRow> rows;
  double final_val_loss = 0.0;
};

/// Collected transitions for dynamics training, split 90/10 by episode:
/// every tenth episode is held out. With fewer than ten episodes the last
/// tenth of the transitions is held out instead.
struct TransitionSplit {
  std::vector<Transition> train;
  std::vector<Transition> val;
  std::size_t episodes = 0;
};

/// Plays `frames` environment steps with an epsilon-greedy policy over a fresh,
/// untrained Q-ensemble (epsilon = explore.eps_initial).
TransitionSplit collect_transitions(const RunConfig& config, std::uint64_t frames);

/// Mean per-pixel MSE over `transitions`, evaluated in fixed chunks.
double dynamics_loss(const DynamicsModel<float>& model, std::span<const Transition> transitions);

/// Collects transitions, trains the dynamics model for dyn.train_steps and
/// writes model_loss.csv (step,train_loss,val_loss), model.qens and
/// config.resolved. frames == 0 writes only the header.
ModelTrainResult run_model_training(const RunConfig& config, std::uint64_t frames,
                                    const std::filesystem::path& out_dir);

struct EvalResult {
  std::vector<double> rewards;
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::string summary;
};

/// Plays `episodes` episodes without learning using parameters from
/// `checkpoint`; writes per-episode rows to `csv_path` when non-empty.
EvalResult run_eval(const RunConfig& config, const std::filesystem::path& checkpoint, std::size_t episodes,
                    const std::filesystem::path& csv_path);

/// One run per (lambda, seed). Directories are out/lambda_<value> with a
/// seed_<n> level when more than one seed is given.
std::vector<std::filesystem::path> run_sweep(const RunConfig& base, std::span<const double> lambdas,
                                             std::span<const std::uint64_t> seeds, const std::filesystem::path& out);

/// Binary PGM (P5).
void write_pgm(const std::filesystem::path& path, const Frame& frame);

}  // namespace explorium
