#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "explorium/dynamics.hpp"
#include "explorium/ensemble.hpp"
#include "explorium/trajectory_memory.hpp"

namespace explorium {

enum class UncertaintyKind { kPerAction, kValue };
enum class RolloutAggregate { kFinal, kMean };

struct Method1Config {
  UncertaintyKind kind = UncertaintyKind::kPerAction;
  std::size_t repeat_k = 4;
  bool combine_with_eps_greedy = true;
  RolloutAggregate aggregate = RolloutAggregate::kFinal;
  bool operator==(const Method1Config&) const = default;
};

struct Method1Result {
  ActionId action = 0;
  std::vector<double> uncertainty;  // per action
};

double ensemble_uncertainty(const QMatrix& q, UncertaintyKind kind);

/// Stack seen after repeating `action` i times for i = 1..k, each prediction
/// quantised to 8 bits and appended as the newest frame.
std::vector<Tensor<float>> predicted_stacks(const DynamicsModel<float>& model, const Tensor<float>& stack,
                                            ActionId action, std::size_t k);

/// Picks the action whose predicted next state the ensemble is least sure
/// about. Ties go to the lowest action id.
Method1Result method1_select(const DynamicsModel<float>& model, const QEnsemble& ensemble, const FrameStack& stack,
                             const Method1Config& config);

struct Method2Config {
  double lambda = 0.1;
  double eps_init = 1.0;
  double decay_factor = 1.0001;
};

struct ActionScore {
  double mu = 0.0;
  double sigma = 0.0;
  double visits = 0.0;  // n_D of the predicted next frame
  double score = 0.0;   // mu + lambda * sigma - epsilon * visits
};

struct ScoreBreakdown {
  std::vector<ActionScore> actions;
  ActionId chosen = 0;
  double epsilon = 0.0;  // value used for this selection, before decay
  double lambda = 0.0;
};

/// score(a) = mu_a + lambda * sigma_a - epsilon * n_D(a), then argmax.
ScoreBreakdown score_actions(std::span<const double> mu, std::span<const double> sigma,
                             std::span<const double> visits, double lambda, double epsilon);

/// Combined UCB / trajectory-memory selector. The visit penalty weight starts
/// at eps_init and is divided by decay_factor after every selection; it is
/// never reset between episodes.
class Method2Selector {
 public:
  explicit Method2Selector(Method2Config config);

  ScoreBreakdown select(const DynamicsModel<float>& model, const QEnsemble& ensemble,
                        const TrajectoryMemory& memory, const FrameStack& stack);

  /// Same rule given the current-state Q-values and the predicted next frame
  /// for every action.
  ScoreBreakdown select(const QMatrix& q_current, std::span<const Frame> predicted, const TrajectoryMemory& memory);

  double epsilon() const { return epsilon_; }
  void set_epsilon(double e) { epsilon_ = e; }
  std::size_t selections() const { return selections_; }
  const Method2Config& config() const { return config_; }

 private:
  Method2Config config_;
  double epsilon_;
  std::size_t selections_ = 0;
};

/// Predicted next frame for each action, quantised to 8 bits.
std::vector<Frame> predict_frames(const DynamicsModel<float>& model, const FrameStack& stack);

}  // namespace explorium
