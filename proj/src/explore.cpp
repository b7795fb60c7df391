#include "explorium/explore.hpp"

#include <algorithm>
#include <cmath>

namespace explorium {

double ensemble_uncertainty(const QMatrix& q, UncertaintyKind kind) {
  return kind == UncertaintyKind::kPerAction ? uncertainty_per_action(q) : uncertainty_value(q);
}

std::vector<Tensor<float>> predicted_stacks(const DynamicsModel<float>& model, const Tensor<float>& stack,
                                            ActionId action, std::size_t k) {
  const auto predictions = model.rollout_repeat(stack, action, k);
  const std::size_t plane = stack.dim(1) * stack.dim(2);
  std::vector<Tensor<float>> out;
  out.reserve(k);
  Tensor<float> current = stack;
  for (const auto& p : predictions) {
    std::copy(current.data() + plane, current.data() + current.size(), current.data());
    float* newest = current.data() + current.size() - plane;
    for (std::size_t i = 0; i < plane; ++i) newest[i] = std::round(p[i] * 255.0f) / 255.0f;
    out.push_back(current);
  }
  return out;
}

Method1Result method1_select(const DynamicsModel<float>& model, const QEnsemble& ensemble, const FrameStack& stack,
                             const Method1Config& config) {
  if (config.repeat_k == 0) throw ConfigurationError("method1: repeat_k must be >= 1");
  const auto current = stack.to_tensor();
  Method1Result result;
  result.uncertainty.resize(ensemble.n_actions());
  for (ActionId a = 0; a < ensemble.n_actions(); ++a) {
    const auto stacks = predicted_stacks(model, current, a, config.repeat_k);
    if (config.aggregate == RolloutAggregate::kFinal) {
      result.uncertainty[a] = ensemble_uncertainty(ensemble.q_values(stacks.back()), config.kind);
    } else {
      double sum = 0.0;
      for (const auto& s : stacks) sum += ensemble_uncertainty(ensemble.q_values(s), config.kind);
      result.uncertainty[a] = sum / static_cast<double>(stacks.size());
    }
  }
  result.action = argmax(result.uncertainty);
  return result;
}

ScoreBreakdown score_actions(std::span<const double> mu, std::span<const double> sigma,
                             std::span<const double> visits, double lambda, double epsilon) {
  if (mu.size() != sigma.size() || mu.size() != visits.size() || mu.empty()) {
    throw ConfigurationError("score_actions: per-action inputs differ in length");
  }
  ScoreBreakdown out;
  out.epsilon = epsilon;
  out.lambda = lambda;
  out.actions.resize(mu.size());
  std::vector<double> scores(mu.size());
  for (std::size_t a = 0; a < mu.size(); ++a) {
    auto& s = out.actions[a];
    s.mu = mu[a];
    s.sigma = sigma[a];
    s.visits = visits[a];
    s.score = mu[a] + lambda * sigma[a] - epsilon * visits[a];
    scores[a] = s.score;
  }
  out.chosen = argmax(scores);
  return out;
}

Method2Selector::Method2Selector(Method2Config config) : config_(config), epsilon_(config.eps_init) {
  if (config_.lambda < 0.0) throw ConfigurationError("method2: lambda must be >= 0");
  if (!(config_.decay_factor > 1.0)) throw ConfigurationError("method2: decay factor must be > 1");
}

std::vector<Frame> predict_frames(const DynamicsModel<float>& model, const FrameStack& stack) {
  const auto current = stack.to_tensor();
  const auto& c = model.config();
  std::vector<Frame> frames;
  frames.reserve(c.n_actions);
  for (ActionId a = 0; a < c.n_actions; ++a) {
    frames.push_back(quantize_frame(model.predict_next(current, a).values(), c.height, c.width));
  }
  return frames;
}

ScoreBreakdown Method2Selector::select(const DynamicsModel<float>& model, const QEnsemble& ensemble,
                                       const TrajectoryMemory& memory, const FrameStack& stack) {
  return select(ensemble.q_values(stack), predict_frames(model, stack), memory);
}

ScoreBreakdown Method2Selector::select(const QMatrix& q_current, std::span<const Frame> predicted,
                                       const TrajectoryMemory& memory) {
  const auto stats = ensemble_stats(q_current);
  if (predicted.size() != stats.mean.size()) {
    throw ConfigurationError("method2: need one predicted frame per action");
  }
  std::vector<double> visits(predicted.size());
  for (std::size_t a = 0; a < predicted.size(); ++a) visits[a] = memory.visit_frequency(predicted[a]);
  auto breakdown = score_actions(stats.mean, stats.stddev, visits, config_.lambda, epsilon_);
  epsilon_ /= config_.decay_factor;
  ++selections_;
  return breakdown;
}

}  // namespace explorium
