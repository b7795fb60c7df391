#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "explorium/gridworld.hpp"
#include "explorium/rng.hpp"
#include "explorium/tensor.hpp"

namespace explorium {

/// Ensemble Q-values, one row per member: [K, N].
using QMatrix = Tensor<double>;

/// (1/N) sum_j sum_i (Q_i(s,a_j) - mean_i Q_i(s,a_j))^2. Requires K >= 2.
double uncertainty_per_action(const QMatrix& q);

/// sum_i (max_j Q_i(s,a_j) - mean_i max_j Q_i(s,a_j))^2. Requires K >= 2.
double uncertainty_value(const QMatrix& q);

/// Per-action ensemble mean and population standard deviation.
struct ActionStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};
ActionStats ensemble_stats(const QMatrix& q);

/// Index of the largest value; ties go to the lowest index.
ActionId argmax(std::span<const double> values);

ActionId select_greedy(const QMatrix& q);

/// With probability epsilon a uniform random action, otherwise greedy on the
/// ensemble-mean Q. Always consumes one draw for the coin and one for the
/// random action, so the stream position does not depend on the outcome.
ActionId select_eps_greedy(const QMatrix& q, double epsilon, Rng& rng);

/// argmax_a mean_a + lambda * stddev_a.
ActionId select_ucb(const QMatrix& q, double lambda);

/// Each member votes for its argmax; plurality wins, ties to the lowest id.
ActionId select_majority_vote(const QMatrix& q);

/// Linear decay from `initial` at step 0 to `final` at `decay_steps`, constant after.
double epsilon_schedule(std::uint64_t step, double initial, double final, std::uint64_t decay_steps);

/// r + gamma * (1 - done) * Q_target(s', argmax_a Q_online(s', a)).
double double_q_target(double reward, bool done, double gamma, std::span<const double> q_online_next,
                       std::span<const double> q_target_next);

}  // namespace explorium
