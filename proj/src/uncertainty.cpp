#include "explorium/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "explorium/error.hpp"

namespace explorium {
namespace {

void require_ensemble(const QMatrix& q, const char* what) {
  if (q.rank() != 2) throw ConfigurationError(std::string(what) + ": expected a [K,N] matrix");
  if (q.dim(0) < 2) throw ConfigurationError(std::string(what) + ": needs K >= 2 ensemble members");
}

void require_matrix(const QMatrix& q, const char* what) {
  if (q.rank() != 2) throw ConfigurationError(std::string(what) + ": expected a [K,N] matrix");
}

}  // namespace

double uncertainty_per_action(const QMatrix& q) {
  require_ensemble(q, "uncertainty_per_action");
  const std::size_t K = q.dim(0);
  const std::size_t N = q.dim(1);
  double total = 0.0;
  for (std::size_t j = 0; j < N; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < K; ++i) mean += q(i, j);
    mean /= static_cast<double>(K);
    for (std::size_t i = 0; i < K; ++i) {
      const double d = q(i, j) - mean;
      total += d * d;
    }
  }
  return total / static_cast<double>(N);
}

double uncertainty_value(const QMatrix& q) {
  require_ensemble(q, "uncertainty_value");
  const std::size_t K = q.dim(0);
  const std::size_t N = q.dim(1);
  std::vector<double> values(K);
  for (std::size_t i = 0; i < K; ++i) {
    values[i] = q(i, 0);
    for (std::size_t j = 1; j < N; ++j) values[i] = std::max(values[i], q(i, j));
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(K);
  double total = 0.0;
  for (double v : values) total += (v - mean) * (v - mean);
  return total;
}

ActionStats ensemble_stats(const QMatrix& q) {
  require_matrix(q, "ensemble_stats");
  const std::size_t K = q.dim(0);
  const std::size_t N = q.dim(1);
  ActionStats s{std::vector<double>(N, 0.0), std::vector<double>(N, 0.0)};
  for (std::size_t j = 0; j < N; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < K; ++i) mean += q(i, j);
    mean /= static_cast<double>(K);
    double var = 0.0;
    for (std::size_t i = 0; i < K; ++i) var += (q(i, j) - mean) * (q(i, j) - mean);
    s.mean[j] = mean;
    s.stddev[j] = std::sqrt(var / static_cast<double>(K));
  }
  return s;
}

ActionId argmax(std::span<const double> values) {
  if (values.empty()) throw ConfigurationError("argmax over an empty set");
  ActionId best = 0;
  for (std::size_t a = 1; a < values.size(); ++a) {
    if (values[a] > values[best]) best = a;
  }
  return best;
}

ActionId select_greedy(const QMatrix& q) { return argmax(ensemble_stats(q).mean); }

ActionId select_eps_greedy(const QMatrix& q, double epsilon, Rng& rng) {
  require_matrix(q, "select_eps_greedy");
  const bool explore = rng.uniform() < epsilon;
  const auto random_action = static_cast<ActionId>(rng.below(q.dim(1)));
  return explore ? random_action : select_greedy(q);
}

ActionId select_ucb(const QMatrix& q, double lambda) {
  if (lambda < 0.0) throw ConfigurationError("select_ucb: lambda must be >= 0");
  const auto s = ensemble_stats(q);
  std::vector<double> score(s.mean.size());
  for (std::size_t a = 0; a < score.size(); ++a) score[a] = s.mean[a] + lambda * s.stddev[a];
  return argmax(score);
}

ActionId select_majority_vote(const QMatrix& q) {
  require_matrix(q, "select_majority_vote");
  const std::size_t K = q.dim(0);
  const std::size_t N = q.dim(1);
  std::vector<double> votes(N, 0.0);
  for (std::size_t i = 0; i < K; ++i) {
    votes[argmax(std::span<const double>(q.data() + i * N, N))] += 1.0;
  }
  return argmax(votes);
}

double epsilon_schedule(std::uint64_t step, double initial, double final, std::uint64_t decay_steps) {
  if (decay_steps == 0 || step >= decay_steps) return final;
  const double frac = static_cast<double>(step) / static_cast<double>(decay_steps);
  return initial + frac * (final - initial);
}

double double_q_target(double reward, bool done, double gamma, std::span<const double> q_online_next,
                       std::span<const double> q_target_next) {
  if (done) return reward;
  if (q_online_next.size() != q_target_next.size()) {
    throw ConfigurationError("double_q_target: online/target action counts differ");
  }
  return reward + gamma * q_target_next[argmax(q_online_next)];
}

}  // namespace explorium
