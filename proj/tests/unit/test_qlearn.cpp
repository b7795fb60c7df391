#include <doctest.h>

#include <cmath>

#include "explorium/rng.hpp"
#include "explorium/ensemble.hpp"
#include "gradcheck.hpp"
#include "params.hpp"

using namespace explorium;
using testsupport::param;
using testsupport::random_tensor;

namespace {

QMatrix qm(std::size_t k, std::size_t n, std::vector<double> v) { return QMatrix({k, n}, std::move(v)); }

QNetworkConfig tiny_net(std::size_t n_actions = 3) {
  QNetworkConfig c;
  c.stack_m = 2;
  c.height = c.width = 6;
  c.arch = parse_arch("c2:2:2,f8");
  c.n_actions = n_actions;
  return c;
}

FrameStack random_stack(Rng& rng, std::size_t m = 2, std::size_t side = 6) {
  std::vector<FramePtr> frames;
  for (std::size_t i = 0; i < m; ++i) {
    Frame f(side, side);
    for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    frames.push_back(std::make_shared<const Frame>(f));
  }
  return FrameStack(frames);
}

}  // namespace

TEST_CASE("uncertainty worked values") {
  CHECK(uncertainty_per_action(qm(2, 2, {1, 0, 3, 0})) == 1.0);
  CHECK(uncertainty_value(qm(2, 2, {1, 0, 3, 0})) == 2.0);
  CHECK(uncertainty_per_action(qm(3, 2, {4, 1, 4, 1, 4, 1})) == 0.0);
  CHECK(uncertainty_value(qm(3, 2, {4, 1, 4, 1, 4, 1})) == 0.0);
  CHECK_THROWS_AS(uncertainty_per_action(qm(1, 3, {1, 2, 3})), ConfigurationError);
  CHECK_THROWS_AS(uncertainty_value(qm(1, 3, {1, 2, 3})), ConfigurationError);
}

TEST_CASE("uncertainties are unchanged by a global shift") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    auto q = random_tensor<double>({4, 5}, rng, -3, 3);
    auto shifted = q;
    const double c = rng.uniform(-100, 100);
    for (auto& v : shifted.values()) v += c;
    CHECK(uncertainty_per_action(shifted) == doctest::Approx(uncertainty_per_action(q)).epsilon(1e-9));
    CHECK(uncertainty_value(shifted) == doctest::Approx(uncertainty_value(q)).epsilon(1e-9));
  }
}

TEST_CASE("per-action uncertainty is zero exactly when members agree") {
  auto q = qm(3, 2, {1, 2, 1, 2, 1, 2});
  CHECK(uncertainty_per_action(q) == 0.0);
  q(1, 1) = 2.5;
  CHECK(uncertainty_per_action(q) > 0.0);
}

TEST_CASE("epsilon-greedy selection") {
  Rng rng(0);
  CHECK(select_eps_greedy(qm(1, 3, {0, 5, 1}), 0.0, rng) == 1);
  CHECK(select_eps_greedy(qm(2, 3, {1, 1, 1, 1, 1, 1}), 0.0, rng) == 0);

  // eps = 1: uniform within 3 sigma over 10000 draws
  const std::size_t n = 5, draws = 10000;
  std::vector<std::size_t> counts(n);
  for (std::size_t i = 0; i < draws; ++i) ++counts[select_eps_greedy(qm(1, n, {0, 9, 0, 0, 0}), 1.0, rng)];
  const double p = 1.0 / n, mean = draws * p, sd = std::sqrt(draws * p * (1 - p));
  for (auto c : counts) CHECK(std::abs(static_cast<double>(c) - mean) < 3 * sd);
}

TEST_CASE("UCB selection") {
  // action A: Q = {0, 0}; action B: Q = {-1, 1}
  const auto q = qm(2, 2, {0, -1, 0, 1});
  CHECK(select_ucb(q, 1.0) == 1);
  CHECK(select_ucb(q, 0.0) == 0);
  const auto stats = ensemble_stats(q);
  CHECK(stats.stddev[1] == 1.0);
  CHECK(stats.mean[1] == 0.0);
}

TEST_CASE("majority vote") {
  // votes {2,2,2,0,1}
  const auto q = qm(5, 3, {0, 0, 1, 0, 0, 1, 0, 0, 1, 1, 0, 0, 0, 1, 0});
  CHECK(select_majority_vote(q) == 2);
  CHECK(select_majority_vote(qm(4, 2, {1, 0, 1, 0, 0, 1, 0, 1})) == 0);
  CHECK(select_majority_vote(qm(3, 3, {0, 0, 4, 0, 0, 4, 0, 0, 4})) == 2);
}

TEST_CASE("selectors ignore a global shift and lambda 0 UCB is greedy") {
  Rng rng(2), draw_a(3), draw_b(3);
  for (int trial = 0; trial < 300; ++trial) {
    const auto q = random_tensor<double>({3, 4}, rng, -2, 2);
    auto s = q;
    for (auto& v : s.values()) v += 17.25;
    CHECK(select_greedy(q) == select_greedy(s));
    CHECK(select_ucb(q, 0.3) == select_ucb(s, 0.3));
    CHECK(select_majority_vote(q) == select_majority_vote(s));
    CHECK(select_eps_greedy(q, 0.2, draw_a) == select_eps_greedy(s, 0.2, draw_b));
    CHECK(select_ucb(q, 0.0) == select_greedy(q));
  }
}

TEST_CASE("epsilon schedule") {
  CHECK(epsilon_schedule(0, 1.0, 0.01, 1'000'000) == 1.0);
  CHECK(epsilon_schedule(1'000'000, 1.0, 0.01, 1'000'000) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(epsilon_schedule(500'000, 1.0, 0.01, 1'000'000) == doctest::Approx(0.505).epsilon(1e-15));
  CHECK(epsilon_schedule(5'000'000, 1.0, 0.01, 1'000'000) == 0.01);
}

TEST_CASE("double-Q target") {
  const std::vector<double> online{0.2, 5.0, 1.0}, target{9.0, 3.0, 7.0};
  CHECK(double_q_target(1.0, false, 0.99, online, target) == doctest::Approx(3.97).epsilon(1e-15));
  CHECK(double_q_target(1.0, true, 0.99, online, target) == 1.0);
}

TEST_CASE("replay is a FIFO ring") {
  ReplayMemory replay(5);
  for (int i = 0; i < 12; ++i) {
    Transition t;
    t.reward = i;
    replay.push(t);
    CHECK(replay.size() == std::min<std::size_t>(i + 1, 5));
  }
  for (std::size_t i = 0; i < 5; ++i) CHECK(replay.at(i).reward == 7.0 + static_cast<double>(i));
  Rng rng(0);
  for (auto i : replay.sample_indices(100, rng)) CHECK(i < 5);
  CHECK_THROWS(ReplayMemory(0));
}

TEST_CASE("ensemble shapes, zero init and determinism") {
  QNetworkConfig c = tiny_net(9);
  QEnsemble e(c, 5, 0);
  Rng rng(1);
  const auto s = random_stack(rng);
  const auto q = e.q_values(s);
  CHECK(q.shape() == Shape{5, 9});
  CHECK(e.q_values(s) == q);
  for (std::size_t k = 0; k < 5; ++k) e.online(k).zero_init();
  const auto zero = e.q_values(s);
  for (double v : zero.values()) CHECK(v == 0.0);
}

TEST_CASE("members differ by initialisation and sync copies bit-exactly") {
  QEnsemble e(tiny_net(), 3, 7);
  Rng rng(2);
  const auto s = random_stack(rng);
  const auto q = e.q_values(s);
  CHECK(q(0, 0) != q(1, 0));

  ReplayMemory replay(64);
  for (int i = 0; i < 64; ++i) replay.push({random_stack(rng), static_cast<ActionId>(i % 3), 1.0, random_stack(rng), false});
  TrainingConfig cfg;
  cfg.batch_size = 8;
  Rng sampler(3);
  REQUIRE(e.ddqn_train_step(replay, cfg, sampler));
  const auto t = s.to_tensor();
  CHECK(e.target_q_values(t) != e.q_values(t));
  e.sync_targets();
  CHECK(e.target_q_values(t) == e.q_values(t));
  e.sync_targets();
  CHECK(e.target_q_values(t) == e.q_values(t));
  for (std::size_t k = 0; k < 3; ++k) {
    const auto on = e.online(k).params();
    const auto tg = e.target(k).params();
    for (std::size_t i = 0; i < on.size(); ++i) CHECK(on[i]->value == tg[i]->value);
  }
}

TEST_CASE("training needs a full batch") {
  QEnsemble e(tiny_net(), 2, 0);
  ReplayMemory replay(10);
  TrainingConfig cfg;
  Rng rng(0);
  CHECK_FALSE(e.ddqn_train_step(replay, cfg, rng).has_value());
}

TEST_CASE("identical members on the same batch report identical losses") {
  QEnsemble e(tiny_net(), 3, 1);
  for (std::size_t k = 1; k < 3; ++k) e.online(k).copy_weights_from(e.online(0));
  e.sync_targets();
  Rng rng(4);
  ReplayMemory replay(40);
  for (int i = 0; i < 40; ++i) replay.push({random_stack(rng), static_cast<ActionId>(i % 3), 0.5, random_stack(rng), i % 5 == 0});
  TrainingConfig cfg;
  cfg.batch_size = 16;
  Rng sampler(5);
  const auto losses = e.ddqn_train_step(replay, cfg, sampler);
  REQUIRE(losses);
  CHECK((*losses)[0] == (*losses)[1]);
  CHECK((*losses)[1] == (*losses)[2]);
}

TEST_CASE("self-consistent transitions give zero gradients and leave weights unchanged") {
  // With all-zero networks and zero rewards every target equals the prediction.
  QEnsemble e(tiny_net(), 2, 2);
  for (std::size_t k = 0; k < 2; ++k) e.online(k).zero_init();
  e.sync_targets();
  Rng rng(6);
  ReplayMemory replay(32);
  for (int i = 0; i < 32; ++i) replay.push({random_stack(rng), static_cast<ActionId>(i % 3), 0.0, random_stack(rng), false});
  const auto before = e.export_params();
  TrainingConfig cfg;
  cfg.batch_size = 32;
  Rng sampler(0);
  const auto losses = e.ddqn_train_step(replay, cfg, sampler);
  REQUIRE(losses);
  CHECK((*losses)[0] == 0.0);
  for (std::size_t k = 0; k < 2; ++k) {
    for (const auto* p : e.online(k).params()) {
      for (float g : p->grad.values()) CHECK(g == 0.0f);
    }
  }
  CHECK(e.export_params() == before);
}

TEST_CASE("bootstrap toggle draws a batch per member") {
  Rng rng(7);
  ReplayMemory replay(50);
  for (int i = 0; i < 50; ++i) replay.push({random_stack(rng), static_cast<ActionId>(i % 3), 1.0, random_stack(rng), false});
  TrainingConfig shared, boot;
  shared.batch_size = boot.batch_size = 8;
  boot.bootstrap = true;
  QEnsemble a(tiny_net(), 2, 9), b(tiny_net(), 2, 9);
  for (auto* e : {&a, &b}) {
    e->online(1).copy_weights_from(e->online(0));
    e->target(1).copy_weights_from(e->online(0));
  }
  Rng r1(1), r2(1);
  const auto la = a.ddqn_train_step(replay, shared, r1);
  const auto lb = b.ddqn_train_step(replay, boot, r2);
  CHECK((*la)[0] == (*la)[1]);
  CHECK((*lb)[0] != (*lb)[1]);
}

TEST_CASE("ensemble checkpoint records") {
  QEnsemble e(tiny_net(), 2, 3);
  const auto recs = e.export_params();
  bool found = false;
  for (const auto& r : recs) found = found || r.name == "q/target/1/head/w";
  CHECK(found);
  QEnsemble f(tiny_net(), 2, 99);
  f.import_params(recs);
  CHECK(f.export_params() == recs);
  auto missing = recs;
  missing.pop_back();
  CHECK_THROWS_AS(f.import_params(missing), FormatError);
}

TEST_CASE("Q-network gradients match finite differences in double precision") {
  Rng rng(12), data(13);
  QNetwork<double> net(tiny_net(), "q", rng);
  const auto x = random_tensor<double>({3, 2, 6, 6}, data, 0, 1);
  const auto target = random_tensor<double>({3, 3}, data, -1, 1);
  auto ps = net.params();
  const auto r = testsupport::grad_check(ps, [&] { return ops::mse_loss(net.forward(Var<double>::constant(x)), target); });
  if (!r.kink) CHECK(r.rel_error < 1e-6);
}
