#include <doctest.h>

#include <cmath>
#include <limits>

#include "explorium/rng.hpp"
#include "explorium/dynamics.hpp"
#include "gradcheck.hpp"
#include "params.hpp"

using namespace explorium;
using testsupport::param;
using testsupport::random_tensor;

namespace {

DynamicsConfig toy_config() {
  DynamicsConfig c;
  c.stack_m = 4;
  c.height = c.width = 32;
  c.n_actions = 5;
  c.encoder = parse_arch("toy");
  return c;
}

DynamicsConfig small_config() {
  DynamicsConfig c;
  c.stack_m = 2;
  c.height = c.width = 8;
  c.n_actions = 3;
  c.encoder = parse_arch("c3:2:2,f6");
  c.factor_dim = 4;
  return c;
}

Var<float> cf(Tensor<float> t) { return Var<float>::constant(std::move(t)); }

Tensor<float> eye(std::size_t n) {
  Tensor<float> t({n, n});
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0f;
  return t;
}

}  // namespace

TEST_CASE("factored transform worked examples") {
  const Tensor<float> h({1, 2}, {1, 2});
  // W_a a = [3, -1] with W_enc = W_dec = I, b = 0
  const Tensor<float> wa({2, 1}, {3, -1});
  const auto out = FactoredTransform<float>::apply(cf(h), cf(Tensor<float>({1, 1}, {1})), cf(eye(2)), cf(wa),
                                                   cf(eye(2)), cf(Tensor<float>({2})));
  CHECK(out.value().storage() == std::vector<float>{3, -2});

  const Tensor<float> ones({2, 1}, {1, 1});
  const auto same = FactoredTransform<float>::apply(cf(h), cf(Tensor<float>({1, 1}, {1})), cf(eye(2)), cf(ones),
                                                    cf(eye(2)), cf(Tensor<float>({2})));
  CHECK(same.value() == h);

  const Tensor<float> b({2}, {0.5f, -4});
  const auto killed = FactoredTransform<float>::apply(cf(h), cf(Tensor<float>({1, 1}, {1})), cf(eye(2)),
                                                      cf(Tensor<float>({2, 1})), cf(eye(2)), cf(b));
  CHECK(killed.value().storage() == b.storage());
}

TEST_CASE("one-hot actions") {
  const ActionId a[] = {2, 0};
  const auto t = one_hot<float>(a, 4);
  CHECK(t.shape() == Shape{2, 4});
  CHECK(t.storage() == std::vector<float>{0, 0, 1, 0, 1, 0, 0, 0});
  const ActionId bad[] = {4};
  CHECK_THROWS_AS(one_hot<float>(bad, 4), ConfigurationError);
}

TEST_CASE("toy configuration shapes") {
  Rng rng(0);
  DynamicsModel<float> model(toy_config(), rng);
  CHECK(model.embed_dim() == 256);
  const auto h = model.encode(cf(Tensor<float>({1, 4, 32, 32})));
  CHECK(h.shape() == Shape{1, 256});
  const auto x = model.decode(cf(Tensor<float>({1, 256})));
  CHECK(x.shape() == Shape{1, 1, 32, 32});
  CHECK(model.predict_next(Tensor<float>({4, 32, 32}), 1).shape() == Shape{1, 32, 32});
  CHECK_THROWS_AS(model.encode(cf(Tensor<float>({1, 3, 32, 32}))), ConfigurationError);
  CHECK(param(model, "dyn/encoder/0/w").value.shape() == Shape{16, 4, 4, 4});
  CHECK(param(model, "dyn/transform/w_a").value.shape() == Shape{256, 5});
}

TEST_CASE("zero-initialised model is zero everywhere") {
  Rng rng(0);
  DynamicsModel<float> model(small_config(), rng);
  model.zero_init();
  const auto h = model.encode(cf(Tensor<float>({1, 2, 8, 8})));
  for (float v : h.value().values()) CHECK(v == 0.0f);
  const auto d = model.decode(cf(Tensor<float>({1, 6})));
  for (float v : d.value().values()) CHECK(v == 0.0f);
  Rng data(3);
  const auto s = random_tensor<float>({2, 8, 8}, data, 0, 1);
  const auto p0 = model.predict_next(s, 0);
  for (ActionId a = 1; a < 3; ++a) CHECK(model.predict_next(s, a) == p0);
}

TEST_CASE("predict_next is the clamped composition of encode, transform, decode") {
  Rng rng(1), data(2);
  DynamicsModel<float> model(small_config(), rng);
  const auto s = random_tensor<float>({2, 8, 8}, data, 0, 1);
  const ActionId a[] = {2};
  NoGradGuard ng;
  const auto manual =
      model.decode(model.transform(model.encode(cf(s.reshaped({1, 2, 8, 8}))), cf(one_hot<float>(a, 3))));
  const auto pred = model.predict_next(s, 2);
  for (std::size_t i = 0; i < pred.size(); ++i) CHECK(pred[i] == std::clamp(manual.value()[i], 0.0f, 1.0f));
  CHECK(model.predict_next(s, 2) == pred);
  const auto all = model.predict_all(s);
  REQUIRE(all.size() == 3);
  for (std::size_t i = 0; i < pred.size(); ++i) CHECK(all[2][i] == doctest::Approx(pred[i]).epsilon(1e-5));
}

TEST_CASE("rollout_repeat feeds quantised predictions back") {
  Rng rng(4), data(5);
  DynamicsModel<float> model(small_config(), rng);
  const auto s = random_tensor<float>({2, 8, 8}, data, 0, 1);
  const auto one = model.rollout_repeat(s, 1, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == model.predict_next(s, 1));

  const auto two = model.rollout_repeat(s, 1, 2);
  Tensor<float> next = s;
  for (std::size_t i = 0; i < 64; ++i) next[i] = s[64 + i];
  for (std::size_t i = 0; i < 64; ++i) next[64 + i] = std::round(one[0][i] * 255.0f) / 255.0f;
  CHECK(two[1] == model.predict_next(next, 1));
  CHECK_THROWS_AS(model.rollout_repeat(s, 1, 0), ConfigurationError);
}

TEST_CASE("train_step lowers the loss on a fixed batch and refuses non-finite losses") {
  Rng rng(6), data(7);
  AdamOptions opt;
  opt.learning_rate = 1e-3;
  DynamicsModel<float> model(small_config(), rng, opt);
  const auto stacks = random_tensor<float>({4, 2, 8, 8}, data, 0, 1);
  const auto targets = random_tensor<float>({4, 1, 8, 8}, data, 0, 1);
  const ActionId acts[] = {0, 1, 2, 1};
  const double before = model.loss(stacks, acts, targets);
  for (int i = 0; i < 50; ++i) model.train_step(stacks, acts, targets, 10.0);
  CHECK(model.loss(stacks, acts, targets) < before);
  CHECK(model.optimizer().steps() == 50);

  auto bad = targets;
  bad[0] = std::numeric_limits<float>::infinity();
  const auto snapshot = param(model, "dyn/transform/w_a").value;
  CHECK_THROWS_AS(model.train_step(stacks, acts, bad, 10.0), NumericError);
  CHECK(param(model, "dyn/transform/w_a").value == snapshot);
}

TEST_CASE("dynamics gradients match finite differences in double precision") {
  Rng rng(8), data(9);
  auto cfg = small_config();
  DynamicsModel<double> model(cfg, rng);
  const auto stacks = random_tensor<double>({2, 2, 8, 8}, data, 0, 1);
  const auto targets = random_tensor<double>({2, 1, 8, 8}, data, 0, 1);
  const ActionId acts[] = {1, 2};
  auto ps = model.params();
  Rng pick(10);
  const auto r = testsupport::grad_check(
      ps, [&] { return ops::mse_loss(model.forward(stacks, acts), targets); }, 1e-4, 60, &pick);
  if (!r.kink) CHECK(r.rel_error < 1e-6);
}
