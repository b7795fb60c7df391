#include <doctest.h>

#include <cmath>
#include <limits>

#include "explorium/rng.hpp"
#include "explorium/layers.hpp"
#include "explorium/ops.hpp"
#include "gradcheck.hpp"

using namespace explorium;
using testsupport::random_tensor;

namespace {

Var<float> cf(Tensor<float> t) { return Var<float>::constant(std::move(t)); }

}  // namespace

TEST_CASE("conv2d shape arithmetic on the full-size first layer") {
  Tensor<float> x({1, 84, 84});
  Tensor<float> k({32, 1, 8, 8});
  const auto y = ops::conv2d(cf(x), cf(k), 4);
  CHECK(y.shape() == Shape{32, 20, 20});
}

TEST_CASE("conv2d of ones with a ones kernel sums the window") {
  const auto y = ops::conv2d(cf(Tensor<float>({1, 3, 3}, 1.0f)), cf(Tensor<float>({1, 1, 3, 3}, 1.0f)), 1);
  REQUIRE(y.shape() == Shape{1, 1, 1});
  CHECK(y.value()[0] == 9.0f);
}

TEST_CASE("conv2d of a zero input with zero bias is zero") {
  Rng rng(3);
  const auto y = ops::conv2d(cf(Tensor<float>({2, 9, 9})), cf(random_tensor<float>({4, 2, 3, 3}, rng)),
                             cf(Tensor<float>({4})), 2);
  for (float v : y.value().values()) CHECK(v == 0.0f);
}

TEST_CASE("conv2d rejects bad shapes and non-finite input") {
  CHECK_THROWS_AS(ops::conv2d(cf(Tensor<float>({1, 2, 2})), cf(Tensor<float>({1, 1, 3, 3})), 1), ConfigurationError);
  CHECK_THROWS_AS(ops::conv2d(cf(Tensor<float>({2, 5, 5})), cf(Tensor<float>({1, 1, 3, 3})), 1), ConfigurationError);
  CHECK_THROWS_AS(ops::conv2d(cf(Tensor<float>({1, 6, 6})), cf(Tensor<float>({1, 1, 3, 3})), 2), ConfigurationError);
  Tensor<float> bad({1, 3, 3});
  bad[4] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(ops::conv2d(cf(bad), cf(Tensor<float>({1, 1, 3, 3})), 1), NumericError);
}

TEST_CASE("deconv2d inverts the conv shape map") {
  Tensor<float> h({32, 20, 20});
  const auto y = ops::deconv2d(cf(h), cf(Tensor<float>({32, 1, 8, 8})), 4);
  CHECK(y.shape() == Shape{1, 84, 84});

  // Every configured encoder pair maps S -> S' -> S.
  Rng rng(1);
  for (const auto& arch : {"c16:4:2,c32:3:1,f256", "c32:8:4,c64:4:2,c64:3:1,f256"}) {
    const auto spec = parse_arch(arch);
    std::size_t c = 4, side = std::string(arch).starts_with("c16") ? 32 : 84;
    for (const auto& conv : spec.convs) {
      const Tensor<float> in({c, side, side});
      const auto out = ops::conv2d(cf(in), cf(Tensor<float>({conv.channels, c, conv.kernel, conv.kernel})), conv.stride);
      const auto back =
          ops::deconv2d(out, cf(Tensor<float>({conv.channels, c, conv.kernel, conv.kernel})), conv.stride);
      CHECK(back.shape() == in.shape());
      c = conv.channels;
      side = out.shape()[1];
    }
  }
}

TEST_CASE("deconv2d scatters a single value over the kernel window") {
  const auto y = ops::deconv2d(cf(Tensor<float>({1, 1, 1}, 2.5f)), cf(Tensor<float>({1, 1, 3, 3}, 1.0f)), 1);
  REQUIRE(y.shape() == Shape{1, 3, 3});
  for (float v : y.value().values()) CHECK(v == 2.5f);
  const auto z = ops::deconv2d(cf(Tensor<float>({2, 4, 4})), cf(Tensor<float>({2, 3, 2, 2}, 1.0f)), 2);
  for (float v : z.value().values()) CHECK(v == 0.0f);
}

TEST_CASE("linear layer worked examples") {
  Tensor<float> eye({3, 3});
  for (std::size_t i = 0; i < 3; ++i) eye(i, i) = 1.0f;
  const auto a = ops::linear(cf(Tensor<float>({3}, {1, 2, 3})), cf(eye), cf(Tensor<float>({3})));
  CHECK(a.value().storage() == std::vector<float>{1, 2, 3});

  const auto b = ops::linear(cf(Tensor<float>({2}, {7, -3})), cf(Tensor<float>({1, 2})), cf(Tensor<float>({1}, {5})));
  CHECK(b.value().storage() == std::vector<float>{5});

  const auto c = ops::linear(cf(Tensor<float>({2}, {3, 4})), cf(Tensor<float>({2, 2}, {1, 1, 2, 0})),
                             cf(Tensor<float>({2}, {0, 1})));
  CHECK(c.value().storage() == std::vector<float>{7, 7});

  CHECK_THROWS_AS(ops::linear(cf(Tensor<float>({3})), cf(Tensor<float>({2, 2}))), ConfigurationError);
}

TEST_CASE("relu and elementwise multiply") {
  CHECK(ops::relu(cf(Tensor<float>({3}, {-1, 0, 2}))).value().storage() == std::vector<float>{0, 0, 2});
  CHECK(ops::relu(cf(Tensor<float>({3}, {-1, -2, -0.5f}))).value().storage() == std::vector<float>{0, 0, 0});
  CHECK(ops::relu(cf(Tensor<float>({1}, {3.5f}))).value().storage() == std::vector<float>{3.5f});

  const Tensor<float> b({3}, {4, -2, 0.5f});
  CHECK(ops::mul(cf(Tensor<float>({3}, 1.0f)), cf(b)).value() == b);
  CHECK(ops::mul(cf(Tensor<float>({3})), cf(b)).value() == Tensor<float>({3}));
  CHECK(ops::mul(cf(Tensor<float>({2}, {2, 3})), cf(Tensor<float>({2}, {4, 5}))).value().storage() ==
        std::vector<float>{8, 15});
  CHECK_THROWS_AS(ops::mul(cf(Tensor<float>({2})), cf(Tensor<float>({3}))), ConfigurationError);
}

TEST_CASE("operations are bit-identical across repeated calls") {
  Rng a(42), b(42);
  const auto x1 = random_tensor<float>({2, 3, 11, 11}, a), x2 = random_tensor<float>({2, 3, 11, 11}, b);
  const auto k1 = random_tensor<float>({5, 3, 3, 3}, a), k2 = random_tensor<float>({5, 3, 3, 3}, b);
  const auto y1 = ops::relu(ops::conv2d(cf(x1), cf(k1), 2));
  const auto y2 = ops::relu(ops::conv2d(cf(x2), cf(k2), 2));
  CHECK(y1.value() == y2.value());
}

TEST_CASE("backward worked examples") {
  Parameter<float> w("w", Tensor<float>({2}, {-1, 2}));
  backward(ops::sum(ops::relu(Var<float>::parameter(w))));
  CHECK(w.grad.storage() == std::vector<float>{0, 1});

  Parameter<float> z("z", Tensor<float>({3}, {1, -2, 3}));
  backward(ops::sum(ops::mul(Var<float>::constant(Tensor<float>({3})), Var<float>::parameter(z))));
  CHECK(z.grad.storage() == std::vector<float>{0, 0, 0});

  // relu'(0) == 0
  Parameter<float> o("o", Tensor<float>({1}, {0}));
  backward(ops::sum(ops::relu(Var<float>::parameter(o))));
  CHECK(o.grad[0] == 0.0f);
}

TEST_CASE("backward requires a scalar and leaves unused parameters at zero") {
  Parameter<float> w("w", Tensor<float>({2}, {1, 2}));
  Parameter<float> unused("u", Tensor<float>({2}, {1, 2}));
  CHECK_THROWS_AS(backward(ops::relu(Var<float>::parameter(w))), ContractViolation);
  w.zero_grad();
  backward(ops::sum(Var<float>::parameter(w)));
  CHECK(unused.grad.storage() == std::vector<float>{0, 0});
  CHECK(w.grad.storage() == std::vector<float>{1, 1});
}

TEST_CASE("frozen parameters never receive gradients") {
  Parameter<float> w("w", Tensor<float>({2}, {1, 2}));
  backward(ops::sum(ops::mul(Var<float>::frozen(w), Var<float>::constant(Tensor<float>({2}, 1.0f)))));
  CHECK(w.grad.storage() == std::vector<float>{0, 0});
}

TEST_CASE("float gradients agree with finite differences at the 1e-3 level") {
  // Single precision run; the tight double-precision sweep lives in the acceptance suite.
  Rng rng(5);
  Parameter<float> k("k", random_tensor<float>({2, 1, 3, 3}, rng));
  const auto x = random_tensor<float>({1, 5, 5}, rng);
  auto f = [&] { return ops::sum(ops::conv2d(Var<float>::constant(x), Var<float>::parameter(k), 1)); };
  k.zero_grad();
  backward(f());
  NoGradGuard ng;
  for (std::size_t i = 0; i < k.value.size(); ++i) {
    const float saved = k.value[i];
    k.value[i] = saved + 1e-2f;
    const double up = f().value()[0];
    k.value[i] = saved - 1e-2f;
    const double down = f().value()[0];
    k.value[i] = saved;
    const double numeric = (up - down) / 2e-2;
    CHECK(std::abs(numeric - k.grad[i]) <= 1e-3 * std::max(1.0, std::abs(numeric)));
  }
}

TEST_CASE("double-precision layer gradient checks") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    Parameter<double> k("k", random_tensor<double>({3, 2, 3, 3}, rng));
    Parameter<double> b("b", random_tensor<double>({3}, rng));
    Parameter<double> d("d", random_tensor<double>({3, 2, 2, 2}, rng));
    const auto x = random_tensor<double>({2, 2, 7, 7}, rng);
    const auto target = random_tensor<double>({2, 2, 6, 6}, rng);
    std::vector<Parameter<double>*> ps{&k, &b, &d};
    const auto r = testsupport::grad_check(ps, [&] {
      auto h = ops::relu(ops::conv2d(Var<double>::constant(x), Var<double>::parameter(k), Var<double>::parameter(b), 2));
      return ops::mse_loss(ops::deconv2d(h, Var<double>::parameter(d), 2), target);
    });
    if (r.kink) continue;
    CHECK(r.rel_error < 1e-6);
  }
}
