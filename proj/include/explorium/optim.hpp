#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "explorium/autograd.hpp"

namespace explorium {

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon_hat = 1e-8;
  double weight_decay = 0.0;
};

/// Bias-corrected Adam. Moments are allocated on the first step and must keep
/// matching the parameter list passed to every later step.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  void step(std::span<Parameter<T>* const> params);

  std::uint64_t steps() const noexcept { return t_; }
  const AdamOptions& options() const noexcept { return options_; }
  const std::vector<Tensor<T>>& first_moments() const noexcept { return m_; }
  const std::vector<Tensor<T>>& second_moments() const noexcept { return v_; }

 private:
  AdamOptions options_;
  std::uint64_t t_ = 0;
  std::vector<Tensor<T>> m_;
  std::vector<Tensor<T>> v_;
};

/// For each group whose joint gradient L2 norm exceeds max_norm, scales the
/// group's gradients by max_norm / norm. Returns the pre-clip norms.
template <typename T>
std::vector<double> clip_grad_norm_per_layer(std::span<const ParamGroup<T>> groups, double max_norm);

template <typename T>
void zero_grads(std::span<Parameter<T>* const> params) {
  for (auto* p : params) p->zero_grad();
}

/// Throws NumericError if any gradient is NaN/Inf.
template <typename T>
void require_finite_grads(std::span<Parameter<T>* const> params);

}  // namespace explorium
