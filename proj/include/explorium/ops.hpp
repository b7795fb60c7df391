#pragma once

#include <cstddef>

#include "explorium/autograd.hpp"
#include "explorium/tensor.hpp"

namespace explorium::ops {

// Image ops accept [C,H,W] or a batch [B,C,H,W]; the output keeps the input's
// rank. Vector ops accept [N] or a batch [B,N].

/// Valid (unpadded) convolution. Kernels are [C_out, C_in, K, K], bias [C_out].
/// Requires H >= K, W >= K and (H - K) % stride == 0 (same for W).
template <typename T>
Var<T> conv2d(const Var<T>& input, const Var<T>& kernels, const Var<T>& bias, std::size_t stride);
template <typename T>
Var<T> conv2d(const Var<T>& input, const Var<T>& kernels, std::size_t stride);

/// Transposed convolution with scatter-add semantics, the adjoint of conv2d.
/// Kernels are [C_in, C_out, K, K]; output extent is (H - 1) * stride + K.
template <typename T>
Var<T> deconv2d(const Var<T>& input, const Var<T>& kernels, const Var<T>& bias, std::size_t stride);
template <typename T>
Var<T> deconv2d(const Var<T>& input, const Var<T>& kernels, std::size_t stride);

/// out = weight * input + bias with weight [out, in].
template <typename T>
Var<T> linear(const Var<T>& input, const Var<T>& weight, const Var<T>& bias);
template <typename T>
Var<T> linear(const Var<T>& input, const Var<T>& weight);

/// max(x, 0); the derivative at exactly 0 is 0.
template <typename T>
Var<T> relu(const Var<T>& input);

/// Hadamard product of equally shaped tensors.
template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b);

template <typename T>
Var<T> reshape(const Var<T>& input, Shape shape);

/// Sum over all elements, shape [1].
template <typename T>
Var<T> sum(const Var<T>& input);

/// Mean over all elements, shape [1].
template <typename T>
Var<T> mean(const Var<T>& input);

/// Sum over the last axis: [B, N] -> [B].
template <typename T>
Var<T> sum_last(const Var<T>& input);

/// mean((prediction - target)^2) against a constant target.
template <typename T>
Var<T> mse_loss(const Var<T>& prediction, const Tensor<T>& target);

}  // namespace explorium::ops
