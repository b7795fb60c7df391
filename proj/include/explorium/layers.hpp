#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "explorium/autograd.hpp"
#include "explorium/ops.hpp"
#include "explorium/rng.hpp"

namespace explorium {

/// One convolution of an architecture string: `c<channels>:<kernel>:<stride>`.
struct ConvSpec {
  std::size_t channels = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  bool operator==(const ConvSpec&) const = default;
};

/// Layer stack description, e.g. "c32:8:4,c64:4:2,c64:3:1,f256".
/// Convolutions must precede fully connected layers.
struct ArchSpec {
  std::vector<ConvSpec> convs;
  std::vector<std::size_t> hidden;
  bool operator==(const ArchSpec&) const = default;
};

/// Accepts the aliases "dqn" (the standard DQN stack) and "toy".
ArchSpec parse_arch(const std::string& text);
std::string to_string(const ArchSpec& arch);

/// Output extent of a valid convolution; throws ConfigurationError when the
/// stride does not tile the input.
std::size_t conv_output_extent(std::size_t input, std::size_t kernel, std::size_t stride);

/// Kaiming-uniform fan-in initialisation, bound sqrt(6 / fan_in).
template <typename T>
void kaiming_uniform(Tensor<T>& t, std::size_t fan_in, Rng& rng);

template <typename T>
struct Conv2d {
  Parameter<T> weight;  // [C_out, C_in, K, K]
  Parameter<T> bias;    // [C_out]
  std::size_t stride = 1;

  Conv2d() = default;
  Conv2d(const std::string& prefix, std::size_t in_channels, const ConvSpec& spec, Rng& rng);

  Var<T> forward(const Var<T>& x) {
    return ops::conv2d(x, Var<T>::parameter(weight), Var<T>::parameter(bias), stride);
  }
  Var<T> forward(const Var<T>& x) const {
    return ops::conv2d(x, Var<T>::frozen(weight), Var<T>::frozen(bias), stride);
  }
  ParamGroup<T> params() { return {&weight, &bias}; }
};

template <typename T>
struct Deconv2d {
  Parameter<T> weight;  // [C_in, C_out, K, K]
  Parameter<T> bias;    // [C_out]
  std::size_t stride = 1;

  Deconv2d() = default;
  Deconv2d(const std::string& prefix, std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
           std::size_t stride, Rng& rng);

  Var<T> forward(const Var<T>& x) {
    return ops::deconv2d(x, Var<T>::parameter(weight), Var<T>::parameter(bias), stride);
  }
  Var<T> forward(const Var<T>& x) const {
    return ops::deconv2d(x, Var<T>::frozen(weight), Var<T>::frozen(bias), stride);
  }
  ParamGroup<T> params() { return {&weight, &bias}; }
};

template <typename T>
struct Linear {
  Parameter<T> weight;  // [out, in]
  Parameter<T> bias;    // [out]

  Linear() = default;
  Linear(const std::string& prefix, std::size_t in, std::size_t out, Rng& rng);

  Var<T> forward(const Var<T>& x) { return ops::linear(x, Var<T>::parameter(weight), Var<T>::parameter(bias)); }
  Var<T> forward(const Var<T>& x) const {
    return ops::linear(x, Var<T>::frozen(weight), Var<T>::frozen(bias));
  }
  ParamGroup<T> params() { return {&weight, &bias}; }
};

/// Every parameter of every group, in order.
template <typename T>
ParamGroup<T> flatten(const std::vector<ParamGroup<T>>& groups) {
  ParamGroup<T> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

}  // namespace explorium
