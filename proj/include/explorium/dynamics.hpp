#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "explorium/gridworld.hpp"
#include "explorium/layers.hpp"
#include "explorium/optim.hpp"

namespace explorium {

struct DynamicsConfig {
  std::size_t stack_m = 4;
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t n_actions = 5;
  ArchSpec encoder;         // convs followed by exactly one linear layer of width E
  std::size_t factor_dim = 0;  // F; 0 means F = E
};

/// One-hot action batch, [B, N].
template <typename T>
Tensor<T> one_hot(std::span<const ActionId> actions, std::size_t n_actions);

/// Factored multiplicative action transform
///   h_dec = W_dec ((W_enc h_enc) * (W_a a)) + b
/// with W_enc [F,E], W_a [F,N], W_dec [E,F], b [E].
template <typename T>
struct FactoredTransform {
  Parameter<T> w_enc;
  Parameter<T> w_a;
  Parameter<T> w_dec;
  Parameter<T> b;

  FactoredTransform() = default;
  FactoredTransform(const std::string& prefix, std::size_t embed, std::size_t factor, std::size_t n_actions,
                    Rng& rng);

  Var<T> forward(const Var<T>& h_enc, const Var<T>& action) {
    return apply(h_enc, action, Var<T>::parameter(w_enc), Var<T>::parameter(w_a), Var<T>::parameter(w_dec),
                 Var<T>::parameter(b));
  }
  Var<T> forward(const Var<T>& h_enc, const Var<T>& action) const {
    return apply(h_enc, action, Var<T>::frozen(w_enc), Var<T>::frozen(w_a), Var<T>::frozen(w_dec),
                 Var<T>::frozen(b));
  }
  ParamGroup<T> params() { return {&w_enc, &w_a, &w_dec, &b}; }

  static Var<T> apply(const Var<T>& h_enc, const Var<T>& action, const Var<T>& w_enc, const Var<T>& w_a,
                      const Var<T>& w_dec, const Var<T>& b) {
    return ops::linear(ops::mul(ops::linear(h_enc, w_enc), ops::linear(action, w_a)), w_dec, b);
  }
};

/// Action-conditional next-frame predictor: conv encoder, factored action
/// transform, and a decoder that mirrors the encoder with transposed convs.
template <typename T>
class DynamicsModel {
 public:
  DynamicsModel(const DynamicsConfig& config, Rng& rng, AdamOptions adam = {});

  const DynamicsConfig& config() const { return config_; }
  std::size_t embed_dim() const { return embed_; }
  std::size_t factor_dim() const { return factor_; }

  /// [B, m, H, W] -> [B, E]
  Var<T> encode(const Var<T>& stacks) { return encode_impl(*this, stacks); }
  Var<T> encode(const Var<T>& stacks) const { return encode_impl(*this, stacks); }

  /// [B, E] x [B, N] -> [B, E]
  Var<T> transform(const Var<T>& h_enc, const Var<T>& actions) { return transform_.forward(h_enc, actions); }
  Var<T> transform(const Var<T>& h_enc, const Var<T>& actions) const { return transform_.forward(h_enc, actions); }

  /// [B, E] -> [B, 1, H, W], unclamped model-space pixels.
  Var<T> decode(const Var<T>& h_dec) { return decode_impl(*this, h_dec); }
  Var<T> decode(const Var<T>& h_dec) const { return decode_impl(*this, h_dec); }

  /// Full graph for a batch of stacks and actions.
  Var<T> forward(const Tensor<T>& stacks, std::span<const ActionId> actions);

  /// decode(transform(encode(stack), onehot(a))) clamped to [0, 1]; [1, H, W].
  Tensor<T> predict_next(const Tensor<T>& stack, ActionId action) const;

  /// predict_next for every action, sharing one encoder pass.
  std::vector<Tensor<T>> predict_all(const Tensor<T>& stack) const;

  /// Applies predict_next k times, feeding each 8-bit-quantised prediction
  /// back as the newest frame. Returns every intermediate prediction; the last
  /// element is the k-step result.
  std::vector<Tensor<T>> rollout_repeat(const Tensor<T>& stack, ActionId action, std::size_t k) const;

  /// Per-pixel MSE, no update.
  double loss(const Tensor<T>& stacks, std::span<const ActionId> actions, const Tensor<T>& targets) const;

  /// One Adam step on the per-pixel MSE with per-layer clipping. A non-finite
  /// loss throws NumericError before any parameter changes.
  double train_step(const Tensor<T>& stacks, std::span<const ActionId> actions, const Tensor<T>& targets,
                    double clip_norm);

  std::vector<ParamGroup<T>> param_groups();
  ParamGroup<T> params() { return flatten(param_groups()); }
  std::vector<const Parameter<T>*> params() const;
  void zero_init();

  Adam<T>& optimizer() { return adam_; }

 private:
  template <class Self>
  static Var<T> encode_impl(Self& self, const Var<T>& stacks);
  template <class Self>
  static Var<T> decode_impl(Self& self, const Var<T>& h);

  DynamicsConfig config_;
  std::size_t embed_ = 0;
  std::size_t factor_ = 0;
  std::size_t bottleneck_c_ = 0;
  std::size_t bottleneck_h_ = 0;
  std::size_t bottleneck_w_ = 0;

  std::vector<Conv2d<T>> enc_convs_;
  Linear<T> enc_fc_;
  FactoredTransform<T> transform_;
  Linear<T> dec_fc_;
  std::vector<Deconv2d<T>> dec_deconvs_;
  Adam<T> adam_;
};

}  // namespace explorium
