#include "explorium/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace explorium {

template <typename T>
Tensor<T> one_hot(std::span<const ActionId> actions, std::size_t n_actions) {
  if (actions.empty()) throw ConfigurationError("one_hot: empty action batch");
  Tensor<T> out({actions.size(), n_actions});
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] >= n_actions) throw ConfigurationError("invalid action id " + std::to_string(actions[i]));
    out(i, actions[i]) = T{1};
  }
  return out;
}

template <typename T>
FactoredTransform<T>::FactoredTransform(const std::string& prefix, std::size_t embed, std::size_t factor,
                                        std::size_t n_actions, Rng& rng)
    : w_enc(prefix + "/w_enc", Tensor<T>({factor, embed})),
      w_a(prefix + "/w_a", Tensor<T>({factor, n_actions})),
      w_dec(prefix + "/w_dec", Tensor<T>({embed, factor})),
      b(prefix + "/b", Tensor<T>({embed})) {
  kaiming_uniform(w_enc.value, embed, rng);
  kaiming_uniform(w_a.value, n_actions, rng);
  kaiming_uniform(w_dec.value, factor, rng);
}

template <typename T>
DynamicsModel<T>::DynamicsModel(const DynamicsConfig& config, Rng& rng, AdamOptions adam)
    : config_(config), adam_(adam) {
  if (config_.encoder.hidden.size() != 1) {
    throw ConfigurationError("dynamics encoder needs exactly one linear layer (the embedding), got '" +
                             to_string(config_.encoder) + "'");
  }
  embed_ = config_.encoder.hidden.front();
  factor_ = config_.factor_dim ? config_.factor_dim : embed_;

  std::size_t channels = config_.stack_m;
  std::size_t h = config_.height;
  std::size_t w = config_.width;
  const auto& convs = config_.encoder.convs;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    enc_convs_.emplace_back("dyn/encoder/" + std::to_string(i), channels, convs[i], rng);
    h = conv_output_extent(h, convs[i].kernel, convs[i].stride);
    w = conv_output_extent(w, convs[i].kernel, convs[i].stride);
    channels = convs[i].channels;
  }
  enc_fc_ = Linear<T>("dyn/encoder/" + std::to_string(convs.size()), channels * h * w, embed_, rng);
  transform_ = FactoredTransform<T>("dyn/transform", embed_, factor_, config_.n_actions, rng);

  if (convs.empty()) {
    bottleneck_c_ = 1;
    bottleneck_h_ = config_.height;
    bottleneck_w_ = config_.width;
  } else {
    bottleneck_c_ = channels;
    bottleneck_h_ = h;
    bottleneck_w_ = w;
  }
  dec_fc_ = Linear<T>("dyn/decoder/0", embed_, bottleneck_c_ * bottleneck_h_ * bottleneck_w_, rng);
  for (std::size_t i = 0; i < convs.size(); ++i) {
    const std::size_t j = convs.size() - 1 - i;
    const std::size_t out_c = j == 0 ? 1 : convs[j - 1].channels;
    dec_deconvs_.emplace_back("dyn/decoder/" + std::to_string(i + 1), convs[j].channels, out_c, convs[j].kernel,
                              convs[j].stride, rng);
  }
}

template <typename T>
template <class Self>
Var<T> DynamicsModel<T>::encode_impl(Self& self, const Var<T>& stacks) {
  const Shape& s = stacks.shape();
  const auto& c = self.config_;
  if (s.size() != 4 || s[1] != c.stack_m || s[2] != c.height || s[3] != c.width) {
    throw ConfigurationError("dynamics encoder expects [B," + std::to_string(c.stack_m) + "," +
                             std::to_string(c.height) + "," + std::to_string(c.width) + "], got " + shape_string(s));
  }
  const std::size_t batch = s[0];
  Var<T> h = stacks;
  for (auto& conv : self.enc_convs_) h = ops::relu(conv.forward(h));
  h = ops::reshape(h, Shape{batch, h.value().size() / batch});
  return ops::relu(self.enc_fc_.forward(h));
}

template <typename T>
template <class Self>
Var<T> DynamicsModel<T>::decode_impl(Self& self, const Var<T>& h_dec) {
  const Shape& s = h_dec.shape();
  if (s.size() != 2 || s[1] != self.embed_) {
    throw ConfigurationError("dynamics decoder expects [B," + std::to_string(self.embed_) + "], got " +
                             shape_string(s));
  }
  const std::size_t batch = s[0];
  Var<T> x = self.dec_fc_.forward(h_dec);
  if (!self.dec_deconvs_.empty()) x = ops::relu(x);
  x = ops::reshape(x, Shape{batch, self.bottleneck_c_, self.bottleneck_h_, self.bottleneck_w_});
  for (std::size_t i = 0; i < self.dec_deconvs_.size(); ++i) {
    x = self.dec_deconvs_[i].forward(x);
    if (i + 1 < self.dec_deconvs_.size()) x = ops::relu(x);
  }
  return x;
}

template <typename T>
Var<T> DynamicsModel<T>::forward(const Tensor<T>& stacks, std::span<const ActionId> actions) {
  auto h = encode(Var<T>::constant(stacks));
  auto a = Var<T>::constant(one_hot<T>(actions, config_.n_actions));
  return decode(transform(h, a));
}

namespace {

template <typename T>
Tensor<T> clamp_unit(Tensor<T> t) {
  for (auto& v : t.values()) v = std::clamp(v, T{0}, T{1});
  return t;
}

template <typename T>
Tensor<T> as_batch(const Tensor<T>& stack) {
  if (stack.rank() != 3) throw ConfigurationError("expected a single [m,H,W] stack, got " + shape_string(stack.shape()));
  return stack.reshaped({1, stack.dim(0), stack.dim(1), stack.dim(2)});
}

}  // namespace

template <typename T>
Tensor<T> DynamicsModel<T>::predict_next(const Tensor<T>& stack, ActionId action) const {
  NoGradGuard no_grad;
  const ActionId a[] = {action};
  auto h = encode(Var<T>::constant(as_batch(stack)));
  auto out = decode(transform(h, Var<T>::constant(one_hot<T>(a, config_.n_actions))));
  return clamp_unit(out.value().reshaped({1, config_.height, config_.width}));
}

template <typename T>
std::vector<Tensor<T>> DynamicsModel<T>::predict_all(const Tensor<T>& stack) const {
  NoGradGuard no_grad;
  const std::size_t n = config_.n_actions;
  auto h = encode(Var<T>::constant(as_batch(stack)));
  // Repeat the single embedding once per action.
  Tensor<T> hs({n, embed_});
  for (std::size_t a = 0; a < n; ++a) {
    std::copy(h.value().data(), h.value().data() + embed_, hs.data() + a * embed_);
  }
  std::vector<ActionId> actions(n);
  for (std::size_t a = 0; a < n; ++a) actions[a] = a;
  auto out = decode(transform(Var<T>::constant(std::move(hs)), Var<T>::constant(one_hot<T>(actions, n))));
  const std::size_t plane = config_.height * config_.width;
  std::vector<Tensor<T>> frames;
  frames.reserve(n);
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<T> px(out.value().data() + a * plane, out.value().data() + (a + 1) * plane);
    frames.push_back(clamp_unit(Tensor<T>({1, config_.height, config_.width}, std::move(px))));
  }
  return frames;
}

template <typename T>
std::vector<Tensor<T>> DynamicsModel<T>::rollout_repeat(const Tensor<T>& stack, ActionId action,
                                                        std::size_t k) const {
  if (k == 0) throw ConfigurationError("rollout_repeat: k must be >= 1");
  const std::size_t plane = config_.height * config_.width;
  Tensor<T> current = stack;
  std::vector<Tensor<T>> out;
  out.reserve(k);
  for (std::size_t step = 0; step < k; ++step) {
    out.push_back(predict_next(current, action));
    if (step + 1 == k) break;
    std::copy(current.data() + plane, current.data() + current.size(), current.data());
    T* newest = current.data() + current.size() - plane;
    for (std::size_t i = 0; i < plane; ++i) newest[i] = std::round(out.back()[i] * T{255}) / T{255};
  }
  return out;
}

template <typename T>
double DynamicsModel<T>::loss(const Tensor<T>& stacks, std::span<const ActionId> actions,
                              const Tensor<T>& targets) const {
  NoGradGuard no_grad;
  auto h = encode(Var<T>::constant(stacks));
  auto pred = decode(transform(h, Var<T>::constant(one_hot<T>(actions, config_.n_actions))));
  return static_cast<double>(ops::mse_loss(pred, targets).value()[0]);
}

template <typename T>
double DynamicsModel<T>::train_step(const Tensor<T>& stacks, std::span<const ActionId> actions,
                                    const Tensor<T>& targets, double clip_norm) {
  auto groups = param_groups();
  auto all = flatten(groups);
  zero_grads<T>(all);
  auto loss = ops::mse_loss(forward(stacks, actions), targets);
  const double value = static_cast<double>(loss.value()[0]);
  if (!std::isfinite(value)) throw NumericError("dynamics loss is not finite");
  backward(loss);
  require_finite_grads<T>(all);
  clip_grad_norm_per_layer<T>(groups, clip_norm);
  adam_.step(all);
  return value;
}

template <typename T>
std::vector<ParamGroup<T>> DynamicsModel<T>::param_groups() {
  std::vector<ParamGroup<T>> groups;
  for (auto& c : enc_convs_) groups.push_back(c.params());
  groups.push_back(enc_fc_.params());
  groups.push_back(transform_.params());
  groups.push_back(dec_fc_.params());
  for (auto& d : dec_deconvs_) groups.push_back(d.params());
  return groups;
}

template <typename T>
std::vector<const Parameter<T>*> DynamicsModel<T>::params() const {
  auto groups = const_cast<DynamicsModel*>(this)->param_groups();
  std::vector<const Parameter<T>*> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

template <typename T>
void DynamicsModel<T>::zero_init() {
  for (auto* p : params()) p->value.fill(T{0});
}

template Tensor<float> one_hot(std::span<const ActionId>, std::size_t);
template Tensor<double> one_hot(std::span<const ActionId>, std::size_t);
template struct FactoredTransform<float>;
template struct FactoredTransform<double>;
template class DynamicsModel<float>;
template class DynamicsModel<double>;

}  // namespace explorium
