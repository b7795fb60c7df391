#include "explorium/qnetwork.hpp"

namespace explorium {

template <typename T>
QNetwork<T>::QNetwork(const QNetworkConfig& config, const std::string& prefix, Rng& rng) : config_(config) {
  if (config_.n_actions == 0) throw ConfigurationError("Q-network needs at least one action");
  std::size_t channels = config_.stack_m;
  std::size_t h = config_.height;
  std::size_t w = config_.width;
  for (std::size_t i = 0; i < config_.arch.convs.size(); ++i) {
    const auto& spec = config_.arch.convs[i];
    convs_.emplace_back(prefix + "/conv/" + std::to_string(i), channels, spec, rng);
    h = conv_output_extent(h, spec.kernel, spec.stride);
    w = conv_output_extent(w, spec.kernel, spec.stride);
    channels = spec.channels;
  }
  std::size_t features = channels * h * w;
  for (std::size_t i = 0; i < config_.arch.hidden.size(); ++i) {
    hidden_.emplace_back(prefix + "/fc/" + std::to_string(i), features, config_.arch.hidden[i], rng);
    features = config_.arch.hidden[i];
  }
  head_ = Linear<T>(prefix + "/head", features, config_.n_actions, rng);
}

template <typename T>
template <class Self>
Var<T> QNetwork<T>::run(Self& self, const Var<T>& x) {
  const Shape& s = x.shape();
  const auto& c = self.config_;
  if (s.size() != 4 || s[1] != c.stack_m || s[2] != c.height || s[3] != c.width) {
    throw ConfigurationError("Q-network expects [B," + std::to_string(c.stack_m) + "," + std::to_string(c.height) +
                             "," + std::to_string(c.width) + "], got " + shape_string(s));
  }
  const std::size_t batch = s[0];
  Var<T> h = x;
  for (auto& conv : self.convs_) h = ops::relu(conv.forward(h));
  h = ops::reshape(h, Shape{batch, h.value().size() / batch});
  for (auto& fc : self.hidden_) h = ops::relu(fc.forward(h));
  return self.head_.forward(h);
}

template <typename T>
std::vector<ParamGroup<T>> QNetwork<T>::param_groups() {
  std::vector<ParamGroup<T>> groups;
  for (auto& c : convs_) groups.push_back(c.params());
  for (auto& f : hidden_) groups.push_back(f.params());
  groups.push_back(head_.params());
  return groups;
}

template <typename T>
std::vector<const Parameter<T>*> QNetwork<T>::params() const {
  auto groups = const_cast<QNetwork*>(this)->param_groups();
  std::vector<const Parameter<T>*> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

template <typename T>
void QNetwork<T>::copy_weights_from(const QNetwork& other) {
  auto mine = params();
  auto theirs = other.params();
  if (mine.size() != theirs.size()) throw ConfigurationError("copy_weights_from: architecture mismatch");
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i]->value.shape() != theirs[i]->value.shape()) {
      throw ConfigurationError("copy_weights_from: shape mismatch at " + mine[i]->name);
    }
    mine[i]->value = theirs[i]->value;
  }
}

template <typename T>
void QNetwork<T>::zero_init() {
  for (auto* p : params()) p->value.fill(T{0});
}

template class QNetwork<float>;
template class QNetwork<double>;

}  // namespace explorium
