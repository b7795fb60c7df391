#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "explorium/layers.hpp"

namespace explorium {

struct QNetworkConfig {
  std::size_t stack_m = 4;
  std::size_t height = 32;
  std::size_t width = 32;
  ArchSpec arch;  // convs, then hidden linear layers; the N-way head is implicit
  std::size_t n_actions = 5;
};

/// Conv stack -> hidden linear layers -> linear head, ReLU after every layer
/// but the head.
template <typename T>
class QNetwork {
 public:
  QNetwork(const QNetworkConfig& config, const std::string& prefix, Rng& rng);

  /// [B, m, H, W] -> [B, N].
  Var<T> forward(const Var<T>& x) { return run(*this, x); }
  Var<T> forward(const Var<T>& x) const { return run(*this, x); }

  std::vector<ParamGroup<T>> param_groups();
  ParamGroup<T> params() { return flatten(param_groups()); }
  std::vector<const Parameter<T>*> params() const;

  const QNetworkConfig& config() const { return config_; }

  /// Copies parameter values position by position (names may differ).
  void copy_weights_from(const QNetwork& other);

  void zero_init();

 private:
  template <class Self>
  static Var<T> run(Self& self, const Var<T>& x);

  QNetworkConfig config_;
  std::vector<Conv2d<T>> convs_;
  std::vector<Linear<T>> hidden_;
  Linear<T> head_;
};

}  // namespace explorium
