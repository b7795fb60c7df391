#include "explorium/optim.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace explorium {

template <typename T>
void Adam<T>::step(std::span<Parameter<T>* const> params) {
  if (m_.empty()) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (auto* p : params) {
      m_.emplace_back(p->value.shape());
      v_.emplace_back(p->value.shape());
    }
  }
  if (m_.size() != params.size()) throw ContractViolation("Adam: parameter list changed between steps");

  ++t_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = options_.learning_rate;
  const double eps = options_.epsilon_hat;
  const double wd = options_.weight_decay;

  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter<T>& p = *params[i];
    if (p.value.shape() != m_[i].shape()) {
      throw ContractViolation("Adam: moment shape mismatch for " + p.name);
    }
    T* w = p.value.data();
    const T* g = p.grad.data();
    T* m = m_[i].data();
    T* v = v_[i].data();
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double grad = static_cast<double>(g[j]) + wd * static_cast<double>(w[j]);
      const double mj = b1 * static_cast<double>(m[j]) + (1.0 - b1) * grad;
      const double vj = b2 * static_cast<double>(v[j]) + (1.0 - b2) * grad * grad;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      const double m_hat = mj / c1;
      const double v_hat = vj / c2;
      w[j] = static_cast<T>(static_cast<double>(w[j]) - lr * m_hat / (std::sqrt(v_hat) + eps));
    }
  }
}

template <typename T>
std::vector<double> clip_grad_norm_per_layer(std::span<const ParamGroup<T>> groups, double max_norm) {
  // A group that was just clipped can read back a hair above max_norm after
  // rounding; the slack keeps clipping idempotent.
  const double threshold = max_norm * (1.0 + 16.0 * std::numeric_limits<T>::epsilon());
  std::vector<double> norms;
  norms.reserve(groups.size());
  for (const auto& group : groups) {
    double sq = 0.0;
    for (const auto* p : group) {
      for (T g : p->grad.values()) sq += static_cast<double>(g) * static_cast<double>(g);
    }
    const double norm = std::sqrt(sq);
    norms.push_back(norm);
    if (norm > threshold) {
      const T scale = static_cast<T>(max_norm / norm);
      for (auto* p : group) {
        for (auto& g : p->grad.values()) g *= scale;
      }
    }
  }
  return norms;
}

template <typename T>
void require_finite_grads(std::span<Parameter<T>* const> params) {
  for (const auto* p : params) {
    if (!p->grad.all_finite()) throw NumericError("non-finite gradient in " + p->name);
  }
}

template class Adam<float>;
template class Adam<double>;
template std::vector<double> clip_grad_norm_per_layer(std::span<const ParamGroup<float>>, double);
template std::vector<double> clip_grad_norm_per_layer(std::span<const ParamGroup<double>>, double);
template void require_finite_grads(std::span<Parameter<float>* const>);
template void require_finite_grads(std::span<Parameter<double>* const>);

}  // namespace explorium
