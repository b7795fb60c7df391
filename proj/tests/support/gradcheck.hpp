#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "explorium/autograd.hpp"
#include "explorium/rng.hpp"

namespace testsupport {

using explorium::Parameter;
using explorium::Var;

struct GradCheck {
  double rel_error = 0.0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||)
  bool kink = false;       // a ReLU boundary lies within the probe interval
  std::size_t coords = 0;
};

/// Compares reverse-mode gradients with central differences. `loss` rebuilds
/// the graph from the current parameter values. When `max_coords` is nonzero
/// only that many randomly chosen coordinates are probed.
inline GradCheck grad_check(std::span<Parameter<double>* const> params, const std::function<Var<double>()>& loss,
                            double h = 1e-4, std::size_t max_coords = 0, explorium::Rng* rng = nullptr) {
  for (auto* p : params) p->zero_grad();
  explorium::backward(loss());

  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (std::size_t i = 0; i < params[k]->value.size(); ++i) coords.emplace_back(k, i);
  }
  if (max_coords != 0 && coords.size() > max_coords) {
    for (std::size_t i = 0; i < max_coords; ++i) {
      const auto j = i + static_cast<std::size_t>(rng->below(coords.size() - i));
      std::swap(coords[i], coords[j]);
    }
    coords.resize(max_coords);
  }

  explorium::NoGradGuard no_grad;
  auto central = [&](double& x, double step) {
    const double saved = x;
    x = saved + step;
    const double up = loss().value()[0];
    x = saved - step;
    const double down = loss().value()[0];
    x = saved;
    return (up - down) / (2.0 * step);
  };

  GradCheck out;
  out.coords = coords.size();
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  for (auto [k, i] : coords) {
    double& x = params[k]->value[i];
    const double numeric = central(x, h);
    const double finer = central(x, h / 3.0);
    if (std::abs(numeric - finer) > 1e-7 * std::max(1.0, std::abs(numeric))) out.kink = true;
    const double analytic = params[k]->grad[i];
    diff2 += (analytic - numeric) * (analytic - numeric);
    a2 += analytic * analytic;
    n2 += numeric * numeric;
  }
  const double scale = std::sqrt(std::max(a2, n2));
  out.rel_error = scale < 1e-300 ? std::sqrt(diff2) : std::sqrt(diff2) / scale;
  return out;
}

template <typename T>
explorium::Tensor<T> random_tensor(explorium::Shape shape, explorium::Rng& rng, double lo = -1.0, double hi = 1.0) {
  explorium::Tensor<T> t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

}  // namespace testsupport
