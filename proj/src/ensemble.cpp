#include "explorium/ensemble.hpp"

#include <cmath>
#include <map>
#include <utility>

namespace explorium {
namespace {

QMatrix evaluate(const std::vector<QNetwork<float>>& nets, const Tensor<float>& stack) {
  NoGradGuard no_grad;
  if (stack.rank() != 3) throw ConfigurationError("q_values expects a single [m,H,W] stack");
  auto x = Var<float>::constant(stack.reshaped({1, stack.dim(0), stack.dim(1), stack.dim(2)}));
  const std::size_t n = nets.front().config().n_actions;
  QMatrix q({nets.size(), n});
  for (std::size_t k = 0; k < nets.size(); ++k) {
    const auto out = nets[k].forward(x);
    for (std::size_t a = 0; a < n; ++a) q(k, a) = static_cast<double>(out.value()[a]);
  }
  return q;
}

void append_params(std::vector<NamedTensor>& out, const QNetwork<float>& net, const std::string& prefix) {
  for (const auto* p : net.params()) out.push_back({prefix + p->name, p->value});
}

}  // namespace

QEnsemble::QEnsemble(const QNetworkConfig& config, std::size_t members, std::uint64_t init_seed, AdamOptions adam)
    : config_(config) {
  if (members == 0) throw ConfigurationError("ensemble needs at least one member");
  Rng rng(init_seed);
  online_.reserve(members);
  target_.reserve(members);
  for (std::size_t k = 0; k < members; ++k) {
    online_.emplace_back(config_, std::to_string(k), rng);
    target_.push_back(online_.back());
    adam_.emplace_back(adam);
  }
}

QMatrix QEnsemble::q_values(const FrameStack& stack) const { return evaluate(online_, stack.to_tensor()); }

QMatrix QEnsemble::q_values(const Tensor<float>& stack) const { return evaluate(online_, stack); }

QMatrix QEnsemble::target_q_values(const Tensor<float>& stack) const { return evaluate(target_, stack); }

std::optional<std::vector<double>> QEnsemble::ddqn_train_step(const ReplayMemory& replay,
                                                              const TrainingConfig& config, Rng& rng) {
  if (config.batch_size == 0) throw ConfigurationError("batch size must be positive");
  if (replay.size() < config.batch_size) return std::nullopt;

  std::vector<double> losses(size());
  std::vector<const Transition*> batch(config.batch_size);
  auto draw = [&] {
    const auto idx = replay.sample_indices(config.batch_size, rng);
    for (std::size_t b = 0; b < idx.size(); ++b) batch[b] = &replay.at(idx[b]);
  };
  if (!config.bootstrap) draw();
  for (std::size_t k = 0; k < size(); ++k) {
    if (config.bootstrap) draw();
    losses[k] = train_member(k, batch, config);
  }
  return losses;
}

double QEnsemble::train_member(std::size_t k, const std::vector<const Transition*>& batch,
                               const TrainingConfig& config) {
  const std::size_t B = batch.size();
  const std::size_t N = config_.n_actions;
  std::vector<const FrameStack*> states(B);
  std::vector<const FrameStack*> next_states(B);
  std::vector<ActionId> actions(B);
  for (std::size_t b = 0; b < B; ++b) {
    states[b] = &batch[b]->state;
    next_states[b] = &batch[b]->next_state;
    actions[b] = batch[b]->action;
  }

  Tensor<float> targets({B});
  {
    NoGradGuard no_grad;
    auto next = Var<float>::constant(stack_batch(next_states));
    const auto online_next = std::as_const(online_[k]).forward(next);
    const auto target_next = std::as_const(target_[k]).forward(next);
    std::vector<double> on(N);
    std::vector<double> tg(N);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t a = 0; a < N; ++a) {
        on[a] = online_next.value()[b * N + a];
        tg[a] = target_next.value()[b * N + a];
      }
      targets[b] = static_cast<float>(
          double_q_target(batch[b]->reward, batch[b]->done, config.gamma, on, tg));
    }
  }

  auto& net = online_[k];
  auto groups = net.param_groups();
  auto params = flatten(groups);
  zero_grads<float>(params);
  Tensor<float> mask({B, N});
  for (std::size_t b = 0; b < B; ++b) mask(b, actions[b]) = 1.0f;
  auto q = net.forward(Var<float>::constant(stack_batch(states)));
  auto chosen = ops::sum_last(ops::mul(q, Var<float>::constant(std::move(mask))));
  auto loss = ops::mse_loss(chosen, targets);
  const double value = loss.value()[0];
  if (!std::isfinite(value)) throw NumericError("Q loss is not finite for member " + std::to_string(k));
  backward(loss);
  require_finite_grads<float>(params);
  clip_grad_norm_per_layer<float>(groups, config.clip_norm);
  adam_[k].step(params);
  return value;
}

void QEnsemble::sync_targets() {
  for (std::size_t k = 0; k < size(); ++k) target_[k].copy_weights_from(online_[k]);
}

std::vector<NamedTensor> QEnsemble::export_params() const {
  std::vector<NamedTensor> out;
  for (std::size_t k = 0; k < size(); ++k) append_params(out, online_[k], "q/online/");
  for (std::size_t k = 0; k < size(); ++k) append_params(out, target_[k], "q/target/");
  return out;
}

void QEnsemble::import_params(const std::vector<NamedTensor>& records) {
  std::map<std::string, const Tensor<float>*> by_name;
  for (const auto& r : records) by_name[r.name] = &r.tensor;
  auto load = [&](QNetwork<float>& net, const std::string& prefix) {
    for (auto* p : net.params()) {
      const auto it = by_name.find(prefix + p->name);
      if (it == by_name.end()) throw FormatError("checkpoint is missing record " + prefix + p->name);
      if (it->second->shape() != p->value.shape()) {
        throw FormatError("checkpoint record " + it->first + " has shape " + shape_string(it->second->shape()) +
                          ", expected " + shape_string(p->value.shape()));
      }
      p->value = *it->second;
    }
  };
  for (std::size_t k = 0; k < size(); ++k) load(online_[k], "q/online/");
  for (std::size_t k = 0; k < size(); ++k) load(target_[k], "q/target/");
}

}  // namespace explorium
