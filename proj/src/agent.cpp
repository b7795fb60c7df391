#include "explorium/agent.hpp"

#include <map>

namespace explorium {

bool uses_dynamics(Strategy s) { return s == Strategy::kMethod1 || s == Strategy::kMethod2; }

namespace {

std::unique_ptr<DynamicsModel<float>> make_dynamics(const RunConfig& config) {
  if (!uses_dynamics(config.explore.strategy)) return nullptr;
  Rng rng(config.seed + seed_stream::kDynamicsInit);
  AdamOptions adam;
  adam.learning_rate = config.dyn.lr;
  return std::make_unique<DynamicsModel<float>>(config.dynamics(), rng, adam);
}

}  // namespace

std::vector<NamedTensor> export_dynamics(const DynamicsModel<float>& model) {
  std::vector<NamedTensor> out;
  for (const auto* p : model.params()) out.push_back({p->name, p->value});
  return out;
}

void import_dynamics(DynamicsModel<float>& model, const std::vector<NamedTensor>& records) {
  std::map<std::string, const Tensor<float>*> by_name;
  for (const auto& r : records) by_name[r.name] = &r.tensor;
  for (auto* p : model.params()) {
    const auto it = by_name.find(p->name);
    if (it == by_name.end()) throw FormatError("checkpoint is missing record " + p->name);
    if (it->second->shape() != p->value.shape()) {
      throw FormatError("checkpoint record " + p->name + " has shape " + shape_string(it->second->shape()) +
                        ", expected " + shape_string(p->value.shape()));
    }
    p->value = *it->second;
  }
}

DynamicsBatch make_dynamics_batch(std::span<const Transition* const> transitions) {
  if (transitions.empty()) throw ConfigurationError("empty dynamics batch");
  std::vector<const FrameStack*> stacks;
  DynamicsBatch batch;
  const auto& first = transitions.front()->next_state;
  batch.targets = Tensor<float>({transitions.size(), 1, first.height(), first.width()});
  const std::size_t plane = first.height() * first.width();
  for (std::size_t b = 0; b < transitions.size(); ++b) {
    const auto* t = transitions[b];
    stacks.push_back(&t->state);
    batch.actions.push_back(t->action);
    const auto& next = *t->next_state.newest();
    for (std::size_t i = 0; i < plane; ++i) batch.targets[b * plane + i] = next.pixels[i] / 255.0f;
  }
  batch.stacks = stack_batch(stacks);
  return batch;
}

Agent::Agent(const RunConfig& config)
    : config_(config),
      training_(config.training()),
      env_(config.make_world(), config.pre),
      ensemble_(config.q_network(), config.q.K, config.seed + seed_stream::kInit, config.q_adam()),
      dynamics_(make_dynamics(config)),
      replay_(config.replay.capacity),
      memory_(config.mem.d, config.mem.delta, config.mem.sigma),
      replay_rng_(config.seed + seed_stream::kReplay),
      policy_rng_(config.seed + seed_stream::kPolicy),
      dyn_replay_rng_(config.seed + seed_stream::kDynamicsReplay) {
  validate(config_);
  if (config_.explore.strategy == Strategy::kMethod2) method2_.emplace(config_.method2());
}

double Agent::epsilon(bool learn) const {
  if (!learn) return config_.eval_epsilon;
  const auto& e = config_.explore;
  switch (e.strategy) {
    case Strategy::kUcb: return 0.0;
    case Strategy::kMethod2: return method2_->epsilon();
    default: return epsilon_schedule(counters_.env_steps, e.eps_initial, e.eps_final, e.eps_steps);
  }
}

Selection Agent::select(const FrameStack& stack, bool learn) {
  Selection sel;
  sel.step = counters_.env_steps;
  const auto q = ensemble_.q_values(stack);
  auto stats = ensemble_stats(q);
  const double eps = epsilon(learn);
  sel.epsilon = eps;
  if (ensemble_.size() >= 2) sel.uncertainty = uncertainty_per_action(q);
  const double lambda = config_.explore.lambda;
  const std::size_t n = ensemble_.n_actions();

  if (learn && counters_.env_steps < config_.explore.warmup_steps) {
    sel.action = static_cast<ActionId>(policy_rng_.below(n));
    sel.epsilon = 1.0;
    sel.score_chosen = stats.mean[sel.action];
    sel.mu = std::move(stats.mean);
    sel.sigma = std::move(stats.stddev);
    return sel;
  }

  switch (config_.explore.strategy) {
    case Strategy::kEpsGreedy:
      sel.action = select_eps_greedy(q, eps, policy_rng_);
      sel.score_chosen = stats.mean[sel.action];
      break;
    case Strategy::kUcb:
      sel.action = select_ucb(q, lambda);
      sel.score_chosen = stats.mean[sel.action] + lambda * stats.stddev[sel.action];
      break;
    case Strategy::kMajority: {
      const bool explore = policy_rng_.uniform() < eps;
      const auto random = static_cast<ActionId>(policy_rng_.below(n));
      sel.action = explore ? random : select_majority_vote(q);
      sel.score_chosen = stats.mean[sel.action];
      break;
    }
    case Strategy::kMethod1: {
      const bool explore = !config_.method1.combine_with_eps_greedy || policy_rng_.uniform() < eps;
      if (explore) {
        const auto r = method1_select(*dynamics_, ensemble_, stack, config_.method1);
        sel.action = r.action;
        sel.score_chosen = r.uncertainty[r.action];
      } else {
        sel.action = argmax(stats.mean);
        sel.score_chosen = stats.mean[sel.action];
      }
      break;
    }
    case Strategy::kMethod2: {
      const auto predicted = predict_frames(*dynamics_, stack);
      ScoreBreakdown b;
      if (learn) {
        b = method2_->select(q, predicted, memory_);
      } else {
        Method2Selector frozen(Method2Config{lambda, eps, config_.explore.decay_factor});
        b = frozen.select(q, predicted, memory_);
      }
      sel.action = b.chosen;
      sel.epsilon = b.epsilon;
      sel.score_chosen = b.actions[b.chosen].score;
      for (const auto& a : b.actions) sel.nD.push_back(a.visits);
      break;
    }
  }
  sel.mu = std::move(stats.mean);
  sel.sigma = std::move(stats.stddev);
  return sel;
}

std::optional<double> Agent::train_dynamics() {
  if (!dynamics_ || replay_.size() < config_.dyn.batch) return std::nullopt;
  const auto idx = replay_.sample_indices(config_.dyn.batch, dyn_replay_rng_);
  std::vector<const Transition*> picked;
  for (auto i : idx) picked.push_back(&replay_.at(i));
  const auto batch = make_dynamics_batch(picked);
  const double loss = dynamics_->train_step(batch.stacks, batch.actions, batch.targets, config_.dyn.clip);
  ++counters_.model_updates;
  return loss;
}

EpisodeRecord Agent::run_episode(std::uint64_t step_budget, bool learn,
                                 const std::function<void(const Selection&)>& on_select,
                                 const std::function<void(const EpisodeRecord&)>& on_abort) {
  EpisodeRecord rec;
  env_.reset();
  memory_.push(env_.latest_frame());
  try {
    while (rec.steps < step_budget) {
      const FrameStack state = env_.stack();
      rec.visits_sum += memory_.visit_frequency(*state.newest());
      const auto sel = select(state, learn);
      ++rec.selections;
      rec.uncertainty_sum += sel.uncertainty;
      if (on_select) on_select(sel);

      const auto step = env_.step(sel.action);
      rec.reward += step.reward;
      ++rec.steps;
      memory_.push(step.frame);
      if (learn) {
        ++counters_.env_steps;
        replay_.push(Transition{state, sel.action, step.reward, env_.stack(), step.done});
        if (counters_.env_steps % training_.train_freq == 0) {
          ++counters_.train_calls;
          if (const auto losses = ensemble_.ddqn_train_step(replay_, training_, replay_rng_)) {
            ++counters_.q_updates;
            for (double l : *losses) rec.q_loss_sum += l;
            rec.q_loss_count += losses->size();
            if (counters_.q_updates % training_.target_sync == 0) {
              ensemble_.sync_targets();
              ++counters_.target_syncs;
            }
          }
          if (const auto loss = train_dynamics()) {
            rec.model_loss_sum += *loss;
            ++rec.model_loss_count;
          }
        }
      }
      if (step.done || rec.steps >= config_.env.max_episode_steps) {
        rec.finished = true;
        break;
      }
    }
  } catch (const NumericError&) {
    rec.epsilon = epsilon(learn);
    if (on_abort) on_abort(rec);
    throw;
  }
  if (rec.finished) ++counters_.episodes;
  rec.epsilon = epsilon(learn);
  return rec;
}

std::vector<NamedTensor> Agent::export_params() const {
  auto out = ensemble_.export_params();
  if (dynamics_) {
    auto dyn = export_dynamics(*dynamics_);
    out.insert(out.end(), std::make_move_iterator(dyn.begin()), std::make_move_iterator(dyn.end()));
  }
  return out;
}

void Agent::import_params(const std::vector<NamedTensor>& records) {
  ensemble_.import_params(records);
  if (dynamics_) import_dynamics(*dynamics_, records);
}

}  // namespace explorium
