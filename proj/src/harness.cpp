#include "explorium/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>

namespace explorium {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

std::string step_name(std::uint64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%08llu.qens", static_cast<unsigned long long>(step));
  return buf;
}

struct TrainSinks {
  std::optional<CsvFile> metrics;
  std::optional<CsvFile> diagnostics;
  std::filesystem::path dir;
};

TrainResult train_loop(const RunConfig& config, TrainSinks* sinks) {
  const bool strict = config.strict || strict_from_environment();
  Agent agent(config);
  TrainResult result;
  RunningAverage avg;
  WallClock clock(strict);
  double auc_sum = 0.0;
  std::uint64_t next_checkpoint = config.checkpoint_every;

  std::function<void(const Selection&)> on_select;
  if (sinks && sinks->diagnostics) {
    on_select = [&](const Selection& s) { sinks->diagnostics->write_line(to_csv(s)); };
  }
  auto emit = [&](const EpisodeRecord& rec) {
    result.episode_rewards.push_back(rec.reward);
    result.total_reward += rec.reward;
    const double running = avg.push(rec.reward);
    auc_sum += running * static_cast<double>(rec.steps);
    if (sinks && sinks->metrics) {
      const auto row = summarize_episode(rec, agent.counters().env_steps, result.episode_rewards.size(), running,
                                         clock.elapsed_ms());
      sinks->metrics->write_line(to_csv(row));
    }
  };

  try {
    while (agent.counters().env_steps < config.max_steps) {
      const auto budget = config.max_steps - agent.counters().env_steps;
      const auto rec = agent.run_episode(budget, true, on_select, emit);
      emit(rec);
      if (sinks && agent.counters().env_steps >= next_checkpoint) {
        std::filesystem::create_directories(sinks->dir / "checkpoints");
        save_checkpoint(sinks->dir / "checkpoints" / step_name(agent.counters().env_steps), agent.export_params());
        while (next_checkpoint <= agent.counters().env_steps) next_checkpoint += config.checkpoint_every;
      }
    }
  } catch (const NumericError& e) {
    result.aborted = true;
    result.status = std::string("aborted: ") + e.what();
  }
  result.counters = agent.counters();
  const auto steps = result.counters.env_steps;
  result.reward_auc = steps == 0 ? 0.0 : auc_sum / static_cast<double>(steps);
  if (sinks) {
    if (sinks->metrics) sinks->metrics->flush();
    if (sinks->diagnostics) sinks->diagnostics->flush();
    save_checkpoint(sinks->dir / "final.qens", agent.export_params());
    const auto& c = result.counters;
    write_text(sinks->dir / "status.txt",
               result.status + "\nenv_steps = " + std::to_string(c.env_steps) +
                   "\nepisodes = " + std::to_string(c.episodes) + "\ntrain_calls = " + std::to_string(c.train_calls) +
                   "\nq_updates = " + std::to_string(c.q_updates) +
                   "\ntarget_syncs = " + std::to_string(c.target_syncs) +
                   "\nmodel_updates = " + std::to_string(c.model_updates) + "\n");
  }
  return result;
}

}  // namespace

TrainResult run_training(const RunConfig& config, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "config.resolved", resolved_config(config));
  TrainSinks sinks;
  sinks.dir = out_dir;
  sinks.metrics.emplace(out_dir / "metrics.csv", kMetricsHeader);
  if (config.diagnostics) sinks.diagnostics.emplace(out_dir / "diagnostics.csv", diagnostics_header(config.env.actions));
  return train_loop(config, &sinks);
}

TrainResult run_training_in_memory(const RunConfig& config) { return train_loop(config, nullptr); }

TransitionSplit collect_transitions(const RunConfig& config, std::uint64_t frames) {
  TransitionSplit split;
  if (frames == 0) return split;
  PreprocessedEnv env(config.make_world(), config.pre);
  QEnsemble behavior(config.q_network(), config.q.K, config.seed + seed_stream::kInit, config.q_adam());
  Rng rng(config.seed + seed_stream::kPolicy);
  std::vector<std::vector<Transition>> episodes(1);
  env.reset();
  std::uint64_t in_episode = 0;
  for (std::uint64_t t = 0; t < frames; ++t) {
    const FrameStack state = env.stack();
    const auto action = select_eps_greedy(behavior.q_values(state), config.explore.eps_initial, rng);
    const auto step = env.step(action);
    episodes.back().push_back(Transition{state, action, step.reward, env.stack(), step.done});
    ++in_episode;
    if (step.done || in_episode >= config.env.max_episode_steps) {
      env.reset();
      in_episode = 0;
      if (t + 1 < frames) episodes.emplace_back();
    }
  }
  split.episodes = episodes.size();
  if (episodes.size() >= 10) {
    for (std::size_t e = 0; e < episodes.size(); ++e) {
      auto& dst = (e % 10 == 9) ? split.val : split.train;
      dst.insert(dst.end(), episodes[e].begin(), episodes[e].end());
    }
  } else {
    std::vector<Transition> all;
    for (auto& ep : episodes) all.insert(all.end(), ep.begin(), ep.end());
    const std::size_t n_val = all.size() >= 10 ? all.size() / 10 : (all.size() > 1 ? 1 : 0);
    split.train.assign(all.begin(), all.end() - static_cast<std::ptrdiff_t>(n_val));
    split.val.assign(all.end() - static_cast<std::ptrdiff_t>(n_val), all.end());
  }
  return split;
}

double dynamics_loss(const DynamicsModel<float>& model, std::span<const Transition> transitions) {
  if (transitions.empty()) return std::numeric_limits<double>::quiet_NaN();
  constexpr std::size_t kChunk = 64;
  double weighted = 0.0;
  for (std::size_t start = 0; start < transitions.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, transitions.size() - start);
    std::vector<const Transition*> chunk;
    for (std::size_t i = 0; i < n; ++i) chunk.push_back(&transitions[start + i]);
    const auto batch = make_dynamics_batch(chunk);
    weighted += model.loss(batch.stacks, batch.actions, batch.targets) * static_cast<double>(n);
  }
  return weighted / static_cast<double>(transitions.size());
}

ModelTrainResult run_model_training(const RunConfig& config, std::uint64_t frames,
                                    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "config.resolved", resolved_config(config));
  CsvFile csv(out_dir / "model_loss.csv", "step,train_loss,val_loss");
  ModelTrainResult result;
  if (frames == 0) return result;

  const auto split = collect_transitions(config, frames);
  result.train_transitions = split.train.size();
  result.val_transitions = split.val.size();
  result.episodes = split.episodes;
  if (split.train.empty()) throw ConfigurationError("train-model: no training transitions collected");

  Rng init(config.seed + seed_stream::kDynamicsInit);
  AdamOptions adam;
  adam.learning_rate = config.dyn.lr;
  DynamicsModel<float> model(config.dynamics(), init, adam);
  Rng sampler(config.seed + seed_stream::kDynamicsReplay);

  double train_sum = 0.0;
  std::size_t train_count = 0;
  std::vector<const Transition*> picked(config.dyn.batch);
  for (std::uint64_t step = 1; step <= config.dyn.train_steps; ++step) {
    for (auto& p : picked) p = &split.train[sampler.below(split.train.size())];
    const auto batch = make_dynamics_batch(picked);
    train_sum += model.train_step(batch.stacks, batch.actions, batch.targets, config.dyn.clip);
    ++train_count;
    if (step % config.dyn.eval_every == 0 || step == config.dyn.train_steps) {
      ModelLossRow row{step, train_sum / static_cast<double>(train_count), dynamics_loss(model, split.val)};
      csv.write_line(std::to_string(row.step) + "," + csv_number(row.train_loss) + "," + csv_number(row.val_loss));
      result.rows.push_back(row);
      train_sum = 0.0;
      train_count = 0;
    }
  }
  csv.flush();
  result.final_val_loss = dynamics_loss(model, split.val);
  save_checkpoint(out_dir / "model.qens", export_dynamics(model));
  return result;
}

EvalResult run_eval(const RunConfig& config, const std::filesystem::path& checkpoint, std::size_t episodes,
                    const std::filesystem::path& csv_path) {
  const auto records = load_checkpoint(checkpoint);
  Agent agent(config);
  agent.import_params(records);
  std::optional<CsvFile> csv;
  if (!csv_path.empty()) csv.emplace(csv_path, "episode,reward,steps");
  EvalResult result;
  for (std::size_t e = 0; e < episodes; ++e) {
    const auto rec = agent.run_episode(config.env.max_episode_steps, false);
    result.rewards.push_back(rec.reward);
    if (csv) csv->write_line(std::to_string(e + 1) + "," + csv_number(rec.reward) + "," + std::to_string(rec.steps));
  }
  if (csv) csv->flush();
  if (result.rewards.empty()) {
    result.mean = result.stddev = std::numeric_limits<double>::quiet_NaN();
  } else {
    double sum = 0.0;
    for (double r : result.rewards) sum += r;
    result.mean = sum / static_cast<double>(result.rewards.size());
    double sq = 0.0;
    for (double r : result.rewards) sq += (r - result.mean) * (r - result.mean);
    result.stddev = std::sqrt(sq / static_cast<double>(result.rewards.size()));
  }
  result.summary = "episodes=" + std::to_string(result.rewards.size()) + " mean_reward=" + csv_number(result.mean) +
                   " +- " + csv_number(result.stddev);
  return result;
}

std::vector<std::filesystem::path> run_sweep(const RunConfig& base, std::span<const double> lambdas,
                                             std::span<const std::uint64_t> seeds, const std::filesystem::path& out) {
  std::vector<std::filesystem::path> dirs;
  for (double lambda : lambdas) {
    for (auto seed : seeds) {
      RunConfig cfg = base;
      cfg.explore.lambda = lambda;
      cfg.seed = seed;
      auto dir = out / ("lambda_" + format_double(lambda));
      if (seeds.size() > 1) dir /= "seed_" + std::to_string(seed);
      cfg.out_dir = dir.string();
      validate(cfg);
      const auto r = run_training(cfg, dir);
      if (r.aborted) std::cerr << dir.string() << ": " << r.status << "\n";
      dirs.push_back(dir);
    }
  }
  return dirs;
}

void write_pgm(const std::filesystem::path& path, const Frame& frame) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "P5\n" << frame.width << " " << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()), static_cast<std::streamsize>(frame.pixels.size()));
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace explorium
