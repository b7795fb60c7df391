// Command-line front end: train, train-model, eval, sweep, inspect, config.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "explorium/harness.hpp"

namespace fs = std::filesystem;
using namespace explorium;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> strategy;
  std::optional<std::uint64_t> steps;
  std::optional<double> lambda;
  std::vector<std::string> sets;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--strategy", o.strategy, "eps-greedy, ucb, majority, method1 or method2");
  cmd->add_option("--steps", o.steps, "Override max_steps");
  cmd->add_option("--lambda", o.lambda, "Override explore.lambda");
  cmd->add_option("--set", o.sets, "Extra key=value override, repeatable");
}

RunConfig resolve(const std::string& path, const Overrides& o) {
  RunConfig cfg = path.empty() ? RunConfig{} : load_config(path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.strategy) cfg.explore.strategy = parse_strategy(*o.strategy);
  if (o.steps) cfg.max_steps = *o.steps;
  if (o.lambda) cfg.explore.lambda = *o.lambda;
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigurationError("--set expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    try {
      set_config_value(cfg, key, kv.substr(eq + 1));
    } catch (const ConfigurationError& e) {
      throw ConfigurationError("--set " + key + ": " + e.what());
    }
  }
  if (strict_from_environment()) cfg.strict = true;
  validate(cfg);
  return cfg;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = std::min(text.find(',', pos), text.size());
    out.push_back(text.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exploration strategies for Q-ensembles on a pixel gridworld"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  Overrides over;

  auto* train = app.add_subcommand("train", "Run the training loop and write metrics");
  train->add_option("--config", config_path, "Run config file")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out_dir, "Output directory (default: out_dir from config)");
  add_overrides(train, over);

  std::uint64_t frames = 0;
  auto* train_model = app.add_subcommand("train-model", "Train the frame-prediction model on collected transitions");
  train_model->add_option("--config", config_path, "Run config file")->required()->check(CLI::ExistingFile);
  train_model->add_option("--frames", frames, "Environment steps to collect")->required();
  train_model->add_option("--out", out_dir, "Output directory");
  add_overrides(train_model, over);

  std::string checkpoint;
  std::size_t episodes = 10;
  std::optional<double> eval_eps;
  std::string csv_path;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint without training");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("--episodes", episodes, "Episode count");
  eval->add_option("--config", config_path, "Config (default: config.resolved next to the checkpoint)");
  eval->add_option("--epsilon", eval_eps, "Exploration rate during evaluation");
  eval->add_option("--csv", csv_path, "Per-episode CSV (default: eval.csv next to the checkpoint)");
  add_overrides(eval, over);

  std::string lambdas = "1.0,0.1,0.01,0.001";
  std::string seeds_text = "0";
  auto* sweep = app.add_subcommand("sweep", "One training run per lambda (and seed)");
  sweep->add_option("--config", config_path, "Run config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--lambdas", lambdas, "Comma-separated lambda values");
  sweep->add_option("--seeds", seeds_text, "Comma-separated seeds");
  sweep->add_option("--out", out_dir, "Parent output directory")->required();
  add_overrides(sweep, over);

  std::uint64_t inspect_steps = 0;
  auto* inspect = app.add_subcommand("inspect", "List checkpoint records or dump trajectory-memory frames");
  inspect->add_option("--checkpoint", checkpoint, "Checkpoint to list");
  inspect->add_option("--config", config_path, "Config for a memory dump");
  inspect->add_option("--play", inspect_steps, "Steps to play before dumping memory");
  inspect->add_option("--out", out_dir, "Directory for PGM frames");
  add_overrides(inspect, over);

  auto* show = app.add_subcommand("config", "Print the resolved configuration");
  show->add_option("--config", config_path, "Run config file");
  add_overrides(show, over);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      auto cfg = resolve(config_path, over);
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      const auto r = run_training(cfg, cfg.out_dir);
      std::cout << "train: " << r.status << " steps=" << r.counters.env_steps << " episodes=" << r.counters.episodes
                << " total_reward=" << csv_number(r.total_reward) << " auc=" << csv_number(r.reward_auc) << "\n";
      return r.aborted ? 3 : 0;
    }
    if (*train_model) {
      auto cfg = resolve(config_path, over);
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      const auto r = run_model_training(cfg, frames, cfg.out_dir);
      std::cout << "train-model: train=" << r.train_transitions << " val=" << r.val_transitions
                << " final_val_loss=" << csv_number(r.final_val_loss) << "\n";
      return 0;
    }
    if (*eval) {
      const fs::path ckpt(checkpoint);
      std::string cfg_file = config_path;
      if (cfg_file.empty()) {
        const auto beside = ckpt.parent_path() / "config.resolved";
        const auto above = ckpt.parent_path().parent_path() / "config.resolved";
        cfg_file = fs::exists(beside) ? beside.string() : (fs::exists(above) ? above.string() : std::string());
      }
      auto cfg = resolve(cfg_file, over);
      if (eval_eps) cfg.eval_epsilon = *eval_eps;
      const fs::path csv = csv_path.empty() ? ckpt.parent_path() / "eval.csv" : fs::path(csv_path);
      const auto r = run_eval(cfg, ckpt, episodes, csv);
      std::cout << "eval: " << r.summary << "\n";
      return 0;
    }
    if (*sweep) {
      const auto cfg = resolve(config_path, over);
      std::vector<std::uint64_t> seeds;
      std::vector<double> ls;
      for (const auto& s : split_commas(seeds_text)) seeds.push_back(std::stoull(s));
      for (const auto& l : split_commas(lambdas)) ls.push_back(std::stod(l));
      for (const auto& dir : run_sweep(cfg, ls, seeds, out_dir)) std::cout << dir.string() << "\n";
      return 0;
    }
    if (*inspect) {
      if (!checkpoint.empty()) {
        for (const auto& r : load_checkpoint(checkpoint)) {
          std::cout << r.name << " " << shape_string(r.tensor.shape()) << "\n";
        }
        return 0;
      }
      if (config_path.empty() || out_dir.empty()) {
        throw ConfigurationError("inspect needs --checkpoint, or --config with --out");
      }
      auto cfg = resolve(config_path, over);
      cfg.max_steps = inspect_steps;
      Agent agent(cfg);
      agent.run_episode(inspect_steps, false);
      fs::create_directories(out_dir);
      std::size_t i = 0;
      for (const auto& f : agent.memory().frames()) {
        char name[32];
        std::snprintf(name, sizeof name, "memory_%02zu.pgm", i++);
        write_pgm(fs::path(out_dir) / name, *f);
      }
      std::cout << "inspect: wrote " << i << " frames to " << out_dir << "\n";
      return 0;
    }
    if (*show) {
      std::cout << resolved_config(resolve(config_path, over));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
