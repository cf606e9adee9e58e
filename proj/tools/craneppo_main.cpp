// Copyright 2026 The craneppo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "craneppo/config.hpp"
#include "craneppo/eval.hpp"
#include "craneppo/point_mass.hpp"
#include "craneppo/ppo.hpp"

namespace {

using namespace craneppo;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDiverged = 3;

std::string output_dir_override(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("CRANEPPO_OUTPUT_DIR")) return env;
  return "";
}

// Builds the evaluation environment the way training would, with the reward
// and action scale taken from the checkpoint so the two cannot drift apart.
std::unique_ptr<EnvBase> make_eval_env(const Checkpoint& ckpt, const CraneConfig& crane,
                                       const EnvOptions& base_opts,
                                       const std::string& scenario_ref,
                                       const std::string& base_dir) {
  EnvOptions opts = base_opts;
  opts.action_bound = ckpt.action_bound;
  const ResolvedScenarios rs = resolve_scenarios({scenario_ref}, base_dir);
  if (rs.point_mass) {
    return std::make_unique<PointMassEnv>(ckpt.reward, opts);
  }
  return std::make_unique<CraneEnv>(crane, ckpt.reward, opts, rs.scenarios.front());
}

struct CellSpec {
  std::string ref;
  TaskKind task;
  ObstacleMode mode;
};

std::vector<CellSpec> all_cells() {
  return {{"loading_no_obstacle", TaskKind::kLoading, ObstacleMode::kAbsent},
          {"loading_obstacle", TaskKind::kLoading, ObstacleMode::kPresent},
          {"unloading_no_obstacle", TaskKind::kUnloading, ObstacleMode::kAbsent},
          {"unloading_obstacle", TaskKind::kUnloading, ObstacleMode::kPresent}};
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides,
              const std::string& out_flag, int workers_flag) {
  RunConfig cfg = load_run_config(config_path, overrides);
  const std::string out = output_dir_override(out_flag);
  if (!out.empty()) cfg.output_dir = out;
  if (workers_flag > 0) cfg.ppo.workers = workers_flag;

  const std::string base_dir = std::filesystem::path(config_path).parent_path().string();
  TrainInputs inputs = make_train_inputs(cfg, base_dir);

  std::filesystem::create_directories(cfg.output_dir);
  // Freeze the resolved configuration (overrides applied, paths absolutized)
  // next to the run outputs.
  RunConfig frozen = cfg;
  for (std::string& ref : frozen.scenario_refs) {
    if (std::find(kBuiltinScenarios.begin(), kBuiltinScenarios.end(), ref) ==
        kBuiltinScenarios.end()) {
      std::filesystem::path p(ref);
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      ref = std::filesystem::absolute(p).string();
    }
  }
  save_run_config(frozen, cfg.output_dir + "/config_resolved.json");

  const TrainResult res = train(inputs);
  std::cout << "training finished: " << res.env_steps << " steps, " << res.updates
            << " updates\ncheckpoint: " << res.checkpoint_path
            << "\nlearning curve: " << res.log_path << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& ckpt_path, const std::string& scenario_ref, int n,
             std::uint64_t seed, const std::string& out_flag, bool trajectories,
             const std::string& config_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  CraneConfig crane;
  EnvOptions env_opts;
  std::string base_dir;
  if (!config_path.empty()) {
    const RunConfig cfg = load_run_config(config_path);
    crane = cfg.crane;
    env_opts = cfg.env_opts;
    base_dir = std::filesystem::path(config_path).parent_path().string();
  }
  const std::string out_dir =
      output_dir_override(out_flag).empty() ? "." : output_dir_override(out_flag);
  std::filesystem::create_directories(out_dir);

  EvalOptions opts;
  opts.n_scenarios = n;
  opts.seed = seed;
  opts.keep_trajectories = trajectories;

  const std::string model_name = std::filesystem::path(ckpt_path).stem().string();
  EvalReport report;
  std::vector<Trajectory> trajs;
  if (scenario_ref == "all") {
    for (const CellSpec& spec : all_cells()) {
      auto env = make_eval_env(ckpt, crane, env_opts, spec.ref, base_dir);
      report.cells.push_back(
          evaluate(ckpt, *env, model_name, spec.task, spec.mode, opts, nullptr));
    }
  } else {
    const ResolvedScenarios rs = resolve_scenarios({scenario_ref}, base_dir);
    TaskKind task = TaskKind::kLoading;
    ObstacleMode mode = ObstacleMode::kAbsent;
    if (!rs.point_mass) {
      task = rs.scenarios.front().task_kind;
      mode = rs.scenarios.front().world.obstacles.empty() ? ObstacleMode::kAbsent
                                                          : ObstacleMode::kPresent;
    }
    auto env = make_eval_env(ckpt, crane, env_opts, scenario_ref, base_dir);
    report.cells.push_back(evaluate(ckpt, *env, model_name, task, mode, opts, &trajs));
  }

  std::cout << report.to_table();
  {
    std::ofstream csv(out_dir + "/eval_report.csv");
    csv << report.to_csv();
  }
  if (auto matrix = report.to_matrix_csv()) {
    std::ofstream csv(out_dir + "/eval_matrix.csv");
    csv << *matrix;
  }
  for (const Trajectory& t : trajs) {
    t.write_csv(out_dir + "/traj_seed" + std::to_string(t.seed) + ".csv");
  }
  std::cout << "report: " << out_dir << "/eval_report.csv\n";
  return kExitOk;
}

int cmd_replay(const std::string& ckpt_path, const std::string& scenario_ref,
               std::uint64_t seed, const std::string& out_flag,
               const std::string& config_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  CraneConfig crane;
  EnvOptions env_opts;
  std::string base_dir;
  if (!config_path.empty()) {
    const RunConfig cfg = load_run_config(config_path);
    crane = cfg.crane;
    env_opts = cfg.env_opts;
    base_dir = std::filesystem::path(config_path).parent_path().string();
  }
  const std::string out_dir =
      output_dir_override(out_flag).empty() ? "." : output_dir_override(out_flag);
  std::filesystem::create_directories(out_dir);

  auto env = make_eval_env(ckpt, crane, env_opts, scenario_ref, base_dir);
  const Trajectory traj = rollout_trajectory(ckpt, *env, seed);

  const std::string csv_path = out_dir + "/traj_seed" + std::to_string(seed) + ".csv";
  traj.write_csv(csv_path);

  const ResolvedScenarios rs = resolve_scenarios({scenario_ref}, base_dir);
  const std::string svg_path = out_dir + "/traj_seed" + std::to_string(seed) + ".svg";
  if (!rs.point_mass) {
    const Scenario& sc = rs.scenarios.front();
    // Re-derive the episode target from the same seed the rollout used.
    CraneEnv probe(crane, ckpt.reward, env_opts, sc);
    probe.reset(seed);
    plot_trajectory(traj, sc.world, sc.material_start, probe.target(), svg_path);
  } else {
    PointMassEnv probe(ckpt.reward, env_opts);
    probe.reset(seed);
    plot_trajectory(traj, World{}, traj.rows.empty() ? Vec3::Zero() : traj.rows.front().payload,
                    probe.target(), svg_path);
  }
  std::cout << "outcome: " << to_string(traj.outcome) << " after " << traj.rows.size()
            << " steps\ntrajectory: " << csv_path << "\nplot: " << svg_path << "\n";
  return kExitOk;
}

int cmd_plot(const std::string& log_path, const std::string& svg_path) {
  const CurveStats stats = export_curve(log_path, svg_path);
  std::cout << "rows: " << stats.n_rows << " (steps " << stats.first_step << ".."
            << stats.last_step << ")\n"
            << "first-10% mean cumulative reward: " << stats.first10_mean << "\n"
            << "final-10% mean cumulative reward: " << stats.final10_mean << "\n"
            << "95%-of-final first reached at step: " << stats.convergence_step << "\n"
            << "max post-convergence drawdown: " << stats.max_drawdown
            << (stats.has_dip ? "  (dip detected)" : "") << "\n";
  if (!svg_path.empty()) std::cout << "plot: " << svg_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crane lift-path planning: PPO training, evaluation and replay"};
  app.require_subcommand(1);

  auto* train_cmd = app.add_subcommand("train", "train a policy from a config file");
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int workers = 0;
  train_cmd->add_option("--config", config_path, "run configuration (JSON)")->required();
  train_cmd->add_option("--set", overrides, "override config values, e.g. ppo.total_steps=10000");
  train_cmd->add_option("--out", out_dir, "output directory (overrides config)");
  train_cmd->add_option("--workers", workers, "rollout worker threads");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint over seeded scenarios");
  std::string ckpt_path, scenario_ref = "all", eval_config;
  int n_scenarios = 100;
  std::uint64_t seed = 0;
  bool trajectories = false;
  eval_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  eval_cmd->add_option("--scenario", scenario_ref,
                       "built-in name, scenario file, or 'all' for the four canonical cells");
  eval_cmd->add_option("--n", n_scenarios, "episodes per cell");
  eval_cmd->add_option("--seed", seed, "base seed (episode i uses seed+i)");
  eval_cmd->add_option("--out", out_dir, "output directory");
  eval_cmd->add_flag("--trajectories", trajectories, "write one CSV per episode");
  eval_cmd->add_option("--config", eval_config, "run config supplying crane/env sections");

  auto* replay_cmd = app.add_subcommand("replay", "run one episode and export its path");
  replay_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  replay_cmd->add_option("--scenario", scenario_ref, "built-in name or scenario file")
      ->required();
  replay_cmd->add_option("--seed", seed, "episode seed");
  replay_cmd->add_option("--out", out_dir, "output directory");
  replay_cmd->add_option("--config", eval_config, "run config supplying crane/env sections");

  auto* plot_cmd = app.add_subcommand("plot", "summarize a learning-curve CSV");
  std::string log_path, svg_path = "learning_curve.svg";
  plot_cmd->add_option("--log", log_path, "learning_curve.csv from a run")->required();
  plot_cmd->add_option("--out", svg_path, "output SVG path");

  auto* default_cmd = app.add_subcommand("config-default", "print the default configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return cmd_train(config_path, overrides, out_dir, workers);
    if (*eval_cmd)
      return cmd_eval(ckpt_path, scenario_ref, n_scenarios, seed, out_dir, trajectories,
                      eval_config);
    if (*replay_cmd) return cmd_replay(ckpt_path, scenario_ref, seed, out_dir, eval_config);
    if (*plot_cmd) return cmd_plot(log_path, svg_path);
    if (*default_cmd) {
      std::cout << run_config_to_json(default_run_config());
      return kExitOk;
    }
  } catch (const TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << " (last checkpoint kept)\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
