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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "craneppo/checkpoint.hpp"
#include "craneppo/env.hpp"

namespace craneppo {

// One evaluation cell: a (model, task, obstacle-mode) combination scored over
// n_scenarios paired-seed episodes with deterministic (mean) actions.
struct EvalCell {
  std::string model_name;
  TaskKind task = TaskKind::kLoading;
  ObstacleMode obstacle_mode = ObstacleMode::kAbsent;
  std::uint64_t seed = 0;
  int n_scenarios = 0;
  int n_success = 0;
  int n_collisions = 0;
  int n_swing_exceeded = 0;
  int n_timeout = 0;
  double success_rate_pct = 0.0;
  double mean_episode_len = 0.0;
  double mean_peak_rope_angle = 0.0;
};

struct EvalReport {
  std::vector<EvalCell> cells;

  std::string to_table() const;                 // human-readable
  std::string to_csv() const;                   // long form, all counters
  // Four-column success-rate layout (loading/unloading x without/with
  // obstacle); empty optional when the report does not cover all four cells.
  std::optional<std::string> to_matrix_csv() const;
};

struct TrajectoryRow {
  int step = 0;
  Vec3 tip = Vec3::Zero();
  Vec3 payload = Vec3::Zero();
  double rope_angle = 0.0;
  Vec3 action = Vec3::Zero();  // env action after scaling, before env clamp
  double reward = 0.0;
  double cum_reward = 0.0;
};

struct Trajectory {
  std::uint64_t seed = 0;
  std::vector<TrajectoryRow> rows;
  TerminationReason outcome = TerminationReason::kNone;

  void write_csv(const std::string& path) const;
};

struct EvalOptions {
  int n_scenarios = 100;
  std::uint64_t seed = 0;
  bool keep_trajectories = false;
};

// Runs n_scenarios deterministic episodes (seeds seed, seed+1, ...) of the
// checkpointed policy on the given environment and classifies each outcome.
// Throws when the checkpoint's dimensions do not match the observation.
EvalCell evaluate(const Checkpoint& ckpt, EnvBase& env, const std::string& model_name,
                  TaskKind task, ObstacleMode mode, const EvalOptions& opts,
                  std::vector<Trajectory>* trajectories = nullptr);

// Runs one deterministic episode, recording every step.
Trajectory rollout_trajectory(const Checkpoint& ckpt, EnvBase& env, std::uint64_t seed);

struct CellDiff {
  TaskKind task = TaskKind::kLoading;
  ObstacleMode obstacle_mode = ObstacleMode::kAbsent;
  double rate_a_pct = 0.0;
  double rate_b_pct = 0.0;
  double diff_points = 0.0;  // a - b
};

struct Comparison {
  std::string model_a;
  std::string model_b;
  std::vector<CellDiff> cells;

  std::string to_table() const;
};

// Paired comparison of two reports over identical cells and seeds.
Comparison compare(const EvalReport& report_a, const EvalReport& report_b);

// Summary statistics of a learning-curve CSV.
struct CurveStats {
  int n_rows = 0;
  std::int64_t first_step = 0;
  std::int64_t last_step = 0;
  double first10_mean = 0.0;   // mean cumulative reward over the first 10% of rows
  double final10_mean = 0.0;   // ... and the final 10%
  std::int64_t convergence_step = 0;  // first step reaching 95% of the final level
  double max_drawdown = 0.0;   // largest post-convergence drop below the running max
  bool has_dip = false;        // drawdown exceeding 10% of the learning range
};

// Parses the learning-curve CSV, computes the summary and, when svg_path is
// non-empty, writes a reward-versus-steps plot.
CurveStats export_curve(const std::string& csv_path, const std::string& svg_path = "");

// Top-down and side-view path plot of a trajectory against the world.
void plot_trajectory(const Trajectory& traj, const World& world, const Vec3& start,
                     const Vec3& target, const std::string& svg_path);

}  // namespace craneppo
