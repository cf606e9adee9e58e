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

#include "craneppo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "craneppo/neural.hpp"
#include "craneppo/svg.hpp"

namespace craneppo {

namespace {

const char* cell_key(TaskKind task, ObstacleMode mode) {
  if (task == TaskKind::kLoading) {
    return mode == ObstacleMode::kAbsent ? "loading_no_obstacle" : "loading_obstacle";
  }
  return mode == ObstacleMode::kAbsent ? "unloading_no_obstacle" : "unloading_obstacle";
}

}  // namespace

Trajectory rollout_trajectory(const Checkpoint& ckpt, EnvBase& env, std::uint64_t seed) {
  if (ckpt.actor.mean_net.input_dim() != kObservationDim ||
      ckpt.actor.mean_net.output_dim() != kActionDim) {
    throw std::runtime_error("evaluate: checkpoint/env dimension mismatch");
  }
  Trajectory traj;
  traj.seed = seed;
  Observation obs = env.reset(seed);
  double cum = 0.0;
  int step = 0;
  while (!env.is_terminated()) {
    const VecX a_norm = mean_action(ckpt.actor, ckpt.normalizer.normalize(obs));
    const Vec3 action = Vec3(a_norm[0], a_norm[1], a_norm[2]) * ckpt.action_bound;
    const StepOutcome out = env.step(action);
    cum += out.reward;
    ++step;
    TrajectoryRow row;
    row.step = step;
    row.tip = env.tip_position();
    row.payload = out.observation.material_pos;
    row.rope_angle = out.observation.rope_angle;
    row.action = action;
    row.reward = out.reward;
    row.cum_reward = cum;
    traj.rows.push_back(row);
    obs = out.observation;
    if (out.terminated) {
      traj.outcome = out.termination_reason;
      break;
    }
  }
  return traj;
}

EvalCell evaluate(const Checkpoint& ckpt, EnvBase& env, const std::string& model_name,
                  TaskKind task, ObstacleMode mode, const EvalOptions& opts,
                  std::vector<Trajectory>* trajectories) {
  EvalCell cell;
  cell.model_name = model_name;
  cell.task = task;
  cell.obstacle_mode = mode;
  cell.seed = opts.seed;
  cell.n_scenarios = opts.n_scenarios;

  double len_sum = 0.0;
  double peak_sum = 0.0;
  for (int i = 0; i < opts.n_scenarios; ++i) {
    Trajectory traj = rollout_trajectory(ckpt, env, opts.seed + static_cast<std::uint64_t>(i));
    double peak = 0.0;
    for (const TrajectoryRow& row : traj.rows) peak = std::max(peak, row.rope_angle);
    peak_sum += peak;
    len_sum += static_cast<double>(traj.rows.size());
    switch (traj.outcome) {
      case TerminationReason::kSuccess: ++cell.n_success; break;
      case TerminationReason::kCollision: ++cell.n_collisions; break;
      case TerminationReason::kSwingExceeded: ++cell.n_swing_exceeded; break;
      default: ++cell.n_timeout; break;
    }
    if (trajectories && opts.keep_trajectories) trajectories->push_back(std::move(traj));
  }
  if (cell.n_scenarios > 0) {
    cell.success_rate_pct = 100.0 * cell.n_success / cell.n_scenarios;
    cell.mean_episode_len = len_sum / cell.n_scenarios;
    cell.mean_peak_rope_angle = peak_sum / cell.n_scenarios;
  }
  return cell;
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  os << std::left << std::setw(10) << "model" << std::setw(24) << "cell" << std::right
     << std::setw(6) << "n" << std::setw(9) << "succ%" << std::setw(7) << "coll"
     << std::setw(7) << "swing" << std::setw(7) << "tout" << std::setw(10) << "len"
     << std::setw(10) << "peak_th" << '\n';
  for (const EvalCell& c : cells) {
    os << std::left << std::setw(10) << c.model_name << std::setw(24)
       << cell_key(c.task, c.obstacle_mode) << std::right << std::setw(6) << c.n_scenarios
       << std::setw(9) << std::fixed << std::setprecision(1) << c.success_rate_pct
       << std::setw(7) << c.n_collisions << std::setw(7) << c.n_swing_exceeded
       << std::setw(7) << c.n_timeout << std::setw(10) << std::setprecision(1)
       << c.mean_episode_len << std::setw(10) << std::setprecision(3)
       << c.mean_peak_rope_angle << '\n';
  }
  return os.str();
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os << "model,task,obstacle_mode,seed,n_scenarios,n_success,n_collisions,"
        "n_swing_exceeded,n_timeout,success_rate_pct,mean_episode_len,"
        "mean_peak_rope_angle\n";
  for (const EvalCell& c : cells) {
    os << c.model_name << ',' << to_string(c.task) << ',' << to_string(c.obstacle_mode)
       << ',' << c.seed << ',' << c.n_scenarios << ',' << c.n_success << ','
       << c.n_collisions << ',' << c.n_swing_exceeded << ',' << c.n_timeout << ','
       << c.success_rate_pct << ',' << c.mean_episode_len << ',' << c.mean_peak_rope_angle
       << '\n';
  }
  return os.str();
}

std::optional<std::string> EvalReport::to_matrix_csv() const {
  // model, loading without/with obstacle, unloading without/with obstacle
  std::ostringstream os;
  os << "model,loading_no_obstacle_pct,loading_obstacle_pct,"
        "unloading_no_obstacle_pct,unloading_obstacle_pct\n";
  std::vector<std::string> models;
  for (const EvalCell& c : cells) {
    if (std::find(models.begin(), models.end(), c.model_name) == models.end()) {
      models.push_back(c.model_name);
    }
  }
  for (const std::string& m : models) {
    double rates[4];
    bool found[4] = {false, false, false, false};
    for (const EvalCell& c : cells) {
      if (c.model_name != m) continue;
      int idx = (c.task == TaskKind::kLoading) ? 0 : 2;
      if (c.obstacle_mode == ObstacleMode::kPresent) idx += 1;
      rates[idx] = c.success_rate_pct;
      found[idx] = true;
    }
    if (!(found[0] && found[1] && found[2] && found[3])) return std::nullopt;
    os << m;
    for (double r : rates) os << ',' << r;
    os << '\n';
  }
  return os.str();
}

void Trajectory::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trajectory: " + path);
  out << "step,tip_x,tip_y,tip_z,payload_x,payload_y,payload_z,rope_angle,"
         "action_x,action_y,action_z,reward,cum_reward\n";
  out << std::setprecision(17);
  for (const TrajectoryRow& r : rows) {
    out << r.step << ',' << r.tip.x() << ',' << r.tip.y() << ',' << r.tip.z() << ','
        << r.payload.x() << ',' << r.payload.y() << ',' << r.payload.z() << ','
        << r.rope_angle << ',' << r.action.x() << ',' << r.action.y() << ','
        << r.action.z() << ',' << r.reward << ',' << r.cum_reward << '\n';
  }
}

Comparison compare(const EvalReport& report_a, const EvalReport& report_b) {
  if (report_a.cells.size() != report_b.cells.size() || report_a.cells.empty()) {
    throw std::invalid_argument("compare: reports must cover the same non-empty cell set");
  }
  Comparison cmp;
  cmp.model_a = report_a.cells.front().model_name;
  cmp.model_b = report_b.cells.front().model_name;
  for (const EvalCell& a : report_a.cells) {
    const EvalCell* match = nullptr;
    for (const EvalCell& b : report_b.cells) {
      if (a.task == b.task && a.obstacle_mode == b.obstacle_mode) {
        match = &b;
        break;
      }
    }
    if (!match) throw std::invalid_argument("compare: cell sets differ");
    if (match->seed != a.seed || match->n_scenarios != a.n_scenarios) {
      throw std::invalid_argument("compare: cells were not evaluated with paired seeds");
    }
    CellDiff d;
    d.task = a.task;
    d.obstacle_mode = a.obstacle_mode;
    d.rate_a_pct = a.success_rate_pct;
    d.rate_b_pct = match->success_rate_pct;
    d.diff_points = a.success_rate_pct - match->success_rate_pct;
    cmp.cells.push_back(d);
  }
  return cmp;
}

std::string Comparison::to_table() const {
  std::ostringstream os;
  os << std::left << std::setw(24) << "cell" << std::right << std::setw(10) << model_a
     << std::setw(10) << model_b << std::setw(10) << "diff" << '\n';
  for (const CellDiff& d : cells) {
    os << std::left << std::setw(24) << cell_key(d.task, d.obstacle_mode) << std::right
       << std::fixed << std::setprecision(1) << std::setw(10) << d.rate_a_pct
       << std::setw(10) << d.rate_b_pct << std::setw(10) << d.diff_points << '\n';
  }
  return os.str();
}

CurveStats export_curve(const std::string& csv_path, const std::string& svg_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open learning curve: " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty learning curve: " + csv_path);

  std::vector<std::int64_t> steps;
  std::vector<double> rewards;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 2) throw std::runtime_error("malformed learning-curve row: " + line);
    try {
      steps.push_back(std::stoll(fields[0]));
      rewards.push_back(std::stod(fields[1]));
    } catch (const std::exception&) {
      throw std::runtime_error("malformed learning-curve row: " + line);
    }
  }
  if (steps.empty()) throw std::runtime_error("learning curve has no data rows: " + csv_path);

  CurveStats stats;
  stats.n_rows = static_cast<int>(steps.size());
  stats.first_step = steps.front();
  stats.last_step = steps.back();

  const int tail = std::max(1, stats.n_rows / 10);
  double first_sum = 0.0, final_sum = 0.0;
  for (int i = 0; i < tail; ++i) first_sum += rewards[i];
  for (int i = stats.n_rows - tail; i < stats.n_rows; ++i) final_sum += rewards[i];
  stats.first10_mean = first_sum / tail;
  stats.final10_mean = final_sum / tail;

  // Level reached when 95% of the first-to-final climb is covered; for a flat
  // curve this is the first row.
  const double threshold =
      stats.first10_mean + 0.95 * (stats.final10_mean - stats.first10_mean);
  int conv_idx = stats.n_rows - 1;
  for (int i = 0; i < stats.n_rows; ++i) {
    if (rewards[i] >= threshold) {
      conv_idx = i;
      break;
    }
  }
  stats.convergence_step = steps[conv_idx];

  double running_max = rewards[conv_idx];
  for (int i = conv_idx; i < stats.n_rows; ++i) {
    running_max = std::max(running_max, rewards[i]);
    stats.max_drawdown = std::max(stats.max_drawdown, running_max - rewards[i]);
  }
  const double range = std::abs(stats.final10_mean - stats.first10_mean);
  stats.has_dip = range > 0.0 && stats.max_drawdown > 0.10 * range;

  if (!svg_path.empty()) {
    SvgCanvas canvas(720, 420);
    const double y_lo = *std::min_element(rewards.begin(), rewards.end());
    const double y_hi = *std::max_element(rewards.begin(), rewards.end());
    canvas.set_viewport(static_cast<double>(steps.front()), static_cast<double>(steps.back()),
                        y_lo, y_hi, 70, 30, 690, 380);
    canvas.frame();
    std::vector<std::pair<double, double>> pts;
    pts.reserve(steps.size());
    for (int i = 0; i < stats.n_rows; ++i) {
      pts.emplace_back(static_cast<double>(steps[i]), rewards[i]);
    }
    canvas.polyline(pts, "#1f77b4", 1.8);
    canvas.text_px(300, 410, "environment steps");
    canvas.text_px(8, 200, "reward");
    std::ostringstream title;
    title << "mean episodic cumulative reward (" << stats.n_rows << " updates)";
    canvas.text_px(70, 20, title.str(), 13);
    canvas.save(svg_path);
  }
  return stats;
}

void plot_trajectory(const Trajectory& traj, const World& world, const Vec3& start,
                     const Vec3& target, const std::string& svg_path) {
  double x_lo = std::min(start.x(), target.x()), x_hi = std::max(start.x(), target.x());
  double y_lo = std::min(start.y(), target.y()), y_hi = std::max(start.y(), target.y());
  double z_lo = std::min({start.z(), target.z(), world.ground_height});
  double z_hi = std::max(start.z(), target.z());
  auto grow = [](double& lo, double& hi, double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (const TrajectoryRow& r : traj.rows) {
    grow(x_lo, x_hi, r.payload.x());
    grow(y_lo, y_hi, r.payload.y());
    grow(z_lo, z_hi, r.payload.z());
  }
  for (const Aabb& box : world.obstacles) {
    grow(x_lo, x_hi, box.min_corner.x());
    grow(x_lo, x_hi, box.max_corner.x());
    grow(y_lo, y_hi, box.min_corner.y());
    grow(y_lo, y_hi, box.max_corner.y());
    grow(z_lo, z_hi, box.max_corner.z());
  }
  const double pad = 1.0;

  SvgCanvas canvas(720, 760);
  // Top-down view (x-y).
  canvas.set_viewport(x_lo - pad, x_hi + pad, y_lo - pad, y_hi + pad, 60, 40, 690, 370);
  canvas.frame();
  canvas.text_px(60, 25, "top view (x-y)", 13);
  for (const Aabb& box : world.obstacles) {
    canvas.rect(box.min_corner.x(), box.min_corner.y(), box.max_corner.x(),
                box.max_corner.y(), "#888888", 0.6);
  }
  std::vector<std::pair<double, double>> xy;
  for (const TrajectoryRow& r : traj.rows) xy.emplace_back(r.payload.x(), r.payload.y());
  canvas.polyline(xy, "black", 1.6);
  canvas.circle(start.x(), start.y(), 4, "#2ca02c");
  canvas.circle(target.x(), target.y(), 4, "#d62728");

  // Side view (x-z).
  canvas.set_viewport(x_lo - pad, x_hi + pad, z_lo - pad, z_hi + pad, 60, 420, 690, 740);
  canvas.frame();
  canvas.text_px(60, 405, "side view (x-z)", 13);
  for (const Aabb& box : world.obstacles) {
    canvas.rect(box.min_corner.x(), box.min_corner.z(), box.max_corner.x(),
                box.max_corner.z(), "#888888", 0.6);
  }
  std::vector<std::pair<double, double>> ground = {
      {x_lo - pad, world.ground_height}, {x_hi + pad, world.ground_height}};
  canvas.polyline(ground, "#8c564b", 1.0);
  std::vector<std::pair<double, double>> xz;
  for (const TrajectoryRow& r : traj.rows) xz.emplace_back(r.payload.x(), r.payload.z());
  canvas.polyline(xz, "black", 1.6);
  canvas.circle(start.x(), start.z(), 4, "#2ca02c");
  canvas.circle(target.x(), target.z(), 4, "#d62728");
  canvas.save(svg_path);
}

}  // namespace craneppo
