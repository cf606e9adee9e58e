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

#include "craneppo/env.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "craneppo/rng.hpp"

namespace craneppo {

void RewardParams::validate() const {
  if (!(p1 > 0.0)) throw std::invalid_argument("RewardParams: p1 must be > 0");
  if (!(p2 < 0.0)) throw std::invalid_argument("RewardParams: p2 must be < 0");
  if (!(p3 < 0.0)) throw std::invalid_argument("RewardParams: p3 must be < 0");
  if (!(p4 < 0.0)) throw std::invalid_argument("RewardParams: p4 must be < 0");
  if (!(p5 > 0.0)) throw std::invalid_argument("RewardParams: p5 must be > 0");
  if (!(theta_thr > 0.0 && theta_thr < 1.5707963267948966)) {
    throw std::invalid_argument("RewardParams: theta_thr must be in (0, pi/2)");
  }
  if (n_step_max < 1) throw std::invalid_argument("RewardParams: n_step_max must be >= 1");
  if (!(success_tol > 0.0)) throw std::invalid_argument("RewardParams: success_tol must be > 0");
}

VecX Observation::to_vector() const {
  VecX v(kObservationDim);
  v << material_pos.x(), material_pos.y(), material_pos.z(), target_pos.x(),
      target_pos.y(), target_pos.z(), distance, collision_warning, rope_angle, steps;
  return v;
}

VecX ObsNormalizer::normalize(const Observation& obs) const {
  VecX v = obs.to_vector();
  v.head(7) /= pos_scale;
  v[8] /= angle_scale;
  v[9] /= steps_scale;
  return v;
}

std::string to_string(TaskKind kind) {
  return kind == TaskKind::kLoading ? "loading" : "unloading";
}

std::string to_string(ObstacleMode mode) {
  return mode == ObstacleMode::kPresent ? "obstacle" : "no_obstacle";
}

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "loading") return TaskKind::kLoading;
  if (s == "unloading") return TaskKind::kUnloading;
  throw std::invalid_argument("unknown task_kind: " + s);
}

std::string to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::kNone: return "none";
    case TerminationReason::kSuccess: return "success";
    case TerminationReason::kCollision: return "collision";
    case TerminationReason::kSwingExceeded: return "swing_exceeded";
    case TerminationReason::kStepLimit: return "step_limit";
  }
  return "none";
}

RewardTerms compute_reward_terms(const RewardParams& params, double distance,
                                 double swing_angle, bool collision) {
  RewardTerms t;
  t.r1 = params.p1 * std::exp2(-distance);
  t.r2 = params.p2 * swing_angle / params.theta_thr;
  t.r3 = params.p3;
  t.r4 = collision ? params.p4 : 0.0;
  t.r5 = (distance <= params.success_tol) ? params.p5 : 0.0;
  return t;
}

CraneEnv::CraneEnv(const CraneConfig& cfg, const RewardParams& reward,
                   const EnvOptions& opts, const Scenario& scenario)
    : cfg_(cfg), reward_(reward), opts_(opts), scenario_(scenario) {
  cfg_.validate();
  reward_.validate();
  scenario_.world.validate();
  validate_scenario(scenario_, cfg_);
}

Observation CraneEnv::reset(std::uint64_t seed) {
  Rng rng(seed);
  target_.x() = rng.uniform(scenario_.target_region.min_x, scenario_.target_region.max_x);
  target_.y() = rng.uniform(scenario_.target_region.min_y, scenario_.target_region.max_y);
  target_.z() = scenario_.target_region.z;

  const Vec3 tip_target = scenario_.material_start + Vec3(0.0, 0.0, cfg_.rope_length);
  const IkResult ik = inverse_kinematics(cfg_, tip_target, scenario_.crane_initial.slew);
  const Vec3 tip = forward_kinematics(cfg_, ik.state);
  if (ik.clamped || (tip - tip_target).norm() > 1e-6) {
    throw std::invalid_argument("CraneEnv::reset: material_start is unreachable");
  }
  crane_ = ik.state;
  payload_ = payload_at_rest(cfg_, tip);
  steps_ = 0;
  terminated_ = false;
  obs_ = make_observation();
  return obs_;
}

StepOutcome CraneEnv::step(const Vec3& action) {
  if (terminated_) {
    throw std::logic_error("CraneEnv::step: episode is terminated (reset first)");
  }
  const Vec3 tip_delta =
      clamp_componentwise(action, -opts_.action_bound, opts_.action_bound);
  const Vec3 payload_before = payload_.payload_pos;
  auto [next_crane, next_payload] = step_dynamics(cfg_, crane_, payload_, tip_delta);
  crane_ = next_crane;
  payload_ = next_payload;
  ++steps_;

  const double dist = (payload_.payload_pos - target_).norm();
  const double theta = payload_.rope_angle;
  const bool hit = collides(scenario_.world, payload_before, payload_.payload_pos,
                            cfg_.payload_half_extents);
  const RewardTerms terms = compute_reward_terms(reward_, dist, theta, hit);

  TerminationReason reason = TerminationReason::kNone;
  if (dist <= reward_.success_tol) {
    reason = TerminationReason::kSuccess;
  } else if (hit) {
    reason = TerminationReason::kCollision;
  } else if (opts_.swing_terminates && theta > reward_.theta_thr) {
    reason = TerminationReason::kSwingExceeded;
  } else if (steps_ >= reward_.n_step_max) {
    reason = TerminationReason::kStepLimit;
  }
  terminated_ = reason != TerminationReason::kNone;

  obs_ = make_observation();
  StepOutcome out;
  out.observation = obs_;
  out.reward = terms.total();
  out.terminated = terminated_;
  out.termination_reason = reason;
  return out;
}

Observation CraneEnv::make_observation() const {
  Observation obs;
  obs.material_pos = payload_.payload_pos;
  obs.target_pos = target_;
  obs.distance = (payload_.payload_pos - target_).norm();
  // The proximity sensor rides on the hook, i.e. the rope's lower endpoint.
  obs.collision_warning =
      static_cast<double>(lidar_flag(scenario_.world, payload_.payload_pos, opts_.lidar_range));
  obs.rope_angle = payload_.rope_angle;
  obs.steps = static_cast<double>(steps_);
  return obs;
}

namespace {

// Desk-scale site constants shared by the canonical scenarios. The crane sits
// at the origin; the deck platform is reachable at short radius and the
// ground pick point further out; the fence stands between them.
constexpr double kPayloadHalf = 0.3;
constexpr double kDeckZ = 1.5;            // payload center resting on the deck
constexpr double kGroundPayloadZ = 0.3;   // payload center resting on the ground
const Vec3 kGroundStart(9.0, 0.0, kGroundPayloadZ);
const Vec3 kDeckStart(4.0, 0.0, kDeckZ);

Aabb fence_box() {
  return Aabb(Vec3(6.2, -2.5, 0.0), Vec3(6.8, 2.5, 2.2));
}

std::vector<Vec3> region_probe_points(const TargetRegion& r) {
  return {Vec3(r.min_x, r.min_y, r.z), Vec3(r.min_x, r.max_y, r.z),
          Vec3(r.max_x, r.min_y, r.z), Vec3(r.max_x, r.max_y, r.z),
          Vec3(0.5 * (r.min_x + r.max_x), 0.5 * (r.min_y + r.max_y), r.z)};
}

}  // namespace

Scenario make_scenario(TaskKind kind, ObstacleMode obstacles) {
  Scenario s;
  s.task_kind = kind;
  s.world.ground_height = 0.0;
  if (kind == TaskKind::kLoading) {
    s.material_start = kGroundStart;
    s.target_region = TargetRegion{3.0, -0.5, 5.0, 0.5, kDeckZ};
  } else {
    s.material_start = kDeckStart;
    s.target_region = TargetRegion{8.0, -0.5, 10.0, 0.5, kGroundPayloadZ};
  }
  if (obstacles == ObstacleMode::kPresent) {
    s.world.obstacles.push_back(fence_box());
  }
  s.name = to_string(kind) + "_" + to_string(obstacles);

  CraneConfig cfg;  // defaults; used for the initial pose and feasibility checks
  const Vec3 tip0 = s.material_start + Vec3(0.0, 0.0, cfg.rope_length);
  s.crane_initial = inverse_kinematics(cfg, tip0, 0.0).state;
  validate_scenario(s, cfg);

  if (obstacles == ObstacleMode::kPresent) {
    for (const Vec3& p : region_probe_points(s.target_region)) {
      bool blocked = false;
      for (const Aabb& box : s.world.obstacles) {
        if (segment_intersects(box, s.material_start, p)) {
          blocked = true;
          break;
        }
      }
      if (!blocked) {
        throw std::logic_error("make_scenario: obstacle does not block the straight path");
      }
    }
  }
  return s;
}

void validate_scenario(const Scenario& scenario, const CraneConfig& cfg) {
  auto reachable = [&](const Vec3& payload_point) {
    const Vec3 tip = payload_point + Vec3(0.0, 0.0, cfg.rope_length);
    const IkResult ik = inverse_kinematics(cfg, tip, 0.0);
    return !ik.clamped &&
           (forward_kinematics(cfg, ik.state) - tip).norm() <= 1e-6;
  };
  if (!reachable(scenario.material_start)) {
    throw std::invalid_argument("scenario: material_start outside the reachable workspace");
  }
  const TargetRegion& r = scenario.target_region;
  if (!(r.min_x <= r.max_x && r.min_y <= r.max_y)) {
    throw std::invalid_argument("scenario: target_region has inverted corners");
  }
  for (const Vec3& p : region_probe_points(r)) {
    if (!reachable(p)) {
      throw std::invalid_argument("scenario: target_region outside the reachable workspace");
    }
  }
}

namespace {

Vec3 vec3_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) {
    throw std::invalid_argument(std::string(what) + ": expected an array of 3 numbers");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j = nlohmann::json::parse(buf.str());
  if (!j.contains("version")) {
    throw std::invalid_argument("scenario file: missing version field");
  }
  if (j.at("version").get<int>() != 1) {
    throw std::invalid_argument("scenario file: unsupported version");
  }

  Scenario s;
  s.name = j.value("name", std::filesystem::path(path).stem().string());
  s.task_kind = task_kind_from_string(j.at("task_kind").get<std::string>());
  if (j.contains("world_file")) {
    const auto world_path =
        std::filesystem::path(path).parent_path() / j.at("world_file").get<std::string>();
    s.world = load_world(world_path.string());
  } else if (j.contains("world")) {
    s.world = world_from_json_text(j.at("world").dump());
  } else {
    throw std::invalid_argument("scenario file: needs world_file or inline world");
  }
  s.material_start = vec3_from_json(j.at("material_start"), "material_start");
  const auto& jr = j.at("target_region");
  s.target_region.min_x = jr.at("min").at(0).get<double>();
  s.target_region.min_y = jr.at("min").at(1).get<double>();
  s.target_region.max_x = jr.at("max").at(0).get<double>();
  s.target_region.max_y = jr.at("max").at(1).get<double>();
  s.target_region.z = jr.at("z").get<double>();
  if (j.contains("crane_initial")) {
    const auto& jc = j.at("crane_initial");
    s.crane_initial.slew = jc.at("slew").get<double>();
    s.crane_initial.luff = jc.at("luff").get<double>();
    s.crane_initial.boom_len = jc.at("boom_len").get<double>();
  }
  return s;
}

void save_scenario(const Scenario& scenario, const std::string& path,
                   const std::string& world_file_ref) {
  nlohmann::json j;
  j["version"] = 1;
  j["name"] = scenario.name;
  j["task_kind"] = to_string(scenario.task_kind);
  if (world_file_ref.empty()) {
    j["world"] = nlohmann::json::parse(world_to_json_text(scenario.world));
  } else {
    j["world_file"] = world_file_ref;
  }
  j["material_start"] = {scenario.material_start.x(), scenario.material_start.y(),
                         scenario.material_start.z()};
  j["target_region"] = {{"min", {scenario.target_region.min_x, scenario.target_region.min_y}},
                        {"max", {scenario.target_region.max_x, scenario.target_region.max_y}},
                        {"z", scenario.target_region.z}};
  j["crane_initial"] = {{"slew", scenario.crane_initial.slew},
                        {"luff", scenario.crane_initial.luff},
                        {"boom_len", scenario.crane_initial.boom_len}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace craneppo
