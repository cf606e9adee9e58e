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
#include <memory>
#include <string>

#include "craneppo/crane.hpp"
#include "craneppo/types.hpp"
#include "craneppo/world.hpp"

namespace craneppo {

// Reward weights and episode limits. Signs follow the five-term design the
// trainer optimizes against: approach bonus, swing penalty, per-step time
// penalty, collision penalty, success bonus.
struct RewardParams {
  // The success bonus has to beat the discounted stream of approach rewards
  // available from hovering next to the target (p1 * 2^-tol / (1 - gamma)),
  // otherwise the optimal policy parks just outside the tolerance sphere.
  double p1 = 1.0;      // > 0, approach reward scale
  double p2 = -0.5;     // < 0, swing penalty scale
  double p3 = -0.01;    // < 0, per-step time penalty
  double p4 = -10.0;    // < 0, collision penalty
  double p5 = 100.0;    // > 0, success reward
  double theta_thr = 0.35;   // rad, maximum allowable swing angle
  int n_step_max = 500;      // maximum allowable steps per episode
  double success_tol = 0.5;  // m

  void validate() const;
};

// Environment knobs that are not reward weights.
struct EnvOptions {
  double action_bound = 0.5;    // m per component per step
  bool swing_terminates = true; // exceeding theta_thr ends the episode
  double lidar_range = 5.0;     // m
};

// The 10-number state vector fed to actor and critic, in listed order.
struct Observation {
  Vec3 material_pos = Vec3::Zero();
  Vec3 target_pos = Vec3::Zero();
  double distance = 0.0;
  double collision_warning = 0.0;  // {0, 1}
  double rope_angle = 0.0;         // rad
  double steps = 0.0;              // count

  VecX to_vector() const;
};

inline constexpr int kObservationDim = 10;
inline constexpr int kActionDim = 3;

// Scales applied at the policy boundary; stored in checkpoints so evaluation
// always normalizes the way training did.
struct ObsNormalizer {
  double pos_scale = 20.0;
  double angle_scale = 0.35;
  double steps_scale = 500.0;

  VecX normalize(const Observation& obs) const;
};

enum class TaskKind { kLoading, kUnloading };
enum class ObstacleMode { kPresent, kAbsent };

std::string to_string(TaskKind kind);
std::string to_string(ObstacleMode mode);
TaskKind task_kind_from_string(const std::string& s);

// Rectangle of candidate targets at a fixed height.
struct TargetRegion {
  double min_x = 0.0, min_y = 0.0;
  double max_x = 0.0, max_y = 0.0;
  double z = 0.0;
};

struct Scenario {
  std::string name;
  TaskKind task_kind = TaskKind::kLoading;
  World world;
  Vec3 material_start = Vec3::Zero();
  TargetRegion target_region;
  CraneState crane_initial;
};

enum class TerminationReason { kNone, kSuccess, kCollision, kSwingExceeded, kStepLimit };

std::string to_string(TerminationReason reason);

// The five per-step reward terms: approach, swing, time, collision, success.
struct RewardTerms {
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
  double r4 = 0.0;
  double r5 = 0.0;

  double total() const { return r1 + r2 + r3 + r4 + r5; }
};

RewardTerms compute_reward_terms(const RewardParams& params, double distance,
                                 double swing_angle, bool collision);

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  bool terminated = false;
  TerminationReason termination_reason = TerminationReason::kNone;
};

// Common surface the trainer and evaluator drive. Implementations own their
// state; instances step independently in parallel.
class EnvBase {
 public:
  virtual ~EnvBase() = default;
  virtual Observation reset(std::uint64_t seed) = 0;
  virtual StepOutcome step(const Vec3& action) = 0;
  virtual const Observation& observation() const = 0;
  virtual bool is_terminated() const = 0;
  virtual const RewardParams& reward_params() const = 0;
  virtual double action_bound() const = 0;
  virtual Vec3 tip_position() const = 0;
  virtual const World* world_ptr() const { return nullptr; }
};

// Crane lift environment: payload transport to a target sampled per episode,
// with swing and collision handling.
class CraneEnv : public EnvBase {
 public:
  CraneEnv(const CraneConfig& cfg, const RewardParams& reward, const EnvOptions& opts,
           const Scenario& scenario);

  // Samples the episode target from the region, poses the boom tip directly
  // above the material by IK, and hangs the payload at rest.
  Observation reset(std::uint64_t seed) override;
  StepOutcome step(const Vec3& action) override;

  const Observation& observation() const override { return obs_; }
  bool is_terminated() const override { return terminated_; }
  const RewardParams& reward_params() const override { return reward_; }
  double action_bound() const override { return opts_.action_bound; }
  Vec3 tip_position() const override { return forward_kinematics(cfg_, crane_); }
  const World* world_ptr() const override { return &scenario_.world; }

  const CraneState& crane_state() const { return crane_; }
  const PayloadState& payload_state() const { return payload_; }
  const Vec3& target() const { return target_; }
  int steps() const { return steps_; }
  const Scenario& scenario() const { return scenario_; }
  const CraneConfig& crane_config() const { return cfg_; }

 private:
  Observation make_observation() const;

  CraneConfig cfg_;
  RewardParams reward_;
  EnvOptions opts_;
  Scenario scenario_;

  CraneState crane_;
  PayloadState payload_;
  Vec3 target_ = Vec3::Zero();
  int steps_ = 0;
  bool terminated_ = true;  // stepping before the first reset is a usage error
  Observation obs_;
};

// Canonical loading/unloading scenarios at desk scale. With obstacles, a
// fence is placed so that every straight segment from the material start to
// the target region is blocked (checked over region corners and center).
Scenario make_scenario(TaskKind kind, ObstacleMode obstacles);

// Throws when the material start or some target-region point is outside the
// crane's reachable workspace.
void validate_scenario(const Scenario& scenario, const CraneConfig& cfg);

// Scenario documents (JSON, versioned); the world may be inline or referenced
// by a path relative to the scenario file.
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path,
                   const std::string& world_file_ref = "");

}  // namespace craneppo
