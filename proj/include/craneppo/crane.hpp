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

#include <utility>

#include "craneppo/types.hpp"

namespace craneppo {

// Crane geometry, joint limits and integration parameters. The dimensions
// are representative of a mid-size telescopic mobile crane; every field is
// overridable from the run configuration.
struct CraneConfig {
  Vec3 base_pos = Vec3::Zero();
  double boom_pivot_height = 3.0;   // m above base
  double boom_min_len = 4.0;        // m
  double boom_max_len = 20.0;       // m
  double luff_min = 0.0;            // rad
  double luff_max = 1.3962634015954636;  // 80 degrees
  double slew_rate_max = 0.05;      // rad per step
  double luff_rate_max = 0.05;      // rad per step
  double telescope_rate_max = 0.3;  // m per step
  double rope_length = 5.0;         // m
  Vec3 payload_half_extents = Vec3(0.3, 0.3, 0.3);
  double damping = 0.99;            // per-substep velocity factor, (0, 1]
  double gravity = 9.81;            // m/s^2
  double dt = 0.02;                 // s per physics substep
  int substeps = 1;                 // physics substeps per control step

  void validate() const;
};

// Internal degrees of freedom: rotation about the vertical axis, boom
// elevation angle, boom extension.
struct CraneState {
  double slew = 0.0;      // rad
  double luff = 0.0;      // rad
  double boom_len = 4.0;  // m
};

// Suspended point-mass payload on a rigid rope below the boom tip.
struct PayloadState {
  Vec3 payload_pos = Vec3::Zero();
  Vec3 payload_vel = Vec3::Zero();
  double rope_angle = 0.0;  // rad from vertical, >= 0
};

struct IkResult {
  CraneState state;
  bool clamped = false;  // true when any joint had to be limited
};

// Boom tip position for the given joint values.
Vec3 forward_kinematics(const CraneConfig& cfg, const CraneState& st);

// Joint values that place the boom tip at target_tip, clamped to the joint
// box when the target is unreachable. A target on the pivot axis leaves the
// slew at prev_slew (any slew is kinematically equivalent there and
// continuity is what the rate limiter wants).
IkResult inverse_kinematics(const CraneConfig& cfg, const Vec3& target_tip,
                            double prev_slew = 0.0);

// Angle between (tip - payload_pos) and +z, in [0, pi]. Throws on a
// zero-length rope vector.
double rope_angle(const Vec3& tip, const Vec3& payload_pos);

// Advance crane and payload by one control step. The commanded tip motion is
// realized through IK under per-joint rate limits; the payload follows as a
// damped spherical pendulum integrated semi-implicitly with the position
// re-projected onto the rope sphere each substep.
std::pair<CraneState, PayloadState> step_dynamics(const CraneConfig& cfg,
                                                  const CraneState& crane,
                                                  const PayloadState& payload,
                                                  const Vec3& tip_delta);

// Payload hanging at rest on a vertical rope below the tip.
PayloadState payload_at_rest(const CraneConfig& cfg, const Vec3& tip);

// Shortest signed angular difference a - b, wrapped to (-pi, pi].
double wrap_angle_diff(double a, double b);

}  // namespace craneppo
