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

#include "craneppo/env.hpp"

namespace craneppo {

// Built-in 3D reach task: a free point moved by clamped position increments
// toward a target sampled per episode. Shares the observation layout and
// reward structure of the crane task with the swing and collision terms
// inactive; used as the fast end-to-end check of the training loop.
class PointMassEnv : public EnvBase {
 public:
  PointMassEnv(const RewardParams& reward, const EnvOptions& opts);

  Observation reset(std::uint64_t seed) override;
  StepOutcome step(const Vec3& action) override;

  const Observation& observation() const override { return obs_; }
  bool is_terminated() const override { return terminated_; }
  const RewardParams& reward_params() const override { return reward_; }
  double action_bound() const override { return opts_.action_bound; }
  Vec3 tip_position() const override { return pos_; }

  static RewardParams default_reward();
  const Vec3& target() const { return target_; }

 private:
  Observation make_observation() const;

  RewardParams reward_;
  EnvOptions opts_;
  Vec3 start_ = Vec3(-3.0, -3.0, 1.0);
  TargetRegion region_{1.0, 1.0, 4.0, 4.0, 2.0};
  Vec3 pos_ = Vec3::Zero();
  Vec3 target_ = Vec3::Zero();
  int steps_ = 0;
  bool terminated_ = true;
  Observation obs_;
};

}  // namespace craneppo
