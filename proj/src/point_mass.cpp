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

#include "craneppo/point_mass.hpp"

#include <cmath>
#include <stdexcept>

#include "craneppo/rng.hpp"

namespace craneppo {

RewardParams PointMassEnv::default_reward() {
  RewardParams r;
  r.n_step_max = 200;
  return r;
}

PointMassEnv::PointMassEnv(const RewardParams& reward, const EnvOptions& opts)
    : reward_(reward), opts_(opts) {
  reward_.validate();
}

Observation PointMassEnv::reset(std::uint64_t seed) {
  Rng rng(seed);
  target_.x() = rng.uniform(region_.min_x, region_.max_x);
  target_.y() = rng.uniform(region_.min_y, region_.max_y);
  target_.z() = region_.z;
  pos_ = start_;
  steps_ = 0;
  terminated_ = false;
  obs_ = make_observation();
  return obs_;
}

StepOutcome PointMassEnv::step(const Vec3& action) {
  if (terminated_) {
    throw std::logic_error("PointMassEnv::step: episode is terminated (reset first)");
  }
  pos_ += clamp_componentwise(action, -opts_.action_bound, opts_.action_bound);
  ++steps_;

  const double dist = (pos_ - target_).norm();
  const RewardTerms terms = compute_reward_terms(reward_, dist, 0.0, false);

  TerminationReason reason = TerminationReason::kNone;
  if (dist <= reward_.success_tol) {
    reason = TerminationReason::kSuccess;
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

Observation PointMassEnv::make_observation() const {
  Observation obs;
  obs.material_pos = pos_;
  obs.target_pos = target_;
  obs.distance = (pos_ - target_).norm();
  obs.collision_warning = 0.0;
  obs.rope_angle = 0.0;
  obs.steps = static_cast<double>(steps_);
  return obs;
}

}  // namespace craneppo
