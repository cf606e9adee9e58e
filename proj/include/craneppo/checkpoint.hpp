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

#include <string>

#include "craneppo/env.hpp"
#include "craneppo/neural.hpp"

namespace craneppo {

// Trained model snapshot: actor, critic, the observation normalization it was
// trained with, its action scale, and the reward parameters of the run.
// Serialized to the versioned little-endian binary layout documented in the
// README; parameters are 64-bit floats in row-major order, so a round trip is
// bitwise exact.
struct Checkpoint {
  GaussianPolicy actor;
  Mlp critic;
  ObsNormalizer normalizer;
  RewardParams reward;
  double action_bound = 0.5;
  std::int64_t env_steps = 0;  // training steps consumed when saved
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace craneppo
