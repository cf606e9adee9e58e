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
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "craneppo/checkpoint.hpp"
#include "craneppo/env.hpp"
#include "craneppo/neural.hpp"
#include "craneppo/rng.hpp"

namespace craneppo {

// Hyperparameters of the clipped-surrogate training loop. The learning rate
// and the total step budget carry the published protocol's values; the rest
// are the usual companions of the algorithm and are all config-exposed.
struct PpoConfig {
  double clip_eps = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  int epochs_per_update = 10;
  int minibatch_size = 64;
  int steps_per_update = 2048;
  std::int64_t total_steps = 1'000'000;
  double learning_rate = 3e-5;
  double value_coef = 1.0;       // critic learning-rate multiplier
  double entropy_coef = 0.0;
  double max_grad_norm = 0.5;
  std::uint64_t seed = 0;
  int n_envs = 8;
  int workers = 1;
  bool lr_decay = false;         // linear decay to 0 over total_steps
  int hidden_width = 64;
  // Initial exploration scale, in normalized action units. Unit noise swings
  // the payload past theta_thr within a handful of steps, which makes quick
  // self-termination the nearest local optimum; starting narrower keeps early
  // episodes alive long enough for the approach reward to matter.
  double init_log_std = -1.6;
  int checkpoint_every = 25;     // updates between periodic checkpoints
  bool log_wall_time = true;     // write measured wall time into the CSV

  void validate() const;
};

struct EpisodeStat {
  double cum_reward = 0.0;
  int length = 0;
  double mean_rope_angle = 0.0;
  TerminationReason reason = TerminationReason::kNone;
};

// Per-step records over the trajectories of one collection phase, laid out
// slot-major: index = slot * steps_per_env + t.
struct RolloutBuffer {
  int n_envs = 0;
  int steps_per_env = 0;
  std::vector<VecX> obs_norm;        // policy inputs at collection time
  std::vector<VecX> actions;          // raw (unscaled) actor samples
  std::vector<double> rewards;
  std::vector<double> values;         // V(s_t) under the collection critic
  std::vector<double> log_probs_old;
  std::vector<std::uint8_t> dones;
  std::vector<double> bootstrap_values;  // per slot: V of the state after the last step
  std::vector<EpisodeStat> episodes;     // completed during this phase, slot-major
  double rope_angle_sum = 0.0;           // over all collected steps

  int size() const { return n_envs * steps_per_env; }
  int index(int slot, int t) const { return slot * steps_per_env + t; }
};

// Environment slots owned by the trainer: env instances plus the per-slot
// action and reset-seed streams that make collection independent per slot
// (and therefore identical for any worker count).
class EnvSlots {
 public:
  EnvSlots(std::vector<std::unique_ptr<EnvBase>> envs, std::uint64_t base_seed);

  int count() const { return static_cast<int>(envs_.size()); }
  EnvBase& env(int slot) { return *envs_[slot]; }
  Rng& action_rng(int slot) { return action_rngs_[slot]; }
  std::uint64_t next_reset_seed(int slot);
  double action_bound() const { return envs_.front()->action_bound(); }

  // Resets every slot to the first seed of its stream.
  void reset_all();

  const Observation& current_obs(int slot) const { return current_obs_[slot]; }
  void set_current_obs(int slot, const Observation& obs) { current_obs_[slot] = obs; }

  // Partial-episode accumulators carried across collection phases.
  double& ep_reward(int slot) { return ep_reward_[slot]; }
  int& ep_length(int slot) { return ep_length_[slot]; }
  double& ep_rope_sum(int slot) { return ep_rope_sum_[slot]; }

 private:
  std::vector<std::unique_ptr<EnvBase>> envs_;
  std::vector<Rng> action_rngs_;
  std::vector<std::uint64_t> episode_counters_;
  std::uint64_t base_seed_;
  std::vector<Observation> current_obs_;
  std::vector<double> ep_reward_;
  std::vector<int> ep_length_;
  std::vector<double> ep_rope_sum_;
};

// Samples actions from the policy, steps every slot for n_steps/n_envs steps,
// auto-resetting finished episodes with the next seed of the slot's stream,
// and bootstraps unfinished segments with the critic.
RolloutBuffer collect_rollouts(const GaussianPolicy& policy, const Mlp& value_net,
                               EnvSlots& slots, const ObsNormalizer& normalizer,
                               int n_steps, int workers = 1);

struct AdvantageEstimate {
  VecX raw_advantages;  // GAE before normalization
  VecX advantages;      // normalized per update: zero mean, unit variance
  VecX returns;         // regression targets for the critic
};

AdvantageEstimate compute_gae(const RolloutBuffer& buffer, double gamma, double lambda);

struct MiniBatch {
  MatX obs;       // obs_dim x B
  MatX actions;   // act_dim x B
  VecX log_probs_old;
  VecX advantages;
  VecX returns;
};

struct LossResult {
  double loss = 0.0;
  VecX grad;  // flat, matching the network's flatten() order
};

// Clipped-surrogate policy loss (negated objective) with an optional entropy
// bonus; gradient flows through the unclipped branch exactly when it attains
// the min. Throws on a non-finite ratio.
LossResult actor_loss(const GaussianPolicy& policy, const MiniBatch& batch,
                      double clip_eps, double entropy_coef);

// Mean squared error of the value head against the return targets.
LossResult critic_loss(const Mlp& value_net, const MiniBatch& batch);

// In-place gradient rescaling to the global-norm bound; a bound <= 0 disables it.
void clip_grad_norm(VecX& grad, double max_norm);

struct TrainInputs {
  PpoConfig ppo;
  CraneConfig crane;
  RewardParams reward;
  EnvOptions env_opts;
  std::vector<Scenario> scenarios;  // slot i runs scenarios[i % size]
  bool point_mass = false;          // built-in reach task instead of the crane
  std::string out_dir;
};

struct TrainResult {
  std::string checkpoint_path;   // final checkpoint
  std::string log_path;          // learning-curve CSV
  std::int64_t env_steps = 0;
  int updates = 0;
};

// Raised when a loss goes non-finite; the last written checkpoint stays on disk.
struct TrainingDiverged : std::runtime_error {
  explicit TrainingDiverged(const std::string& what) : std::runtime_error(what) {}
};

// Full training run: alternates collection, advantage estimation and
// minibatched actor/critic updates until the step budget is consumed, logging
// one CSV row per update and checkpointing periodically. Deterministic given
// the config (the wall-time column aside, which the log_wall_time switch
// zeroes when bit-identical logs matter).
TrainResult train(const TrainInputs& inputs);

std::vector<std::unique_ptr<EnvBase>> make_envs(const TrainInputs& inputs, int count);

}  // namespace craneppo
