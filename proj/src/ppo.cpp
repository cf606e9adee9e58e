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

#include "craneppo/ppo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "craneppo/point_mass.hpp"

namespace craneppo {

void PpoConfig::validate() const {
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) {
    throw std::invalid_argument("PpoConfig: clip_eps must be in (0, 1)");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("PpoConfig: gamma must be in (0, 1]");
  }
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
    throw std::invalid_argument("PpoConfig: gae_lambda must be in [0, 1]");
  }
  if (epochs_per_update < 1 || minibatch_size < 1 || steps_per_update < 1) {
    throw std::invalid_argument("PpoConfig: epochs, minibatch and steps must be >= 1");
  }
  if (total_steps < steps_per_update) {
    throw std::invalid_argument("PpoConfig: total_steps must be >= steps_per_update");
  }
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("PpoConfig: learning_rate must be > 0");
  }
  if (n_envs < 1 || workers < 1 || hidden_width < 1 || checkpoint_every < 1) {
    throw std::invalid_argument("PpoConfig: n_envs, workers, hidden_width, checkpoint_every must be >= 1");
  }
  if (steps_per_update % n_envs != 0) {
    throw std::invalid_argument("PpoConfig: steps_per_update must be divisible by n_envs");
  }
}

EnvSlots::EnvSlots(std::vector<std::unique_ptr<EnvBase>> envs, std::uint64_t base_seed)
    : envs_(std::move(envs)), base_seed_(base_seed) {
  if (envs_.empty()) throw std::invalid_argument("EnvSlots: need at least one env");
  const int n = static_cast<int>(envs_.size());
  for (int i = 0; i < n; ++i) {
    // Distinct fixed-offset streams per slot keep slots independent of each
    // other and of the master stream.
    action_rngs_.emplace_back(base_seed_ ^ (0x9E3779B97F4A7C15ULL * (i + 1)));
    episode_counters_.push_back(0);
  }
  current_obs_.resize(n);
  ep_reward_.assign(n, 0.0);
  ep_length_.assign(n, 0);
  ep_rope_sum_.assign(n, 0.0);
}

std::uint64_t EnvSlots::next_reset_seed(int slot) {
  return base_seed_ + 1000003ULL * static_cast<std::uint64_t>(slot + 1) +
         episode_counters_[slot]++;
}

void EnvSlots::reset_all() {
  for (int i = 0; i < count(); ++i) {
    current_obs_[i] = envs_[i]->reset(next_reset_seed(i));
    ep_reward_[i] = 0.0;
    ep_length_[i] = 0;
    ep_rope_sum_[i] = 0.0;
  }
}

namespace {

void run_sliced(int n_slots, int workers, const std::function<void(int)>& body) {
  if (workers <= 1 || n_slots <= 1) {
    for (int i = 0; i < n_slots; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  const int n_threads = std::min(workers, n_slots);
  pool.reserve(n_threads);
  for (int w = 0; w < n_threads; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n_slots; i += n_threads) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

RolloutBuffer collect_rollouts(const GaussianPolicy& policy, const Mlp& value_net,
                               EnvSlots& slots, const ObsNormalizer& normalizer,
                               int n_steps, int workers) {
  const int n_envs = slots.count();
  if (n_steps % n_envs != 0) {
    throw std::invalid_argument("collect_rollouts: n_steps must be divisible by env count");
  }
  const int steps_per_env = n_steps / n_envs;

  RolloutBuffer buf;
  buf.n_envs = n_envs;
  buf.steps_per_env = steps_per_env;
  buf.obs_norm.resize(buf.size());
  buf.actions.resize(buf.size());
  buf.rewards.assign(buf.size(), 0.0);
  buf.values.assign(buf.size(), 0.0);
  buf.log_probs_old.assign(buf.size(), 0.0);
  buf.dones.assign(buf.size(), 0);
  buf.bootstrap_values.assign(n_envs, 0.0);
  if (steps_per_env == 0) return buf;

  const double a_max = slots.action_bound();
  std::vector<std::vector<EpisodeStat>> slot_episodes(n_envs);
  std::vector<double> slot_rope_sum(n_envs, 0.0);

  run_sliced(n_envs, workers, [&](int slot) {
    EnvBase& env = slots.env(slot);
    Rng& rng = slots.action_rng(slot);
    for (int t = 0; t < steps_per_env; ++t) {
      const int k = buf.index(slot, t);
      const VecX x = normalizer.normalize(slots.current_obs(slot));
      const VecX a = sample_action(policy, x, rng);
      buf.obs_norm[k] = x;
      buf.actions[k] = a;
      buf.log_probs_old[k] = log_prob(policy, x, a);
      buf.values[k] = mlp_forward_vec(value_net, x)[0];

      const StepOutcome outcome = env.step(Vec3(a[0], a[1], a[2]) * a_max);
      buf.rewards[k] = outcome.reward;
      buf.dones[k] = outcome.terminated ? 1 : 0;
      slot_rope_sum[slot] += outcome.observation.rope_angle;

      slots.ep_reward(slot) += outcome.reward;
      slots.ep_length(slot) += 1;
      slots.ep_rope_sum(slot) += outcome.observation.rope_angle;

      if (outcome.terminated) {
        EpisodeStat stat;
        stat.cum_reward = slots.ep_reward(slot);
        stat.length = slots.ep_length(slot);
        stat.mean_rope_angle = slots.ep_rope_sum(slot) / stat.length;
        stat.reason = outcome.termination_reason;
        slot_episodes[slot].push_back(stat);
        slots.ep_reward(slot) = 0.0;
        slots.ep_length(slot) = 0;
        slots.ep_rope_sum(slot) = 0.0;
        slots.set_current_obs(slot, env.reset(slots.next_reset_seed(slot)));
      } else {
        slots.set_current_obs(slot, outcome.observation);
      }
    }
    const int last = buf.index(slot, steps_per_env - 1);
    buf.bootstrap_values[slot] =
        buf.dones[last] ? 0.0
                        : mlp_forward_vec(value_net,
                                          normalizer.normalize(slots.current_obs(slot)))[0];
  });

  for (int slot = 0; slot < n_envs; ++slot) {
    buf.rope_angle_sum += slot_rope_sum[slot];
    buf.episodes.insert(buf.episodes.end(), slot_episodes[slot].begin(),
                        slot_episodes[slot].end());
  }
  return buf;
}

AdvantageEstimate compute_gae(const RolloutBuffer& buffer, double gamma, double lambda) {
  AdvantageEstimate est;
  const int n = buffer.size();
  est.raw_advantages = VecX::Zero(n);
  est.advantages = VecX::Zero(n);
  est.returns = VecX::Zero(n);
  if (n == 0) return est;

  for (int slot = 0; slot < buffer.n_envs; ++slot) {
    double carry = 0.0;
    for (int t = buffer.steps_per_env - 1; t >= 0; --t) {
      const int k = buffer.index(slot, t);
      const double nonterminal = buffer.dones[k] ? 0.0 : 1.0;
      const double next_value = (t == buffer.steps_per_env - 1)
                                    ? buffer.bootstrap_values[slot]
                                    : buffer.values[buffer.index(slot, t + 1)];
      const double delta =
          buffer.rewards[k] + gamma * next_value * nonterminal - buffer.values[k];
      carry = delta + gamma * lambda * nonterminal * carry;
      est.raw_advantages[k] = carry;
      est.returns[k] = carry + buffer.values[k];
    }
  }

  if (n > 1) {
    const double mean = est.raw_advantages.mean();
    const double var = (est.raw_advantages.array() - mean).square().sum() / n;
    const double std = std::sqrt(var);
    if (std > 0.0) {
      est.advantages = (est.raw_advantages.array() - mean) / std;
    }
  } else {
    est.advantages = est.raw_advantages;
  }
  return est;
}

LossResult actor_loss(const GaussianPolicy& policy, const MiniBatch& batch,
                      double clip_eps, double entropy_coef) {
  const Eigen::Index b = batch.obs.cols();
  if (b == 0) throw std::invalid_argument("actor_loss: empty batch");
  const Eigen::Index act_dim = batch.actions.rows();

  MlpCache cache;
  const MatX mu = mlp_forward(policy.mean_net, batch.obs, &cache);

  VecX sigma(act_dim), inv_var(act_dim);
  for (Eigen::Index i = 0; i < act_dim; ++i) {
    sigma[i] = std::exp(policy.log_std[i]);
    inv_var[i] = 1.0 / (sigma[i] * sigma[i]);
  }
  const double log_norm =
      -0.5 * static_cast<double>(act_dim) * 1.8378770664093453 - policy.log_std.sum();

  MatX upstream = MatX::Zero(act_dim, b);  // d(loss)/d(mu), column per sample
  VecX d_log_std = VecX::Zero(act_dim);
  double surrogate_sum = 0.0;

  for (Eigen::Index col = 0; col < b; ++col) {
    const VecX diff = batch.actions.col(col) - mu.col(col);
    const double quad = (diff.array().square() * inv_var.array()).sum();
    const double lp_new = log_norm - 0.5 * quad;
    const double ratio = std::exp(lp_new - batch.log_probs_old[col]);
    if (!std::isfinite(ratio)) {
      throw std::runtime_error("actor_loss: non-finite probability ratio");
    }
    const double adv = batch.advantages[col];
    const double surr_unclipped = ratio * adv;
    const double surr_clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * adv;
    surrogate_sum += std::min(surr_unclipped, surr_clipped);

    if (surr_unclipped <= surr_clipped) {
      // Gradient of -surr/b through the unclipped branch; the clipped branch
      // is flat wherever it is the strict minimum.
      const double w = -adv * ratio / static_cast<double>(b);
      upstream.col(col) = w * (diff.array() * inv_var.array()).matrix();
      d_log_std.array() +=
          w * (diff.array().square() * inv_var.array() - 1.0);
    }
  }

  const double entropy = policy_entropy(policy);
  LossResult res;
  res.loss = -surrogate_sum / static_cast<double>(b) - entropy_coef * entropy;
  d_log_std.array() -= entropy_coef;  // d entropy / d log_std_i = 1

  PolicyGrad pg;
  pg.net = mlp_backward(policy.mean_net, cache, upstream);
  pg.d_log_std = d_log_std;
  res.grad = pg.flatten();
  return res;
}

LossResult critic_loss(const Mlp& value_net, const MiniBatch& batch) {
  const Eigen::Index b = batch.obs.cols();
  if (b == 0) throw std::invalid_argument("critic_loss: empty batch");
  MlpCache cache;
  const MatX v = mlp_forward(value_net, batch.obs, &cache);  // 1 x B
  const Eigen::RowVectorXd err = v.row(0) - batch.returns.transpose();
  LossResult res;
  res.loss = err.squaredNorm() / static_cast<double>(b);
  const MatX upstream = (2.0 / static_cast<double>(b)) * err;
  res.grad = mlp_backward(value_net, cache, upstream).flatten();
  return res;
}

void clip_grad_norm(VecX& grad, double max_norm) {
  if (max_norm <= 0.0) return;
  const double norm = grad.norm();
  if (norm > max_norm) grad *= max_norm / norm;
}

std::vector<std::unique_ptr<EnvBase>> make_envs(const TrainInputs& inputs, int count) {
  std::vector<std::unique_ptr<EnvBase>> envs;
  envs.reserve(count);
  for (int i = 0; i < count; ++i) {
    if (inputs.point_mass) {
      envs.push_back(std::make_unique<PointMassEnv>(inputs.reward, inputs.env_opts));
    } else {
      if (inputs.scenarios.empty()) {
        throw std::invalid_argument("train: no scenario given");
      }
      const Scenario& sc = inputs.scenarios[i % inputs.scenarios.size()];
      envs.push_back(std::make_unique<CraneEnv>(inputs.crane, inputs.reward,
                                                inputs.env_opts, sc));
    }
  }
  return envs;
}

namespace {

struct UpdateStats {
  double mean_cum_reward = 0.0;
  double success_rate = 0.0;
  double mean_rope_angle = 0.0;
  double mean_ep_len = 0.0;
  int episodes = 0;
};

UpdateStats summarize(const RolloutBuffer& buf) {
  UpdateStats s;
  s.episodes = static_cast<int>(buf.episodes.size());
  if (buf.size() > 0) s.mean_rope_angle = buf.rope_angle_sum / buf.size();
  if (s.episodes == 0) return s;
  int successes = 0;
  for (const EpisodeStat& e : buf.episodes) {
    s.mean_cum_reward += e.cum_reward;
    s.mean_ep_len += e.length;
    if (e.reason == TerminationReason::kSuccess) ++successes;
  }
  s.mean_cum_reward /= s.episodes;
  s.mean_ep_len /= s.episodes;
  s.success_rate = static_cast<double>(successes) / s.episodes;
  return s;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

TrainResult train(const TrainInputs& inputs) {
  const PpoConfig& cfg = inputs.ppo;
  cfg.validate();
  inputs.reward.validate();
  if (!inputs.point_mass) inputs.crane.validate();

  std::filesystem::create_directories(inputs.out_dir);
  const std::string log_path = inputs.out_dir + "/learning_curve.csv";
  const std::string last_path = inputs.out_dir + "/checkpoint_last.bin";
  const std::string final_path = inputs.out_dir + "/checkpoint_final.bin";

  Rng master(cfg.seed);
  const int w = cfg.hidden_width;
  GaussianPolicy policy;
  policy.mean_net = Mlp::orthogonal({kObservationDim, w, w, kActionDim}, master,
                                    std::sqrt(2.0), 0.01);
  policy.log_std = VecX::Constant(kActionDim, cfg.init_log_std);
  Mlp critic = Mlp::orthogonal({kObservationDim, w, w, 1}, master, std::sqrt(2.0), 1.0);

  ObsNormalizer normalizer;
  normalizer.angle_scale = inputs.reward.theta_thr;
  normalizer.steps_scale = static_cast<double>(inputs.reward.n_step_max);

  AdamState actor_opt(static_cast<Eigen::Index>(policy.param_count()), cfg.learning_rate);
  AdamState critic_opt(static_cast<Eigen::Index>(critic.param_count()),
                       cfg.learning_rate * cfg.value_coef);

  EnvSlots slots(make_envs(inputs, cfg.n_envs), cfg.seed);
  slots.reset_all();

  Checkpoint ckpt;
  ckpt.normalizer = normalizer;
  ckpt.reward = inputs.reward;
  ckpt.action_bound = inputs.env_opts.action_bound;
  auto snapshot = [&](std::int64_t steps_done) {
    ckpt.actor = policy;
    ckpt.critic = critic;
    ckpt.env_steps = steps_done;
  };

  std::ofstream log(log_path);
  if (!log) throw std::runtime_error("cannot write learning curve: " + log_path);
  log << "env_steps,mean_cum_reward,success_rate,mean_rope_angle,mean_ep_len,wall_time_s\n";

  const auto t_start = std::chrono::steady_clock::now();
  std::int64_t steps_done = 0;
  int updates = 0;
  VecX actor_params = policy.flatten();
  VecX critic_params = critic.flatten();

  while (steps_done < cfg.total_steps) {
    if (cfg.lr_decay) {
      const double frac =
          1.0 - static_cast<double>(steps_done) / static_cast<double>(cfg.total_steps);
      actor_opt.learning_rate = cfg.learning_rate * frac;
      critic_opt.learning_rate = cfg.learning_rate * cfg.value_coef * frac;
    }

    RolloutBuffer buf =
        collect_rollouts(policy, critic, slots, normalizer, cfg.steps_per_update, cfg.workers);
    steps_done += buf.size();
    const AdvantageEstimate adv = compute_gae(buf, cfg.gamma, cfg.gae_lambda);

    const int n = buf.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    try {
      for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
        // Fisher-Yates with the master stream; deterministic given the seed.
        for (int i = n - 1; i > 0; --i) {
          const int j = static_cast<int>(master.next_u64() % static_cast<std::uint64_t>(i + 1));
          std::swap(order[i], order[j]);
        }
        for (int begin = 0; begin < n; begin += cfg.minibatch_size) {
          const int bsz = std::min(cfg.minibatch_size, n - begin);
          MiniBatch batch;
          batch.obs.resize(kObservationDim, bsz);
          batch.actions.resize(kActionDim, bsz);
          batch.log_probs_old.resize(bsz);
          batch.advantages.resize(bsz);
          batch.returns.resize(bsz);
          for (int i = 0; i < bsz; ++i) {
            const int k = order[begin + i];
            batch.obs.col(i) = buf.obs_norm[k];
            batch.actions.col(i) = buf.actions[k];
            batch.log_probs_old[i] = buf.log_probs_old[k];
            batch.advantages[i] = adv.advantages[k];
            batch.returns[i] = adv.returns[k];
          }

          LossResult al = actor_loss(policy, batch, cfg.clip_eps, cfg.entropy_coef);
          if (!std::isfinite(al.loss)) throw TrainingDiverged("actor loss is non-finite");
          clip_grad_norm(al.grad, cfg.max_grad_norm);
          actor_opt.step(actor_params, al.grad);
          policy.unflatten(actor_params);
          clamp_log_std(policy);
          actor_params = policy.flatten();

          LossResult cl = critic_loss(critic, batch);
          if (!std::isfinite(cl.loss)) throw TrainingDiverged("critic loss is non-finite");
          clip_grad_norm(cl.grad, cfg.max_grad_norm);
          critic_opt.step(critic_params, cl.grad);
          critic.unflatten(critic_params);
        }
      }
    } catch (const std::exception& e) {
      // Keep the last good checkpoint on disk and report the divergence.
      log.flush();
      throw TrainingDiverged(std::string("training aborted: ") + e.what());
    }

    ++updates;
    const UpdateStats stats = summarize(buf);
    const double wall =
        cfg.log_wall_time
            ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count()
            : 0.0;
    log << steps_done << ',' << format_double(stats.mean_cum_reward) << ','
        << format_double(stats.success_rate) << ',' << format_double(stats.mean_rope_angle)
        << ',' << format_double(stats.mean_ep_len) << ',' << format_double(wall) << '\n';
    log.flush();

    snapshot(steps_done);
    save_checkpoint(ckpt, last_path);
    if (updates % cfg.checkpoint_every == 0) {
      save_checkpoint(ckpt, inputs.out_dir + "/checkpoint_" + std::to_string(steps_done) + ".bin");
    }
  }

  snapshot(steps_done);
  save_checkpoint(ckpt, final_path);

  TrainResult res;
  res.checkpoint_path = final_path;
  res.log_path = log_path;
  res.env_steps = steps_done;
  res.updates = updates;
  return res;
}

}  // namespace craneppo
