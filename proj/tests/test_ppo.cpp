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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "craneppo/point_mass.hpp"
#include "craneppo/ppo.hpp"
#include "craneppo/rng.hpp"

using namespace craneppo;

namespace {

// Direct double-loop GAE: adv_t = sum_l (gamma*lambda)^l * delta_{t+l}, the
// sum cut at a done flag; the value after the last step is the bootstrap.
VecX oracle_gae(const RolloutBuffer& buf, double gamma, double lambda) {
  VecX adv = VecX::Zero(buf.size());
  for (int slot = 0; slot < buf.n_envs; ++slot) {
    const int T = buf.steps_per_env;
    for (int t = 0; t < T; ++t) {
      double acc = 0.0;
      double weight = 1.0;
      for (int l = t; l < T; ++l) {
        const int k = buf.index(slot, l);
        const double next_v =
            (l == T - 1) ? buf.bootstrap_values[slot] : buf.values[buf.index(slot, l + 1)];
        const double nonterminal = buf.dones[k] ? 0.0 : 1.0;
        const double delta =
            buf.rewards[k] + gamma * next_v * nonterminal - buf.values[k];
        acc += weight * delta;
        if (buf.dones[k]) break;
        weight *= gamma * lambda;
      }
      adv[buf.index(slot, t)] = acc;
    }
  }
  return adv;
}

RolloutBuffer random_buffer(int n_envs, int steps_per_env, Rng& rng) {
  RolloutBuffer buf;
  buf.n_envs = n_envs;
  buf.steps_per_env = steps_per_env;
  const int n = n_envs * steps_per_env;
  buf.obs_norm.resize(n);
  buf.actions.resize(n);
  buf.rewards.resize(n);
  buf.values.resize(n);
  buf.log_probs_old.resize(n);
  buf.dones.resize(n);
  buf.bootstrap_values.resize(n_envs);
  for (int i = 0; i < n; ++i) {
    buf.rewards[i] = rng.normal();
    buf.values[i] = rng.normal();
    buf.dones[i] = rng.uniform01() < 0.15 ? 1 : 0;
    buf.obs_norm[i] = VecX::Zero(1);
    buf.actions[i] = VecX::Zero(1);
    buf.log_probs_old[i] = 0.0;
  }
  for (int s = 0; s < n_envs; ++s) buf.bootstrap_values[s] = rng.normal();
  return buf;
}

GaussianPolicy small_policy(std::uint64_t seed, int obs_dim = 4, int act_dim = 3) {
  Rng rng(seed);
  GaussianPolicy p;
  p.mean_net = Mlp::orthogonal({obs_dim, 8, act_dim}, rng, 1.0, 0.5);
  p.log_std = VecX::Zero(act_dim);
  for (int i = 0; i < act_dim; ++i) p.log_std[i] = rng.uniform(-0.5, 0.2);
  return p;
}

MiniBatch random_batch(const GaussianPolicy& policy, int b, std::uint64_t seed,
                       double lp_shift = 0.0) {
  Rng rng(seed);
  const int obs_dim = policy.mean_net.input_dim();
  const int act_dim = policy.act_dim();
  MiniBatch batch;
  batch.obs.resize(obs_dim, b);
  batch.actions.resize(act_dim, b);
  batch.log_probs_old.resize(b);
  batch.advantages.resize(b);
  batch.returns.resize(b);
  for (int i = 0; i < b; ++i) {
    for (int j = 0; j < obs_dim; ++j) batch.obs(j, i) = rng.normal();
    const VecX a = sample_action(policy, batch.obs.col(i), rng);
    batch.actions.col(i) = a;
    batch.log_probs_old[i] = log_prob(policy, batch.obs.col(i), a) + lp_shift;
    batch.advantages[i] = rng.normal();
    batch.returns[i] = rng.normal();
  }
  return batch;
}

double fd_relative_error(const VecX& analytic, const VecX& numeric) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double denom = std::max(std::abs(numeric[i]), 1e-6);
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TrainInputs point_mass_inputs(const std::string& out_dir) {
  TrainInputs in;
  in.point_mass = true;
  in.reward = PointMassEnv::default_reward();
  in.ppo.n_envs = 4;
  in.ppo.steps_per_update = 256;
  in.ppo.total_steps = 512;
  in.ppo.minibatch_size = 64;
  in.ppo.epochs_per_update = 2;
  in.ppo.log_wall_time = false;
  in.out_dir = out_dir;
  return in;
}

}  // namespace

TEST_CASE("GAE matches the brute-force double loop") {
  Rng rng(10);
  for (int trial = 0; trial < 30; ++trial) {
    RolloutBuffer buf = random_buffer(2, 16, rng);
    const double gamma = rng.uniform(0.8, 1.0);
    const double lambda = rng.uniform(0.0, 1.0);
    const AdvantageEstimate est = compute_gae(buf, gamma, lambda);
    const VecX expected = oracle_gae(buf, gamma, lambda);
    CHECK((est.raw_advantages - expected).cwiseAbs().maxCoeff() < 1e-10);
    // returns = advantages + values
    for (int k = 0; k < buf.size(); ++k) {
      CHECK(est.returns[k] == doctest::Approx(expected[k] + buf.values[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("GAE telescopes to return-minus-value for gamma = lambda = 1") {
  Rng rng(21);
  RolloutBuffer buf = random_buffer(1, 12, rng);
  // One complete episode: done only at the last step.
  for (int t = 0; t < 12; ++t) buf.dones[t] = t == 11 ? 1 : 0;
  const AdvantageEstimate est = compute_gae(buf, 1.0, 1.0);
  for (int t = 0; t < 12; ++t) {
    double rest = 0.0;
    for (int u = t; u < 12; ++u) rest += buf.rewards[u];
    CHECK(est.raw_advantages[t] == doctest::Approx(rest - buf.values[t]).epsilon(1e-10));
  }
}

TEST_CASE("GAE with lambda = 0 is the one-step TD error") {
  Rng rng(22);
  RolloutBuffer buf = random_buffer(2, 10, rng);
  const AdvantageEstimate est = compute_gae(buf, 0.97, 0.0);
  for (int slot = 0; slot < 2; ++slot) {
    for (int t = 0; t < 10; ++t) {
      const int k = buf.index(slot, t);
      const double next_v =
          (t == 9) ? buf.bootstrap_values[slot] : buf.values[buf.index(slot, t + 1)];
      const double nonterminal = buf.dones[k] ? 0.0 : 1.0;
      const double delta = buf.rewards[k] + 0.97 * next_v * nonterminal - buf.values[k];
      CHECK(est.raw_advantages[k] == doctest::Approx(delta).epsilon(1e-12));
    }
  }
}

TEST_CASE("normalized advantages have zero mean and unit variance") {
  Rng rng(23);
  RolloutBuffer buf = random_buffer(4, 32, rng);
  const AdvantageEstimate est = compute_gae(buf, 0.99, 0.95);
  const double mean = est.advantages.mean();
  const double var = (est.advantages.array() - mean).square().sum() / est.advantages.size();
  CHECK(std::abs(mean) < 1e-6);
  CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-6);
}

TEST_CASE("actor loss: ratio-one identity at theta = theta_old") {
  const GaussianPolicy policy = small_policy(31);
  const MiniBatch batch = random_batch(policy, 32, 77);
  const LossResult res = actor_loss(policy, batch, 0.2, 0.0);
  CHECK(res.loss == doctest::Approx(-batch.advantages.mean()).epsilon(1e-9));

  // With all ratios at one, the gradient is the vanilla policy-gradient
  // estimate -(1/B) sum_i A_i * grad log pi(a_i|s_i).
  VecX expected = VecX::Zero(res.grad.size());
  for (int i = 0; i < 32; ++i) {
    PolicyGrad g;
    log_prob_grad(policy, batch.obs.col(i), batch.actions.col(i), &g);
    expected -= batch.advantages[i] / 32.0 * g.flatten();
  }
  CHECK((res.grad - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("actor loss: clip activates beyond 1 + eps") {
  const GaussianPolicy policy = small_policy(41);
  const double eps = 0.2;
  // log_prob_old shifted down so every ratio is exp(+shift) = 1 + 2*eps.
  MiniBatch batch = random_batch(policy, 8, 78, -std::log(1.0 + 2 * eps));
  for (int i = 0; i < 8; ++i) batch.advantages[i] = std::abs(batch.advantages[i]) + 0.1;
  const LossResult res = actor_loss(policy, batch, eps, 0.0);
  double expected = 0.0;
  for (int i = 0; i < 8; ++i) expected -= (1.0 + eps) * batch.advantages[i] / 8.0;
  CHECK(res.loss == doctest::Approx(expected).epsilon(1e-9));
  // Saturated clip: no gradient flows.
  CHECK(res.grad.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("per-sample clipped objective never exceeds the unclipped one") {
  const GaussianPolicy policy = small_policy(51);
  Rng rng(91);
  for (int i = 0; i < 10000; ++i) {
    const double ratio = std::exp(rng.uniform(-1.5, 1.5));
    MiniBatch batch = random_batch(policy, 1, 1000 + i, -std::log(ratio));
    const double adv = batch.advantages[0];
    const LossResult res = actor_loss(policy, batch, 0.2, 0.0);
    const double clipped_objective = -res.loss;  // single sample, no entropy
    CHECK(clipped_objective <= ratio * adv + 1e-9);
  }
}

TEST_CASE("actor loss rejects non-finite ratios") {
  const GaussianPolicy policy = small_policy(61);
  MiniBatch batch = random_batch(policy, 4, 79, -2000.0);  // ratio overflows
  CHECK_THROWS(actor_loss(policy, batch, 0.2, 0.0));
}

TEST_CASE("critic loss closed forms") {
  Mlp critic = Mlp::zeros({4, 1});
  critic.biases[0][0] = 1.0;  // constant predictor V = 1
  MiniBatch batch;
  batch.obs = MatX::Zero(4, 2);
  batch.returns.resize(2);
  batch.returns << 0.0, 2.0;
  const LossResult res = critic_loss(critic, batch);
  CHECK(res.loss == doctest::Approx(1.0).epsilon(1e-12));

  batch.returns << 1.0, 1.0;  // exact predictor
  CHECK(critic_loss(critic, batch).loss == doctest::Approx(0.0));
}

TEST_CASE("actor and critic loss gradients match finite differences") {
  Rng rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    GaussianPolicy policy = small_policy(100 + trial);
    // Perturb away from theta_old so ratios are not exactly one.
    MiniBatch batch = random_batch(policy, 16, 200 + trial, 0.05);
    const double eps = 0.2;
    const double entropy_coef = 0.01;

    const LossResult res = actor_loss(policy, batch, eps, entropy_coef);
    const double h = 1e-6;
    VecX flat = policy.flatten();
    VecX numeric(flat.size());
    GaussianPolicy probe = policy;
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
      VecX bumped = flat;
      bumped[i] = flat[i] + h;
      probe.unflatten(bumped);
      const double f_plus = actor_loss(probe, batch, eps, entropy_coef).loss;
      bumped[i] = flat[i] - h;
      probe.unflatten(bumped);
      const double f_minus = actor_loss(probe, batch, eps, entropy_coef).loss;
      numeric[i] = (f_plus - f_minus) / (2.0 * h);
    }
    CHECK(fd_relative_error(res.grad, numeric) < 1e-4);

    Rng net_rng(300 + trial);
    Mlp critic = Mlp::orthogonal({4, 8, 1}, net_rng, 1.0, 1.0);
    const LossResult cres = critic_loss(critic, batch);
    VecX cflat = critic.flatten();
    VecX cnumeric(cflat.size());
    Mlp cprobe = critic;
    for (Eigen::Index i = 0; i < cflat.size(); ++i) {
      VecX bumped = cflat;
      bumped[i] = cflat[i] + h;
      cprobe.unflatten(bumped);
      const double f_plus = critic_loss(cprobe, batch).loss;
      bumped[i] = cflat[i] - h;
      cprobe.unflatten(bumped);
      const double f_minus = critic_loss(cprobe, batch).loss;
      cnumeric[i] = (f_plus - f_minus) / (2.0 * h);
    }
    CHECK(fd_relative_error(cres.grad, cnumeric) < 1e-4);
  }
}

TEST_CASE("gradient norm clipping") {
  VecX g(3);
  g << 3.0, 4.0, 0.0;  // norm 5
  clip_grad_norm(g, 0.5);
  CHECK(g.norm() == doctest::Approx(0.5).epsilon(1e-12));
  VecX small(2);
  small << 0.1, 0.1;
  const VecX before = small;
  clip_grad_norm(small, 0.5);
  CHECK((small - before).norm() == 0.0);
}

TEST_CASE("collect_rollouts bookkeeping") {
  TrainInputs in;
  in.point_mass = true;
  in.reward = PointMassEnv::default_reward();
  in.reward.n_step_max = 5;  // forced terminations every 5 steps
  EnvSlots slots(make_envs(in, 1), 99);
  slots.reset_all();

  GaussianPolicy policy = small_policy(400, kObservationDim, kActionDim);
  Rng crng(401);
  Mlp critic = Mlp::orthogonal({kObservationDim, 8, 1}, crng, 1.0, 1.0);
  ObsNormalizer norm;

  SUBCASE("zero steps give an empty buffer") {
    const RolloutBuffer buf = collect_rollouts(policy, critic, slots, norm, 0);
    CHECK(buf.size() == 0);
    CHECK(buf.episodes.empty());
  }

  SUBCASE("done flags appear exactly at episode ends and log probs are exact") {
    const RolloutBuffer buf = collect_rollouts(policy, critic, slots, norm, 17);
    REQUIRE(buf.size() == 17);
    for (int t = 0; t < 17; ++t) {
      CHECK((buf.dones[t] == 1) == ((t + 1) % 5 == 0));
      const double recomputed = log_prob(policy, buf.obs_norm[t], buf.actions[t]);
      CHECK(std::abs(buf.log_probs_old[t] - recomputed) < 1e-12);
      CHECK(std::abs(buf.values[t] - mlp_forward_vec(critic, buf.obs_norm[t])[0]) == 0.0);
    }
    CHECK(buf.episodes.size() == 3);
    for (const EpisodeStat& e : buf.episodes) CHECK(e.length == 5);
    // Last segment is unfinished: bootstrap must be the critic's value.
    CHECK(buf.bootstrap_values[0] != 0.0);
  }
}

TEST_CASE("ratio identity holds on a freshly collected buffer") {
  TrainInputs in;
  in.point_mass = true;
  in.reward = PointMassEnv::default_reward();
  EnvSlots slots(make_envs(in, 2), 123);
  slots.reset_all();
  GaussianPolicy policy = small_policy(500, kObservationDim, kActionDim);
  Rng crng(501);
  Mlp critic = Mlp::orthogonal({kObservationDim, 8, 1}, crng, 1.0, 1.0);
  ObsNormalizer norm;
  const RolloutBuffer buf = collect_rollouts(policy, critic, slots, norm, 64);

  MiniBatch batch;
  batch.obs.resize(kObservationDim, buf.size());
  batch.actions.resize(kActionDim, buf.size());
  batch.log_probs_old.resize(buf.size());
  batch.advantages = VecX::Ones(buf.size());
  batch.returns = VecX::Zero(buf.size());
  for (int k = 0; k < buf.size(); ++k) {
    batch.obs.col(k) = buf.obs_norm[k];
    batch.actions.col(k) = buf.actions[k];
    batch.log_probs_old[k] = buf.log_probs_old[k];
  }
  // All advantages one and all ratios one: the surrogate is exactly 1.
  const LossResult res = actor_loss(policy, batch, 0.2, 0.0);
  CHECK(res.loss == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("train runs exactly one update when budget equals steps_per_update") {
  const auto dir = std::filesystem::temp_directory_path() / "craneppo_train_one";
  std::filesystem::remove_all(dir);
  TrainInputs in = point_mass_inputs(dir.string());
  in.ppo.total_steps = in.ppo.steps_per_update;
  const TrainResult res = train(in);
  CHECK(res.updates == 1);
  CHECK(res.env_steps == in.ppo.steps_per_update);
  CHECK(std::filesystem::exists(res.checkpoint_path));
  CHECK(std::filesystem::exists(res.log_path));
  std::filesystem::remove_all(dir);
}

TEST_CASE("a trivially satisfiable task reports full success from the start") {
  const auto dir = std::filesystem::temp_directory_path() / "craneppo_train_trivial";
  std::filesystem::remove_all(dir);
  TrainInputs in = point_mass_inputs(dir.string());
  in.reward.success_tol = 50.0;  // any first step reaches the target
  const TrainResult res = train(in);

  std::ifstream log(res.log_path);
  std::string line;
  std::getline(log, line);  // header
  bool saw_row = false;
  while (std::getline(log, line)) {
    std::stringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');  // env_steps
    std::getline(ss, field, ',');  // mean_cum_reward
    std::getline(ss, field, ',');  // success_rate
    CHECK(std::stod(field) == 1.0);
    saw_row = true;
  }
  CHECK(saw_row);
  std::filesystem::remove_all(dir);
}

TEST_CASE("training is bitwise reproducible for a fixed seed") {
  const auto dir_a = std::filesystem::temp_directory_path() / "craneppo_repro_a";
  const auto dir_b = std::filesystem::temp_directory_path() / "craneppo_repro_b";
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
  TrainInputs in = point_mass_inputs(dir_a.string());
  in.ppo.total_steps = 768;
  in.ppo.seed = 7;
  const TrainResult ra = train(in);
  in.out_dir = dir_b.string();
  const TrainResult rb = train(in);
  CHECK(slurp(ra.log_path) == slurp(rb.log_path));
  CHECK(slurp(ra.checkpoint_path) == slurp(rb.checkpoint_path));
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
}

TEST_CASE("checkpoints round-trip bitwise and reproduce actions") {
  const auto dir = std::filesystem::temp_directory_path() / "craneppo_ckpt";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  Rng rng(88);
  Checkpoint ckpt;
  ckpt.actor.mean_net = Mlp::orthogonal({kObservationDim, 16, kActionDim}, rng,
                                        std::sqrt(2.0), 0.01);
  ckpt.actor.log_std = VecX::Constant(kActionDim, -0.3);
  ckpt.critic = Mlp::orthogonal({kObservationDim, 16, 1}, rng, std::sqrt(2.0), 1.0);
  ckpt.normalizer.angle_scale = 0.35;
  ckpt.normalizer.steps_scale = 500.0;
  ckpt.reward = RewardParams{};
  ckpt.action_bound = 0.5;
  ckpt.env_steps = 12345;

  const std::string path = (dir / "model.bin").string();
  save_checkpoint(ckpt, path);
  const Checkpoint loaded = load_checkpoint(path);
  CHECK((loaded.actor.flatten() - ckpt.actor.flatten()).norm() == 0.0);
  CHECK((loaded.critic.flatten() - ckpt.critic.flatten()).norm() == 0.0);
  CHECK(loaded.env_steps == 12345);
  CHECK(loaded.reward.p4 == ckpt.reward.p4);
  CHECK(loaded.normalizer.pos_scale == ckpt.normalizer.pos_scale);

  // Same deterministic action sequence before and after the round trip.
  const std::string path2 = (dir / "model2.bin").string();
  save_checkpoint(loaded, path2);
  CHECK(slurp(path) == slurp(path2));
  Rng obs_rng(9);
  for (int i = 0; i < 20; ++i) {
    VecX s(kObservationDim);
    for (int j = 0; j < kObservationDim; ++j) s[j] = obs_rng.normal();
    CHECK((mean_action(loaded.actor, s) - mean_action(ckpt.actor, s)).norm() == 0.0);
  }
  std::filesystem::remove_all(dir);

  CHECK_THROWS(load_checkpoint((dir / "missing.bin").string()));
}

TEST_CASE("ppo config validation") {
  PpoConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.clip_eps = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = PpoConfig{};
  cfg.total_steps = 100;
  CHECK_THROWS(cfg.validate());
  cfg = PpoConfig{};
  cfg.steps_per_update = 100;  // not divisible by n_envs = 8
  CHECK_THROWS(cfg.validate());
}
