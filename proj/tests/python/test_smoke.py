# Copyright 2026 The craneppo Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math
import tempfile
from pathlib import Path

import numpy as np
import pytest

import craneppo as cp


def test_world_queries():
    world = cp.World()
    world.obstacles = [cp.Aabb([0, 0, 0], [1, 1, 1])]
    assert cp.min_distance(world, [10, 0, 0]) == pytest.approx(9.0)
    assert cp.lidar_flag(world, [5, 0.5, 0.5]) == 1
    assert cp.lidar_flag(world, [7, 0.5, 0.5]) == 0
    assert cp.collides(world, [0.5, 0.5, 0.5], [0.5, 0.5, 0.5], [0.1, 0.1, 0.1])
    assert not cp.collides(world, [5, 5, 5], [6, 6, 6], [0.1, 0.1, 0.1])


def test_kinematics_round_trip():
    cfg = cp.CraneConfig()
    st = cp.CraneState()
    st.slew, st.luff, st.boom_len = 0.7, 0.4, 12.0
    tip = cp.forward_kinematics(cfg, st)
    ik = cp.inverse_kinematics(cfg, tip)
    assert not ik.clamped
    back = cp.forward_kinematics(cfg, ik.state)
    assert np.linalg.norm(np.asarray(back) - np.asarray(tip)) < 1e-6


def test_pendulum_rest_state():
    cfg = cp.CraneConfig()
    st = cp.CraneState()
    st.slew, st.luff, st.boom_len = 0.0, 0.3, 10.0
    tip = np.asarray(cp.forward_kinematics(cfg, st))
    payload = cp.PayloadState()
    payload.payload_pos = tip - np.array([0.0, 0.0, cfg.rope_length])
    crane2, payload2 = cp.step_dynamics(cfg, st, payload, [0, 0, 0])
    assert payload2.rope_angle == 0.0
    assert np.linalg.norm(np.asarray(payload2.payload_vel)) == 0.0


def test_env_episode_and_reward():
    env = cp.CraneEnv(
        cp.CraneConfig(),
        cp.RewardParams(),
        cp.EnvOptions(),
        cp.make_scenario(cp.TaskKind.loading, cp.ObstacleMode.absent),
    )
    obs = env.reset(7)
    assert obs.steps == 0.0 and obs.rope_angle == 0.0
    out = env.step([0.0, 0.0, 0.1])
    assert not out.terminated
    assert math.isfinite(out.reward)
    vec = out.observation.to_vector()
    assert len(vec) == 10
    assert vec[6] == pytest.approx(out.observation.distance)


def test_policy_log_prob_matches_normal_density():
    net = cp.Mlp.zeros([10, 3])
    policy = cp.GaussianPolicy()
    policy.mean_net = net
    policy.log_std = np.zeros(3)
    lp = policy.log_prob(np.zeros(10), np.zeros(3))
    assert lp == pytest.approx(-1.5 * math.log(2 * math.pi))


def test_train_eval_checkpoint_cycle():
    with tempfile.TemporaryDirectory() as tmp:
        inputs = cp.TrainInputs()
        inputs.point_mass = True
        inputs.reward = cp.PointMassEnv.default_reward()
        inputs.ppo.total_steps = 512
        inputs.ppo.steps_per_update = 256
        inputs.ppo.n_envs = 4
        inputs.ppo.epochs_per_update = 2
        inputs.ppo.log_wall_time = False
        inputs.out_dir = tmp
        result = cp.train(inputs)
        assert result.env_steps == 512
        assert Path(result.log_path).exists()

        ckpt = cp.load_checkpoint(result.checkpoint_path)
        env = cp.PointMassEnv(ckpt.reward, cp.EnvOptions())
        opts = cp.EvalOptions()
        opts.n_scenarios = 3
        cell = cp.evaluate(ckpt, env, "smoke", cp.TaskKind.loading,
                           cp.ObstacleMode.absent, opts)
        assert (cell.n_success + cell.n_collisions + cell.n_swing_exceeded
                + cell.n_timeout) == 3

        stats = cp.export_curve(result.log_path)
        assert stats.n_rows == 2
