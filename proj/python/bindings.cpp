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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "craneppo/checkpoint.hpp"
#include "craneppo/config.hpp"
#include "craneppo/crane.hpp"
#include "craneppo/env.hpp"
#include "craneppo/eval.hpp"
#include "craneppo/neural.hpp"
#include "craneppo/point_mass.hpp"
#include "craneppo/ppo.hpp"
#include "craneppo/rng.hpp"
#include "craneppo/world.hpp"

namespace py = pybind11;
using namespace craneppo;

PYBIND11_MODULE(_core, m) {
  m.doc() = "crane lift-path planning: simulator, PPO trainer and evaluation harness";

  // ---- world ----
  py::class_<Aabb>(m, "Aabb")
      .def(py::init<const Vec3&, const Vec3&>(), py::arg("min_corner"), py::arg("max_corner"))
      .def_readwrite("min_corner", &Aabb::min_corner)
      .def_readwrite("max_corner", &Aabb::max_corner)
      .def("distance", &Aabb::distance)
      .def("intersects", &Aabb::intersects);

  py::class_<World>(m, "World")
      .def(py::init<>())
      .def_readwrite("obstacles", &World::obstacles)
      .def_readwrite("ground_height", &World::ground_height)
      .def("validate", &World::validate);

  m.def("min_distance", &min_distance, py::arg("world"), py::arg("p"));
  m.def("lidar_flag", &lidar_flag, py::arg("world"), py::arg("hook_pos"),
        py::arg("range") = 5.0);
  m.def("collides", &collides, py::arg("world"), py::arg("segment_a"),
        py::arg("segment_b"), py::arg("payload_half_extents"));
  m.def("segment_intersects", &segment_intersects);
  m.def("load_world", &load_world);
  m.def("save_world", &save_world);

  // ---- crane ----
  py::class_<CraneConfig>(m, "CraneConfig")
      .def(py::init<>())
      .def_readwrite("base_pos", &CraneConfig::base_pos)
      .def_readwrite("boom_pivot_height", &CraneConfig::boom_pivot_height)
      .def_readwrite("boom_min_len", &CraneConfig::boom_min_len)
      .def_readwrite("boom_max_len", &CraneConfig::boom_max_len)
      .def_readwrite("luff_min", &CraneConfig::luff_min)
      .def_readwrite("luff_max", &CraneConfig::luff_max)
      .def_readwrite("slew_rate_max", &CraneConfig::slew_rate_max)
      .def_readwrite("luff_rate_max", &CraneConfig::luff_rate_max)
      .def_readwrite("telescope_rate_max", &CraneConfig::telescope_rate_max)
      .def_readwrite("rope_length", &CraneConfig::rope_length)
      .def_readwrite("payload_half_extents", &CraneConfig::payload_half_extents)
      .def_readwrite("damping", &CraneConfig::damping)
      .def_readwrite("gravity", &CraneConfig::gravity)
      .def_readwrite("dt", &CraneConfig::dt)
      .def_readwrite("substeps", &CraneConfig::substeps)
      .def("validate", &CraneConfig::validate);

  py::class_<CraneState>(m, "CraneState")
      .def(py::init<>())
      .def_readwrite("slew", &CraneState::slew)
      .def_readwrite("luff", &CraneState::luff)
      .def_readwrite("boom_len", &CraneState::boom_len);

  py::class_<PayloadState>(m, "PayloadState")
      .def(py::init<>())
      .def_readwrite("payload_pos", &PayloadState::payload_pos)
      .def_readwrite("payload_vel", &PayloadState::payload_vel)
      .def_readwrite("rope_angle", &PayloadState::rope_angle);

  py::class_<IkResult>(m, "IkResult")
      .def_readonly("state", &IkResult::state)
      .def_readonly("clamped", &IkResult::clamped);

  m.def("forward_kinematics", &forward_kinematics);
  m.def("inverse_kinematics", &inverse_kinematics, py::arg("cfg"), py::arg("target_tip"),
        py::arg("prev_slew") = 0.0);
  m.def("rope_angle", &rope_angle, py::arg("tip"), py::arg("payload_pos"));
  m.def("step_dynamics", &step_dynamics, py::arg("cfg"), py::arg("crane"),
        py::arg("payload"), py::arg("tip_delta"));

  // ---- env ----
  py::class_<RewardParams>(m, "RewardParams")
      .def(py::init<>())
      .def_readwrite("p1", &RewardParams::p1)
      .def_readwrite("p2", &RewardParams::p2)
      .def_readwrite("p3", &RewardParams::p3)
      .def_readwrite("p4", &RewardParams::p4)
      .def_readwrite("p5", &RewardParams::p5)
      .def_readwrite("theta_thr", &RewardParams::theta_thr)
      .def_readwrite("n_step_max", &RewardParams::n_step_max)
      .def_readwrite("success_tol", &RewardParams::success_tol)
      .def("validate", &RewardParams::validate);

  py::class_<EnvOptions>(m, "EnvOptions")
      .def(py::init<>())
      .def_readwrite("action_bound", &EnvOptions::action_bound)
      .def_readwrite("swing_terminates", &EnvOptions::swing_terminates)
      .def_readwrite("lidar_range", &EnvOptions::lidar_range);

  py::class_<Observation>(m, "Observation")
      .def(py::init<>())
      .def_readwrite("material_pos", &Observation::material_pos)
      .def_readwrite("target_pos", &Observation::target_pos)
      .def_readwrite("distance", &Observation::distance)
      .def_readwrite("collision_warning", &Observation::collision_warning)
      .def_readwrite("rope_angle", &Observation::rope_angle)
      .def_readwrite("steps", &Observation::steps)
      .def("to_vector", &Observation::to_vector);

  py::class_<ObsNormalizer>(m, "ObsNormalizer")
      .def(py::init<>())
      .def_readwrite("pos_scale", &ObsNormalizer::pos_scale)
      .def_readwrite("angle_scale", &ObsNormalizer::angle_scale)
      .def_readwrite("steps_scale", &ObsNormalizer::steps_scale)
      .def("normalize", &ObsNormalizer::normalize);

  py::enum_<TaskKind>(m, "TaskKind")
      .value("loading", TaskKind::kLoading)
      .value("unloading", TaskKind::kUnloading);

  py::enum_<ObstacleMode>(m, "ObstacleMode")
      .value("present", ObstacleMode::kPresent)
      .value("absent", ObstacleMode::kAbsent);

  py::enum_<TerminationReason>(m, "TerminationReason")
      .value("none", TerminationReason::kNone)
      .value("success", TerminationReason::kSuccess)
      .value("collision", TerminationReason::kCollision)
      .value("swing_exceeded", TerminationReason::kSwingExceeded)
      .value("step_limit", TerminationReason::kStepLimit);

  py::class_<TargetRegion>(m, "TargetRegion")
      .def(py::init<>())
      .def_readwrite("min_x", &TargetRegion::min_x)
      .def_readwrite("min_y", &TargetRegion::min_y)
      .def_readwrite("max_x", &TargetRegion::max_x)
      .def_readwrite("max_y", &TargetRegion::max_y)
      .def_readwrite("z", &TargetRegion::z);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("name", &Scenario::name)
      .def_readwrite("task_kind", &Scenario::task_kind)
      .def_readwrite("world", &Scenario::world)
      .def_readwrite("material_start", &Scenario::material_start)
      .def_readwrite("target_region", &Scenario::target_region)
      .def_readwrite("crane_initial", &Scenario::crane_initial);

  py::class_<StepOutcome>(m, "StepOutcome")
      .def_readonly("observation", &StepOutcome::observation)
      .def_readonly("reward", &StepOutcome::reward)
      .def_readonly("terminated", &StepOutcome::terminated)
      .def_readonly("termination_reason", &StepOutcome::termination_reason);

  py::class_<EnvBase>(m, "EnvBase");

  py::class_<CraneEnv, EnvBase>(m, "CraneEnv")
      .def(py::init<const CraneConfig&, const RewardParams&, const EnvOptions&,
                    const Scenario&>(),
           py::arg("cfg"), py::arg("reward"), py::arg("opts"), py::arg("scenario"))
      .def("reset", &CraneEnv::reset, py::arg("seed"))
      .def("step", &CraneEnv::step, py::arg("action"))
      .def_property_readonly("terminated", &CraneEnv::is_terminated)
      .def_property_readonly("crane_state", &CraneEnv::crane_state)
      .def_property_readonly("payload_state", &CraneEnv::payload_state)
      .def_property_readonly("target", &CraneEnv::target)
      .def_property_readonly("tip_position", &CraneEnv::tip_position);

  py::class_<PointMassEnv, EnvBase>(m, "PointMassEnv")
      .def(py::init<const RewardParams&, const EnvOptions&>(), py::arg("reward"),
           py::arg("opts"))
      .def_static("default_reward", &PointMassEnv::default_reward)
      .def("reset", &PointMassEnv::reset, py::arg("seed"))
      .def("step", &PointMassEnv::step, py::arg("action"))
      .def_property_readonly("terminated", &PointMassEnv::is_terminated)
      .def_property_readonly("target", &PointMassEnv::target);

  m.def("make_scenario", &make_scenario, py::arg("kind"), py::arg("obstacles"));
  m.def("load_scenario", &load_scenario);
  m.def("save_scenario", &save_scenario, py::arg("scenario"), py::arg("path"),
        py::arg("world_file_ref") = "");

  // ---- neural ----
  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform01", &Rng::uniform01)
      .def("normal", &Rng::normal);

  py::class_<Mlp>(m, "Mlp")
      .def_static("zeros", &Mlp::zeros, py::arg("sizes"))
      .def_static("orthogonal", &Mlp::orthogonal, py::arg("sizes"), py::arg("rng"),
                  py::arg("hidden_gain"), py::arg("final_gain"))
      .def_readwrite("layer_sizes", &Mlp::layer_sizes)
      .def_readwrite("weights", &Mlp::weights)
      .def_readwrite("biases", &Mlp::biases)
      .def("param_count", &Mlp::param_count)
      .def("flatten", &Mlp::flatten)
      .def("unflatten", &Mlp::unflatten)
      .def("forward", [](const Mlp& net, const VecX& x) { return mlp_forward_vec(net, x); });

  py::class_<GaussianPolicy>(m, "GaussianPolicy")
      .def(py::init<>())
      .def_readwrite("mean_net", &GaussianPolicy::mean_net)
      .def_readwrite("log_std", &GaussianPolicy::log_std)
      .def("log_prob",
           [](const GaussianPolicy& p, const VecX& s, const VecX& a) {
             return log_prob(p, s, a);
           })
      .def("sample",
           [](const GaussianPolicy& p, const VecX& s, Rng& rng) {
             return sample_action(p, s, rng);
           })
      .def("mean_action",
           [](const GaussianPolicy& p, const VecX& s) { return mean_action(p, s); });

  py::class_<AdamState>(m, "AdamState")
      .def(py::init<Eigen::Index, double>(), py::arg("n"), py::arg("learning_rate"))
      .def_readwrite("learning_rate", &AdamState::learning_rate)
      .def_readonly("step_count", &AdamState::step_count)
      .def("step", [](AdamState& opt, VecX params, const VecX& grads) {
        opt.step(params, grads);
        return params;
      });

  // ---- checkpoint / ppo / eval ----
  py::class_<Checkpoint>(m, "Checkpoint")
      .def(py::init<>())
      .def_readwrite("actor", &Checkpoint::actor)
      .def_readwrite("critic", &Checkpoint::critic)
      .def_readwrite("normalizer", &Checkpoint::normalizer)
      .def_readwrite("reward", &Checkpoint::reward)
      .def_readwrite("action_bound", &Checkpoint::action_bound)
      .def_readwrite("env_steps", &Checkpoint::env_steps);

  m.def("save_checkpoint", &save_checkpoint);
  m.def("load_checkpoint", &load_checkpoint);

  py::class_<PpoConfig>(m, "PpoConfig")
      .def(py::init<>())
      .def_readwrite("clip_eps", &PpoConfig::clip_eps)
      .def_readwrite("gamma", &PpoConfig::gamma)
      .def_readwrite("gae_lambda", &PpoConfig::gae_lambda)
      .def_readwrite("epochs_per_update", &PpoConfig::epochs_per_update)
      .def_readwrite("minibatch_size", &PpoConfig::minibatch_size)
      .def_readwrite("steps_per_update", &PpoConfig::steps_per_update)
      .def_readwrite("total_steps", &PpoConfig::total_steps)
      .def_readwrite("learning_rate", &PpoConfig::learning_rate)
      .def_readwrite("value_coef", &PpoConfig::value_coef)
      .def_readwrite("entropy_coef", &PpoConfig::entropy_coef)
      .def_readwrite("max_grad_norm", &PpoConfig::max_grad_norm)
      .def_readwrite("seed", &PpoConfig::seed)
      .def_readwrite("n_envs", &PpoConfig::n_envs)
      .def_readwrite("workers", &PpoConfig::workers)
      .def_readwrite("lr_decay", &PpoConfig::lr_decay)
      .def_readwrite("hidden_width", &PpoConfig::hidden_width)
      .def_readwrite("checkpoint_every", &PpoConfig::checkpoint_every)
      .def_readwrite("log_wall_time", &PpoConfig::log_wall_time);

  py::class_<TrainInputs>(m, "TrainInputs")
      .def(py::init<>())
      .def_readwrite("ppo", &TrainInputs::ppo)
      .def_readwrite("crane", &TrainInputs::crane)
      .def_readwrite("reward", &TrainInputs::reward)
      .def_readwrite("env_opts", &TrainInputs::env_opts)
      .def_readwrite("scenarios", &TrainInputs::scenarios)
      .def_readwrite("point_mass", &TrainInputs::point_mass)
      .def_readwrite("out_dir", &TrainInputs::out_dir);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("checkpoint_path", &TrainResult::checkpoint_path)
      .def_readonly("log_path", &TrainResult::log_path)
      .def_readonly("env_steps", &TrainResult::env_steps)
      .def_readonly("updates", &TrainResult::updates);

  m.def("train", &train, py::call_guard<py::gil_scoped_release>());

  py::class_<EvalCell>(m, "EvalCell")
      .def_readonly("model_name", &EvalCell::model_name)
      .def_readonly("task", &EvalCell::task)
      .def_readonly("obstacle_mode", &EvalCell::obstacle_mode)
      .def_readonly("n_scenarios", &EvalCell::n_scenarios)
      .def_readonly("n_success", &EvalCell::n_success)
      .def_readonly("n_collisions", &EvalCell::n_collisions)
      .def_readonly("n_swing_exceeded", &EvalCell::n_swing_exceeded)
      .def_readonly("n_timeout", &EvalCell::n_timeout)
      .def_readonly("success_rate_pct", &EvalCell::success_rate_pct)
      .def_readonly("mean_episode_len", &EvalCell::mean_episode_len)
      .def_readonly("mean_peak_rope_angle", &EvalCell::mean_peak_rope_angle);

  py::class_<EvalOptions>(m, "EvalOptions")
      .def(py::init<>())
      .def_readwrite("n_scenarios", &EvalOptions::n_scenarios)
      .def_readwrite("seed", &EvalOptions::seed)
      .def_readwrite("keep_trajectories", &EvalOptions::keep_trajectories);

  m.def(
      "evaluate",
      [](const Checkpoint& ckpt, EnvBase& env, const std::string& model_name,
         TaskKind task, ObstacleMode mode, const EvalOptions& opts) {
        return evaluate(ckpt, env, model_name, task, mode, opts, nullptr);
      },
      py::arg("checkpoint"), py::arg("env"), py::arg("model_name"), py::arg("task"),
      py::arg("mode"), py::arg("opts"), py::call_guard<py::gil_scoped_release>());

  py::class_<CurveStats>(m, "CurveStats")
      .def_readonly("n_rows", &CurveStats::n_rows)
      .def_readonly("first10_mean", &CurveStats::first10_mean)
      .def_readonly("final10_mean", &CurveStats::final10_mean)
      .def_readonly("convergence_step", &CurveStats::convergence_step)
      .def_readonly("max_drawdown", &CurveStats::max_drawdown)
      .def_readonly("has_dip", &CurveStats::has_dip);

  m.def("export_curve", &export_curve, py::arg("csv_path"), py::arg("svg_path") = "");
}
