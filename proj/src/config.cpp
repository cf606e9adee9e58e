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

#include "craneppo/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace craneppo {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw std::invalid_argument(path + ": " + msg);
}

// A strict section reader: every get marks the key, leftovers are an error.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    seen_.push_back(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      fail(path_ + "." + key, e.what());
    }
  }

  void get_vec3(const char* key, Vec3& out) {
    if (!j_.contains(key)) return;
    seen_.push_back(key);
    const json& v = j_.at(key);
    if (!v.is_array() || v.size() != 3) fail(path_ + "." + key, "expected [x, y, z]");
    out = Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& sub(const char* key) {
    seen_.push_back(key);
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
        fail(path_ + "." + it.key(), "unknown key");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

CraneConfig crane_from_json(const json& j, const std::string& path) {
  CraneConfig c;
  Section s(j, path);
  s.get_vec3("base_pos", c.base_pos);
  s.get("boom_pivot_height", c.boom_pivot_height);
  s.get("boom_min_len", c.boom_min_len);
  s.get("boom_max_len", c.boom_max_len);
  s.get("luff_min", c.luff_min);
  s.get("luff_max", c.luff_max);
  s.get("slew_rate_max", c.slew_rate_max);
  s.get("luff_rate_max", c.luff_rate_max);
  s.get("telescope_rate_max", c.telescope_rate_max);
  s.get("rope_length", c.rope_length);
  s.get_vec3("payload_half_extents", c.payload_half_extents);
  s.get("damping", c.damping);
  s.get("gravity", c.gravity);
  s.get("dt", c.dt);
  s.get("substeps", c.substeps);
  s.finish();
  return c;
}

RewardParams reward_from_json(const json& j, const std::string& path) {
  RewardParams r;
  Section s(j, path);
  s.get("p1", r.p1);
  s.get("p2", r.p2);
  s.get("p3", r.p3);
  s.get("p4", r.p4);
  s.get("p5", r.p5);
  s.get("theta_thr", r.theta_thr);
  s.get("n_step_max", r.n_step_max);
  s.get("success_tol", r.success_tol);
  s.finish();
  return r;
}

EnvOptions env_from_json(const json& j, const std::string& path) {
  EnvOptions e;
  Section s(j, path);
  s.get("action_bound", e.action_bound);
  s.get("swing_terminates", e.swing_terminates);
  s.get("lidar_range", e.lidar_range);
  s.finish();
  return e;
}

PpoConfig ppo_from_json(const json& j, const std::string& path) {
  PpoConfig p;
  Section s(j, path);
  s.get("clip_eps", p.clip_eps);
  s.get("gamma", p.gamma);
  s.get("gae_lambda", p.gae_lambda);
  s.get("epochs_per_update", p.epochs_per_update);
  s.get("minibatch_size", p.minibatch_size);
  s.get("steps_per_update", p.steps_per_update);
  s.get("total_steps", p.total_steps);
  s.get("learning_rate", p.learning_rate);
  s.get("value_coef", p.value_coef);
  s.get("entropy_coef", p.entropy_coef);
  s.get("max_grad_norm", p.max_grad_norm);
  s.get("n_envs", p.n_envs);
  s.get("workers", p.workers);
  s.get("lr_decay", p.lr_decay);
  s.get("hidden_width", p.hidden_width);
  s.get("init_log_std", p.init_log_std);
  s.get("checkpoint_every", p.checkpoint_every);
  s.get("log_wall_time", p.log_wall_time);
  s.finish();
  return p;
}

int line_of_byte(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace

RunConfig default_run_config() { return RunConfig{}; }

RunConfig run_config_from_json_text(const std::string& text, const std::string& source_name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(source_name + ":" + std::to_string(line_of_byte(text, e.byte)),
         "JSON parse error: " + std::string(e.what()));
  }

  RunConfig cfg;
  Section s(j, source_name);
  int version = 1;
  s.get("version", version);
  if (version != 1) fail(source_name, "unsupported config version");
  s.get("seed", cfg.seed);
  s.get("output_dir", cfg.output_dir);
  if (s.has("scenario")) {
    const json& js = s.sub("scenario");
    cfg.scenario_refs.clear();
    if (js.is_string()) {
      cfg.scenario_refs.push_back(js.get<std::string>());
    } else if (js.is_array()) {
      for (const auto& item : js) cfg.scenario_refs.push_back(item.get<std::string>());
    } else {
      fail(source_name + ".scenario", "expected a string or an array of strings");
    }
    if (cfg.scenario_refs.empty()) fail(source_name + ".scenario", "must not be empty");
  }
  if (s.has("crane")) cfg.crane = crane_from_json(s.sub("crane"), source_name + ".crane");
  if (s.has("reward")) cfg.reward = reward_from_json(s.sub("reward"), source_name + ".reward");
  if (s.has("env")) cfg.env_opts = env_from_json(s.sub("env"), source_name + ".env");
  if (s.has("ppo")) cfg.ppo = ppo_from_json(s.sub("ppo"), source_name + ".ppo");
  s.finish();

  cfg.ppo.seed = cfg.seed;
  try {
    cfg.crane.validate();
    cfg.reward.validate();
    cfg.ppo.validate();
  } catch (const std::exception& e) {
    fail(source_name, e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();

  if (overrides.empty()) return run_config_from_json_text(buf.str(), path);

  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    fail(path + ":" + std::to_string(line_of_byte(buf.str(), e.byte)),
         "JSON parse error: " + std::string(e.what()));
  }
  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("override must look like key.path=value: " + ov);
    }
    std::string key = ov.substr(0, eq);
    const std::string value = ov.substr(eq + 1);
    std::replace(key.begin(), key.end(), '.', '/');
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::parse_error&) {
      parsed = value;  // bare word, keep as string
    }
    j[json::json_pointer("/" + key)] = parsed;
  }
  return run_config_from_json_text(j.dump(), path);
}

std::string run_config_to_json(const RunConfig& cfg) {
  json j;
  j["version"] = 1;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["scenario"] = cfg.scenario_refs;
  j["crane"] = {
      {"base_pos", {cfg.crane.base_pos.x(), cfg.crane.base_pos.y(), cfg.crane.base_pos.z()}},
      {"boom_pivot_height", cfg.crane.boom_pivot_height},
      {"boom_min_len", cfg.crane.boom_min_len},
      {"boom_max_len", cfg.crane.boom_max_len},
      {"luff_min", cfg.crane.luff_min},
      {"luff_max", cfg.crane.luff_max},
      {"slew_rate_max", cfg.crane.slew_rate_max},
      {"luff_rate_max", cfg.crane.luff_rate_max},
      {"telescope_rate_max", cfg.crane.telescope_rate_max},
      {"rope_length", cfg.crane.rope_length},
      {"payload_half_extents",
       {cfg.crane.payload_half_extents.x(), cfg.crane.payload_half_extents.y(),
        cfg.crane.payload_half_extents.z()}},
      {"damping", cfg.crane.damping},
      {"gravity", cfg.crane.gravity},
      {"dt", cfg.crane.dt},
      {"substeps", cfg.crane.substeps}};
  j["reward"] = {{"p1", cfg.reward.p1},
                 {"p2", cfg.reward.p2},
                 {"p3", cfg.reward.p3},
                 {"p4", cfg.reward.p4},
                 {"p5", cfg.reward.p5},
                 {"theta_thr", cfg.reward.theta_thr},
                 {"n_step_max", cfg.reward.n_step_max},
                 {"success_tol", cfg.reward.success_tol}};
  j["env"] = {{"action_bound", cfg.env_opts.action_bound},
              {"swing_terminates", cfg.env_opts.swing_terminates},
              {"lidar_range", cfg.env_opts.lidar_range}};
  j["ppo"] = {{"clip_eps", cfg.ppo.clip_eps},
              {"gamma", cfg.ppo.gamma},
              {"gae_lambda", cfg.ppo.gae_lambda},
              {"epochs_per_update", cfg.ppo.epochs_per_update},
              {"minibatch_size", cfg.ppo.minibatch_size},
              {"steps_per_update", cfg.ppo.steps_per_update},
              {"total_steps", cfg.ppo.total_steps},
              {"learning_rate", cfg.ppo.learning_rate},
              {"value_coef", cfg.ppo.value_coef},
              {"entropy_coef", cfg.ppo.entropy_coef},
              {"max_grad_norm", cfg.ppo.max_grad_norm},
              {"n_envs", cfg.ppo.n_envs},
              {"workers", cfg.ppo.workers},
              {"lr_decay", cfg.ppo.lr_decay},
              {"hidden_width", cfg.ppo.hidden_width},
              {"init_log_std", cfg.ppo.init_log_std},
              {"checkpoint_every", cfg.ppo.checkpoint_every},
              {"log_wall_time", cfg.ppo.log_wall_time}};
  return j.dump(2) + "\n";
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config: " + path);
  out << run_config_to_json(cfg);
}

ResolvedScenarios resolve_scenarios(const std::vector<std::string>& refs,
                                    const std::string& base_dir) {
  ResolvedScenarios out;
  for (const std::string& ref : refs) {
    if (ref == "pointmass") {
      out.point_mass = true;
      continue;
    }
    if (ref == "loading_no_obstacle") {
      out.scenarios.push_back(make_scenario(TaskKind::kLoading, ObstacleMode::kAbsent));
    } else if (ref == "loading_obstacle") {
      out.scenarios.push_back(make_scenario(TaskKind::kLoading, ObstacleMode::kPresent));
    } else if (ref == "unloading_no_obstacle") {
      out.scenarios.push_back(make_scenario(TaskKind::kUnloading, ObstacleMode::kAbsent));
    } else if (ref == "unloading_obstacle") {
      out.scenarios.push_back(make_scenario(TaskKind::kUnloading, ObstacleMode::kPresent));
    } else {
      std::filesystem::path p(ref);
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      if (!std::filesystem::exists(p)) {
        std::string names;
        for (const auto& n : kBuiltinScenarios) names += " " + n;
        throw std::invalid_argument("unknown scenario '" + ref +
                                    "' (not a file; built-ins:" + names + ")");
      }
      out.scenarios.push_back(load_scenario(p.string()));
    }
  }
  if (out.point_mass && !out.scenarios.empty()) {
    throw std::invalid_argument("'pointmass' cannot be mixed with crane scenarios");
  }
  return out;
}

TrainInputs make_train_inputs(const RunConfig& cfg, const std::string& base_dir) {
  TrainInputs in;
  in.ppo = cfg.ppo;
  in.crane = cfg.crane;
  in.reward = cfg.reward;
  in.env_opts = cfg.env_opts;
  const ResolvedScenarios rs = resolve_scenarios(cfg.scenario_refs, base_dir);
  in.scenarios = rs.scenarios;
  in.point_mass = rs.point_mass;
  in.out_dir = cfg.output_dir;
  return in;
}

}  // namespace craneppo
