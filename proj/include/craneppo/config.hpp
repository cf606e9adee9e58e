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
#include <vector>

#include "craneppo/crane.hpp"
#include "craneppo/env.hpp"
#include "craneppo/ppo.hpp"

namespace craneppo {

// One self-describing configuration document drives a run. Unknown keys are
// rejected so typos cannot silently fall back to defaults; `config-default`
// prints the full schema with its default values.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "runs/out";
  // Built-in scenario names or paths to scenario files. Several entries train
  // one policy over a scenario mix (env slot i runs entry i mod size).
  std::vector<std::string> scenario_refs = {"loading_no_obstacle"};
  CraneConfig crane;
  RewardParams reward;
  EnvOptions env_opts;
  PpoConfig ppo;
};

RunConfig default_run_config();

// Parses the JSON text; errors carry the source name and a line number when
// the document itself is malformed, or the full key path for value errors.
RunConfig run_config_from_json_text(const std::string& text, const std::string& source_name);

// Loads a config file, then applies dotted-path overrides like
// "ppo.total_steps=10000" (values are parsed as JSON scalars; bare words act
// as strings).
RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides = {});

std::string run_config_to_json(const RunConfig& cfg);
void save_run_config(const RunConfig& cfg, const std::string& path);

inline const std::vector<std::string> kBuiltinScenarios = {
    "loading_no_obstacle", "loading_obstacle", "unloading_no_obstacle",
    "unloading_obstacle", "pointmass"};

// Maps a scenario reference (built-in name or file path, relative paths taken
// from base_dir) to the scenario itself. "pointmass" selects the built-in
// reach task; it cannot be mixed with crane scenarios.
struct ResolvedScenarios {
  std::vector<Scenario> scenarios;
  bool point_mass = false;
};
ResolvedScenarios resolve_scenarios(const std::vector<std::string>& refs,
                                    const std::string& base_dir);

TrainInputs make_train_inputs(const RunConfig& cfg, const std::string& base_dir);

}  // namespace craneppo
