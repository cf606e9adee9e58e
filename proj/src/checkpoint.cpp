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

#include "craneppo/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace craneppo {

namespace {

constexpr char kMagic[4] = {'C', 'P', 'K', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_i64(std::ostream& out, std::int64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_vec(std::ostream& out, const VecX& v) {
  write_u32(out, static_cast<std::uint32_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void write_sizes(std::ostream& out, const std::vector<int>& sizes) {
  write_u32(out, static_cast<std::uint32_t>(sizes.size()));
  for (int s : sizes) write_u32(out, static_cast<std::uint32_t>(s));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

std::int64_t read_i64(std::istream& in) {
  std::int64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

double read_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

VecX read_vec(std::istream& in) {
  const std::uint32_t n = read_u32(in);
  VecX v(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  return v;
}

std::vector<int> read_sizes(std::istream& in) {
  const std::uint32_t n = read_u32(in);
  std::vector<int> sizes(n);
  for (std::uint32_t i = 0; i < n; ++i) sizes[i] = static_cast<int>(read_u32(in));
  return sizes;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_i64(out, ckpt.env_steps);

  write_sizes(out, ckpt.actor.mean_net.layer_sizes);
  write_vec(out, ckpt.actor.mean_net.flatten());
  write_vec(out, ckpt.actor.log_std);

  write_sizes(out, ckpt.critic.layer_sizes);
  write_vec(out, ckpt.critic.flatten());

  write_f64(out, ckpt.normalizer.pos_scale);
  write_f64(out, ckpt.normalizer.angle_scale);
  write_f64(out, ckpt.normalizer.steps_scale);
  write_f64(out, ckpt.action_bound);

  write_f64(out, ckpt.reward.p1);
  write_f64(out, ckpt.reward.p2);
  write_f64(out, ckpt.reward.p3);
  write_f64(out, ckpt.reward.p4);
  write_f64(out, ckpt.reward.p5);
  write_f64(out, ckpt.reward.theta_thr);
  write_i64(out, ckpt.reward.n_step_max);
  write_f64(out, ckpt.reward.success_tol);
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a checkpoint file (bad magic): " + path);
  }
  Checkpoint ckpt;
  ckpt.env_steps = read_i64(in);

  ckpt.actor.mean_net = Mlp::zeros(read_sizes(in));
  ckpt.actor.mean_net.unflatten(read_vec(in));
  ckpt.actor.log_std = read_vec(in);

  ckpt.critic = Mlp::zeros(read_sizes(in));
  ckpt.critic.unflatten(read_vec(in));

  ckpt.normalizer.pos_scale = read_f64(in);
  ckpt.normalizer.angle_scale = read_f64(in);
  ckpt.normalizer.steps_scale = read_f64(in);
  ckpt.action_bound = read_f64(in);

  ckpt.reward.p1 = read_f64(in);
  ckpt.reward.p2 = read_f64(in);
  ckpt.reward.p3 = read_f64(in);
  ckpt.reward.p4 = read_f64(in);
  ckpt.reward.p5 = read_f64(in);
  ckpt.reward.theta_thr = read_f64(in);
  ckpt.reward.n_step_max = static_cast<int>(read_i64(in));
  ckpt.reward.success_tol = read_f64(in);
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return ckpt;
}

}  // namespace craneppo
