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

#include "craneppo/crane.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace craneppo {

namespace {
constexpr double kPi = std::numbers::pi;
}

void CraneConfig::validate() const {
  if (!(boom_min_len < boom_max_len)) {
    throw std::invalid_argument("CraneConfig: boom_min_len must be < boom_max_len");
  }
  if (!(boom_min_len > 0.0)) {
    throw std::invalid_argument("CraneConfig: boom_min_len must be > 0");
  }
  if (!(0.0 <= luff_min && luff_min < luff_max && luff_max <= kPi / 2.0)) {
    throw std::invalid_argument("CraneConfig: need 0 <= luff_min < luff_max <= pi/2");
  }
  if (!(rope_length > 0.0)) {
    throw std::invalid_argument("CraneConfig: rope_length must be > 0");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("CraneConfig: dt must be > 0");
  if (!(damping > 0.0 && damping <= 1.0)) {
    throw std::invalid_argument("CraneConfig: damping must be in (0, 1]");
  }
  if (!(slew_rate_max > 0.0 && luff_rate_max > 0.0 && telescope_rate_max > 0.0)) {
    throw std::invalid_argument("CraneConfig: rate limits must be > 0");
  }
  if (substeps < 1) throw std::invalid_argument("CraneConfig: substeps must be >= 1");
  for (int i = 0; i < 3; ++i) {
    if (payload_half_extents[i] < 0.0) {
      throw std::invalid_argument("CraneConfig: payload half extents must be >= 0");
    }
  }
}

double wrap_angle_diff(double a, double b) {
  double d = std::fmod(a - b, 2.0 * kPi);
  if (d <= -kPi) d += 2.0 * kPi;
  if (d > kPi) d -= 2.0 * kPi;
  return d;
}

Vec3 forward_kinematics(const CraneConfig& cfg, const CraneState& st) {
  const double horizontal = st.boom_len * std::cos(st.luff);
  return cfg.base_pos + Vec3(horizontal * std::cos(st.slew),
                             horizontal * std::sin(st.slew),
                             cfg.boom_pivot_height + st.boom_len * std::sin(st.luff));
}

IkResult inverse_kinematics(const CraneConfig& cfg, const Vec3& target_tip,
                            double prev_slew) {
  const Vec3 rel = target_tip - cfg.base_pos;
  const double r = std::hypot(rel.x(), rel.y());
  const double h = rel.z() - cfg.boom_pivot_height;

  IkResult out;
  out.state.slew = (r == 0.0) ? prev_slew : std::atan2(rel.y(), rel.x());
  out.state.luff = std::atan2(h, r);
  out.state.boom_len = std::sqrt(r * r + h * h);

  const double luff_raw = out.state.luff;
  const double boom_raw = out.state.boom_len;
  out.state.luff = std::clamp(out.state.luff, cfg.luff_min, cfg.luff_max);
  out.state.boom_len = std::clamp(out.state.boom_len, cfg.boom_min_len, cfg.boom_max_len);
  out.clamped = (out.state.luff != luff_raw) || (out.state.boom_len != boom_raw);
  return out;
}

double rope_angle(const Vec3& tip, const Vec3& payload_pos) {
  const Vec3 rope = tip - payload_pos;
  const double len = rope.norm();
  if (len == 0.0) throw std::invalid_argument("rope_angle: zero-length rope vector");
  return std::acos(std::clamp(rope.z() / len, -1.0, 1.0));
}

PayloadState payload_at_rest(const CraneConfig& cfg, const Vec3& tip) {
  PayloadState p;
  p.payload_pos = tip - Vec3(0.0, 0.0, cfg.rope_length);
  p.payload_vel = Vec3::Zero();
  p.rope_angle = 0.0;
  return p;
}

namespace {

// Move each joint at most its per-step rate toward the IK solution and keep
// it inside the joint box.
CraneState rate_limited_toward(const CraneConfig& cfg, const CraneState& from,
                               const CraneState& to) {
  CraneState next;
  const double dslew = wrap_angle_diff(to.slew, from.slew);
  next.slew = from.slew + std::clamp(dslew, -cfg.slew_rate_max, cfg.slew_rate_max);
  if (next.slew > kPi) next.slew -= 2.0 * kPi;
  if (next.slew <= -kPi) next.slew += 2.0 * kPi;

  const double dluff = to.luff - from.luff;
  next.luff = from.luff + std::clamp(dluff, -cfg.luff_rate_max, cfg.luff_rate_max);
  next.luff = std::clamp(next.luff, cfg.luff_min, cfg.luff_max);

  const double dlen = to.boom_len - from.boom_len;
  next.boom_len =
      from.boom_len + std::clamp(dlen, -cfg.telescope_rate_max, cfg.telescope_rate_max);
  next.boom_len = std::clamp(next.boom_len, cfg.boom_min_len, cfg.boom_max_len);
  return next;
}

}  // namespace

std::pair<CraneState, PayloadState> step_dynamics(const CraneConfig& cfg,
                                                  const CraneState& crane,
                                                  const PayloadState& payload,
                                                  const Vec3& tip_delta) {
  const Vec3 tip_old = forward_kinematics(cfg, crane);
  const IkResult ik = inverse_kinematics(cfg, tip_old + tip_delta, crane.slew);
  const CraneState next_crane = rate_limited_toward(cfg, crane, ik.state);
  const Vec3 tip_new = forward_kinematics(cfg, next_crane);

  // Damped spherical pendulum in the frame of the moving suspension point,
  // integrated semi-implicitly in angular state (rope direction u, angular
  // velocity w with w perpendicular to u). The tip moves at constant velocity
  // within a control step, so its acceleration is the velocity jump between
  // consecutive steps; subtracting the current tip velocity from the stored
  // world payload velocity applies exactly that impulse to the pendulum.
  const double h = cfg.dt;
  const double rope_len = cfg.rope_length;
  const Vec3 gravity_acc(0.0, 0.0, -cfg.gravity);
  const Vec3 tip_vel = (tip_new - tip_old) / (h * cfg.substeps);

  Vec3 u = (payload.payload_pos - tip_old) / rope_len;
  u /= u.norm();
  const Vec3 v_rel = payload.payload_vel - tip_vel;
  Vec3 w = u.cross(v_rel) / rope_len;  // radial part of v_rel drops out here

  Vec3 pos = payload.payload_pos;
  for (int i = 1; i <= cfg.substeps; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(cfg.substeps);
    const Vec3 tip_i = tip_old + t * (tip_new - tip_old);
    w += (h / rope_len) * u.cross(gravity_acc);
    w *= cfg.damping;
    u = (u + h * w.cross(u)).normalized();
    w -= w.dot(u) * u;
    pos = tip_i + rope_len * u;
  }

  PayloadState next_payload;
  next_payload.payload_pos = pos;
  next_payload.payload_vel = tip_vel + rope_len * w.cross(u);
  next_payload.rope_angle = rope_angle(tip_new, pos);
  return {next_crane, next_payload};
}

}  // namespace craneppo
