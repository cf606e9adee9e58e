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
#include <numbers>
#include <vector>

#include "craneppo/crane.hpp"
#include "craneppo/rng.hpp"

using namespace craneppo;

namespace {

constexpr double kPi = std::numbers::pi;

CraneState random_state(const CraneConfig& cfg, Rng& rng) {
  CraneState st;
  st.slew = rng.uniform(-kPi, kPi);
  st.luff = rng.uniform(cfg.luff_min + 0.01, cfg.luff_max - 0.01);
  st.boom_len = rng.uniform(cfg.boom_min_len + 0.01, cfg.boom_max_len - 0.01);
  return st;
}

// Pendulum mechanical energy per unit mass, measured from the rope's low point.
double pendulum_energy(const CraneConfig& cfg, const Vec3& tip, const PayloadState& p) {
  const double low_z = tip.z() - cfg.rope_length;
  return 0.5 * p.payload_vel.squaredNorm() + cfg.gravity * (p.payload_pos.z() - low_z);
}

}  // namespace

TEST_CASE("forward kinematics planar and rotated cases") {
  CraneConfig cfg;
  cfg.luff_max = kPi / 2;

  CraneState st{0.0, 0.0, 10.0};
  CHECK((forward_kinematics(cfg, st) - Vec3(10, 0, 3)).norm() < 1e-12);

  st.slew = kPi / 2;
  CHECK((forward_kinematics(cfg, st) - Vec3(0, 10, 3)).norm() < 1e-9);

  st.slew = 0.0;
  st.luff = kPi / 2;
  CHECK((forward_kinematics(cfg, st) - Vec3(0, 0, 13)).norm() < 1e-9);
}

TEST_CASE("inverse kinematics recovers random reachable states") {
  CraneConfig cfg;
  Rng rng(123);
  for (int i = 0; i < 1000; ++i) {
    const CraneState st = random_state(cfg, rng);
    const Vec3 tip = forward_kinematics(cfg, st);
    const IkResult ik = inverse_kinematics(cfg, tip, 0.0);
    CHECK_FALSE(ik.clamped);
    CHECK(std::abs(wrap_angle_diff(ik.state.slew, st.slew)) < 1e-9);
    CHECK(std::abs(ik.state.luff - st.luff) < 1e-9);
    CHECK(std::abs(ik.state.boom_len - st.boom_len) < 1e-9);
    CHECK((forward_kinematics(cfg, ik.state) - tip).norm() < 1e-6);
  }
}

TEST_CASE("inverse kinematics clamps unreachable targets") {
  CraneConfig cfg;
  const IkResult far = inverse_kinematics(cfg, Vec3(100, 0, 3), 0.0);
  CHECK(far.clamped);
  CHECK(far.state.boom_len == cfg.boom_max_len);

  const IkResult planar = inverse_kinematics(cfg, Vec3(7, 0, cfg.boom_pivot_height), 0.0);
  CHECK_FALSE(planar.clamped);
  CHECK(planar.state.slew == doctest::Approx(0.0));
  CHECK(planar.state.luff == doctest::Approx(0.0));
  CHECK(planar.state.boom_len == doctest::Approx(7.0));

  // On the pivot axis the slew is kept.
  const IkResult axis = inverse_kinematics(cfg, Vec3(0, 0, cfg.boom_pivot_height), 1.234);
  CHECK(axis.state.slew == doctest::Approx(1.234));
}

TEST_CASE("rope angle") {
  CHECK(rope_angle(Vec3(0, 0, 10), Vec3(0, 0, 5)) == doctest::Approx(0.0));

  const double L = 5.0;
  const Vec3 tip(1, 2, 10);
  const Vec3 payload = tip + Vec3(L * std::sin(kPi / 6), 0, -L * std::cos(kPi / 6));
  CHECK(std::abs(rope_angle(tip, payload) - kPi / 6) < 1e-9);

  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const Vec3 t(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 10));
    const Vec3 p(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-10, 5));
    const Vec3 d = t - p;
    if (d.norm() < 1e-6) continue;
    CHECK(rope_angle(t, p) == doctest::Approx(std::acos(d.z() / d.norm())).epsilon(1e-9));
  }
  CHECK_THROWS(rope_angle(Vec3(1, 1, 1), Vec3(1, 1, 1)));
}

TEST_CASE("equilibrium payload stays exactly at rest") {
  CraneConfig cfg;
  CraneState crane{0.3, 0.4, 9.0};
  const Vec3 tip = forward_kinematics(cfg, crane);
  PayloadState payload = payload_at_rest(cfg, tip);

  for (int i = 0; i < 200; ++i) {
    auto [c2, p2] = step_dynamics(cfg, crane, payload, Vec3::Zero());
    crane = c2;
    payload = p2;
    CHECK(payload.rope_angle == 0.0);
    CHECK(payload.payload_vel.norm() == 0.0);
  }
  CHECK((payload.payload_pos - (tip - Vec3(0, 0, cfg.rope_length))).norm() == 0.0);
}

TEST_CASE("damped pendulum peak angles decay") {
  CraneConfig cfg;
  cfg.damping = 0.995;
  CraneState crane{0.0, 0.3, 10.0};
  const Vec3 tip = forward_kinematics(cfg, crane);
  PayloadState payload = payload_at_rest(cfg, tip);
  // Swing out to ~0.2 rad.
  payload.payload_pos =
      tip + Vec3(cfg.rope_length * std::sin(0.2), 0, -cfg.rope_length * std::cos(0.2));
  payload.rope_angle = 0.2;

  std::vector<double> peaks;
  double prev = payload.rope_angle;
  bool rising = false;
  for (int i = 0; i < 2000; ++i) {
    auto [c2, p2] = step_dynamics(cfg, crane, payload, Vec3::Zero());
    crane = c2;
    payload = p2;
    if (payload.rope_angle > prev) {
      rising = true;
    } else if (rising) {
      peaks.push_back(prev);  // local maximum of the swing
      rising = false;
    }
    prev = payload.rope_angle;
  }
  REQUIRE(peaks.size() >= 5);
  for (std::size_t i = 1; i < peaks.size(); ++i) CHECK(peaks[i] < peaks[i - 1]);
  CHECK(peaks.back() < 0.5 * peaks.front());
}

TEST_CASE("small-angle period matches 2*pi*sqrt(L/g) within 5%") {
  CraneConfig cfg;
  cfg.damping = 1.0;
  CraneState crane{0.0, 0.4, 8.0};
  const Vec3 tip = forward_kinematics(cfg, crane);
  PayloadState payload = payload_at_rest(cfg, tip);
  const double theta0 = 0.05;
  payload.payload_pos = tip + Vec3(cfg.rope_length * std::sin(theta0), 0,
                                   -cfg.rope_length * std::cos(theta0));

  // Count completed oscillations via sign changes of the x-offset.
  double prev_offset = payload.payload_pos.x() - tip.x();
  int crossings = 0;
  int last_crossing_step = 0;
  int first_crossing_step = -1;
  const int n_steps = 3000;
  for (int i = 1; i <= n_steps; ++i) {
    auto [c2, p2] = step_dynamics(cfg, crane, payload, Vec3::Zero());
    crane = c2;
    payload = p2;
    const double offset = payload.payload_pos.x() - tip.x();
    if (offset * prev_offset < 0.0) {
      ++crossings;
      if (first_crossing_step < 0) first_crossing_step = i;
      last_crossing_step = i;
    }
    prev_offset = offset;
  }
  REQUIRE(crossings >= 4);
  const double measured_period =
      2.0 * (last_crossing_step - first_crossing_step) * cfg.dt / (crossings - 1);
  const double expected = 2.0 * kPi * std::sqrt(cfg.rope_length / cfg.gravity);
  CHECK(std::abs(measured_period - expected) / expected < 0.05);
}

TEST_CASE("undamped energy drift stays within 1% over 10k steps") {
  CraneConfig cfg;
  cfg.damping = 1.0;
  CraneState crane{0.0, 0.5, 9.0};
  const Vec3 tip = forward_kinematics(cfg, crane);
  PayloadState payload = payload_at_rest(cfg, tip);
  const double theta0 = 0.3;
  payload.payload_pos = tip + Vec3(cfg.rope_length * std::sin(theta0), 0,
                                   -cfg.rope_length * std::cos(theta0));

  const int n = 10000;
  const int window = n / 10;
  double first_sum = 0.0, last_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    auto [c2, p2] = step_dynamics(cfg, crane, payload, Vec3::Zero());
    crane = c2;
    payload = p2;
    const double e = pendulum_energy(cfg, tip, payload);
    if (i < window) first_sum += e;
    if (i >= n - window) last_sum += e;
  }
  const double drift = std::abs(last_sum - first_sum) / first_sum;
  CHECK(drift < 0.01);
}

TEST_CASE("damped pendulum energy decreases period over period") {
  CraneConfig cfg;
  cfg.damping = 0.99;
  CraneState crane{0.0, 0.5, 9.0};
  const Vec3 tip = forward_kinematics(cfg, crane);
  PayloadState payload = payload_at_rest(cfg, tip);
  payload.payload_pos = tip + Vec3(cfg.rope_length * std::sin(0.25), 0,
                                   -cfg.rope_length * std::cos(0.25));

  // Mean energy over windows of roughly one oscillation; the discrete
  // integrator's bounded energy wiggle averages out at this scale.
  const int window = 225;
  std::vector<double> window_means;
  double acc = 0.0;
  for (int i = 1; i <= 3000; ++i) {
    auto [c2, p2] = step_dynamics(cfg, crane, payload, Vec3::Zero());
    crane = c2;
    payload = p2;
    acc += pendulum_energy(cfg, tip, payload);
    if (i % window == 0) {
      window_means.push_back(acc / window);
      acc = 0.0;
    }
  }
  REQUIRE(window_means.size() >= 10);
  for (std::size_t i = 1; i < window_means.size(); ++i) {
    CHECK(window_means[i] < window_means[i - 1]);
  }
  CHECK(window_means.back() < 0.2 * window_means.front());
}

TEST_CASE("rope stays rigid and joints stay limited under random commands") {
  CraneConfig cfg;
  Rng rng(77);
  CraneState crane{0.0, 0.3, 9.0};
  PayloadState payload = payload_at_rest(cfg, forward_kinematics(cfg, crane));

  for (int i = 0; i < 5000; ++i) {
    const Vec3 delta(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    auto [c2, p2] = step_dynamics(cfg, crane, payload, delta);
    crane = c2;
    payload = p2;
    const Vec3 tip = forward_kinematics(cfg, crane);
    CHECK(std::abs((payload.payload_pos - tip).norm() - cfg.rope_length) < 1e-6);
    CHECK(crane.luff >= cfg.luff_min);
    CHECK(crane.luff <= cfg.luff_max);
    CHECK(crane.boom_len >= cfg.boom_min_len);
    CHECK(crane.boom_len <= cfg.boom_max_len);
    CHECK(payload.rope_angle >= 0.0);
  }
}

TEST_CASE("step_dynamics is bitwise deterministic") {
  CraneConfig cfg;
  CraneState crane{0.2, 0.4, 10.0};
  PayloadState payload = payload_at_rest(cfg, forward_kinematics(cfg, crane));
  payload.payload_pos += Vec3(0.5, -0.2, 0.0);
  payload.payload_pos =
      forward_kinematics(cfg, crane) +
      cfg.rope_length * (payload.payload_pos - forward_kinematics(cfg, crane)).normalized();
  const Vec3 delta(0.1, -0.2, 0.05);

  auto [c1, p1] = step_dynamics(cfg, crane, payload, delta);
  auto [c2, p2] = step_dynamics(cfg, crane, payload, delta);
  CHECK(c1.slew == c2.slew);
  CHECK(c1.luff == c2.luff);
  CHECK(c1.boom_len == c2.boom_len);
  CHECK((p1.payload_pos - p2.payload_pos).norm() == 0.0);
  CHECK((p1.payload_vel - p2.payload_vel).norm() == 0.0);
  CHECK(p1.rope_angle == p2.rope_angle);
}

TEST_CASE("config validation rejects bad values") {
  CraneConfig cfg;
  cfg.damping = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = CraneConfig{};
  cfg.boom_min_len = 25.0;
  CHECK_THROWS(cfg.validate());
  cfg = CraneConfig{};
  cfg.dt = 0.0;
  CHECK_THROWS(cfg.validate());
  CHECK_NOTHROW(CraneConfig{}.validate());
}
