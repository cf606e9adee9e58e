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
#include <limits>

#include "craneppo/neural.hpp"
#include "craneppo/rng.hpp"

using namespace craneppo;

namespace {

Mlp random_net(const std::vector<int>& sizes, Rng& rng, double scale = 0.5) {
  Mlp net = Mlp::zeros(sizes);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < net.weights[l].rows(); ++i) {
      for (Eigen::Index j = 0; j < net.weights[l].cols(); ++j) {
        net.weights[l](i, j) = scale * rng.normal();
      }
    }
    for (Eigen::Index i = 0; i < net.biases[l].size(); ++i) {
      net.biases[l][i] = scale * rng.normal();
    }
  }
  return net;
}

// Plain second implementation of the forward pass, loops only.
VecX oracle_forward(const Mlp& net, const VecX& x) {
  VecX a = x;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    VecX z(net.weights[l].rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      double s = net.biases[l][i];
      for (Eigen::Index j = 0; j < a.size(); ++j) s += net.weights[l](i, j) * a[j];
      z[i] = s;
    }
    if (l + 1 < net.weights.size()) {
      for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = std::tanh(z[i]);
    }
    a = z;
  }
  return a;
}

double relative_gradient_error(const VecX& analytic, const VecX& numeric) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double denom = std::max(std::abs(numeric[i]), 1e-6);
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("forward pass of a zero-weight network returns the last bias") {
  Mlp net = Mlp::zeros({4, 8, 3});
  net.biases[1] << 0.5, -1.5, 2.0;
  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    VecX x(4);
    x << rng.normal(), rng.normal(), rng.normal(), rng.normal();
    CHECK((mlp_forward_vec(net, x) - net.biases[1]).norm() == 0.0);
  }
  CHECK(net.param_count() == 4 * 8 + 8 + 8 * 3 + 3);
}

TEST_CASE("single linear layer computes Wx + b") {
  Mlp net = Mlp::zeros({3, 2});
  net.weights[0] << 1, 2, 3, 4, 5, 6;
  net.biases[0] << -1, 1;
  VecX x(3);
  x << 1, 0.5, -2;
  VecX expected(2);
  expected << 1 * 1 + 2 * 0.5 + 3 * -2 - 1, 4 * 1 + 5 * 0.5 + 6 * -2 + 1;
  CHECK((mlp_forward_vec(net, x) - expected).norm() < 1e-14);
  CHECK_THROWS(mlp_forward_vec(net, VecX::Zero(4)));
}

TEST_CASE("forward pass matches an independent implementation") {
  Rng rng(99);
  Mlp net = random_net({10, 16, 16, 3}, rng);
  for (int i = 0; i < 50; ++i) {
    VecX x(10);
    for (int j = 0; j < 10; ++j) x[j] = rng.normal();
    CHECK((mlp_forward_vec(net, x) - oracle_forward(net, x)).norm() < 1e-12);
  }
}

TEST_CASE("batched forward equals per-sample forward") {
  Rng rng(123);
  Mlp net = random_net({6, 12, 2}, rng);
  MatX xs(6, 7);
  for (Eigen::Index c = 0; c < xs.cols(); ++c)
    for (Eigen::Index r = 0; r < xs.rows(); ++r) xs(r, c) = rng.normal();
  const MatX ys = mlp_forward(net, xs);
  for (Eigen::Index c = 0; c < xs.cols(); ++c) {
    CHECK((ys.col(c) - mlp_forward_vec(net, xs.col(c))).norm() < 1e-13);
  }
}

TEST_CASE("log_prob closed-form values") {
  GaussianPolicy policy;
  policy.mean_net = Mlp::zeros({4, 3});
  policy.mean_net.biases[0] << 0.3, -0.2, 1.0;  // mean independent of input
  policy.log_std = VecX::Zero(3);               // sigma = 1

  const VecX s = VecX::Zero(4);
  VecX a(3);
  a << 0.3, -0.2, 1.0;
  const double at_mean = log_prob(policy, s, a);
  CHECK(at_mean == doctest::Approx(-1.5 * std::log(2.0 * M_PI)).epsilon(1e-12));

  a[0] += 1.0;  // one unit away in a unit-sigma component
  CHECK(log_prob(policy, s, a) == doctest::Approx(at_mean - 0.5).epsilon(1e-12));
}

TEST_CASE("log_prob gradient matches central finite differences") {
  Rng rng(2024);
  for (int instance = 0; instance < 100; ++instance) {
    GaussianPolicy policy;
    policy.mean_net = random_net({5, 8, 3}, rng);
    policy.log_std = VecX(3);
    for (int i = 0; i < 3; ++i) policy.log_std[i] = rng.uniform(-1.5, 0.5);

    VecX s(5);
    for (int i = 0; i < 5; ++i) s[i] = rng.normal();
    VecX a(3);
    for (int i = 0; i < 3; ++i) a[i] = rng.normal();

    PolicyGrad grad;
    log_prob_grad(policy, s, a, &grad);
    const VecX analytic = grad.flatten();

    const double h = 1e-5;
    const VecX flat = policy.flatten();
    VecX numeric(flat.size());
    GaussianPolicy probe = policy;
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
      VecX bumped = flat;
      bumped[i] = flat[i] + h;
      probe.unflatten(bumped);
      const double f_plus = log_prob(probe, s, a);
      bumped[i] = flat[i] - h;
      probe.unflatten(bumped);
      const double f_minus = log_prob(probe, s, a);
      numeric[i] = (f_plus - f_minus) / (2.0 * h);
    }
    CHECK(relative_gradient_error(analytic, numeric) < 1e-4);
  }
}

TEST_CASE("sampling with the clamp-floor sigma hugs the mean") {
  Rng init(7);
  GaussianPolicy policy;
  policy.mean_net = random_net({4, 6, 3}, init);
  policy.log_std = VecX::Constant(3, kLogStdMin);

  VecX s(4);
  s << 0.1, -0.3, 0.7, 0.0;
  const VecX mu = mean_action(policy, s);
  Rng rng(55);
  VecX mean_acc = VecX::Zero(3);
  for (int i = 0; i < 100; ++i) {
    const VecX a = sample_action(policy, s, rng);
    CHECK((a - mu).cwiseAbs().maxCoeff() < 0.05);
    mean_acc += a;
  }
  CHECK(((mean_acc / 100.0) - mu).cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("sample moments match the distribution parameters") {
  GaussianPolicy policy;
  policy.mean_net = Mlp::zeros({2, 3});
  policy.mean_net.biases[0] << 0.5, -0.3, 1.0;
  policy.log_std = VecX(3);
  policy.log_std << 0.0, std::log(0.5), std::log(2.0);

  const VecX s = VecX::Zero(2);
  const VecX mu = mean_action(policy, s);
  Rng rng(31337);
  const int n = 100000;
  VecX sum = VecX::Zero(3), sum_sq = VecX::Zero(3);
  for (int i = 0; i < n; ++i) {
    const VecX a = sample_action(policy, s, rng);
    sum += a;
    sum_sq += (a - mu).cwiseAbs2();
  }
  const VecX mean = sum / n;
  const VecX stddev = (sum_sq / n).cwiseSqrt();
  for (int i = 0; i < 3; ++i) {
    const double sigma = std::exp(policy.log_std[i]);
    CHECK(std::abs(mean[i] - mu[i]) < 0.02 * sigma);
    CHECK(std::abs(stddev[i] - sigma) / sigma < 0.02);
  }
}

TEST_CASE("identical rng seeds give identical samples") {
  Rng init(9);
  GaussianPolicy policy;
  policy.mean_net = random_net({4, 8, 3}, init);
  policy.log_std = VecX::Zero(3);
  VecX s(4);
  s << 1, 2, 3, 4;

  Rng rng_a(777), rng_b(777);
  for (int i = 0; i < 20; ++i) {
    CHECK((sample_action(policy, s, rng_a) - sample_action(policy, s, rng_b)).norm() == 0.0);
  }
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
  AdamState opt(5, 1e-3);
  VecX params(5);
  params << 1, -2, 3, -4, 5;
  const VecX before = params;
  opt.step(params, VecX::Zero(5));
  CHECK((params - before).norm() == 0.0);
}

TEST_CASE("adam: bias-corrected first step is learning_rate * sign(grad)") {
  const double lr = 1e-3;
  AdamState opt(3, lr);
  VecX params = VecX::Zero(3);
  VecX grads(3);
  grads << 2.0, -0.5, 10.0;
  opt.step(params, grads);
  for (int i = 0; i < 3; ++i) {
    const double expected = -lr * (grads[i] > 0 ? 1.0 : -1.0);
    CHECK(std::abs(params[i] - expected) < lr * 1e-6);
  }
}

TEST_CASE("adam: rejects non-finite gradients and keeps parameters") {
  AdamState opt(2, 1e-3);
  VecX params(2);
  params << 1, 2;
  VecX grads(2);
  grads << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(opt.step(params, grads));
  CHECK(params[0] == 1.0);
  CHECK(params[1] == 2.0);
}

TEST_CASE("adam: minimizes a quadratic bowl") {
  Rng rng(4);
  VecX w(6);
  for (int i = 0; i < 6; ++i) w[i] = rng.uniform(-2, 2);
  AdamState opt(6, 1e-2);
  for (int step = 0; step < 10000 && w.norm() >= 1e-3; ++step) {
    opt.step(w, 2.0 * w);
  }
  CHECK(w.norm() < 1e-3);
}

TEST_CASE("flatten/unflatten round-trips bitwise") {
  Rng rng(12);
  Mlp net = random_net({7, 9, 4}, rng);
  const VecX flat = net.flatten();
  Mlp other = Mlp::zeros({7, 9, 4});
  other.unflatten(flat);
  CHECK((other.flatten() - flat).norm() == 0.0);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    CHECK((other.weights[l] - net.weights[l]).norm() == 0.0);
    CHECK((other.biases[l] - net.biases[l]).norm() == 0.0);
  }
  CHECK_THROWS(other.unflatten(VecX::Zero(3)));
}

TEST_CASE("orthogonal init is seed-deterministic and orthogonal") {
  Rng a(2718), b(2718);
  const Mlp net_a = Mlp::orthogonal({10, 64, 64, 3}, a, std::sqrt(2.0), 0.01);
  const Mlp net_b = Mlp::orthogonal({10, 64, 64, 3}, b, std::sqrt(2.0), 0.01);
  CHECK((net_a.flatten() - net_b.flatten()).norm() == 0.0);

  // Tall layer: columns orthonormal, scaled by the hidden gain.
  const MatX& w0 = net_a.weights[0];
  CHECK((w0.transpose() * w0 - 2.0 * MatX::Identity(10, 10)).norm() < 1e-9);
  // Square layer.
  const MatX& w1 = net_a.weights[1];
  CHECK((w1 * w1.transpose() - 2.0 * MatX::Identity(64, 64)).norm() < 1e-9);
  // Wide final layer: rows orthonormal, scaled down.
  const MatX& w2 = net_a.weights[2];
  CHECK((w2 * w2.transpose() - 0.0001 * MatX::Identity(3, 3)).norm() < 1e-9);
  for (const VecX& bias : net_a.biases) CHECK(bias.norm() == 0.0);
}

TEST_CASE("log_std clamping") {
  GaussianPolicy policy;
  policy.mean_net = Mlp::zeros({3, 3});
  policy.log_std = VecX(3);
  policy.log_std << -9.0, 0.5, 7.0;
  clamp_log_std(policy);
  CHECK(policy.log_std[0] == kLogStdMin);
  CHECK(policy.log_std[1] == 0.5);
  CHECK(policy.log_std[2] == kLogStdMax);
}

TEST_CASE("log_prob of sampled actions is finite") {
  Rng rng(65);
  GaussianPolicy policy;
  policy.mean_net = random_net({6, 10, 3}, rng);
  policy.log_std = VecX(3);
  policy.log_std << kLogStdMin, 0.0, kLogStdMax;
  for (int i = 0; i < 500; ++i) {
    VecX s(6);
    for (int j = 0; j < 6; ++j) s[j] = rng.normal();
    const VecX a = sample_action(policy, s, rng);
    CHECK(std::isfinite(log_prob(policy, s, a)));
  }
}
