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

#include "craneppo/neural.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace craneppo {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)

void check_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("Mlp: need at least two layer sizes");
  for (int n : sizes) {
    if (n <= 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
  }
}
}  // namespace

Mlp Mlp::zeros(const std::vector<int>& sizes) {
  check_sizes(sizes);
  Mlp net;
  net.layer_sizes = sizes;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    net.weights.push_back(MatX::Zero(sizes[l + 1], sizes[l]));
    net.biases.push_back(VecX::Zero(sizes[l + 1]));
  }
  return net;
}

Mlp Mlp::orthogonal(const std::vector<int>& sizes, Rng& rng, double hidden_gain,
                    double final_gain) {
  Mlp net = zeros(sizes);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const Eigen::Index rows = net.weights[l].rows();
    const Eigen::Index cols = net.weights[l].cols();
    // QR of a Gaussian matrix; sign-fix with diag(R) so the factorization is
    // unique and the columns are uniformly distributed orthonormal vectors.
    const Eigen::Index n = std::max(rows, cols);
    MatX gauss(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) gauss(i, j) = rng.normal();
    Eigen::HouseholderQR<MatX> qr(gauss);
    MatX q = qr.householderQ();
    const MatX r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    const double gain = (l + 1 == net.weights.size()) ? final_gain : hidden_gain;
    net.weights[l] = gain * q.topLeftCorner(rows, cols);
  }
  return net;
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size()) + static_cast<std::size_t>(biases[l].size());
  }
  return n;
}

VecX Mlp::flatten() const {
  VecX flat(param_count());
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const MatX& w = weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) flat[k++] = w(i, j);
    for (Eigen::Index i = 0; i < biases[l].size(); ++i) flat[k++] = biases[l][i];
  }
  return flat;
}

void Mlp::unflatten(const VecX& flat) {
  if (static_cast<std::size_t>(flat.size()) != param_count()) {
    throw std::invalid_argument("Mlp::unflatten: parameter count mismatch");
  }
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    MatX& w = weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = flat[k++];
    for (Eigen::Index i = 0; i < biases[l].size(); ++i) biases[l][i] = flat[k++];
  }
}

MlpGrad MlpGrad::zeros_like(const Mlp& net) {
  MlpGrad g;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    g.d_weights.push_back(MatX::Zero(net.weights[l].rows(), net.weights[l].cols()));
    g.d_biases.push_back(VecX::Zero(net.biases[l].size()));
  }
  return g;
}

VecX MlpGrad::flatten() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < d_weights.size(); ++l) {
    n += static_cast<std::size_t>(d_weights[l].size()) +
         static_cast<std::size_t>(d_biases[l].size());
  }
  VecX flat(n);
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < d_weights.size(); ++l) {
    const MatX& w = d_weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) flat[k++] = w(i, j);
    for (Eigen::Index i = 0; i < d_biases[l].size(); ++i) flat[k++] = d_biases[l][i];
  }
  return flat;
}

MatX mlp_forward(const Mlp& net, const MatX& x, MlpCache* cache) {
  if (x.rows() != net.input_dim()) {
    throw std::invalid_argument("mlp_forward: input dimension mismatch");
  }
  if (cache) {
    cache->input = x;
    cache->activations.clear();
  }
  MatX a = x;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    MatX z = (net.weights[l] * a).colwise() + net.biases[l];
    if (l + 1 < net.weights.size()) {
      a = z.array().tanh();
      if (cache) cache->activations.push_back(a);
    } else {
      a = std::move(z);
    }
  }
  return a;
}

VecX mlp_forward_vec(const Mlp& net, const VecX& x) {
  return mlp_forward(net, x, nullptr).col(0);
}

MlpGrad mlp_backward(const Mlp& net, const MlpCache& cache, const MatX& upstream) {
  const std::size_t layers = net.weights.size();
  MlpGrad grad = MlpGrad::zeros_like(net);
  MatX g = upstream;
  for (std::size_t l = layers; l-- > 0;) {
    const MatX& below = (l == 0) ? cache.input : cache.activations[l - 1];
    grad.d_weights[l] = g * below.transpose();
    grad.d_biases[l] = g.rowwise().sum();
    if (l > 0) {
      g = (net.weights[l].transpose() * g).array() *
          (1.0 - cache.activations[l - 1].array().square());
    }
  }
  return grad;
}

VecX GaussianPolicy::flatten() const {
  VecX net_flat = mean_net.flatten();
  VecX flat(net_flat.size() + log_std.size());
  flat << net_flat, log_std;
  return flat;
}

void GaussianPolicy::unflatten(const VecX& flat) {
  const Eigen::Index net_n = static_cast<Eigen::Index>(mean_net.param_count());
  mean_net.unflatten(flat.head(net_n));
  log_std = flat.tail(log_std.size());
}

VecX PolicyGrad::flatten() const {
  VecX net_flat = net.flatten();
  VecX flat(net_flat.size() + d_log_std.size());
  flat << net_flat, d_log_std;
  return flat;
}

double log_prob(const GaussianPolicy& policy, const VecX& s, const VecX& a) {
  const VecX mu = mlp_forward_vec(policy.mean_net, s);
  if (a.size() != mu.size()) throw std::invalid_argument("log_prob: action dimension mismatch");
  double lp = -0.5 * static_cast<double>(a.size()) * kLog2Pi;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double sigma = std::exp(policy.log_std[i]);
    const double z = (a[i] - mu[i]) / sigma;
    lp -= 0.5 * z * z + policy.log_std[i];
  }
  return lp;
}

double log_prob_grad(const GaussianPolicy& policy, const VecX& s, const VecX& a,
                     PolicyGrad* grad) {
  MlpCache cache;
  const VecX mu = mlp_forward(policy.mean_net, s, &cache).col(0);
  if (a.size() != mu.size()) throw std::invalid_argument("log_prob_grad: action dimension mismatch");

  double lp = -0.5 * static_cast<double>(a.size()) * kLog2Pi;
  VecX d_mu(a.size());
  VecX d_log_std(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double sigma = std::exp(policy.log_std[i]);
    const double z = (a[i] - mu[i]) / sigma;
    lp -= 0.5 * z * z + policy.log_std[i];
    d_mu[i] = z / sigma;          // d lp / d mu_i
    d_log_std[i] = z * z - 1.0;   // d lp / d log_std_i
  }
  if (grad) {
    grad->net = mlp_backward(policy.mean_net, cache, d_mu);
    grad->d_log_std = d_log_std;
  }
  return lp;
}

VecX sample_action(const GaussianPolicy& policy, const VecX& s, Rng& rng) {
  VecX a = mlp_forward_vec(policy.mean_net, s);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a[i] += std::exp(policy.log_std[i]) * rng.normal();
  }
  return a;
}

VecX mean_action(const GaussianPolicy& policy, const VecX& s) {
  return mlp_forward_vec(policy.mean_net, s);
}

double policy_entropy(const GaussianPolicy& policy) {
  // 0.5*k*(1 + log 2pi) + sum log_std
  return 0.5 * static_cast<double>(policy.log_std.size()) * (1.0 + kLog2Pi) +
         policy.log_std.sum();
}

void clamp_log_std(GaussianPolicy& policy) {
  for (Eigen::Index i = 0; i < policy.log_std.size(); ++i) {
    policy.log_std[i] = std::clamp(policy.log_std[i], kLogStdMin, kLogStdMax);
  }
}

AdamState::AdamState(Eigen::Index n, double lr)
    : first_moment(VecX::Zero(n)), second_moment(VecX::Zero(n)), learning_rate(lr) {}

void AdamState::step(VecX& params, const VecX& grads) {
  if (grads.size() != params.size() || params.size() != first_moment.size()) {
    throw std::invalid_argument("AdamState::step: shape mismatch");
  }
  if (!grads.allFinite()) {
    throw std::runtime_error("AdamState::step: non-finite gradient");
  }
  ++step_count;
  first_moment = beta1 * first_moment + (1.0 - beta1) * grads;
  second_moment = beta2 * second_moment.array().matrix() +
                  (1.0 - beta2) * grads.array().square().matrix();
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
  params.array() -= learning_rate * (first_moment.array() / bc1) /
                    ((second_moment.array() / bc2).sqrt() + eps_adam);
}

}  // namespace craneppo
