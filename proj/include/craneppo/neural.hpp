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

#include <cstdint>
#include <vector>

#include "craneppo/rng.hpp"
#include "craneppo/types.hpp"

namespace craneppo {

// Feed-forward network with tanh hidden layers and an identity output layer.
// Small and fixed-shape, so gradients are hand-derived; samples are stored
// column-wise so whole minibatches go through one GEMM per layer.
struct Mlp {
  std::vector<int> layer_sizes;  // e.g. {10, 64, 64, 3}
  std::vector<MatX> weights;     // per layer, (n_out x n_in)
  std::vector<VecX> biases;      // per layer, n_out

  static Mlp zeros(const std::vector<int>& sizes);

  // Orthogonal weight matrices scaled by `hidden_gain` on hidden layers and
  // `final_gain` on the output layer; zero biases. Deterministic given rng.
  static Mlp orthogonal(const std::vector<int>& sizes, Rng& rng,
                        double hidden_gain, double final_gain);

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  std::size_t param_count() const;

  // Parameters flattened layer by layer, weights in row-major order followed
  // by the bias vector. This is also the checkpoint byte order.
  VecX flatten() const;
  void unflatten(const VecX& flat);
};

struct MlpCache {
  MatX input;                     // n_in x B
  std::vector<MatX> activations;  // post-tanh hidden activations, per layer
};

struct MlpGrad {
  std::vector<MatX> d_weights;
  std::vector<VecX> d_biases;

  static MlpGrad zeros_like(const Mlp& net);
  VecX flatten() const;
};

// Batched forward pass; x is (input_dim x B). Fills `cache` when given.
MatX mlp_forward(const Mlp& net, const MatX& x, MlpCache* cache = nullptr);
VecX mlp_forward_vec(const Mlp& net, const VecX& x);

// Backprop of a scalar loss with d(loss)/d(output) given column-wise in
// `upstream` (output_dim x B). Returns parameter gradients summed over the
// batch.
MlpGrad mlp_backward(const Mlp& net, const MlpCache& cache, const MatX& upstream);

// Diagonal-Gaussian actor: state-dependent mean, state-independent log std.
struct GaussianPolicy {
  Mlp mean_net;       // input obs_dim, output act_dim
  VecX log_std;       // act_dim, clamped to [-5, 2] after optimizer steps

  int act_dim() const { return mean_net.output_dim(); }
  VecX flatten() const;            // mean_net params then log_std
  void unflatten(const VecX& flat);
  std::size_t param_count() const { return mean_net.param_count() + log_std.size(); }
};

struct PolicyGrad {
  MlpGrad net;
  VecX d_log_std;
  VecX flatten() const;
};

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

double log_prob(const GaussianPolicy& policy, const VecX& s, const VecX& a);
// Value plus exact gradient w.r.t. every policy parameter.
double log_prob_grad(const GaussianPolicy& policy, const VecX& s, const VecX& a,
                     PolicyGrad* grad);
VecX sample_action(const GaussianPolicy& policy, const VecX& s, Rng& rng);
VecX mean_action(const GaussianPolicy& policy, const VecX& s);
// Entropy of the diagonal Gaussian (state independent).
double policy_entropy(const GaussianPolicy& policy);

void clamp_log_std(GaussianPolicy& policy);

// Adaptive-moment optimizer over a flat parameter vector.
struct AdamState {
  VecX first_moment;
  VecX second_moment;
  std::int64_t step_count = 0;
  double learning_rate;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;

  AdamState(Eigen::Index n, double lr);

  // One bias-corrected update in place. Non-finite gradients throw and leave
  // the parameters untouched.
  void step(VecX& params, const VecX& grads);
};

}  // namespace craneppo
