// Copyright 2026 The difffp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DIFFFP_GAUSSIAN_HPP_
#define DIFFFP_GAUSSIAN_HPP_

#include <functional>
#include <span>
#include <vector>

#include "difffp/nn.hpp"
#include "difffp/rng.hpp"

namespace difffp {

inline constexpr float kLogStdMin = -5.0f;
inline constexpr float kLogStdMax = 2.0f;

// Tanh-squashed diagonal Gaussian policy. The network maps an observation
// to (mean, log-std) per action dimension; samples are
//   a = mid + half * tanh(mean + exp(log_std) * eps).
class GaussianActor {
 public:
  GaussianActor() = default;
  GaussianActor(int obs_dim, int act_dim, std::vector<float> low,
                std::vector<float> high, std::vector<int> hidden = {64, 64},
                nn::Activation activation = nn::Activation::kRelu);

  void init(Rng& rng, float output_scale = 1.0f) {
    net_.init(rng, output_scale);
  }

  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }
  const std::vector<float>& low() const { return low_; }
  const std::vector<float>& high() const { return high_; }
  const std::vector<int>& hidden() const { return hidden_; }
  nn::Mlp& net() { return net_; }
  const nn::Mlp& net() const { return net_; }

  struct Head {
    nn::Matrix mean;
    nn::Matrix log_std;  // clamped
    nn::Matrix raw_log_std;
  };
  Head head(const nn::Matrix& obs, nn::Mlp::Tape* tape = nullptr) const;

  float squash(float u, int dim) const;
  // Inverse of squash, with the argument kept strictly inside (-1, 1).
  float unsquash(float a, int dim) const;

  nn::Matrix sample(const nn::Matrix& obs, Rng& rng,
                    bool deterministic = false) const;

  // Entropy of the pre-squash Gaussian, per row.
  std::vector<double> entropy(const nn::Matrix& obs) const;

 private:
  int obs_dim_ = 0;
  int act_dim_ = 0;
  std::vector<float> low_;
  std::vector<float> high_;
  std::vector<int> hidden_;
  nn::Mlp net_;
};

// Returns min-Q and its action gradient for a batch of actions, one row per
// actor observation row.
struct QGrad {
  std::vector<float> q;
  nn::Matrix grad;
};
using QGradFn = std::function<QGrad(const nn::Matrix&)>;

// One Adam step on
//   loss = -mean(minQ(reparameterized squashed samples))
//          - entropy_weight * mean(entropy).
double gaussian_actor_update(GaussianActor& actor, nn::AdamState& optimizer,
                             const nn::Matrix& obs, const QGradFn& critic,
                             float entropy_weight, Rng& rng);

// One Adam step of maximum-likelihood fitting to (obs, action) pairs under
// the squashed Gaussian. Returns the mean negative log-likelihood of the
// pre-squash values (constants dropped).
double gaussian_fit_step(GaussianActor& actor, nn::AdamState& optimizer,
                         const nn::Matrix& obs, const nn::Matrix& actions);

}  // namespace difffp

#endif  // DIFFFP_GAUSSIAN_HPP_
