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

#ifndef DIFFFP_CRITIC_HPP_
#define DIFFFP_CRITIC_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "difffp/nn.hpp"
#include "difffp/rng.hpp"

namespace difffp {

// y = r when terminated, otherwise r + gamma * min(q1_target, q2_target).
double td_target(double reward, double gamma, double q1_target,
                 double q2_target, bool terminated);

// Learner-perspective batch. Rows of `input` are critic inputs without the
// action (own or joint team observation); rows of `action` are own or joint
// team actions.
struct CriticBatch {
  nn::Matrix input;
  nn::Matrix action;
  std::vector<float> reward;
  nn::Matrix next_input;
  // Actor observations at the next state, fed to the next-action sampler.
  nn::Matrix next_obs;
  std::vector<uint8_t> terminated;

  Eigen::Index size() const { return input.rows(); }
};

// Samples next actions a' ~ pi(. | next_obs) for a whole batch, one row each.
using NextActionFn = std::function<nn::Matrix(const nn::Matrix&, Rng&)>;

struct MinQ {
  std::vector<float> q;
  nn::Matrix action_grad;
};

struct CriticLosses {
  double q1 = 0.0;
  double q2 = 0.0;
};

// Twin Q-networks over [input | action] with Polyak target copies.
class TwinCritic {
 public:
  TwinCritic() = default;
  TwinCritic(int input_dim, int action_dim, std::vector<int> hidden,
             double gamma, float learning_rate,
             nn::Activation activation = nn::Activation::kRelu);

  // Random online weights; targets are copied from them.
  void init(Rng& rng);

  int input_dim() const { return input_dim_; }
  int action_dim() const { return action_dim_; }
  double gamma() const { return gamma_; }

  nn::Mlp& q1() { return q1_; }
  nn::Mlp& q2() { return q2_; }
  const nn::Mlp& q1() const { return q1_; }
  const nn::Mlp& q2() const { return q2_; }
  const nn::Mlp& q1_target() const { return q1_target_; }
  const nn::Mlp& q2_target() const { return q2_target_; }
  nn::Mlp& q1_target() { return q1_target_; }
  nn::Mlp& q2_target() { return q2_target_; }

  nn::Matrix join(const nn::Matrix& input, const nn::Matrix& action) const;

  // Per-row td_target; the target critics are averaged over the provided
  // next-action samples before taking the row's min.
  std::vector<double> td_targets(const CriticBatch& batch,
                                 std::span<const nn::Matrix> next_actions)
      const;

  // Regresses both critics to the shared targets, one Adam step each, then
  // moves the targets toward the online nets by tau. `target_samples`
  // next-action draws are averaged; they are skipped when every row is
  // terminal.
  CriticLosses update(const CriticBatch& batch,
                      const NextActionFn& next_action, float tau,
                      int target_samples, Rng& rng);

  // min(Q1, Q2) per row and the gradient of the achieving critic with
  // respect to the action columns (ties choose Q1).
  MinQ q_min_and_action_grad(const nn::Matrix& input,
                             const nn::Matrix& action) const;

 private:
  int input_dim_ = 0;
  int action_dim_ = 0;
  double gamma_ = 0.99;
  nn::Mlp q1_, q2_, q1_target_, q2_target_;
  nn::AdamState adam1_, adam2_;
};

}  // namespace difffp

#endif  // DIFFFP_CRITIC_HPP_
