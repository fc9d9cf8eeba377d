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

#include "difffp/critic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "difffp/errors.hpp"

namespace difffp {

double td_target(double reward, double gamma, double q1_target,
                 double q2_target, bool terminated) {
  if (terminated) return reward;
  return reward + gamma * std::min(q1_target, q2_target);
}

TwinCritic::TwinCritic(int input_dim, int action_dim, std::vector<int> hidden,
                       double gamma, float learning_rate,
                       nn::Activation activation)
    : input_dim_(input_dim), action_dim_(action_dim), gamma_(gamma) {
  if (input_dim <= 0 || action_dim <= 0) {
    throw ConfigError("critic: dimensions must be positive");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ConfigError("critic: gamma must lie in [0, 1]");
  }
  if (!(learning_rate > 0.0f)) {
    throw ConfigError("critic: learning rate must be positive");
  }
  std::vector<int> widths{input_dim + action_dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  q1_ = nn::Mlp(widths, activation);
  q2_ = nn::Mlp(widths, activation);
  q1_target_ = q1_;
  q2_target_ = q2_;
  adam1_ = nn::AdamState(q1_.num_params(), learning_rate);
  adam2_ = nn::AdamState(q2_.num_params(), learning_rate);
}

void TwinCritic::init(Rng& rng) {
  q1_.init(rng);
  q2_.init(rng);
  q1_target_ = q1_;
  q2_target_ = q2_;
}

nn::Matrix TwinCritic::join(const nn::Matrix& input,
                            const nn::Matrix& action) const {
  if (input.cols() != input_dim_ || action.cols() != action_dim_ ||
      input.rows() != action.rows()) {
    throw ConfigError("critic: input/action batch shapes disagree");
  }
  nn::Matrix x(input.rows(), input_dim_ + action_dim_);
  x.leftCols(input_dim_) = input;
  x.rightCols(action_dim_) = action;
  return x;
}

std::vector<double> TwinCritic::td_targets(
    const CriticBatch& batch, std::span<const nn::Matrix> next_actions) const {
  const Eigen::Index n = batch.size();
  std::vector<double> t1(n, 0.0), t2(n, 0.0);
  for (const nn::Matrix& a : next_actions) {
    const nn::Matrix x = join(batch.next_input, a);
    const nn::Matrix v1 = q1_target_.forward(x);
    const nn::Matrix v2 = q2_target_.forward(x);
    for (Eigen::Index r = 0; r < n; ++r) {
      t1[r] += v1(r, 0);
      t2[r] += v2(r, 0);
    }
  }
  const double samples =
      next_actions.empty() ? 1.0 : static_cast<double>(next_actions.size());
  std::vector<double> y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const bool terminal = batch.terminated[r] != 0;
    if (!terminal && next_actions.empty()) {
      throw ConfigError("critic: non-terminal rows need next actions");
    }
    y[r] = td_target(batch.reward[r], gamma_, t1[r] / samples, t2[r] / samples,
                     terminal);
  }
  return y;
}

namespace {

double regress(const nn::Mlp& net, const nn::Matrix& x,
               const std::vector<double>& y, std::span<float> grads,
               const char* which) {
  nn::Mlp::Tape tape;
  const nn::Matrix pred = net.forward(x, &tape);
  const Eigen::Index n = x.rows();
  nn::Matrix upstream(n, 1);
  double loss = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double diff = pred(r, 0) - y[r];
    if (!std::isfinite(diff)) {
      throw NumericError(std::string("critic ") + which +
                         ": non-finite loss at batch index " +
                         std::to_string(r));
    }
    loss += diff * diff;
    upstream(r, 0) = static_cast<float>(2.0 * diff / n);
  }
  net.backward(tape, upstream, grads);
  return loss / static_cast<double>(n);
}

}  // namespace

CriticLosses TwinCritic::update(const CriticBatch& batch,
                                const NextActionFn& next_action, float tau,
                                int target_samples, Rng& rng) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw ConfigError("critic update: empty batch");
  if (batch.reward.size() != static_cast<size_t>(n) ||
      batch.terminated.size() != static_cast<size_t>(n) ||
      batch.next_input.rows() != n) {
    throw ConfigError("critic update: batch fields disagree in length");
  }
  if (target_samples < 1) {
    throw ConfigError("critic update: target_samples must be >= 1");
  }
  std::vector<nn::Matrix> next_actions;
  const bool any_live = std::any_of(batch.terminated.begin(),
                                    batch.terminated.end(),
                                    [](uint8_t t) { return t == 0; });
  if (any_live && gamma_ > 0.0) {
    for (int s = 0; s < target_samples; ++s) {
      next_actions.push_back(next_action(batch.next_obs, rng));
    }
  }
  std::vector<double> y;
  if (any_live && gamma_ == 0.0) {
    y.assign(batch.reward.begin(), batch.reward.end());
  } else {
    y = td_targets(batch, next_actions);
  }

  const nn::Matrix x = join(batch.input, batch.action);
  CriticLosses losses;
  std::vector<float> g1(q1_.num_params(), 0.0f);
  std::vector<float> g2(q2_.num_params(), 0.0f);
  losses.q1 = regress(q1_, x, y, g1, "Q1");
  losses.q2 = regress(q2_, x, y, g2, "Q2");
  nn::adam_step(adam1_, q1_.params(), g1);
  nn::adam_step(adam2_, q2_.params(), g2);
  nn::polyak_update(q1_target_.params(), q1_.params(), tau);
  nn::polyak_update(q2_target_.params(), q2_.params(), tau);
  return losses;
}

MinQ TwinCritic::q_min_and_action_grad(const nn::Matrix& input,
                                       const nn::Matrix& action) const {
  const nn::Matrix x = join(input, action);
  const Eigen::Index n = x.rows();
  nn::Mlp::Tape tape1, tape2;
  const nn::Matrix v1 = q1_.forward(x, &tape1);
  const nn::Matrix v2 = q2_.forward(x, &tape2);
  nn::Matrix up1 = nn::Matrix::Zero(n, 1);
  nn::Matrix up2 = nn::Matrix::Zero(n, 1);
  MinQ out;
  out.q.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (v1(r, 0) <= v2(r, 0)) {
      out.q[r] = v1(r, 0);
      up1(r, 0) = 1.0f;
    } else {
      out.q[r] = v2(r, 0);
      up2(r, 0) = 1.0f;
    }
  }
  std::vector<float> scratch1(q1_.num_params(), 0.0f);
  std::vector<float> scratch2(q2_.num_params(), 0.0f);
  const nn::Matrix gx1 = q1_.backward(tape1, up1, scratch1);
  const nn::Matrix gx2 = q2_.backward(tape2, up2, scratch2);
  out.action_grad = (gx1 + gx2).rightCols(action_dim_);
  return out;
}

}  // namespace difffp
