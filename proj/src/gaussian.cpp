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

#include "difffp/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "difffp/errors.hpp"

namespace difffp {

namespace {

bool log_std_free(float raw) {
  return raw > kLogStdMin && raw < kLogStdMax;
}

}  // namespace

GaussianActor::GaussianActor(int obs_dim, int act_dim, std::vector<float> low,
                             std::vector<float> high, std::vector<int> hidden,
                             nn::Activation activation)
    : obs_dim_(obs_dim),
      act_dim_(act_dim),
      low_(std::move(low)),
      high_(std::move(high)),
      hidden_(std::move(hidden)) {
  if (obs_dim_ <= 0 || act_dim_ <= 0) {
    throw ConfigError("gaussian actor: dimensions must be positive");
  }
  if (low_.size() != static_cast<size_t>(act_dim_) ||
      high_.size() != static_cast<size_t>(act_dim_)) {
    throw ConfigError("gaussian actor: bounds must match act_dim");
  }
  std::vector<int> widths{obs_dim_};
  widths.insert(widths.end(), hidden_.begin(), hidden_.end());
  widths.push_back(2 * act_dim_);
  net_ = nn::Mlp(std::move(widths), activation);
}

GaussianActor::Head GaussianActor::head(const nn::Matrix& obs,
                                        nn::Mlp::Tape* tape) const {
  const nn::Matrix out = net_.forward(obs, tape);
  Head h;
  h.mean = out.leftCols(act_dim_);
  h.raw_log_std = out.rightCols(act_dim_);
  h.log_std = h.raw_log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  return h;
}

float GaussianActor::squash(float u, int dim) const {
  const float mid = 0.5f * (high_[dim] + low_[dim]);
  const float half = 0.5f * (high_[dim] - low_[dim]);
  return std::clamp(mid + half * std::tanh(u), low_[dim], high_[dim]);
}

float GaussianActor::unsquash(float a, int dim) const {
  const float mid = 0.5f * (high_[dim] + low_[dim]);
  const float half = 0.5f * (high_[dim] - low_[dim]);
  const float z = std::clamp((a - mid) / half, -1.0f + 1e-6f, 1.0f - 1e-6f);
  return std::atanh(z);
}

nn::Matrix GaussianActor::sample(const nn::Matrix& obs, Rng& rng,
                                 bool deterministic) const {
  const Head h = head(obs);
  nn::Matrix a(obs.rows(), act_dim_);
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (int d = 0; d < act_dim_; ++d) {
      float u = h.mean(r, d);
      if (!deterministic) u += std::exp(h.log_std(r, d)) * normal_sample(rng);
      a(r, d) = squash(u, d);
    }
  }
  if (!a.allFinite()) throw NumericError("gaussian actor produced NaN");
  return a;
}

std::vector<double> GaussianActor::entropy(const nn::Matrix& obs) const {
  const Head h = head(obs);
  const double per_dim = 0.5 * std::log(2.0 * std::numbers::pi * std::exp(1.0));
  std::vector<double> out(obs.rows());
  for (Eigen::Index r = 0; r < h.log_std.rows(); ++r) {
    out[r] = h.log_std.row(r).cast<double>().sum() + per_dim * act_dim_;
  }
  return out;
}

double gaussian_actor_update(GaussianActor& actor, nn::AdamState& optimizer,
                             const nn::Matrix& obs, const QGradFn& critic,
                             float entropy_weight, Rng& rng) {
  const Eigen::Index rows = obs.rows();
  if (rows == 0) throw ConfigError("gaussian actor update: empty batch");
  const int act_dim = actor.act_dim();
  nn::Mlp::Tape tape;
  const GaussianActor::Head h = actor.head(obs, &tape);
  nn::Matrix eps(rows, act_dim), u(rows, act_dim), a(rows, act_dim);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (int d = 0; d < act_dim; ++d) {
      eps(r, d) = normal_sample(rng);
      u(r, d) = h.mean(r, d) + std::exp(h.log_std(r, d)) * eps(r, d);
      a(r, d) = actor.squash(u(r, d), d);
    }
  }
  const QGrad q = critic(a);
  if (q.grad.rows() != rows || q.grad.cols() != act_dim ||
      q.q.size() != static_cast<size_t>(rows)) {
    throw ConfigError("gaussian actor update: critic output shape mismatch");
  }
  const double per_dim = 0.5 * std::log(2.0 * std::numbers::pi * std::exp(1.0));
  double loss = 0.0;
  nn::Matrix upstream(rows, 2 * act_dim);
  const float inv = 1.0f / static_cast<float>(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    loss -= q.q[r];
    for (int d = 0; d < act_dim; ++d) {
      loss -= entropy_weight * (h.log_std(r, d) + per_dim);
      const float half = 0.5f * (actor.high()[d] - actor.low()[d]);
      const float t = std::tanh(u(r, d));
      const float du = -q.grad(r, d) * inv * half * (1.0f - t * t);
      upstream(r, d) = du;
      upstream(r, act_dim + d) =
          log_std_free(h.raw_log_std(r, d))
              ? du * std::exp(h.log_std(r, d)) * eps(r, d) -
                    entropy_weight * inv
              : 0.0f;
    }
  }
  loss /= static_cast<double>(rows);
  if (!std::isfinite(loss)) throw NumericError("gaussian actor loss is NaN");
  std::vector<float> grads(actor.net().num_params(), 0.0f);
  actor.net().backward(tape, upstream, grads);
  nn::adam_step(optimizer, actor.net().params(), grads);
  return loss;
}

double gaussian_fit_step(GaussianActor& actor, nn::AdamState& optimizer,
                         const nn::Matrix& obs, const nn::Matrix& actions) {
  const Eigen::Index rows = obs.rows();
  if (rows == 0) throw ConfigError("gaussian fit: empty batch");
  const int act_dim = actor.act_dim();
  if (actions.rows() != rows || actions.cols() != act_dim) {
    throw ConfigError("gaussian fit: action batch shape mismatch");
  }
  nn::Mlp::Tape tape;
  const GaussianActor::Head h = actor.head(obs, &tape);
  nn::Matrix upstream(rows, 2 * act_dim);
  const float inv = 1.0f / static_cast<float>(rows);
  double nll = 0.0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (int d = 0; d < act_dim; ++d) {
      const float target = actor.unsquash(actions(r, d), d);
      const float inv_var = std::exp(-2.0f * h.log_std(r, d));
      const float diff = target - h.mean(r, d);
      nll += 0.5 * diff * diff * inv_var + h.log_std(r, d);
      upstream(r, d) = -diff * inv_var * inv;
      upstream(r, act_dim + d) = log_std_free(h.raw_log_std(r, d))
                                     ? (1.0f - diff * diff * inv_var) * inv
                                     : 0.0f;
    }
  }
  nll /= static_cast<double>(rows);
  if (!std::isfinite(nll)) throw NumericError("gaussian fit loss is NaN");
  std::vector<float> grads(actor.net().num_params(), 0.0f);
  actor.net().backward(tape, upstream, grads);
  nn::adam_step(optimizer, actor.net().params(), grads);
  return nll;
}

}  // namespace difffp
