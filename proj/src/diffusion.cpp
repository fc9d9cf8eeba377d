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

#include "difffp/diffusion.hpp"

#include <numbers>

namespace difffp {

const char* schedule_kind_name(ScheduleKind kind) {
  return kind == ScheduleKind::kLinear ? "linear" : "vp";
}

ScheduleKind schedule_kind_from_name(const std::string& name) {
  if (name == "linear") return ScheduleKind::kLinear;
  if (name == "vp") return ScheduleKind::kVariancePreserving;
  throw ConfigError("unknown noise schedule '" + name + "'");
}

NoiseSchedule::NoiseSchedule(std::vector<double> betas)
    : beta_(std::move(betas)) {
  if (beta_.empty()) throw ConfigError("noise schedule needs at least one step");
  double running = 1.0;
  for (double b : beta_) {
    if (!(b > 0.0 && b < 1.0)) {
      throw ConfigError("noise schedule: beta must lie strictly in (0, 1)");
    }
    alpha_.push_back(1.0 - b);
    running *= 1.0 - b;
    alpha_bar_.push_back(running);
  }
}

size_t NoiseSchedule::index(int t) const {
  if (t < 1 || t > steps()) {
    throw ConfigError("diffusion step " + std::to_string(t) +
                      " outside [1, " + std::to_string(steps()) + "]");
  }
  return static_cast<size_t>(t - 1);
}

NoiseSchedule NoiseSchedule::linear(int steps, double beta_min,
                                    double beta_max) {
  if (steps < 1) throw ConfigError("noise schedule: steps must be >= 1");
  std::vector<double> betas(steps);
  for (int t = 1; t <= steps; ++t) {
    betas[t - 1] = steps == 1 ? beta_min
                              : beta_min + (beta_max - beta_min) * (t - 1) /
                                               (steps - 1);
  }
  return NoiseSchedule(std::move(betas));
}

NoiseSchedule NoiseSchedule::variance_preserving(int steps, double beta_min,
                                                 double beta_max) {
  if (steps < 1) throw ConfigError("noise schedule: steps must be >= 1");
  std::vector<double> betas(steps);
  const double T = steps;
  for (int t = 1; t <= steps; ++t) {
    betas[t - 1] = 1.0 - std::exp(-beta_min / T - 0.5 * (beta_max - beta_min) *
                                                      (2.0 * t - 1.0) / (T * T));
  }
  return NoiseSchedule(std::move(betas));
}

NoiseSchedule NoiseSchedule::from_betas(std::vector<double> betas) {
  return NoiseSchedule(std::move(betas));
}

NoiseSchedule NoiseSchedule::make(ScheduleKind kind, int steps,
                                  double beta_min, double beta_max) {
  return kind == ScheduleKind::kLinear
             ? linear(steps, beta_min, beta_max)
             : variance_preserving(steps, beta_min, beta_max);
}

std::vector<float> forward_noise(const NoiseSchedule& schedule,
                                 std::span<const float> a0, int t,
                                 std::span<const float> noise) {
  if (a0.size() != noise.size()) {
    throw ConfigError("forward_noise: action and noise sizes differ");
  }
  const double ab = schedule.alpha_bar(t);
  const double keep = std::sqrt(ab);
  const double spread = std::sqrt(1.0 - ab);
  std::vector<float> out(a0.size());
  for (size_t i = 0; i < a0.size(); ++i) {
    out[i] = static_cast<float>(keep * a0[i] + spread * noise[i]);
  }
  return out;
}

std::array<float, kTimeFeatures> timestep_features(int t, int steps) {
  std::array<float, kTimeFeatures> out{};
  const double tau = static_cast<double>(t) / steps;
  for (int k = 0; k < kTimeFeatures / 2; ++k) {
    const double omega = 0.5 * std::numbers::pi * (1 << k);
    out[2 * k] = static_cast<float>(std::sin(omega * tau));
    out[2 * k + 1] = static_cast<float>(std::cos(omega * tau));
  }
  return out;
}

nn::Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  nn::Matrix out(rows, cols);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = dist(rng);
  return out;
}

// ------------------------------------------------------------ DiffusionActor

DiffusionActor::DiffusionActor(int obs_dim, int act_dim,
                               NoiseSchedule schedule, std::vector<float> low,
                               std::vector<float> high,
                               std::vector<int> hidden,
                               nn::Activation activation)
    : obs_dim_(obs_dim),
      act_dim_(act_dim),
      schedule_(std::move(schedule)),
      low_(std::move(low)),
      high_(std::move(high)),
      hidden_(std::move(hidden)) {
  if (obs_dim_ <= 0 || act_dim_ <= 0) {
    throw ConfigError("diffusion actor: dimensions must be positive");
  }
  if (low_.size() != static_cast<size_t>(act_dim_) ||
      high_.size() != static_cast<size_t>(act_dim_)) {
    throw ConfigError("diffusion actor: bounds must match act_dim");
  }
  std::vector<int> widths{act_dim_ + obs_dim_ + kTimeFeatures};
  widths.insert(widths.end(), hidden_.begin(), hidden_.end());
  widths.push_back(act_dim_);
  net_ = nn::Mlp(std::move(widths), activation);
}

nn::Matrix DiffusionActor::net_input(const nn::Matrix& noisy,
                                     const nn::Matrix& obs,
                                     std::span<const int> t) const {
  const Eigen::Index rows = noisy.rows();
  if (noisy.cols() != act_dim_ || obs.cols() != obs_dim_ ||
      obs.rows() != rows || t.size() != static_cast<size_t>(rows)) {
    throw ConfigError("diffusion actor: input batch shapes disagree");
  }
  nn::Matrix x(rows, act_dim_ + obs_dim_ + kTimeFeatures);
  x.leftCols(act_dim_) = noisy;
  x.middleCols(act_dim_, obs_dim_) = obs;
  int cached_t = -1;
  std::array<float, kTimeFeatures> features{};
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (t[r] != cached_t) {
      features = timestep_features(t[r], schedule_.steps());
      cached_t = t[r];
    }
    for (int k = 0; k < kTimeFeatures; ++k) {
      x(r, act_dim_ + obs_dim_ + k) = features[k];
    }
  }
  return x;
}

nn::Matrix DiffusionActor::predict_noise(const nn::Matrix& noisy,
                                         const nn::Matrix& obs,
                                         std::span<const int> t,
                                         nn::Mlp::Tape* tape) const {
  return net_.forward(net_input(noisy, obs, t), tape);
}

nn::Matrix DiffusionActor::sample(const nn::Matrix& obs, Rng& rng,
                                  const ReverseOptions& options) const {
  std::vector<int> steps(obs.rows());
  auto predictor = [&](const nn::Matrix& a, int t) {
    std::fill(steps.begin(), steps.end(), t);
    return predict_noise(a, obs, steps);
  };
  return reverse_diffusion(schedule_, predictor, obs.rows(), low_, high_, rng,
                           options);
}

// ------------------------------------------------------------------ training

DenoisingBatch corrupt_batch(const NoiseSchedule& schedule,
                             const nn::Matrix& a0, Rng& rng) {
  DenoisingBatch out;
  const Eigen::Index rows = a0.rows();
  const Eigen::Index cols = a0.cols();
  out.noisy.resize(rows, cols);
  out.noise.resize(rows, cols);
  out.t.resize(rows);
  std::uniform_int_distribution<int> step_dist(1, schedule.steps());
  std::normal_distribution<float> normal(0.0f, 1.0f);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const int t = step_dist(rng);
    out.t[r] = t;
    const auto keep = static_cast<float>(std::sqrt(schedule.alpha_bar(t)));
    const auto spread =
        static_cast<float>(std::sqrt(1.0 - schedule.alpha_bar(t)));
    for (Eigen::Index c = 0; c < cols; ++c) {
      const float eps = normal(rng);
      out.noise(r, c) = eps;
      out.noisy(r, c) = keep * a0(r, c) + spread * eps;
    }
  }
  return out;
}

double denoising_loss_value(const nn::Matrix& predicted,
                            const nn::Matrix& noise,
                            std::span<const float> weights) {
  if (predicted.rows() == 0) throw ConfigError("denoising loss: empty batch");
  if (predicted.rows() != noise.rows() || predicted.cols() != noise.cols()) {
    throw ConfigError("denoising loss: prediction and noise shapes differ");
  }
  if (!weights.empty() && weights.size() != static_cast<size_t>(noise.rows())) {
    throw ConfigError("denoising loss: one weight per sample required");
  }
  double total = 0.0;
  for (Eigen::Index r = 0; r < noise.rows(); ++r) {
    const double err = (noise.row(r) - predicted.row(r)).squaredNorm();
    total += (weights.empty() ? 1.0 : weights[r]) * err;
  }
  return total / static_cast<double>(noise.rows());
}

double denoising_loss(const DiffusionActor& actor, const nn::Matrix& obs,
                      const nn::Matrix& a0, std::span<const float> weights,
                      Rng& rng, std::span<float> grads, float scale) {
  if (a0.rows() == 0) throw ConfigError("denoising loss: empty batch");
  const DenoisingBatch batch = corrupt_batch(actor.schedule(), a0, rng);
  nn::Mlp::Tape tape;
  const nn::Matrix predicted =
      actor.predict_noise(batch.noisy, obs, batch.t, &tape);
  const double loss = denoising_loss_value(predicted, batch.noise, weights);
  if (!std::isfinite(loss)) throw NumericError("denoising loss is non-finite");
  nn::Matrix upstream = predicted - batch.noise;
  const float base = 2.0f * scale / static_cast<float>(a0.rows());
  for (Eigen::Index r = 0; r < upstream.rows(); ++r) {
    upstream.row(r) *= base * (weights.empty() ? 1.0f : weights[r]);
  }
  actor.net().backward(tape, upstream, grads);
  return loss;
}

std::vector<float> weight_by_return(std::span<const double> returns,
                                    double temperature, double clip) {
  if (!(temperature > 0.0)) {
    throw ConfigError("reward weighting: temperature must be positive");
  }
  if (!(clip >= 1.0)) throw ConfigError("reward weighting: clip must be >= 1");
  std::vector<float> out(returns.size(), 1.0f);
  if (returns.empty()) return out;
  const auto [lo, hi] = std::minmax_element(returns.begin(), returns.end());
  if (*lo == *hi) return out;
  double mean = 0.0;
  for (double g : returns) mean += g;
  mean /= static_cast<double>(returns.size());
  std::vector<double> raw(returns.size());
  double total = 0.0;
  for (size_t j = 0; j < returns.size(); ++j) {
    raw[j] = std::clamp(std::exp((returns[j] - mean) / temperature),
                        1.0 / clip, clip);
    total += raw[j];
  }
  const double norm = total / static_cast<double>(returns.size());
  for (size_t j = 0; j < returns.size(); ++j) {
    out[j] = static_cast<float>(raw[j] / norm);
  }
  return out;
}

nn::Matrix refine_actions(const nn::Matrix& actions, const ActionGradFn& grad,
                          float eta, int steps, std::span<const float> low,
                          std::span<const float> high) {
  if (!(eta > 0.0f)) throw ConfigError("action refinement: eta must be > 0");
  if (steps < 0) throw ConfigError("action refinement: steps must be >= 0");
  if (low.size() != static_cast<size_t>(actions.cols()) ||
      high.size() != static_cast<size_t>(actions.cols())) {
    throw ConfigError("action refinement: bounds must match action width");
  }
  nn::Matrix a = actions;
  for (int s = 0; s < steps; ++s) {
    const nn::Matrix g = grad(a);
    if (g.rows() != a.rows() || g.cols() != a.cols()) {
      throw ConfigError("action refinement: gradient shape mismatch");
    }
    a += eta * g;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        a(r, c) = std::clamp(a(r, c), low[c], high[c]);
      }
    }
  }
  return a;
}

const char* weight_target_name(WeightTarget target) {
  switch (target) {
    case WeightTarget::kNone: return "none";
    case WeightTarget::kDenoise: return "denoise";
    case WeightTarget::kDistill: return "distill";
  }
  return "none";
}

WeightTarget weight_target_from_name(const std::string& name) {
  if (name == "none") return WeightTarget::kNone;
  if (name == "denoise") return WeightTarget::kDenoise;
  if (name == "distill") return WeightTarget::kDistill;
  throw ConfigError("unknown reward-weighting target '" + name + "'");
}

ActorUpdateStats q_guided_improvement(DiffusionActor& actor,
                                      nn::AdamState& optimizer,
                                      const nn::Matrix& obs,
                                      const nn::Matrix& actions,
                                      const ActionGradFn& grad,
                                      const ImprovementOptions& options,
                                      std::span<const float> weights,
                                      Rng& rng,
                                      const nn::Matrix* guide_start) {
  ActorUpdateStats stats;
  stats.refined = refine_actions(guide_start != nullptr ? *guide_start
                                                        : actions,
                                 grad, options.eta, options.steps,
                                 actor.low(), actor.high());
  std::vector<float> grads(actor.net().num_params(), 0.0f);
  const std::span<const float> none;
  stats.denoise_loss = denoising_loss(
      actor, obs, actions,
      options.weighting == WeightTarget::kDenoise ? weights : none, rng, grads);
  if (options.lambda > 0.0f) {
    stats.distill_loss = denoising_loss(
        actor, obs, stats.refined,
        options.weighting == WeightTarget::kDistill ? weights : none, rng,
        grads, options.lambda);
  }
  nn::adam_step(optimizer, actor.net().params(), grads);
  return stats;
}

}  // namespace difffp
