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

#ifndef DIFFFP_DIFFUSION_HPP_
#define DIFFFP_DIFFUSION_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "difffp/errors.hpp"
#include "difffp/nn.hpp"
#include "difffp/rng.hpp"

namespace difffp {

enum class ScheduleKind { kLinear, kVariancePreserving };

const char* schedule_kind_name(ScheduleKind kind);
ScheduleKind schedule_kind_from_name(const std::string& name);

// Variance schedule beta_1..beta_T with alpha_t = 1 - beta_t and
// alpha_bar_t = prod_{s <= t} alpha_s. Indices are 1-based.
class NoiseSchedule {
 public:
  // beta_t linear from beta_min (t = 1) to beta_max (t = T).
  static NoiseSchedule linear(int steps, double beta_min, double beta_max);
  // Discretized variance-preserving SDE:
  //   beta_t = 1 - exp(-beta_min / T - (beta_max - beta_min) (2t - 1) / (2 T^2))
  static NoiseSchedule variance_preserving(int steps, double beta_min,
                                           double beta_max);
  static NoiseSchedule from_betas(std::vector<double> betas);
  static NoiseSchedule make(ScheduleKind kind, int steps, double beta_min,
                            double beta_max);

  NoiseSchedule() = default;

  int steps() const { return static_cast<int>(beta_.size()); }
  double beta(int t) const { return beta_.at(index(t)); }
  double alpha(int t) const { return alpha_.at(index(t)); }
  double alpha_bar(int t) const { return alpha_bar_.at(index(t)); }
  // Reverse-step noise scale; sigma_t^2 = beta_t.
  double sigma(int t) const { return std::sqrt(beta(t)); }
  const std::vector<double>& betas() const { return beta_; }

 private:
  explicit NoiseSchedule(std::vector<double> betas);
  size_t index(int t) const;

  std::vector<double> beta_;
  std::vector<double> alpha_;
  std::vector<double> alpha_bar_;
};

// a_t = sqrt(alpha_bar_t) a0 + sqrt(1 - alpha_bar_t) noise.
std::vector<float> forward_noise(const NoiseSchedule& schedule,
                                 std::span<const float> a0, int t,
                                 std::span<const float> noise);

inline constexpr int kTimeFeatures = 8;

// (sin, cos) of t / T at four octave-spaced frequencies.
std::array<float, kTimeFeatures> timestep_features(int t, int steps);

nn::Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

struct ReverseOptions {
  // false drops the sqrt(beta_t) noise at every step.
  bool stochastic = true;
  // Starting a_T; sampled from N(0, I) when null.
  const nn::Matrix* initial = nullptr;
  // Receives a_T, a_{T-1}, ..., a_0 when set.
  std::vector<nn::Matrix>* trajectory = nullptr;
};

// Reverse process with an arbitrary noise predictor
//   predictor(a_t, t) -> eps_hat  (same shape as a_t)
//   a_{t-1} = a_t / sqrt(alpha_t)
//             - beta_t / sqrt(alpha_t (1 - alpha_bar_t)) eps_hat
//             + sqrt(beta_t) z,  z ~ N(0, I) for t > 1, z = 0 at t = 1.
// Each iterate is clamped to [low, high] per action dimension.
template <class Predictor>
nn::Matrix reverse_diffusion(const NoiseSchedule& schedule,
                             Predictor&& predictor, Eigen::Index batch,
                             std::span<const float> low,
                             std::span<const float> high, Rng& rng,
                             const ReverseOptions& options = {}) {
  const auto act_dim = static_cast<Eigen::Index>(low.size());
  nn::Matrix a = options.initial != nullptr
                     ? *options.initial
                     : normal_matrix(batch, act_dim, rng);
  if (a.rows() != batch || a.cols() != act_dim) {
    throw ConfigError("reverse diffusion: initial sample has the wrong shape");
  }
  if (options.trajectory != nullptr) options.trajectory->push_back(a);
  for (int t = schedule.steps(); t >= 1; --t) {
    const nn::Matrix eps = predictor(a, t);
    if (!eps.allFinite()) {
      throw NumericError("noise prediction is non-finite at diffusion step " +
                         std::to_string(t));
    }
    const double alpha = schedule.alpha(t);
    const auto keep = static_cast<float>(1.0 / std::sqrt(alpha));
    const auto remove = static_cast<float>(
        schedule.beta(t) / std::sqrt(alpha * (1.0 - schedule.alpha_bar(t))));
    a = keep * a - remove * eps;
    if (t > 1 && options.stochastic) {
      a += static_cast<float>(schedule.sigma(t)) *
           normal_matrix(a.rows(), a.cols(), rng);
    }
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      for (Eigen::Index d = 0; d < act_dim; ++d) {
        a(r, d) = std::clamp(a(r, d), low[d], high[d]);
      }
    }
    if (options.trajectory != nullptr) options.trajectory->push_back(a);
  }
  return a;
}

// Conditional noise-prediction network eps(a_t, o, t) defining a policy
// through the reverse process.
class DiffusionActor {
 public:
  DiffusionActor() = default;
  DiffusionActor(int obs_dim, int act_dim, NoiseSchedule schedule,
                 std::vector<float> low, std::vector<float> high,
                 std::vector<int> hidden = {64, 64},
                 nn::Activation activation = nn::Activation::kMish);

  void init(Rng& rng, float output_scale = 1.0f) {
    net_.init(rng, output_scale);
  }

  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  const std::vector<float>& low() const { return low_; }
  const std::vector<float>& high() const { return high_; }
  const std::vector<int>& hidden() const { return hidden_; }
  nn::Mlp& net() { return net_; }
  const nn::Mlp& net() const { return net_; }

  nn::Matrix net_input(const nn::Matrix& noisy, const nn::Matrix& obs,
                       std::span<const int> t) const;
  nn::Matrix predict_noise(const nn::Matrix& noisy, const nn::Matrix& obs,
                           std::span<const int> t,
                           nn::Mlp::Tape* tape = nullptr) const;

  // Batched reverse sampling, one action per observation row.
  nn::Matrix sample(const nn::Matrix& obs, Rng& rng,
                    const ReverseOptions& options = {}) const;

 private:
  int obs_dim_ = 0;
  int act_dim_ = 0;
  NoiseSchedule schedule_;
  std::vector<float> low_;
  std::vector<float> high_;
  std::vector<int> hidden_;
  nn::Mlp net_;
};

// Forward corruption of a batch with t ~ U{1..T}, eps ~ N(0, I) drawn in
// row order.
struct DenoisingBatch {
  nn::Matrix noisy;
  nn::Matrix noise;
  std::vector<int> t;
};
DenoisingBatch corrupt_batch(const NoiseSchedule& schedule,
                             const nn::Matrix& a0, Rng& rng);

// mean_j w_j ||noise_j - predicted_j||^2 (w = 1 when weights is empty).
double denoising_loss_value(const nn::Matrix& predicted,
                            const nn::Matrix& noise,
                            std::span<const float> weights = {});

// Denoising loss of `actor` on (obs, a0). Adds scale * dLoss/dtheta into
// `grads` and returns the loss.
double denoising_loss(const DiffusionActor& actor, const nn::Matrix& obs,
                      const nn::Matrix& a0, std::span<const float> weights,
                      Rng& rng, std::span<float> grads, float scale = 1.0f);

// w_j = exp((G_j - mean G) / temperature) clamped to [1 / clip, clip], then
// renormalized to mean 1. clip must be >= 1.
std::vector<float> weight_by_return(std::span<const double> returns,
                                    double temperature, double clip);

// Maps a batch of actions to dQ/da for each row.
using ActionGradFn = std::function<nn::Matrix(const nn::Matrix&)>;

// `steps` iterations of a <- clamp(a + eta * dQ/da).
nn::Matrix refine_actions(const nn::Matrix& actions, const ActionGradFn& grad,
                          float eta, int steps, std::span<const float> low,
                          std::span<const float> high);

enum class WeightTarget { kNone, kDenoise, kDistill };

const char* weight_target_name(WeightTarget target);
WeightTarget weight_target_from_name(const std::string& name);

struct ImprovementOptions {
  float eta = 0.1f;
  int steps = 1;
  float lambda = 1.0f;
  WeightTarget weighting = WeightTarget::kDenoise;
};

struct ActorUpdateStats {
  double denoise_loss = 0.0;
  double distill_loss = 0.0;
  nn::Matrix refined;
};

// One actor update: refine actions along the critic's action gradient, then
// minimize
//   denoising_loss(actions) + lambda * denoising_loss(refined)
// with the return weights applied to the term selected by options.weighting.
// Refinement starts from `guide_start` when given, else from `actions`.
ActorUpdateStats q_guided_improvement(DiffusionActor& actor,
                                      nn::AdamState& optimizer,
                                      const nn::Matrix& obs,
                                      const nn::Matrix& actions,
                                      const ActionGradFn& grad,
                                      const ImprovementOptions& options,
                                      std::span<const float> weights,
                                      Rng& rng,
                                      const nn::Matrix* guide_start = nullptr);

}  // namespace difffp

#endif  // DIFFFP_DIFFUSION_HPP_
