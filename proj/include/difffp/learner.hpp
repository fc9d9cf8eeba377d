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

#ifndef DIFFFP_LEARNER_HPP_
#define DIFFFP_LEARNER_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "difffp/checkpoint.hpp"
#include "difffp/critic.hpp"
#include "difffp/diffusion.hpp"
#include "difffp/game.hpp"

namespace difffp {

enum class LearnerKind { kDiffusion, kGaussian };

const char* learner_kind_name(LearnerKind kind);
LearnerKind learner_kind_from_name(const std::string& name);

struct DiffusionSettings {
  ScheduleKind schedule = ScheduleKind::kVariancePreserving;
  int steps = 8;
  double beta_min = 0.1;
  double beta_max = 10.0;
  float eta = 1.0f;
  int guidance_steps = 1;
  float lambda = 1.0f;
  double temperature = 0.1;
  double clip = 10.0;
  WeightTarget weighting = WeightTarget::kDenoise;
  // Refine fresh reverse samples instead of replayed actions.
  bool guide_fresh = false;

  NoiseSchedule schedule_table() const;
};

struct CriticSettings {
  // Negative selects the environment discount.
  double gamma = -1.0;
  float tau = 0.005f;
  int target_samples = 1;
};

struct BrConfig {
  LearnerKind kind = LearnerKind::kDiffusion;
  int env_steps = 5000;
  int warmup_steps = 500;
  int batch_size = 64;
  int updates_per_step = 1;
  // Updates run on every update_every-th environment step.
  int update_every = 1;
  int buffer_capacity = 2000;
  float actor_lr = 1e-3f;
  float critic_lr = 3e-4f;
  std::vector<int> actor_hidden{64, 64};
  std::vector<int> critic_hidden{64, 64};
  float entropy_weight = 0.05f;
  bool warm_start = false;
  DiffusionSettings diffusion;
  CriticSettings critic;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

struct BrMetrics {
  int episodes = 0;
  int updates = 0;
  // Means over the last (up to) 100 episodes and updates.
  double mean_return = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  std::vector<double> episode_returns;  // normalized, undiscounted
  std::vector<double> actor_losses;
  std::vector<double> critic_losses;
};

// Networks carried from one call to the next when warm starting.
struct LearnerState {
  std::vector<float> actor_params;
  TwinCritic critic;
};

struct BrResult {
  PolicyCheckpoint checkpoint;
  BrMetrics metrics;
  std::shared_ptr<const LearnerState> state;
};

// Trains a best response for `learner_side` against the frozen `opponent`.
// The opponent's pure policy is resampled at every episode start. The
// returned checkpoint has fp_iteration 0 and no config hash; callers stamp
// both.
BrResult train_best_response(const Env& env, int learner_side,
                             const Policy& opponent, const BrConfig& config,
                             uint64_t seed,
                             const LearnerState* warm = nullptr);

// Randomly initialized diffusion actor checkpoint for `side`, with the
// output layer scaled by `output_scale`.
PolicyCheckpoint initial_policy(const GameSpec& spec, int side,
                                const BrConfig& config, uint64_t seed,
                                float output_scale = 0.01f);

}  // namespace difffp

#endif  // DIFFFP_LEARNER_HPP_
