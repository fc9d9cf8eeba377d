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

#include "difffp/policy.hpp"

#include <algorithm>

#include "difffp/errors.hpp"

namespace difffp {

int actor_input_dim(int obs_dim, int team_size) {
  return team_size > 1 ? obs_dim + team_size : obs_dim;
}

void actor_observation(std::span<const float> obs, int member, int team_size,
                       std::span<float> out) {
  const int width = actor_input_dim(static_cast<int>(obs.size()), team_size);
  if (out.size() != static_cast<size_t>(width)) {
    throw ConfigError("actor observation: output width mismatch");
  }
  if (member < 0 || member >= std::max(team_size, 1)) {
    throw ConfigError("actor observation: member index out of range");
  }
  std::copy(obs.begin(), obs.end(), out.begin());
  if (team_size > 1) {
    std::fill(out.begin() + obs.size(), out.end(), 0.0f);
    out[obs.size() + member] = 1.0f;
  }
}

namespace {

int env_obs_dim(int actor_obs, int team_size) {
  return team_size > 1 ? actor_obs - team_size : actor_obs;
}

}  // namespace

DiffusionPolicy::DiffusionPolicy(std::shared_ptr<const DiffusionActor> actor,
                                 int team_size)
    : actor_(std::move(actor)), team_size_(team_size) {
  if (!actor_) throw ConfigError("diffusion policy: null actor");
}

PolicySignature DiffusionPolicy::signature() const {
  return {team_size_, env_obs_dim(actor_->obs_dim(), team_size_),
          actor_->act_dim()};
}

void DiffusionPolicy::act(int member, std::span<const float> obs, Rng& rng,
                          std::span<float> action) const {
  nn::Matrix input(1, actor_->obs_dim());
  actor_observation(obs, member, team_size_,
                    std::span<float>(input.data(), input.size()));
  const nn::Matrix a = actor_->sample(input, rng);
  std::copy(a.data(), a.data() + a.size(), action.begin());
}

GaussianPolicy::GaussianPolicy(std::shared_ptr<const GaussianActor> actor,
                               int team_size, bool deterministic)
    : actor_(std::move(actor)),
      team_size_(team_size),
      deterministic_(deterministic) {
  if (!actor_) throw ConfigError("gaussian policy: null actor");
}

PolicySignature GaussianPolicy::signature() const {
  return {team_size_, env_obs_dim(actor_->obs_dim(), team_size_),
          actor_->act_dim()};
}

void GaussianPolicy::act(int member, std::span<const float> obs, Rng& rng,
                         std::span<float> action) const {
  nn::Matrix input(1, actor_->obs_dim());
  actor_observation(obs, member, team_size_,
                    std::span<float>(input.data(), input.size()));
  const nn::Matrix a = actor_->sample(input, rng, deterministic_);
  std::copy(a.data(), a.data() + a.size(), action.begin());
}

}  // namespace difffp
