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

#ifndef DIFFFP_POLICY_HPP_
#define DIFFFP_POLICY_HPP_

#include <memory>
#include <span>
#include <vector>

#include "difffp/diffusion.hpp"
#include "difffp/game.hpp"
#include "difffp/gaussian.hpp"

namespace difffp {

// Width of a shared actor's input: the agent observation, followed by a
// member one-hot when the side is a team.
int actor_input_dim(int obs_dim, int team_size);

// Writes the actor input for `member` into `out` (actor_input_dim entries).
void actor_observation(std::span<const float> obs, int member, int team_size,
                       std::span<float> out);

class DiffusionPolicy final : public Policy {
 public:
  DiffusionPolicy(std::shared_ptr<const DiffusionActor> actor, int team_size);

  PolicySignature signature() const override;
  void act(int member, std::span<const float> obs, Rng& rng,
           std::span<float> action) const override;
  const DiffusionActor& actor() const { return *actor_; }

 private:
  std::shared_ptr<const DiffusionActor> actor_;
  int team_size_;
};

class GaussianPolicy final : public Policy {
 public:
  GaussianPolicy(std::shared_ptr<const GaussianActor> actor, int team_size,
                 bool deterministic = false);

  PolicySignature signature() const override;
  void act(int member, std::span<const float> obs, Rng& rng,
           std::span<float> action) const override;
  const GaussianActor& actor() const { return *actor_; }

 private:
  std::shared_ptr<const GaussianActor> actor_;
  int team_size_;
  bool deterministic_;
};

}  // namespace difffp

#endif  // DIFFFP_POLICY_HPP_
