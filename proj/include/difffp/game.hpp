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

#ifndef DIFFFP_GAME_HPP_
#define DIFFFP_GAME_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "difffp/rng.hpp"

namespace difffp {

inline constexpr int kNumSides = 2;
inline constexpr int kEgoSide = 0;
inline constexpr int kOppSide = 1;

enum class Outcome { kNone = 0, kEgoWin = 1, kOppWin = 2, kDraw = 3 };
std::string_view outcome_name(Outcome outcome);

using Observation = std::vector<float>;
using JointObservation = std::vector<Observation>;
using JointAction = std::vector<std::vector<float>>;

// Static description of a partially observable Markov game. Agents are
// grouped into two sides (ego and opponent); a side with several agents is a
// team that shares one learner.
struct GameSpec {
  std::string name;
  int num_agents = 0;
  std::vector<int> side;  // side of each agent
  std::vector<int> obs_dim;
  std::vector<int> act_dim;
  std::vector<std::vector<float>> action_low;
  std::vector<std::vector<float>> action_high;
  int horizon = 1;
  double discount = 1.0;
  bool zero_sum = true;
  double reward_min = -1.0;
  double reward_max = 1.0;
  // Episode returns are divided by this before they are reported as payoffs.
  double payoff_scale = 1.0;

  // Throws ConfigError when an invariant does not hold.
  void validate() const;
  std::vector<int> members(int side_index) const;
  int team_size(int side_index) const;
};

struct StepResult {
  JointObservation obs;
  std::vector<double> rewards;
  bool terminated = false;
  bool truncated = false;
  Outcome outcome = Outcome::kNone;
};

struct Transition {
  JointObservation obs;
  JointAction joint_action;
  std::vector<double> rewards;
  JointObservation next_obs;
  bool terminated = false;
  bool truncated = false;
};

struct EpisodeResult {
  std::vector<double> returns;      // discounted, per agent
  std::vector<double> raw_returns;  // undiscounted, per agent
  int length = 0;
  Outcome outcome = Outcome::kNone;

  // Sum over the side's members.
  double side_return(const GameSpec& spec, int side_index,
                     bool discounted) const;
};

class Env {
 public:
  virtual ~Env() = default;

  virtual const GameSpec& spec() const = 0;
  // Samples the initial state from the seed. Stochasticity enters the
  // dynamics only here.
  virtual JointObservation reset(uint64_t seed) = 0;
  virtual StepResult step(const JointAction& actions) = 0;
  virtual int step_count() const = 0;
  virtual std::unique_ptr<Env> clone() const = 0;

  virtual bool traceable() const { return false; }
  // Two positional coordinates of an agent, (x, y) or (arc, lateral).
  virtual std::array<double, 2> position(int agent) const;
};

// Dimensions a policy accepts; -1 matches anything.
struct PolicySignature {
  int team_size = -1;
  int obs_dim = -1;
  int act_dim = -1;
};

// A side's behavioral strategy. Members of a team act on their own
// observation only. Implementations are immutable and safe to share between
// threads.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual PolicySignature signature() const = 0;
  // Pure policy used for one whole episode. Mixtures map u in [0, 1) to a
  // pool member; pure policies return themselves.
  virtual const Policy& select(double u) const {
    (void)u;
    return *this;
  }
  virtual void act(int member, std::span<const float> obs, Rng& rng,
                   std::span<float> action) const = 0;
};

class ConstantPolicy final : public Policy {
 public:
  explicit ConstantPolicy(std::vector<float> action)
      : action_(std::move(action)) {}

  PolicySignature signature() const override {
    return {-1, -1, static_cast<int>(action_.size())};
  }
  void act(int member, std::span<const float> obs, Rng& rng,
           std::span<float> action) const override;
  const std::vector<float>& action() const { return action_; }

 private:
  std::vector<float> action_;
};

// Throws ConfigError if `policy` cannot play `side_index` of `spec`.
void check_policy_fits(const GameSpec& spec, int side_index,
                       const Policy& policy);

struct RolloutOptions {
  bool record = false;
  // Per-side mixture selection uniforms; drawn from the seed when absent.
  std::optional<std::array<double, kNumSides>> selection;
  // Called after every step with the environment in its new state.
  std::function<void(const Env&, const JointAction&, const StepResult&)>
      on_step;
};

struct Rollout {
  EpisodeResult result;
  std::vector<Transition> transitions;
};

// Resets `env` with `seed` and plays one episode. `policies` holds one
// policy per side.
Rollout rollout(Env& env, std::span<const Policy* const> policies,
                uint64_t seed, const RolloutOptions& options = {});

// Uniform in [0, 1) used to pick the pure policy of `side_index` for the
// episode seeded with `episode_seed`.
double selection_uniform(uint64_t episode_seed, int side_index);

struct PayoffOptions {
  bool discounted = false;
  // Stratify mixture selection across the episodes of one estimate. With a
  // single episode this reduces to the plain per-episode draw.
  bool stratified = true;
};

struct PayoffEstimate {
  int episodes = 0;
  std::vector<double> mean;       // per agent, normalized
  std::vector<double> std_error;  // per agent
  std::array<double, kNumSides> side_mean{};
  std::array<double, kNumSides> side_std_error{};
  std::array<int, 4> outcome_counts{};  // indexed by Outcome
  std::vector<int> lengths;
};

// Mean normalized return over episodes seeded seed, seed + 1, ...
PayoffEstimate estimate_payoff(const Env& env,
                               std::span<const Policy* const> policies,
                               int num_episodes, uint64_t seed,
                               const PayoffOptions& options = {});

}  // namespace difffp

#endif  // DIFFFP_GAME_HPP_
