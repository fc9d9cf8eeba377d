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

#ifndef DIFFFP_ENVS_HPP_
#define DIFFFP_ENVS_HPP_

#include <array>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "difffp/game.hpp"

namespace difffp::envs {

// Numeric constant overrides keyed by parameter name (config keys env.<name>).
using EnvOverrides = std::map<std::string, double>;

// Registry: "scalar-duel", "particle-tag", "particle-deception", "track-duel".
// Unknown names or override keys raise ConfigError.
std::unique_ptr<Env> make_env(const std::string& name,
                              const EnvOverrides& overrides = {});
std::vector<std::string> env_names();

// One-shot bilinear game: R_ego = x * y, R_opp = -x * y.
std::pair<double, double> scalar_duel_step(double x, double y);

class ScalarDuel final : public Env {
 public:
  explicit ScalarDuel(const EnvOverrides& overrides = {});

  const GameSpec& spec() const override { return spec_; }
  JointObservation reset(uint64_t seed) override;
  StepResult step(const JointAction& actions) override;
  int step_count() const override { return step_; }
  std::unique_ptr<Env> clone() const override;

 private:
  GameSpec spec_;
  int step_ = 0;
};

// Pursuit-evasion in [-1, 1]^2: agent 0 is the evader (ego side), agents
// 1..n are pursuers (opponent team).
class ParticleTag final : public Env {
 public:
  struct Params {
    int num_pursuers = 3;
    double dt = 0.1;
    double capture_radius = 0.1;
    int horizon = 100;
    double ego_speed = 1.0;
    double pursuer_speed_ratio = 0.8;
    double min_start_distance = 0.5;
  };

  explicit ParticleTag(const EnvOverrides& overrides = {});

  const GameSpec& spec() const override { return spec_; }
  const Params& params() const { return params_; }
  JointObservation reset(uint64_t seed) override;
  StepResult step(const JointAction& actions) override;
  int step_count() const override { return step_; }
  std::unique_ptr<Env> clone() const override;
  bool traceable() const override { return true; }
  std::array<double, 2> position(int agent) const override;

  // Overwrites positions (velocities zeroed). Used by tests.
  void set_positions(const std::vector<std::array<double, 2>>& positions);
  JointObservation observe() const;

 private:
  Params params_;
  GameSpec spec_;
  std::vector<std::array<double, 2>> pos_;
  std::vector<std::array<double, 2>> vel_;
  int step_ = 0;
};

// Two ego agents hide which of two landmarks is the true goal from one
// adversary. Agents 0, 1 are egos, agent 2 the adversary.
class ParticleDeception final : public Env {
 public:
  struct Params {
    double dt = 0.1;
    double goal_radius = 0.1;
    int horizon = 100;
    double ego_speed = 1.0;
    double adversary_speed_ratio = 1.0;
    double min_start_distance = 0.3;
  };

  explicit ParticleDeception(const EnvOverrides& overrides = {});

  const GameSpec& spec() const override { return spec_; }
  const Params& params() const { return params_; }
  JointObservation reset(uint64_t seed) override;
  StepResult step(const JointAction& actions) override;
  int step_count() const override { return step_; }
  std::unique_ptr<Env> clone() const override;
  bool traceable() const override { return true; }
  std::array<double, 2> position(int agent) const override;

  void set_state(const std::vector<std::array<double, 2>>& positions,
                 const std::array<std::array<double, 2>, 2>& landmarks,
                 int true_goal);
  int true_goal() const { return true_goal_; }
  JointObservation observe() const;

 private:
  Params params_;
  GameSpec spec_;
  std::vector<std::array<double, 2>> pos_;
  std::vector<std::array<double, 2>> vel_;
  std::array<std::array<double, 2>, 2> landmarks_{};
  int true_goal_ = 0;
  int step_ = 0;
};

// Two cars on a closed centerline in curvilinear coordinates (arc s,
// lateral offset l, speed v). The ego is paid the change of the signed
// circular arc gap to its opponent.
class TrackDuel final : public Env {
 public:
  struct Params {
    double length = 100.0;
    double half_width = 1.0;
    double v_max = 5.0;
    double dt = 0.1;
    int horizon = 100;
    double collision_arc = 1.0;
    double collision_lateral = 0.5;
    double collision_penalty = 0.5;
    double wall_penalty = 0.1;
    double progress_bonus = 0.0;
    double accel_scale = 1.0;
    double lateral_scale = 1.0;
    double start_spread = 1.0;
  };
  struct Car {
    double s = 0.0;
    double lateral = 0.0;
    double v = 0.0;
  };

  explicit TrackDuel(const EnvOverrides& overrides = {});

  const GameSpec& spec() const override { return spec_; }
  const Params& params() const { return params_; }
  JointObservation reset(uint64_t seed) override;
  StepResult step(const JointAction& actions) override;
  int step_count() const override { return step_; }
  std::unique_ptr<Env> clone() const override;
  bool traceable() const override { return true; }
  std::array<double, 2> position(int agent) const override;

  void set_cars(const Car& ego, const Car& opp);
  const std::array<Car, 2>& cars() const { return cars_; }
  // Signed circular arc difference s_ego - s_opp in [-L/2, L/2).
  double gap() const;
  JointObservation observe() const;

 private:
  Params params_;
  GameSpec spec_;
  std::array<Car, 2> cars_{};
  int step_ = 0;
};

// Exact best response for one-dimensional, one-step games by brute force over
// grid_n equally spaced actions; ties go to the lowest grid index.
struct GridBestResponse {
  float best_action = 0.0f;
  double best_value = 0.0;
  std::vector<float> actions;
  std::vector<double> values;
};

GridBestResponse oracle_best_response_grid(const Env& env, int side_index,
                                           const Policy& opponent, int grid_n,
                                           int episodes_per_point,
                                           uint64_t seed,
                                           const PayoffOptions& options = {});

// True when oracle_best_response_grid supports `side_index` of `env`.
bool supports_grid_oracle(const GameSpec& spec, int side_index);

}  // namespace difffp::envs

#endif  // DIFFFP_ENVS_HPP_
