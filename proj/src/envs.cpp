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

#include "difffp/envs.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "difffp/errors.hpp"

namespace difffp::envs {
namespace {

// Binds override keys to parameter fields and rejects unknown keys.
class OverrideBinder {
 public:
  OverrideBinder(const std::string& env_name, const EnvOverrides& overrides)
      : env_name_(env_name), overrides_(overrides) {}

  void bind(const std::string& key, double* field) {
    known_.push_back(key);
    if (auto it = overrides_.find(key); it != overrides_.end()) {
      *field = it->second;
    }
  }
  void bind(const std::string& key, int* field) {
    known_.push_back(key);
    if (auto it = overrides_.find(key); it != overrides_.end()) {
      if (it->second != std::floor(it->second)) {
        throw ConfigError("env." + key + ": expected an integer for '" +
                          env_name_ + "'");
      }
      *field = static_cast<int>(it->second);
    }
  }
  void finish() const {
    for (const auto& [key, value] : overrides_) {
      if (std::find(known_.begin(), known_.end(), key) == known_.end()) {
        throw ConfigError("env." + key + ": unknown parameter for '" +
                          env_name_ + "'");
      }
    }
  }

 private:
  std::string env_name_;
  const EnvOverrides& overrides_;
  std::vector<std::string> known_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

GameSpec base_spec(const std::string& name, std::vector<int> sides,
                   std::vector<int> obs_dims, int act_dim) {
  GameSpec spec;
  spec.name = name;
  spec.num_agents = static_cast<int>(sides.size());
  spec.side = std::move(sides);
  spec.obs_dim = std::move(obs_dims);
  spec.act_dim.assign(spec.num_agents, act_dim);
  spec.action_low.assign(spec.num_agents, std::vector<float>(act_dim, -1.0f));
  spec.action_high.assign(spec.num_agents, std::vector<float>(act_dim, 1.0f));
  return spec;
}

using Vec2 = std::array<double, 2>;

double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

Vec2 uniform_point(Rng& rng, double extent) {
  std::uniform_real_distribution<double> dist(-extent, extent);
  const double x = dist(rng);
  const double y = dist(rng);
  return {x, y};
}

// Velocity from a [-1, 1]^2 command with the speed capped at `cap`.
Vec2 velocity_command(const std::vector<float>& action, double cap) {
  Vec2 v{std::clamp<double>(action[0], -1.0, 1.0) * cap,
         std::clamp<double>(action[1], -1.0, 1.0) * cap};
  const double speed = std::hypot(v[0], v[1]);
  if (speed > cap && speed > 0.0) {
    v[0] *= cap / speed;
    v[1] *= cap / speed;
  }
  return v;
}

void integrate(Vec2& pos, Vec2& vel, const Vec2& command, double dt) {
  vel = command;
  pos[0] = std::clamp(pos[0] + vel[0] * dt, -1.0, 1.0);
  pos[1] = std::clamp(pos[1] + vel[1] * dt, -1.0, 1.0);
}

void push_relative(Observation& obs, const Vec2& target, const Vec2& origin) {
  obs.push_back(static_cast<float>(target[0] - origin[0]));
  obs.push_back(static_cast<float>(target[1] - origin[1]));
}

void check_joint_action(const GameSpec& spec, const JointAction& actions) {
  if (actions.size() != static_cast<size_t>(spec.num_agents)) {
    throw ConfigError(spec.name + ": joint action has wrong agent count");
  }
  for (int i = 0; i < spec.num_agents; ++i) {
    if (actions[i].size() != static_cast<size_t>(spec.act_dim[i])) {
      throw ConfigError(spec.name + ": action of agent " + std::to_string(i) +
                        " has wrong dimension");
    }
  }
}

}  // namespace

std::pair<double, double> scalar_duel_step(double x, double y) {
  x = std::clamp(x, -1.0, 1.0);
  y = std::clamp(y, -1.0, 1.0);
  const double r = x * y;
  return {r, -r};
}

// ---------------------------------------------------------------- ScalarDuel

ScalarDuel::ScalarDuel(const EnvOverrides& overrides) {
  OverrideBinder binder("scalar-duel", overrides);
  binder.finish();
  spec_ = base_spec("scalar-duel", {kEgoSide, kOppSide}, {1, 1}, 1);
  spec_.horizon = 1;
  spec_.discount = 1.0;
  spec_.zero_sum = true;
  spec_.reward_min = -1.0;
  spec_.reward_max = 1.0;
  spec_.validate();
}

JointObservation ScalarDuel::reset(uint64_t) {
  step_ = 0;
  return {{0.0f}, {0.0f}};
}

StepResult ScalarDuel::step(const JointAction& actions) {
  check_joint_action(spec_, actions);
  const auto [r_ego, r_opp] = scalar_duel_step(actions[0][0], actions[1][0]);
  ++step_;
  StepResult out;
  out.obs = {{0.0f}, {0.0f}};
  out.rewards = {r_ego, r_opp};
  out.terminated = true;
  out.outcome = Outcome::kNone;
  return out;
}

std::unique_ptr<Env> ScalarDuel::clone() const {
  return std::make_unique<ScalarDuel>(*this);
}

// --------------------------------------------------------------- ParticleTag

ParticleTag::ParticleTag(const EnvOverrides& overrides) {
  OverrideBinder binder("particle-tag", overrides);
  binder.bind("num_pursuers", &params_.num_pursuers);
  binder.bind("dt", &params_.dt);
  binder.bind("capture_radius", &params_.capture_radius);
  binder.bind("horizon", &params_.horizon);
  binder.bind("ego_speed", &params_.ego_speed);
  binder.bind("pursuer_speed_ratio", &params_.pursuer_speed_ratio);
  binder.bind("min_start_distance", &params_.min_start_distance);
  binder.finish();
  require(params_.num_pursuers >= 1 && params_.num_pursuers <= 3,
          "env.num_pursuers: must be in [1, 3]");
  require(params_.dt > 0.0, "env.dt: must be positive");
  require(params_.capture_radius > 0.0, "env.capture_radius: must be positive");
  require(params_.horizon > 0, "env.horizon: must be positive");
  require(params_.ego_speed > 0.0, "env.ego_speed: must be positive");
  require(params_.pursuer_speed_ratio > 0.0 &&
              params_.pursuer_speed_ratio <= 1.0,
          "env.pursuer_speed_ratio: must be in (0, 1]");

  const int n = 1 + params_.num_pursuers;
  std::vector<int> sides(n, kOppSide);
  sides[0] = kEgoSide;
  spec_ = base_spec("particle-tag", sides,
                    std::vector<int>(n, 4 + 4 * (n - 1)), 2);
  spec_.horizon = params_.horizon;
  spec_.discount = 0.99;
  spec_.zero_sum = true;
  spec_.reward_min = -1.0;
  spec_.reward_max = 1.0;
  spec_.validate();
  pos_.assign(n, {0.0, 0.0});
  vel_.assign(n, {0.0, 0.0});
}

JointObservation ParticleTag::reset(uint64_t seed) {
  Rng rng = seed_stream(seed, streams::kEnv);
  const int n = spec_.num_agents;
  pos_[0] = uniform_point(rng, 0.9);
  for (int i = 1; i < n; ++i) {
    Vec2 p = uniform_point(rng, 0.9);
    for (int tries = 0; tries < 1000; ++tries) {
      if (distance(p, pos_[0]) >= params_.min_start_distance) break;
      p = uniform_point(rng, 0.9);
    }
    pos_[i] = p;
  }
  vel_.assign(n, {0.0, 0.0});
  step_ = 0;
  return observe();
}

JointObservation ParticleTag::observe() const {
  const int n = spec_.num_agents;
  JointObservation obs(n);
  for (int i = 0; i < n; ++i) {
    Observation& o = obs[i];
    o.reserve(spec_.obs_dim[i]);
    o.push_back(static_cast<float>(pos_[i][0]));
    o.push_back(static_cast<float>(pos_[i][1]));
    o.push_back(static_cast<float>(vel_[i][0]));
    o.push_back(static_cast<float>(vel_[i][1]));
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      push_relative(o, pos_[j], pos_[i]);
      push_relative(o, vel_[j], vel_[i]);
    }
  }
  return obs;
}

StepResult ParticleTag::step(const JointAction& actions) {
  check_joint_action(spec_, actions);
  const int n = spec_.num_agents;
  for (int i = 0; i < n; ++i) {
    const double cap = i == 0
                           ? params_.ego_speed
                           : params_.ego_speed * params_.pursuer_speed_ratio;
    integrate(pos_[i], vel_[i], velocity_command(actions[i], cap), params_.dt);
  }
  ++step_;

  StepResult out;
  out.rewards.assign(n, 0.0);
  bool captured = false;
  for (int i = 1; i < n; ++i) {
    if (distance(pos_[i], pos_[0]) < params_.capture_radius) captured = true;
  }
  if (captured) {
    out.terminated = true;
    out.outcome = Outcome::kOppWin;
    out.rewards[0] = -1.0;
    for (int i = 1; i < n; ++i) out.rewards[i] = 1.0 / (n - 1);
  } else if (step_ >= params_.horizon) {
    out.truncated = true;
    out.outcome = Outcome::kEgoWin;
  }
  out.obs = observe();
  return out;
}

std::unique_ptr<Env> ParticleTag::clone() const {
  return std::make_unique<ParticleTag>(*this);
}

std::array<double, 2> ParticleTag::position(int agent) const {
  return pos_.at(agent);
}

void ParticleTag::set_positions(const std::vector<Vec2>& positions) {
  if (positions.size() != pos_.size()) {
    throw ConfigError("particle-tag: wrong number of positions");
  }
  pos_ = positions;
  vel_.assign(pos_.size(), {0.0, 0.0});
}

// --------------------------------------------------------- ParticleDeception

ParticleDeception::ParticleDeception(const EnvOverrides& overrides) {
  OverrideBinder binder("particle-deception", overrides);
  binder.bind("dt", &params_.dt);
  binder.bind("goal_radius", &params_.goal_radius);
  binder.bind("horizon", &params_.horizon);
  binder.bind("ego_speed", &params_.ego_speed);
  binder.bind("adversary_speed_ratio", &params_.adversary_speed_ratio);
  binder.bind("min_start_distance", &params_.min_start_distance);
  binder.finish();
  require(params_.dt > 0.0, "env.dt: must be positive");
  require(params_.goal_radius > 0.0, "env.goal_radius: must be positive");
  require(params_.horizon > 0, "env.horizon: must be positive");
  require(params_.ego_speed > 0.0, "env.ego_speed: must be positive");
  require(params_.adversary_speed_ratio > 0.0,
          "env.adversary_speed_ratio: must be positive");

  spec_ = base_spec("particle-deception", {kEgoSide, kEgoSide, kOppSide},
                    {14, 14, 12}, 2);
  spec_.horizon = params_.horizon;
  spec_.discount = 0.99;
  spec_.zero_sum = true;
  spec_.reward_min = -1.0;
  spec_.reward_max = 1.0;
  spec_.validate();
  pos_.assign(3, {0.0, 0.0});
  vel_.assign(3, {0.0, 0.0});
}

JointObservation ParticleDeception::reset(uint64_t seed) {
  Rng rng = seed_stream(seed, streams::kEnv);
  landmarks_[0] = uniform_point(rng, 0.8);
  landmarks_[1] = uniform_point(rng, 0.8);
  for (int tries = 0; tries < 1000; ++tries) {
    if (distance(landmarks_[0], landmarks_[1]) >= 0.5) break;
    landmarks_[1] = uniform_point(rng, 0.8);
  }
  true_goal_ = std::uniform_int_distribution<int>(0, 1)(rng);
  for (int i = 0; i < 3; ++i) {
    Vec2 p = uniform_point(rng, 0.9);
    for (int tries = 0; tries < 1000; ++tries) {
      const bool clear =
          distance(p, landmarks_[0]) >= params_.min_start_distance &&
          distance(p, landmarks_[1]) >= params_.min_start_distance &&
          (i < 2 || (distance(p, pos_[0]) >= params_.min_start_distance &&
                     distance(p, pos_[1]) >= params_.min_start_distance));
      if (clear) break;
      p = uniform_point(rng, 0.9);
    }
    pos_[i] = p;
  }
  vel_.assign(3, {0.0, 0.0});
  step_ = 0;
  return observe();
}

JointObservation ParticleDeception::observe() const {
  JointObservation obs(3);
  for (int i = 0; i < 3; ++i) {
    Observation& o = obs[i];
    o.reserve(spec_.obs_dim[i]);
    o.push_back(static_cast<float>(pos_[i][0]));
    o.push_back(static_cast<float>(pos_[i][1]));
    o.push_back(static_cast<float>(vel_[i][0]));
    o.push_back(static_cast<float>(vel_[i][1]));
    push_relative(o, landmarks_[0], pos_[i]);
    push_relative(o, landmarks_[1], pos_[i]);
    if (spec_.side[i] == kEgoSide) {
      push_relative(o, landmarks_[true_goal_], pos_[i]);
    }
    for (int j = 0; j < 3; ++j) {
      if (j != i) push_relative(o, pos_[j], pos_[i]);
    }
  }
  return obs;
}

StepResult ParticleDeception::step(const JointAction& actions) {
  check_joint_action(spec_, actions);
  for (int i = 0; i < 3; ++i) {
    const double cap =
        i < 2 ? params_.ego_speed
              : params_.ego_speed * params_.adversary_speed_ratio;
    integrate(pos_[i], vel_[i], velocity_command(actions[i], cap), params_.dt);
  }
  ++step_;

  const Vec2& goal = landmarks_[true_goal_];
  const double r = params_.goal_radius;
  const int goal_nearest =
      distance(pos_[1], goal) < distance(pos_[0], goal) ? 1 : 0;
  const bool intercepted = distance(pos_[2], pos_[goal_nearest]) < r;
  const bool adversary_at_goal = distance(pos_[2], goal) < r;
  const bool ego_at_goal =
      distance(pos_[0], goal) < r || distance(pos_[1], goal) < r;

  StepResult out;
  out.rewards.assign(3, 0.0);
  // Same-step arrivals resolve in the adversary's favor.
  if (intercepted || adversary_at_goal) {
    out.terminated = true;
    out.outcome = Outcome::kOppWin;
    out.rewards = {-0.5, -0.5, 1.0};
  } else if (ego_at_goal) {
    out.terminated = true;
    out.outcome = Outcome::kEgoWin;
    out.rewards = {0.5, 0.5, -1.0};
  } else if (step_ >= params_.horizon) {
    out.truncated = true;
    out.outcome = Outcome::kDraw;
  }
  out.obs = observe();
  return out;
}

std::unique_ptr<Env> ParticleDeception::clone() const {
  return std::make_unique<ParticleDeception>(*this);
}

std::array<double, 2> ParticleDeception::position(int agent) const {
  return pos_.at(agent);
}

void ParticleDeception::set_state(const std::vector<Vec2>& positions,
                                  const std::array<Vec2, 2>& landmarks,
                                  int true_goal) {
  if (positions.size() != 3 || (true_goal != 0 && true_goal != 1)) {
    throw ConfigError("particle-deception: invalid state");
  }
  pos_ = positions;
  vel_.assign(3, {0.0, 0.0});
  landmarks_ = landmarks;
  true_goal_ = true_goal;
}

// ----------------------------------------------------------------- TrackDuel

TrackDuel::TrackDuel(const EnvOverrides& overrides) {
  OverrideBinder binder("track-duel", overrides);
  binder.bind("length", &params_.length);
  binder.bind("half_width", &params_.half_width);
  binder.bind("v_max", &params_.v_max);
  binder.bind("dt", &params_.dt);
  binder.bind("horizon", &params_.horizon);
  binder.bind("collision_arc", &params_.collision_arc);
  binder.bind("collision_lateral", &params_.collision_lateral);
  binder.bind("collision_penalty", &params_.collision_penalty);
  binder.bind("wall_penalty", &params_.wall_penalty);
  binder.bind("progress_bonus", &params_.progress_bonus);
  binder.bind("accel_scale", &params_.accel_scale);
  binder.bind("lateral_scale", &params_.lateral_scale);
  binder.bind("start_spread", &params_.start_spread);
  binder.finish();
  require(params_.length > 0.0, "env.length: must be positive");
  require(params_.half_width > 0.0, "env.half_width: must be positive");
  require(params_.v_max > 0.0, "env.v_max: must be positive");
  require(params_.dt > 0.0, "env.dt: must be positive");
  require(params_.horizon > 0, "env.horizon: must be positive");
  require(2.0 * params_.v_max * params_.dt < 0.5 * params_.length,
          "env.v_max: cars may not travel half the track in one step");
  require(params_.collision_penalty >= 0.0 && params_.wall_penalty >= 0.0 &&
              params_.progress_bonus >= 0.0,
          "env: penalties and bonus must be non-negative");
  require(params_.start_spread >= 0.0 &&
              params_.start_spread < params_.length,
          "env.start_spread: must be in [0, length)");

  spec_ = base_spec("track-duel", {kEgoSide, kOppSide}, {5, 5}, 2);
  spec_.horizon = params_.horizon;
  spec_.discount = 0.99;
  spec_.zero_sum = params_.collision_penalty == 0.0 &&
                   params_.wall_penalty == 0.0 &&
                   params_.progress_bonus == 0.0;
  const double progress = 2.0 * params_.v_max * params_.dt / params_.length;
  spec_.reward_min = -progress - params_.collision_penalty -
                     params_.wall_penalty;
  spec_.reward_max = progress + params_.progress_bonus * params_.v_max *
                                    params_.dt / params_.length;
  spec_.validate();
}

double TrackDuel::gap() const {
  const double L = params_.length;
  double d = std::fmod(cars_[0].s - cars_[1].s, L);
  if (d >= 0.5 * L) d -= L;
  if (d < -0.5 * L) d += L;
  return d;
}

JointObservation TrackDuel::reset(uint64_t seed) {
  Rng rng = seed_stream(seed, streams::kEnv);
  std::uniform_real_distribution<double> arc(0.0, params_.start_spread);
  std::uniform_real_distribution<double> lateral(-0.5 * params_.half_width,
                                                 0.5 * params_.half_width);
  std::uniform_real_distribution<double> speed(0.0, 0.5 * params_.v_max);
  for (Car& car : cars_) {
    car.s = arc(rng);
    car.lateral = lateral(rng);
    car.v = speed(rng);
  }
  step_ = 0;
  return observe();
}

JointObservation TrackDuel::observe() const {
  const double g = gap();
  const double gap_scale = 10.0;
  JointObservation obs(2);
  for (int i = 0; i < 2; ++i) {
    const Car& own = cars_[i];
    const Car& other = cars_[1 - i];
    const double own_gap = i == 0 ? g : -g;
    obs[i] = {static_cast<float>(own_gap / gap_scale),
              static_cast<float>(own.lateral / params_.half_width),
              static_cast<float>(own.v / params_.v_max),
              static_cast<float>(other.lateral / params_.half_width),
              static_cast<float>(other.v / params_.v_max)};
  }
  return obs;
}

StepResult TrackDuel::step(const JointAction& actions) {
  check_joint_action(spec_, actions);
  const double L = params_.length;
  const double w = params_.half_width;
  const double gap_before = gap();
  for (int i = 0; i < 2; ++i) {
    Car& car = cars_[i];
    const double accel =
        std::clamp<double>(actions[i][0], -1.0, 1.0) * params_.accel_scale;
    const double steer =
        std::clamp<double>(actions[i][1], -1.0, 1.0) * params_.lateral_scale;
    car.v = std::clamp(car.v + accel * params_.dt, 0.0, params_.v_max);
    car.s = std::fmod(car.s + car.v * params_.dt, L);
    if (car.s < 0.0) car.s += L;
    car.lateral = std::clamp(car.lateral + steer * params_.dt, -w, w);
  }
  ++step_;

  double delta = gap() - gap_before;
  if (delta >= 0.5 * L) delta -= L;
  if (delta < -0.5 * L) delta += L;

  StepResult out;
  out.rewards = {delta / L, -delta / L};
  const bool collided =
      std::abs(gap()) < params_.collision_arc &&
      std::abs(cars_[0].lateral - cars_[1].lateral) < params_.collision_lateral;
  for (int i = 0; i < 2; ++i) {
    if (collided) out.rewards[i] -= params_.collision_penalty;
    if (std::abs(cars_[i].lateral) >= w) out.rewards[i] -= params_.wall_penalty;
    out.rewards[i] += params_.progress_bonus * cars_[i].v * params_.dt / L;
  }
  if (step_ >= params_.horizon) {
    out.truncated = true;
    const double g = gap();
    out.outcome = g > 0.0   ? Outcome::kEgoWin
                  : g < 0.0 ? Outcome::kOppWin
                            : Outcome::kDraw;
  }
  out.obs = observe();
  return out;
}

std::unique_ptr<Env> TrackDuel::clone() const {
  return std::make_unique<TrackDuel>(*this);
}

std::array<double, 2> TrackDuel::position(int agent) const {
  const Car& car = cars_.at(agent);
  return {car.s, car.lateral};
}

void TrackDuel::set_cars(const Car& ego, const Car& opp) {
  cars_ = {ego, opp};
}

// ------------------------------------------------------------------ registry

std::vector<std::string> env_names() {
  return {"scalar-duel", "particle-tag", "particle-deception", "track-duel"};
}

std::unique_ptr<Env> make_env(const std::string& name,
                              const EnvOverrides& overrides) {
  if (name == "scalar-duel") return std::make_unique<ScalarDuel>(overrides);
  if (name == "particle-tag") return std::make_unique<ParticleTag>(overrides);
  if (name == "particle-deception") {
    return std::make_unique<ParticleDeception>(overrides);
  }
  if (name == "track-duel") return std::make_unique<TrackDuel>(overrides);
  throw ConfigError("env.name: unknown environment '" + name + "'");
}

// ------------------------------------------------------------- grid oracle

bool supports_grid_oracle(const GameSpec& spec, int side_index) {
  if (spec.horizon != 1 || spec.team_size(side_index) != 1) return false;
  return spec.act_dim[spec.members(side_index).front()] == 1;
}

GridBestResponse oracle_best_response_grid(const Env& env, int side_index,
                                           const Policy& opponent, int grid_n,
                                           int episodes_per_point,
                                           uint64_t seed,
                                           const PayoffOptions& options) {
  const GameSpec& spec = env.spec();
  if (grid_n < 2) throw ConfigError("grid oracle: grid_n must be >= 2");
  if (side_index != kEgoSide && side_index != kOppSide) {
    throw ConfigError("grid oracle: invalid side");
  }
  if (!supports_grid_oracle(spec, side_index)) {
    throw ConfigError("grid oracle: '" + spec.name +
                      "' needs one-step games with a single 1-D actor");
  }
  const int agent = spec.members(side_index).front();
  const double low = spec.action_low[agent][0];
  const double high = spec.action_high[agent][0];

  GridBestResponse out;
  out.actions.resize(grid_n);
  out.values.resize(grid_n);
  for (int k = 0; k < grid_n; ++k) {
    const auto a = static_cast<float>(low + (high - low) * k / (grid_n - 1));
    out.actions[k] = a;
    ConstantPolicy candidate({a});
    std::array<const Policy*, kNumSides> profile{};
    profile[side_index] = &candidate;
    profile[1 - side_index] = &opponent;
    out.values[k] = estimate_payoff(env, profile, episodes_per_point, seed,
                                    options)
                        .side_mean[side_index];
  }
  int best = 0;
  for (int k = 1; k < grid_n; ++k) {
    if (out.values[k] > out.values[best]) best = k;
  }
  out.best_action = out.actions[best];
  out.best_value = out.values[best];
  return out;
}

}  // namespace difffp::envs
