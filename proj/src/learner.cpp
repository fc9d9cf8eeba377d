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

#include "difffp/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "difffp/errors.hpp"
#include "difffp/gaussian.hpp"
#include "difffp/policy.hpp"
#include "difffp/replay.hpp"

namespace difffp {

const char* learner_kind_name(LearnerKind kind) {
  return kind == LearnerKind::kDiffusion ? "diffusion" : "gaussian";
}

LearnerKind learner_kind_from_name(const std::string& name) {
  if (name == "diffusion") return LearnerKind::kDiffusion;
  if (name == "gaussian") return LearnerKind::kGaussian;
  throw ConfigError("unknown learner kind '" + name + "'");
}

NoiseSchedule DiffusionSettings::schedule_table() const {
  return NoiseSchedule::make(schedule, steps, beta_min, beta_max);
}

void BrConfig::validate() const {
  auto fail = [](const std::string& what) {
    const bool shared = what.rfind("diffusion.", 0) == 0 ||
                        what.rfind("critic.", 0) == 0;
    throw ConfigError(shared ? what : "br." + what);
  };
  if (env_steps < 1) fail("env_steps: must be >= 1");
  if (warmup_steps < 0) fail("warmup_steps: must be >= 0");
  if (warmup_steps > env_steps) fail("warmup_steps: must not exceed env_steps");
  if (batch_size < 1) fail("batch_size: must be >= 1");
  if (updates_per_step < 0) fail("updates_per_step: must be >= 0");
  if (update_every < 1) fail("update_every: must be >= 1");
  if (buffer_capacity < 1) fail("buffer_capacity: must be >= 1");
  if (!(actor_lr > 0.0f)) fail("actor_lr: must be positive");
  if (!(critic_lr > 0.0f)) fail("critic_lr: must be positive");
  if (!(entropy_weight >= 0.0f)) fail("entropy_weight: must be >= 0");
  for (int h : actor_hidden) {
    if (h < 1) fail("actor_hidden: widths must be positive");
  }
  for (int h : critic_hidden) {
    if (h < 1) fail("critic_hidden: widths must be positive");
  }
  if (diffusion.steps < 1) fail("diffusion.steps: must be >= 1");
  if (!(diffusion.beta_min > 0.0) || !(diffusion.beta_max >= diffusion.beta_min))
    fail("diffusion.beta_min: need 0 < beta_min <= beta_max");
  if (!(diffusion.eta > 0.0f)) fail("diffusion.eta: must be positive");
  if (diffusion.guidance_steps < 0) fail("diffusion.guidance_steps: must be >= 0");
  if (!(diffusion.lambda >= 0.0f)) fail("diffusion.lambda: must be >= 0");
  if (!(diffusion.temperature > 0.0)) fail("diffusion.temperature: must be positive");
  if (!(diffusion.clip >= 1.0)) fail("diffusion.clip: must be >= 1");
  if (!(critic.tau >= 0.0f && critic.tau <= 1.0f)) fail("critic.tau: must lie in [0, 1]");
  if (critic.gamma > 1.0) fail("critic.gamma: must be <= 1");
  if (critic.target_samples < 1) fail("critic.target_samples: must be >= 1");
}

namespace {

struct Sample {
  std::vector<float> critic_input;       // joint team observation
  std::vector<float> actor_obs;          // member-major actor inputs
  std::vector<float> action;             // joint team action
  float reward = 0.0f;                   // summed over the team
  std::vector<float> next_critic_input;
  std::vector<float> next_actor_obs;
  bool terminated = false;
  float return_to_go = 0.0f;
};

// Team layout of one side.
struct Side {
  std::vector<int> members;
  int team = 1;
  int obs_dim = 0;
  int act_dim = 0;
  int actor_in = 0;
  std::vector<float> low, high;
};

Side describe_side(const GameSpec& spec, int side) {
  Side out;
  out.members = spec.members(side);
  out.team = static_cast<int>(out.members.size());
  const int first = out.members.front();
  out.obs_dim = spec.obs_dim[first];
  out.act_dim = spec.act_dim[first];
  for (int a : out.members) {
    if (spec.obs_dim[a] != out.obs_dim || spec.act_dim[a] != out.act_dim ||
        spec.action_low[a] != spec.action_low[first] ||
        spec.action_high[a] != spec.action_high[first]) {
      throw ConfigError("side " + std::to_string(side) +
                        ": team members must share observation and action "
                        "spaces");
    }
  }
  out.actor_in = actor_input_dim(out.obs_dim, out.team);
  out.low = spec.action_low[first];
  out.high = spec.action_high[first];
  return out;
}

void fill_team_inputs(const Side& side, const JointObservation& obs,
                      std::vector<float>& critic_input,
                      std::vector<float>& actor_obs) {
  critic_input.clear();
  actor_obs.assign(static_cast<size_t>(side.team) * side.actor_in, 0.0f);
  for (int m = 0; m < side.team; ++m) {
    const Observation& o = obs[side.members[m]];
    critic_input.insert(critic_input.end(), o.begin(), o.end());
    actor_observation(o, m, side.team,
                      std::span<float>(actor_obs).subspan(
                          static_cast<size_t>(m) * side.actor_in,
                          side.actor_in));
  }
}

// Row j of the joint matrix from rows m * B + j of the member-major stack.
nn::Matrix join_members(const nn::Matrix& stacked, int team) {
  const Eigen::Index b = stacked.rows() / team;
  const Eigen::Index d = stacked.cols();
  nn::Matrix joint(b, d * team);
  for (int m = 0; m < team; ++m) {
    joint.middleCols(m * d, d) = stacked.middleRows(m * b, b);
  }
  return joint;
}

nn::Matrix split_members(const nn::Matrix& joint, int team) {
  const Eigen::Index b = joint.rows();
  const Eigen::Index d = joint.cols() / team;
  nn::Matrix stacked(b * team, d);
  for (int m = 0; m < team; ++m) {
    stacked.middleRows(m * b, b) = joint.middleCols(m * d, d);
  }
  return stacked;
}

double tail_mean(const std::vector<double>& values, size_t window) {
  if (values.empty()) return 0.0;
  const size_t n = std::min(window, values.size());
  return std::accumulate(values.end() - static_cast<std::ptrdiff_t>(n),
                         values.end(), 0.0) /
         static_cast<double>(n);
}

class Actor {
 public:
  Actor(const BrConfig& config, const Side& side) : kind_(config.kind) {
    if (kind_ == LearnerKind::kDiffusion) {
      diffusion_ = DiffusionActor(side.actor_in, side.act_dim,
                                  config.diffusion.schedule_table(), side.low,
                                  side.high, config.actor_hidden);
    } else {
      gaussian_ = GaussianActor(side.actor_in, side.act_dim, side.low,
                                side.high, config.actor_hidden);
    }
  }
  nn::Mlp& net() {
    return kind_ == LearnerKind::kDiffusion ? diffusion_.net()
                                            : gaussian_.net();
  }
  void init(Rng& rng) {
    if (kind_ == LearnerKind::kDiffusion) {
      diffusion_.init(rng);
    } else {
      gaussian_.init(rng);
    }
  }
  nn::Matrix sample(const nn::Matrix& obs, Rng& rng) const {
    return kind_ == LearnerKind::kDiffusion ? diffusion_.sample(obs, rng)
                                            : gaussian_.sample(obs, rng);
  }
  DiffusionActor& diffusion() { return diffusion_; }
  GaussianActor& gaussian() { return gaussian_; }

 private:
  LearnerKind kind_;
  DiffusionActor diffusion_;
  GaussianActor gaussian_;
};

}  // namespace

BrResult train_best_response(const Env& env_template, int learner_side,
                             const Policy& opponent, const BrConfig& config,
                             uint64_t seed, const LearnerState* warm) {
  config.validate();
  const GameSpec& spec = env_template.spec();
  if (learner_side != kEgoSide && learner_side != kOppSide) {
    throw ConfigError("learner side must be 0 or 1");
  }
  const int opp_side = 1 - learner_side;
  check_policy_fits(spec, opp_side, opponent);
  const Side me = describe_side(spec, learner_side);
  const std::vector<int> opp_members = spec.members(opp_side);
  const double gamma =
      config.critic.gamma < 0.0 ? spec.discount : config.critic.gamma;

  Rng init_rng = seed_stream(seed, streams::kInit);
  Actor actor(config, me);
  actor.init(init_rng);
  TwinCritic critic(me.team * me.obs_dim, me.team * me.act_dim,
                    config.critic_hidden, gamma, config.critic_lr);
  critic.init(init_rng);
  if (warm != nullptr) {
    if (warm->actor_params.size() != actor.net().num_params() ||
        warm->critic.input_dim() != critic.input_dim() ||
        warm->critic.action_dim() != critic.action_dim()) {
      throw ConfigError("warm start: stored networks do not match this side");
    }
    actor.net().unflatten(warm->actor_params);
    critic = warm->critic;
  }
  nn::AdamState actor_adam(actor.net().num_params(), config.actor_lr);

  Rng buffer_rng = seed_stream(seed, streams::kBuffer);
  Rng update_rng = seed_stream(seed, streams::kUpdate);
  Rng episode_rng = seed_stream(seed, streams::kEpisodes);
  Rng act_rng = seed_stream(seed, streams::kAct + learner_side);
  Rng opp_rng = seed_stream(seed, streams::kAct + opp_side);
  Rng select_rng = seed_stream(seed, streams::kSelect + opp_side);

  ReplayBuffer<Sample> buffer(static_cast<size_t>(config.buffer_capacity));
  std::unique_ptr<Env> env = env_template.clone();
  BrMetrics metrics;
  const int team = me.team;
  const auto batch = static_cast<Eigen::Index>(config.batch_size);

  ImprovementOptions improve;
  improve.eta = config.diffusion.eta;
  improve.steps = config.diffusion.guidance_steps;
  improve.lambda = config.diffusion.lambda;
  improve.weighting = config.diffusion.weighting;

  auto run_update = [&]() {
    const auto picked = buffer.sample(config.batch_size, buffer_rng);
    if (!picked) return;
    CriticBatch cb;
    cb.input.resize(batch, critic.input_dim());
    cb.action.resize(batch, critic.action_dim());
    cb.next_input.resize(batch, critic.input_dim());
    cb.next_obs.resize(batch * team, me.actor_in);
    cb.reward.resize(batch);
    cb.terminated.resize(batch);
    nn::Matrix actor_obs(batch * team, me.actor_in);
    std::vector<double> rtg(batch);
    for (Eigen::Index j = 0; j < batch; ++j) {
      const Sample& s = buffer.at((*picked)[j]);
      cb.input.row(j) = Eigen::Map<const nn::RowVector>(
          s.critic_input.data(), critic.input_dim());
      cb.action.row(j) = Eigen::Map<const nn::RowVector>(
          s.action.data(), critic.action_dim());
      cb.next_input.row(j) = Eigen::Map<const nn::RowVector>(
          s.next_critic_input.data(), critic.input_dim());
      for (int m = 0; m < team; ++m) {
        cb.next_obs.row(m * batch + j) = Eigen::Map<const nn::RowVector>(
            s.next_actor_obs.data() + static_cast<size_t>(m) * me.actor_in,
            me.actor_in);
        actor_obs.row(m * batch + j) = Eigen::Map<const nn::RowVector>(
            s.actor_obs.data() + static_cast<size_t>(m) * me.actor_in,
            me.actor_in);
      }
      cb.reward[j] = s.reward;
      cb.terminated[j] = s.terminated ? 1 : 0;
      rtg[j] = s.return_to_go;
    }
    const NextActionFn next_action = [&](const nn::Matrix& next_obs,
                                         Rng& rng) {
      return join_members(actor.sample(next_obs, rng), team);
    };
    const CriticLosses closs = critic.update(
        cb, next_action, config.critic.tau, config.critic.target_samples,
        update_rng);
    metrics.critic_losses.push_back(0.5 * (closs.q1 + closs.q2));

    auto q_and_grad = [&](const nn::Matrix& stacked) {
      const MinQ mq =
          critic.q_min_and_action_grad(cb.input, join_members(stacked, team));
      QGrad out;
      out.grad = split_members(mq.action_grad, team);
      out.q.resize(static_cast<size_t>(stacked.rows()));
      for (Eigen::Index r = 0; r < stacked.rows(); ++r) {
        out.q[r] = mq.q[r % batch];
      }
      return out;
    };

    double actor_loss = 0.0;
    if (config.kind == LearnerKind::kDiffusion) {
      nn::Matrix buffer_actions = split_members(cb.action, team);
      std::vector<float> weights;
      if (improve.weighting != WeightTarget::kNone) {
        const std::vector<float> w = weight_by_return(
            rtg, config.diffusion.temperature, config.diffusion.clip);
        weights.reserve(static_cast<size_t>(batch * team));
        for (int m = 0; m < team; ++m) {
          weights.insert(weights.end(), w.begin(), w.end());
        }
      }
      const ActionGradFn grad = [&](const nn::Matrix& a) {
        return q_and_grad(a).grad;
      };
      nn::Matrix fresh;
      if (config.diffusion.guide_fresh) {
        fresh = actor.diffusion().sample(actor_obs, update_rng);
      }
      const ActorUpdateStats stats = q_guided_improvement(
          actor.diffusion(), actor_adam, actor_obs, buffer_actions, grad,
          improve, weights, update_rng,
          config.diffusion.guide_fresh ? &fresh : nullptr);
      actor_loss = stats.denoise_loss + improve.lambda * stats.distill_loss;
    } else {
      actor_loss = gaussian_actor_update(actor.gaussian(), actor_adam,
                                         actor_obs, q_and_grad,
                                         config.entropy_weight, update_rng);
    }
    metrics.actor_losses.push_back(actor_loss);
    ++metrics.updates;
  };

  std::vector<Sample> staged;
  auto flush_episode = [&]() {
    double g = 0.0;
    for (auto it = staged.rbegin(); it != staged.rend(); ++it) {
      g = it->reward + gamma * (it->terminated ? 0.0 : g);
      it->return_to_go = static_cast<float>(g);
    }
    for (Sample& s : staged) buffer.push(std::move(s));
    staged.clear();
  };

  int steps = 0;
  JointAction joint(spec.num_agents);
  for (int a = 0; a < spec.num_agents; ++a) joint[a].resize(spec.act_dim[a]);
  nn::Matrix own_inputs(team, me.actor_in);
  while (steps < config.env_steps) {
    JointObservation obs = env->reset(episode_rng());
    const Policy& opp = opponent.select(uniform_sample(select_rng));
    double episode_return = 0.0;
    bool done = false;
    while (!done && steps < config.env_steps) {
      Sample s;
      fill_team_inputs(me, obs, s.critic_input, s.actor_obs);
      own_inputs = Eigen::Map<const nn::Matrix>(s.actor_obs.data(), team,
                                                me.actor_in);
      const nn::Matrix own = actor.sample(own_inputs, act_rng);
      for (int m = 0; m < team; ++m) {
        std::vector<float>& dst = joint[me.members[m]];
        for (int d = 0; d < me.act_dim; ++d) dst[d] = own(m, d);
        s.action.insert(s.action.end(), dst.begin(), dst.end());
      }
      for (size_t m = 0; m < opp_members.size(); ++m) {
        const int agent = opp_members[m];
        opp.act(static_cast<int>(m), obs[agent], opp_rng, joint[agent]);
        for (int d = 0; d < spec.act_dim[agent]; ++d) {
          if (!std::isfinite(joint[agent][d])) {
            throw NumericError("opponent produced a non-finite action");
          }
          joint[agent][d] = std::clamp(joint[agent][d],
                                       spec.action_low[agent][d],
                                       spec.action_high[agent][d]);
        }
      }
      StepResult res = env->step(joint);
      double reward = 0.0;
      for (int a : me.members) reward += res.rewards[a];
      s.reward = static_cast<float>(reward);
      s.terminated = res.terminated;
      fill_team_inputs(me, res.obs, s.next_critic_input, s.next_actor_obs);
      staged.push_back(std::move(s));
      episode_return += reward;
      obs = std::move(res.obs);
      done = res.terminated || res.truncated;
      ++steps;
      if (done || steps == config.env_steps) flush_episode();
      if (steps > config.warmup_steps && steps % config.update_every == 0 &&
          buffer.ready(config.batch_size)) {
        for (int u = 0; u < config.updates_per_step; ++u) run_update();
      }
    }
    if (done) {
      metrics.episode_returns.push_back(episode_return / spec.payoff_scale);
      ++metrics.episodes;
    }
  }
  metrics.mean_return = tail_mean(metrics.episode_returns, 100);
  metrics.actor_loss = tail_mean(metrics.actor_losses, 100);
  metrics.critic_loss = tail_mean(metrics.critic_losses, 100);

  BrResult result;
  PolicyCheckpoint& c = result.checkpoint;
  c.kind = config.kind == LearnerKind::kDiffusion ? PolicyKind::kDiffusion
                                                  : PolicyKind::kGaussian;
  c.side = learner_side;
  c.team_size = team;
  c.obs_dim = me.obs_dim;
  c.act_dim = me.act_dim;
  c.low = me.low;
  c.high = me.high;
  c.hidden = config.actor_hidden;
  c.activation = actor.net().activation();
  if (config.kind == LearnerKind::kDiffusion) {
    c.betas = actor.diffusion().schedule().betas();
  }
  c.params = actor.net().flatten();
  c.seed = seed;
  c.env_name = spec.name;
  nn::check_finite(c.params, "trained actor parameters");
  auto state = std::make_shared<LearnerState>();
  state->actor_params = c.params;
  state->critic = std::move(critic);
  result.state = std::move(state);
  result.metrics = std::move(metrics);
  return result;
}

PolicyCheckpoint initial_policy(const GameSpec& spec, int side,
                                const BrConfig& config, uint64_t seed,
                                float output_scale) {
  const Side s = describe_side(spec, side);
  DiffusionActor actor(s.actor_in, s.act_dim,
                       config.diffusion.schedule_table(), s.low, s.high,
                       config.actor_hidden);
  Rng rng = seed_stream(seed, streams::kInit);
  actor.init(rng, output_scale);
  PolicyCheckpoint c;
  c.kind = PolicyKind::kDiffusion;
  c.side = side;
  c.team_size = s.team;
  c.obs_dim = s.obs_dim;
  c.act_dim = s.act_dim;
  c.low = s.low;
  c.high = s.high;
  c.hidden = config.actor_hidden;
  c.activation = actor.net().activation();
  c.betas = actor.schedule().betas();
  c.params = actor.net().flatten();
  c.seed = seed;
  c.env_name = spec.name;
  return c;
}

}  // namespace difffp
