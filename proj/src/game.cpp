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

#include "difffp/game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "difffp/errors.hpp"
#include "difffp/parallel.hpp"

namespace difffp {

std::string_view outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::kNone: return "none";
    case Outcome::kEgoWin: return "ego_win";
    case Outcome::kOppWin: return "opp_win";
    case Outcome::kDraw: return "draw";
  }
  return "none";
}

void GameSpec::validate() const {
  auto fail = [&](const std::string& what) {
    throw ConfigError("game '" + name + "': " + what);
  };
  if (num_agents <= 0) fail("num_agents must be positive");
  const auto n = static_cast<size_t>(num_agents);
  if (side.size() != n || obs_dim.size() != n || act_dim.size() != n ||
      action_low.size() != n || action_high.size() != n) {
    fail("per-agent tables must have num_agents entries");
  }
  for (size_t i = 0; i < n; ++i) {
    if (side[i] != kEgoSide && side[i] != kOppSide) fail("side must be 0 or 1");
    if (obs_dim[i] <= 0) fail("obs_dim must be positive");
    if (act_dim[i] <= 0) fail("act_dim must be positive");
    if (action_low[i].size() != static_cast<size_t>(act_dim[i]) ||
        action_high[i].size() != static_cast<size_t>(act_dim[i])) {
      fail("action bounds must match act_dim");
    }
    for (int d = 0; d < act_dim[i]; ++d) {
      if (!(action_low[i][d] < action_high[i][d])) {
        fail("action_low must be below action_high");
      }
    }
  }
  if (team_size(kEgoSide) == 0 || team_size(kOppSide) == 0) {
    fail("both sides need at least one agent");
  }
  if (horizon <= 0) fail("horizon must be positive");
  if (!(discount > 0.0 && discount <= 1.0)) fail("discount must be in (0, 1]");
  if (!(reward_min <= reward_max)) fail("reward_min must not exceed reward_max");
  if (!(payoff_scale > 0.0)) fail("payoff_scale must be positive");
}

std::vector<int> GameSpec::members(int side_index) const {
  std::vector<int> out;
  for (int i = 0; i < num_agents; ++i) {
    if (side[i] == side_index) out.push_back(i);
  }
  return out;
}

int GameSpec::team_size(int side_index) const {
  return static_cast<int>(std::count(side.begin(), side.end(), side_index));
}

double EpisodeResult::side_return(const GameSpec& spec, int side_index,
                                  bool discounted) const {
  const auto& values = discounted ? returns : raw_returns;
  double total = 0.0;
  for (int i = 0; i < spec.num_agents; ++i) {
    if (spec.side[i] == side_index) total += values[i];
  }
  return total;
}

std::array<double, 2> Env::position(int) const {
  throw NotTraceableError("environment '" + spec().name +
                          "' has no positional state");
}

void ConstantPolicy::act(int, std::span<const float>, Rng&,
                         std::span<float> action) const {
  if (action.size() != action_.size()) {
    throw ConfigError("constant policy action size mismatch");
  }
  std::copy(action_.begin(), action_.end(), action.begin());
}

void check_policy_fits(const GameSpec& spec, int side_index,
                       const Policy& policy) {
  const PolicySignature sig = policy.signature();
  const std::vector<int> members = spec.members(side_index);
  auto fail = [&](const std::string& what) {
    std::ostringstream msg;
    msg << "policy for side " << side_index << " of '" << spec.name
        << "': " << what;
    throw ConfigError(msg.str());
  };
  if (sig.team_size >= 0 && sig.team_size != static_cast<int>(members.size())) {
    fail("team size " + std::to_string(sig.team_size) + " != " +
         std::to_string(members.size()));
  }
  for (int agent : members) {
    if (sig.obs_dim >= 0 && sig.obs_dim != spec.obs_dim[agent]) {
      fail("observation dimension " + std::to_string(sig.obs_dim) + " != " +
           std::to_string(spec.obs_dim[agent]) + " (agent " +
           std::to_string(agent) + ")");
    }
    if (sig.act_dim >= 0 && sig.act_dim != spec.act_dim[agent]) {
      fail("action dimension " + std::to_string(sig.act_dim) + " != " +
           std::to_string(spec.act_dim[agent]) + " (agent " +
           std::to_string(agent) + ")");
    }
  }
}

double selection_uniform(uint64_t episode_seed, int side_index) {
  Rng rng = seed_stream(episode_seed, streams::kSelect + side_index);
  return uniform_sample(rng);
}

Rollout rollout(Env& env, std::span<const Policy* const> policies,
                uint64_t seed, const RolloutOptions& options) {
  const GameSpec& spec = env.spec();
  if (policies.size() != static_cast<size_t>(kNumSides)) {
    throw ConfigError("rollout needs one policy per side");
  }
  for (int s = 0; s < kNumSides; ++s) {
    if (policies[s] == nullptr) throw ConfigError("null policy");
    check_policy_fits(spec, s, *policies[s]);
  }

  std::array<const Policy*, kNumSides> pure{};
  std::array<Rng, kNumSides> rngs;
  for (int s = 0; s < kNumSides; ++s) {
    const double u = options.selection ? (*options.selection)[s]
                                       : selection_uniform(seed, s);
    pure[s] = &policies[s]->select(u);
    rngs[s] = seed_stream(seed, streams::kAct + s);
  }
  std::vector<int> member_index(spec.num_agents);
  {
    std::array<int, kNumSides> counter{};
    for (int i = 0; i < spec.num_agents; ++i) {
      member_index[i] = counter[spec.side[i]]++;
    }
  }

  Rollout out;
  EpisodeResult& result = out.result;
  result.returns.assign(spec.num_agents, 0.0);
  result.raw_returns.assign(spec.num_agents, 0.0);

  JointObservation obs = env.reset(seed);
  JointAction actions(spec.num_agents);
  for (int i = 0; i < spec.num_agents; ++i) actions[i].resize(spec.act_dim[i]);

  double weight = 1.0;
  while (true) {
    for (int i = 0; i < spec.num_agents; ++i) {
      const int s = spec.side[i];
      pure[s]->act(member_index[i], obs[i], rngs[s], actions[i]);
      for (int d = 0; d < spec.act_dim[i]; ++d) {
        float& a = actions[i][d];
        if (!std::isfinite(a)) {
          throw NumericError("policy for agent " + std::to_string(i) +
                             " (side " + std::to_string(s) +
                             ") produced a non-finite action");
        }
        a = std::clamp(a, spec.action_low[i][d], spec.action_high[i][d]);
      }
    }
    StepResult step = env.step(actions);
    if (options.on_step) options.on_step(env, actions, step);
    for (int i = 0; i < spec.num_agents; ++i) {
      result.returns[i] += weight * step.rewards[i];
      result.raw_returns[i] += step.rewards[i];
    }
    weight *= spec.discount;
    ++result.length;
    const bool done = step.terminated || step.truncated;
    if (options.record) {
      Transition t;
      t.obs = obs;
      t.joint_action = actions;
      t.rewards = step.rewards;
      t.next_obs = step.obs;
      t.terminated = step.terminated;
      t.truncated = step.truncated;
      out.transitions.push_back(std::move(t));
    }
    obs = std::move(step.obs);
    if (done) {
      result.outcome = step.outcome;
      break;
    }
    if (result.length >= spec.horizon) {
      throw ConfigError("environment '" + spec.name +
                        "' ran past its horizon without truncating");
    }
  }
  return out;
}

PayoffEstimate estimate_payoff(const Env& env,
                               std::span<const Policy* const> policies,
                               int num_episodes, uint64_t seed,
                               const PayoffOptions& options) {
  if (num_episodes < 1) throw ConfigError("num_episodes must be >= 1");
  const GameSpec& spec = env.spec();
  const auto n = static_cast<size_t>(num_episodes);

  std::array<std::vector<size_t>, kNumSides> strata;
  if (options.stratified) {
    for (int s = 0; s < kNumSides; ++s) {
      strata[s].resize(n);
      std::iota(strata[s].begin(), strata[s].end(), size_t{0});
      Rng rng = seed_stream(seed, streams::kStrata + s);
      std::shuffle(strata[s].begin(), strata[s].end(), rng);
    }
  }

  std::vector<EpisodeResult> results(n);
  parallel_for(n, [&](int, size_t begin, size_t end) {
    std::unique_ptr<Env> local = env.clone();
    for (size_t j = begin; j < end; ++j) {
      const uint64_t episode_seed = seed + j;
      std::array<double, kNumSides> u{};
      for (int s = 0; s < kNumSides; ++s) {
        u[s] = selection_uniform(episode_seed, s);
        if (options.stratified) {
          u[s] = (static_cast<double>(strata[s][j]) + u[s]) /
                 static_cast<double>(n);
        }
      }
      RolloutOptions ro;
      ro.selection = u;
      results[j] = rollout(*local, policies, episode_seed, ro).result;
    }
  });

  PayoffEstimate est;
  est.episodes = num_episodes;
  est.mean.assign(spec.num_agents, 0.0);
  est.std_error.assign(spec.num_agents, 0.0);
  auto value = [&](const EpisodeResult& r, int agent) {
    return (options.discounted ? r.returns[agent] : r.raw_returns[agent]) /
           spec.payoff_scale;
  };
  auto summarize = [&](auto&& sample, double& mean, double& se) {
    double sum = 0.0;
    for (size_t j = 0; j < n; ++j) sum += sample(j);
    mean = sum / static_cast<double>(n);
    if (n > 1) {
      double sq = 0.0;
      for (size_t j = 0; j < n; ++j) {
        const double d = sample(j) - mean;
        sq += d * d;
      }
      se = std::sqrt(sq / static_cast<double>(n - 1) / static_cast<double>(n));
    } else {
      se = 0.0;
    }
  };
  for (int i = 0; i < spec.num_agents; ++i) {
    summarize([&](size_t j) { return value(results[j], i); }, est.mean[i],
              est.std_error[i]);
  }
  for (int s = 0; s < kNumSides; ++s) {
    summarize(
        [&](size_t j) {
          double total = 0.0;
          for (int i = 0; i < spec.num_agents; ++i) {
            if (spec.side[i] == s) total += value(results[j], i);
          }
          return total;
        },
        est.side_mean[s], est.side_std_error[s]);
  }
  est.lengths.reserve(n);
  for (const auto& r : results) {
    ++est.outcome_counts[static_cast<int>(r.outcome)];
    est.lengths.push_back(r.length);
  }
  return est;
}

}  // namespace difffp
