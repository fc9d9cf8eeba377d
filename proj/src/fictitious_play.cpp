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

#include "difffp/fictitious_play.hpp"

#include <chrono>
#include <memory>

#include "difffp/envs.hpp"
#include "difffp/errors.hpp"

namespace difffp {

void FpConfig::validate() const {
  if (iterations < 1) throw ConfigError("fp.iterations: must be >= 1");
  for (const BrConfig& b : br) b.validate();
  eval.validate();
}

uint64_t best_response_seed(uint64_t seed, int iteration, int side) {
  return derive_seed(seed, 1000 + 2 * static_cast<uint64_t>(iteration) +
                               static_cast<uint64_t>(side));
}

uint64_t evaluation_seed(uint64_t seed, int iteration) {
  return derive_seed(seed, 1000000 + static_cast<uint64_t>(iteration));
}

namespace {

template <class Fn>
auto with_context(int iteration, int side, Fn&& fn) {
  const std::string where = "fp iteration " + std::to_string(iteration) +
                            ", agent " + std::to_string(side) + ": ";
  try {
    return fn();
  } catch (const NumericError& e) {
    throw NumericError(where + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(where + e.what());
  }
}

void check_shared_seats(const GameSpec& spec) {
  const auto ego = spec.members(kEgoSide);
  const auto opp = spec.members(kOppSide);
  if (ego.size() != opp.size() ||
      spec.obs_dim[ego[0]] != spec.obs_dim[opp[0]] ||
      spec.act_dim[ego[0]] != spec.act_dim[opp[0]] ||
      spec.action_low[ego[0]] != spec.action_low[opp[0]] ||
      spec.action_high[ego[0]] != spec.action_high[opp[0]]) {
    throw ConfigError("fp.shared_pool: seats of '" + spec.name +
                      "' are not interchangeable");
  }
}

}  // namespace

FpHistory run_fictitious_play(const Env& env, const FpConfig& config,
                              uint64_t seed, const FpCallback& on_iteration) {
  config.validate();
  const GameSpec& spec = env.spec();
  if (config.shared_pool) check_shared_seats(spec);
  if (config.oracle_br || (config.evaluate &&
                           config.eval.oracle == OracleKind::kGrid)) {
    for (int side = 0; side < kNumSides; ++side) {
      if (!envs::supports_grid_oracle(spec, side)) {
        throw ConfigError("grid oracle unsupported by '" + spec.name + "'");
      }
    }
  }

  FpHistory history;
  std::array<std::shared_ptr<const Policy>, kNumSides> initial_policies;
  for (int side = 0; side < kNumSides; ++side) {
    history.initial[side] = initial_policy(spec, side, config.br[side],
                                           derive_seed(seed, 10 + side));
    history.initial[side].config_hash = config.config_hash;
    initial_policies[side] = history.initial[side].instantiate();
  }
  std::array<std::shared_ptr<const LearnerState>, kNumSides> warm{};

  auto current = [&](int side) -> const Policy& {
    const int pool = config.shared_pool ? kEgoSide : side;
    if (history.mixtures[pool].empty()) return *initial_policies[side];
    return history.mixtures[pool];
  };

  const int sides_trained = config.shared_pool ? 1 : kNumSides;
  for (int k = 0; k < config.iterations; ++k) {
    const auto start = std::chrono::steady_clock::now();
    FpIterationRecord record;
    record.iteration = k;
    std::array<MixturePolicy, kNumSides> frozen = history.mixtures;
    std::array<std::shared_ptr<const Policy>, kNumSides> frozen_view;
    for (int side = 0; side < sides_trained; ++side) {
      const int other = 1 - side;
      const int other_pool = config.shared_pool ? kEgoSide : other;
      const Policy* opponent = &current(other);
      if (config.simultaneous && !frozen[other_pool].empty()) {
        opponent = &frozen[other_pool];
      } else if (config.simultaneous) {
        opponent = initial_policies[other].get();
      }
      record.opponent_pool_size[side] =
          config.simultaneous ? frozen[other_pool].size()
                              : history.mixtures[other_pool].size();
      const uint64_t br_seed = best_response_seed(seed, k, side);
      PolicyCheckpoint checkpoint = with_context(k, side, [&] {
        if (config.oracle_br) {
          const envs::GridBestResponse grid = envs::oracle_best_response_grid(
              env, side, *opponent, config.eval.grid_n, config.eval.episodes,
              br_seed, config.eval.payoff_options());
          record.oracle_value[side] = grid.best_value;
          PolicyCheckpoint c;
          c.kind = PolicyKind::kConstant;
          c.side = side;
          const int agent = spec.members(side).front();
          c.team_size = 1;
          c.obs_dim = spec.obs_dim[agent];
          c.act_dim = 1;
          c.low = spec.action_low[agent];
          c.high = spec.action_high[agent];
          c.params = {grid.best_action};
          c.seed = br_seed;
          c.env_name = spec.name;
          return c;
        }
        const BrConfig& bc = config.br[side];
        BrResult result =
            train_best_response(env, side, *opponent, bc, br_seed,
                                bc.warm_start ? warm[side].get() : nullptr);
        record.br[side] = std::move(result.metrics);
        record.trained[side] = true;
        warm[side] = result.state;
        return result.checkpoint;
      });
      checkpoint.fp_iteration = k;
      checkpoint.config_hash = config.config_hash;
      const int own_pool = config.shared_pool ? kEgoSide : side;
      history.mixtures[own_pool] =
          mixture_update(history.mixtures[own_pool], std::move(checkpoint));
    }
    if (config.shared_pool) history.mixtures[kOppSide] = history.mixtures[kEgoSide];
    if (config.evaluate) {
      const std::array<const Policy*, kNumSides> profile{
          &history.mixtures[kEgoSide], &history.mixtures[kOppSide]};
      record.report = with_context(k, -1, [&] {
        return measure_exploitability(env, profile, config.eval,
                                      evaluation_seed(seed, k), config.br);
      });
    }
    record.wall_seconds = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start)
                              .count();
    history.iterations.push_back(record);
    if (on_iteration) on_iteration(history.iterations.back(), history);
  }
  return history;
}

}  // namespace difffp
