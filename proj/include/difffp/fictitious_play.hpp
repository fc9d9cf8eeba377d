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

#ifndef DIFFFP_FICTITIOUS_PLAY_HPP_
#define DIFFFP_FICTITIOUS_PLAY_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "difffp/exploitability.hpp"
#include "difffp/learner.hpp"
#include "difffp/mixture.hpp"

namespace difffp {

struct FpConfig {
  int iterations = 20;
  // Both best responses of an iteration face the mixtures of iteration k.
  bool simultaneous = false;
  // One pool plays both seats; only valid when the seats are identical.
  bool shared_pool = false;
  // Exact grid best responses replace learned ones (one-step 1-D games).
  bool oracle_br = false;
  std::array<BrConfig, kNumSides> br;
  EvalConfig eval;
  bool evaluate = true;
  // Stamped into every checkpoint.
  uint64_t config_hash = 0;

  void validate() const;
};

struct FpIterationRecord {
  int iteration = 0;
  // Best-response metrics per side; oracle BRs leave them empty.
  std::array<BrMetrics, kNumSides> br;
  std::array<bool, kNumSides> trained{};
  // Grid best-response value per side in oracle mode.
  std::array<std::optional<double>, kNumSides> oracle_value;
  // Size of the opponent pool each side's best response faced.
  std::array<size_t, kNumSides> opponent_pool_size{};
  ExploitabilityReport report;
  double wall_seconds = 0.0;
};

struct FpHistory {
  std::array<PolicyCheckpoint, kNumSides> initial;
  std::array<MixturePolicy, kNumSides> mixtures;
  std::vector<FpIterationRecord> iterations;
};

using FpCallback =
    std::function<void(const FpIterationRecord&, const FpHistory&)>;

// Fictitious play: at iteration k every side best-responds to the other
// side's current mixture (uniform over its best responses 0..k-1, or the
// random initial policy at k = 0), then joins its response to its own
// mixture. Sides go ego first unless `simultaneous` is set.
FpHistory run_fictitious_play(const Env& env, const FpConfig& config,
                              uint64_t seed,
                              const FpCallback& on_iteration = {});

// Seed of the best response trained for `side` at iteration k.
uint64_t best_response_seed(uint64_t seed, int iteration, int side);
// Seed of the evaluation after iteration k.
uint64_t evaluation_seed(uint64_t seed, int iteration);

}  // namespace difffp

#endif  // DIFFFP_FICTITIOUS_PLAY_HPP_
