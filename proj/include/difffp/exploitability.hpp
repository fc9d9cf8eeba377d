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

#ifndef DIFFFP_EXPLOITABILITY_HPP_
#define DIFFFP_EXPLOITABILITY_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "difffp/game.hpp"
#include "difffp/learner.hpp"

namespace difffp {

enum class OracleKind { kGrid, kRl };

const char* oracle_kind_name(OracleKind kind);
OracleKind oracle_kind_from_name(const std::string& name);

struct EvalConfig {
  int episodes = 100;
  OracleKind oracle = OracleKind::kGrid;
  // Environment steps for rl-oracle best responses; <= 0 reuses the
  // training budget.
  int br_steps = 0;
  int grid_n = 41;
  bool discounted = false;
  bool stratified = true;

  void validate() const;
  PayoffOptions payoff_options() const { return {discounted, stratified}; }
};

struct ExploitabilityReport {
  OracleKind oracle = OracleKind::kGrid;
  int episodes = 0;
  std::array<double, kNumSides> epsilon{};
  std::array<double, kNumSides> br_payoff{};
  std::array<double, kNumSides> profile_payoff{};
  // 1.96 * sqrt(se_br^2 + se_profile^2).
  std::array<double, kNumSides> half_width{};
  double total = 0.0;
  // Grid oracle only: the maximizing action per side.
  std::array<double, kNumSides> br_action{};
  std::vector<std::string> warnings;

  std::string to_json() const;
};

// Per side i: best-response payoff against the frozen other side minus the
// profile payoff, both as normalized side returns over `episodes` episodes.
// The rl oracle trains with `br_config` (env_steps replaced by
// eval.br_steps when positive) and yields a lower bound.
ExploitabilityReport measure_exploitability(
    const Env& env, const std::array<const Policy*, kNumSides>& profile,
    const EvalConfig& eval, uint64_t seed,
    const std::array<BrConfig, kNumSides>& br_config = {});

// A named participant of a tournament. A seat is null when the model cannot
// play it.
struct CrossPlayEntry {
  std::string name;
  std::array<std::shared_ptr<const Policy>, kNumSides> seats;
};

struct CrossPlayCell {
  int wins = 0;    // row entry (ego seat) wins
  int draws = 0;   // draws and undecided episodes
  int losses = 0;
  double mean_payoff = 0.0;  // ego-side normalized return
};

struct CrossPlayTable {
  std::vector<std::string> names;
  int episodes = 0;
  // cells[i][j]: entry i as ego against entry j as opponent; empty on the
  // diagonal unless self-play was requested.
  std::vector<std::vector<std::optional<CrossPlayCell>>> cells;

  int pair_count() const;
  // Rows: ego entry; columns: opponent entry; cells "W/D/L mean".
  std::string to_csv() const;
  // Per-entry totals over both seats.
  std::string summary_json() const;
};

CrossPlayTable cross_play(const Env& env,
                          const std::vector<CrossPlayEntry>& entries,
                          int episodes, uint64_t seed, bool self_play = false,
                          const PayoffOptions& options = {});

}  // namespace difffp

#endif  // DIFFFP_EXPLOITABILITY_HPP_
