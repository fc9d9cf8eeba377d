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

#include "difffp/exploitability.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "difffp/envs.hpp"
#include "difffp/errors.hpp"

namespace difffp {

using nlohmann::json;

const char* oracle_kind_name(OracleKind kind) {
  return kind == OracleKind::kGrid ? "grid" : "rl";
}

OracleKind oracle_kind_from_name(const std::string& name) {
  if (name == "grid") return OracleKind::kGrid;
  if (name == "rl") return OracleKind::kRl;
  throw ConfigError("unknown oracle '" + name + "'");
}

void EvalConfig::validate() const {
  if (episodes < 1) throw ConfigError("eval.episodes: must be >= 1");
  if (grid_n < 2) throw ConfigError("eval.grid_n: must be >= 2");
}

std::string ExploitabilityReport::to_json() const {
  json j;
  j["oracle"] = oracle_kind_name(oracle);
  j["episodes"] = episodes;
  j["epsilon"] = {{"ego", epsilon[0]}, {"opp", epsilon[1]}};
  j["total"] = total;
  j["br_payoff"] = {{"ego", br_payoff[0]}, {"opp", br_payoff[1]}};
  j["profile_payoff"] = {{"ego", profile_payoff[0]},
                         {"opp", profile_payoff[1]}};
  j["half_width"] = {{"ego", half_width[0]}, {"opp", half_width[1]}};
  if (oracle == OracleKind::kGrid) {
    j["br_action"] = {{"ego", br_action[0]}, {"opp", br_action[1]}};
  }
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

ExploitabilityReport measure_exploitability(
    const Env& env, const std::array<const Policy*, kNumSides>& profile,
    const EvalConfig& eval, uint64_t seed,
    const std::array<BrConfig, kNumSides>& br_config) {
  eval.validate();
  const PayoffOptions options = eval.payoff_options();
  ExploitabilityReport report;
  report.oracle = eval.oracle;
  report.episodes = eval.episodes;

  const PayoffEstimate base =
      estimate_payoff(env, profile, eval.episodes, seed, options);
  for (int side = 0; side < kNumSides; ++side) {
    const Policy& opponent = *profile[1 - side];
    std::shared_ptr<const Policy> best;
    if (eval.oracle == OracleKind::kGrid) {
      const envs::GridBestResponse grid = envs::oracle_best_response_grid(
          env, side, opponent, eval.grid_n, eval.episodes, seed, options);
      report.br_action[side] = grid.best_action;
      best = std::make_shared<ConstantPolicy>(
          std::vector<float>{grid.best_action});
    } else {
      BrConfig cfg = br_config[side];
      if (eval.br_steps > 0) {
        cfg.env_steps = eval.br_steps;
        cfg.warmup_steps = std::min(cfg.warmup_steps, cfg.env_steps);
      }
      if (cfg.env_steps < cfg.warmup_steps + cfg.batch_size) {
        report.warnings.push_back(
            std::string(side == kEgoSide ? "ego" : "opp") +
            ": rl oracle budget leaves no room for updates");
      }
      const BrResult br = train_best_response(
          env, side, opponent, cfg, derive_seed(seed, 100 + side));
      best = br.checkpoint.instantiate();
    }
    std::array<const Policy*, kNumSides> deviation = profile;
    deviation[side] = best.get();
    const PayoffEstimate dev =
        estimate_payoff(env, deviation, eval.episodes, seed, options);
    report.br_payoff[side] = dev.side_mean[side];
    report.profile_payoff[side] = base.side_mean[side];
    report.epsilon[side] = report.br_payoff[side] - report.profile_payoff[side];
    report.half_width[side] =
        1.96 * std::sqrt(dev.side_std_error[side] * dev.side_std_error[side] +
                         base.side_std_error[side] * base.side_std_error[side]);
  }
  report.total = report.epsilon[0] + report.epsilon[1];
  return report;
}

// ---------------------------------------------------------------- cross-play

int CrossPlayTable::pair_count() const {
  int n = 0;
  for (const auto& row : cells) {
    for (const auto& cell : row) n += cell.has_value() ? 1 : 0;
  }
  return n;
}

std::string CrossPlayTable::to_csv() const {
  std::ostringstream out;
  out << "ego\\opp";
  for (const std::string& n : names) out << ',' << n;
  out << '\n';
  for (size_t i = 0; i < names.size(); ++i) {
    out << names[i];
    for (size_t j = 0; j < names.size(); ++j) {
      out << ',';
      if (const auto& cell = cells[i][j]) {
        char mean[32];
        std::snprintf(mean, sizeof(mean), "%.6f", cell->mean_payoff);
        out << cell->wins << '/' << cell->draws << '/' << cell->losses << ' '
            << mean;
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string CrossPlayTable::summary_json() const {
  json policies = json::array();
  for (size_t i = 0; i < names.size(); ++i) {
    int w = 0, d = 0, l = 0, pairs = 0;
    double payoff = 0.0;
    for (size_t j = 0; j < names.size(); ++j) {
      if (const auto& cell = cells[i][j]) {
        w += cell->wins;
        d += cell->draws;
        l += cell->losses;
        payoff += cell->mean_payoff;
        ++pairs;
      }
      if (i != j) {
        if (const auto& cell = cells[j][i]) {
          w += cell->losses;
          d += cell->draws;
          l += cell->wins;
          payoff -= cell->mean_payoff;
          ++pairs;
        }
      }
    }
    policies.push_back({{"name", names[i]},
                        {"pairs", pairs},
                        {"wins", w},
                        {"draws", d},
                        {"losses", l},
                        {"win_rate", pairs > 0 ? double(w) / (pairs * episodes)
                                               : 0.0},
                        {"mean_payoff", pairs > 0 ? payoff / pairs : 0.0}});
  }
  json j;
  j["episodes"] = episodes;
  j["pairs"] = pair_count();
  j["policies"] = policies;
  return j.dump(2) + "\n";
}

CrossPlayTable cross_play(const Env& env,
                          const std::vector<CrossPlayEntry>& entries,
                          int episodes, uint64_t seed, bool self_play,
                          const PayoffOptions& options) {
  if (episodes < 1) throw ConfigError("cross-play: episodes must be >= 1");
  if (entries.size() < (self_play ? 1u : 2u)) {
    throw ConfigError("cross-play: not enough entries for a table");
  }
  const GameSpec& spec = env.spec();
  CrossPlayTable table;
  table.episodes = episodes;
  const size_t n = entries.size();
  table.cells.assign(n, std::vector<std::optional<CrossPlayCell>>(n));
  for (const CrossPlayEntry& e : entries) table.names.push_back(e.name);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j && !self_play) continue;
      const std::string pair =
          "'" + entries[i].name + "' vs '" + entries[j].name + "'";
      const Policy* ego = entries[i].seats[kEgoSide].get();
      const Policy* opp = entries[j].seats[kOppSide].get();
      if (ego == nullptr || opp == nullptr) {
        throw ConfigError("cross-play " + pair + ": seat not playable");
      }
      try {
        check_policy_fits(spec, kEgoSide, *ego);
        check_policy_fits(spec, kOppSide, *opp);
      } catch (const ConfigError& e) {
        throw ConfigError("cross-play " + pair + ": " + e.what());
      }
      const std::array<const Policy*, kNumSides> profile{ego, opp};
      const PayoffEstimate est =
          estimate_payoff(env, profile, episodes, seed, options);
      CrossPlayCell cell;
      cell.wins = est.outcome_counts[static_cast<int>(Outcome::kEgoWin)];
      cell.losses = est.outcome_counts[static_cast<int>(Outcome::kOppWin)];
      cell.draws = episodes - cell.wins - cell.losses;
      cell.mean_payoff = est.side_mean[kEgoSide];
      table.cells[i][j] = cell;
    }
  }
  return table;
}

}  // namespace difffp
