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

#ifndef DIFFFP_RUNNER_HPP_
#define DIFFFP_RUNNER_HPP_

#include <array>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "difffp/config.hpp"
#include "difffp/exploitability.hpp"
#include "difffp/mixture.hpp"

namespace difffp {

// Process exit codes of the command-line tool.
namespace exit_codes {
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kConfig = 2;
inline constexpr int kNumeric = 3;
inline constexpr int kMissingCheckpoint = 4;
inline constexpr int kNotTraceable = 5;
}  // namespace exit_codes

int exit_code_for(const std::exception& error);

// Runs fictitious play and writes <out_root>/runs/<run.name>/ with
// config.txt, manifest.json, metrics.csv, report.json and
// agent<i>/iter<k>.ckpt. Progress lines go to `log` when given.
std::filesystem::path cmd_train(const ExperimentConfig& config,
                                const std::filesystem::path& out_root,
                                std::ostream* log = nullptr);

// Columns of metrics.csv.
inline constexpr const char* kMetricsHeader =
    "iteration,agent,mean_return,actor_loss,critic_loss,eps_ego,eps_opp,"
    "eps_total,wall_seconds";

// A stored run loaded up to some iteration.
struct RunData {
  std::filesystem::path dir;
  ExperimentConfig config;
  int iterations = 0;  // checkpoints available per side
  int iteration = 0;   // last iteration included in the mixtures
  std::array<MixturePolicy, kNumSides> mixtures;
};

// Loads agent<i>/iter0..iter<iteration>.ckpt (default: the last complete
// iteration). Throws MissingCheckpointError for absent files or iterations.
RunData load_run(const std::filesystem::path& run_dir,
                 std::optional<int> iteration = std::nullopt);

// Accepts an existing directory or the name of a run under <out_root>/runs.
std::filesystem::path resolve_run(const std::string& run,
                                  const std::filesystem::path& out_root);

struct ExploitOptions {
  std::optional<int> iteration;
  std::optional<OracleKind> oracle;
  std::optional<int> episodes;
  std::optional<int> br_steps;
  std::optional<int> grid_n;
  std::optional<uint64_t> seed;
};

// Measures the exploitability of a stored profile and writes it as JSON to
// `report_path`.
ExploitabilityReport cmd_exploit(const std::filesystem::path& run_dir,
                                 const ExploitOptions& options,
                                 const std::filesystem::path& report_path);

struct TournamentOptions {
  // Run directories, checkpoint files, or glob patterns over either.
  std::vector<std::string> entries;
  // Taken from the first run entry when empty.
  std::string env_name;
  envs::EnvOverrides env;
  int episodes = 100;
  uint64_t seed = 0;
  bool self_play = false;
  std::filesystem::path csv_path = "crossplay.csv";
  std::filesystem::path summary_path = "crossplay_summary.json";
};

CrossPlayTable cmd_tournament(const TournamentOptions& options);

struct TraceOptions {
  std::optional<int> iteration;
  int episodes = 1;
  std::optional<uint64_t> seed;
  std::filesystem::path output;
};

// Replays seeded episodes between the stored mixtures and writes one CSV row
// per (step, agent). Returns the number of data rows.
int cmd_trace(const std::filesystem::path& run_dir,
              const TraceOptions& options);

}  // namespace difffp

#endif  // DIFFFP_RUNNER_HPP_
