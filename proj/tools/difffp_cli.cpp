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

// Command-line front end: train, exploit, tournament, trace.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "difffp/errors.hpp"
#include "difffp/io.hpp"
#include "difffp/runner.hpp"

namespace fs = std::filesystem;

namespace {

fs::path under(const fs::path& root, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? p : root / p;
}

difffp::envs::EnvOverrides parse_params(
    const std::vector<std::string>& items) {
  difffp::envs::EnvOverrides out;
  for (const std::string& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw difffp::ConfigError("--env-param: expected name=value, got '" +
                                item + "'");
    }
    const std::string name = item.substr(0, eq);
    try {
      out[name] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw difffp::ConfigError("env." + name + ": not a number");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fictitious play with diffusion-policy best responses"};
  app.require_subcommand(1);
  std::string out_root_text;
  app.add_option("--out", out_root_text,
                 "Root directory for runs and outputs (default: run.out "
                 "from the config for train, else the current directory)");

  auto* train = app.add_subcommand("train", "Run fictitious play from a config");
  std::string config_path;
  train->add_option("config", config_path, "key=value config file")
      ->required();

  auto* exploit = app.add_subcommand(
      "exploit", "Measure exploitability of a stored profile");
  std::string exploit_run, oracle, report_path;
  std::optional<int> exploit_iter, episodes, br_steps, grid_n;
  std::optional<uint64_t> exploit_seed;
  exploit->add_option("run", exploit_run, "Run directory or run name")
      ->required();
  exploit->add_option("--iteration", exploit_iter, "Last FP iteration");
  exploit->add_option("--oracle", oracle, "grid or rl")
      ->check(CLI::IsMember({"grid", "rl"}));
  exploit->add_option("--episodes", episodes, "Episodes per estimate");
  exploit->add_option("--br-steps", br_steps, "RL oracle budget");
  exploit->add_option("--grid-n", grid_n, "Grid oracle resolution");
  exploit->add_option("--seed", exploit_seed, "Evaluation seed");
  exploit->add_option("--report", report_path,
                      "Output path (default <run>/exploit_iter<k>.json)");

  auto* tournament = app.add_subcommand(
      "tournament", "Cross-play every ordered pair of models");
  difffp::TournamentOptions tour;
  std::vector<std::string> env_params;
  std::string csv_path = "crossplay.csv";
  std::string summary_path = "crossplay_summary.json";
  tournament->add_option("entries", tour.entries,
                         "Run directories, checkpoints, or glob patterns")
      ->required();
  tournament->add_option("--env", tour.env_name, "Environment name");
  tournament->add_option("--env-param", env_params,
                         "Environment parameter name=value");
  tournament->add_option("--episodes", tour.episodes, "Episodes per pair");
  tournament->add_option("--seed", tour.seed, "Seed");
  tournament->add_flag("--self-play", tour.self_play,
                       "Also play every model against itself");
  tournament->add_option("--csv", csv_path, "Table path under --out");
  tournament->add_option("--summary", summary_path,
                         "Summary JSON path under --out");

  auto* trace = app.add_subcommand("trace", "Dump per-step trajectories");
  std::string trace_run, trace_output;
  difffp::TraceOptions trace_options;
  trace->add_option("run", trace_run, "Run directory or run name")
      ->required();
  trace->add_option("--iteration", trace_options.iteration,
                    "Last FP iteration");
  trace->add_option("--episodes", trace_options.episodes, "Episodes");
  trace->add_option("--seed", trace_options.seed, "Seed");
  trace->add_option("--output", trace_output,
                    "CSV path (default <run>/trace_iter<k>.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return difffp::exit_codes::kConfig;
  }

  try {
    const fs::path cwd_root = out_root_text.empty() ? fs::path(".")
                                                    : fs::path(out_root_text);
    if (*train) {
      const difffp::ExperimentConfig config = difffp::ExperimentConfig::parse(
          difffp::read_file_text(config_path));
      const fs::path root =
          out_root_text.empty() ? fs::path(config.run_out) : cwd_root;
      const fs::path dir = difffp::cmd_train(config, root, &std::cout);
      std::cout << "run written to " << dir.string() << "\n";
    } else if (*exploit) {
      const fs::path run = difffp::resolve_run(exploit_run, cwd_root);
      difffp::ExploitOptions options;
      options.iteration = exploit_iter;
      if (!oracle.empty()) {
        options.oracle = difffp::oracle_kind_from_name(oracle);
      }
      options.episodes = episodes;
      options.br_steps = br_steps;
      options.grid_n = grid_n;
      options.seed = exploit_seed;
      const int iteration =
          difffp::load_run(run, exploit_iter).iteration;
      const fs::path path =
          report_path.empty()
              ? run / ("exploit_iter" + std::to_string(iteration) + ".json")
              : under(cwd_root, report_path);
      const difffp::ExploitabilityReport report =
          difffp::cmd_exploit(run, options, path);
      std::cout << "eps_ego " << report.epsilon[0] << ", eps_opp "
                << report.epsilon[1] << ", total " << report.total
                << "\nreport written to " << path.string() << "\n";
    } else if (*tournament) {
      tour.env = parse_params(env_params);
      tour.csv_path = under(cwd_root, csv_path);
      tour.summary_path = under(cwd_root, summary_path);
      const difffp::CrossPlayTable table = difffp::cmd_tournament(tour);
      std::cout << table.to_csv() << "table written to "
                << tour.csv_path.string() << "\n";
    } else if (*trace) {
      const fs::path run = difffp::resolve_run(trace_run, cwd_root);
      if (trace_output.empty()) {
        const int iteration =
            difffp::load_run(run, trace_options.iteration).iteration;
        trace_options.output =
            run / ("trace_iter" + std::to_string(iteration) + ".csv");
      } else {
        trace_options.output = under(cwd_root, trace_output);
      }
      const int rows = difffp::cmd_trace(run, trace_options);
      std::cout << rows << " rows written to "
                << trace_options.output.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return difffp::exit_code_for(e);
  }
  return difffp::exit_codes::kOk;
}
