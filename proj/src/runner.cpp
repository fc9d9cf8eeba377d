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

#include "difffp/runner.hpp"

#include <glob.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "difffp/checkpoint.hpp"
#include "difffp/errors.hpp"
#include "difffp/fictitious_play.hpp"
#include "difffp/io.hpp"

namespace difffp {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error)) return exit_codes::kConfig;
  if (dynamic_cast<const NumericError*>(&error)) return exit_codes::kNumeric;
  if (dynamic_cast<const MissingCheckpointError*>(&error) ||
      dynamic_cast<const CheckpointFormatError*>(&error)) {
    return exit_codes::kMissingCheckpoint;
  }
  if (dynamic_cast<const NotTraceableError*>(&error)) {
    return exit_codes::kNotTraceable;
  }
  return exit_codes::kFailure;
}

namespace {

std::string number(double v) {
  char buf[64];
  char* ptr = std::to_chars(buf, buf + sizeof(buf), v).ptr;
  return std::string(buf, ptr);
}

std::string number(float v) {
  char buf[64];
  char* ptr = std::to_chars(buf, buf + sizeof(buf), v).ptr;
  return std::string(buf, ptr);
}

std::string seconds(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

fs::path checkpoint_path(const fs::path& run_dir, int side, int iteration) {
  return run_dir / ("agent" + std::to_string(side)) /
         ("iter" + std::to_string(iteration) + ".ckpt");
}

std::string metrics_rows(const FpIterationRecord& r) {
  std::string out;
  for (int side = 0; side < kNumSides; ++side) {
    const BrMetrics& m = r.br[side];
    out += std::to_string(r.iteration) + "," + std::to_string(side) + ",";
    if (r.trained[side]) {
      out += number(m.mean_return) + "," + number(m.actor_loss) + "," +
             number(m.critic_loss);
    } else if (r.oracle_value[side]) {
      out += number(*r.oracle_value[side]) + ",,";
    } else {
      out += ",,";
    }
    out += ",,,,\n";
  }
  out += std::to_string(r.iteration) + ",eval,,,," +
         number(r.report.epsilon[0]) + "," + number(r.report.epsilon[1]) +
         "," + number(r.report.total) + "," + seconds(r.wall_seconds) + "\n";
  return out;
}

json pool_json(const fs::path& run_dir, const MixturePolicy& mixture,
               int side) {
  json pool = json::array();
  for (size_t i = 0; i < mixture.size(); ++i) {
    const PolicyCheckpoint& c = mixture.checkpoint(i);
    pool.push_back(
        {{"iteration", c.fp_iteration},
         {"file", fs::relative(checkpoint_path(run_dir, side, c.fp_iteration),
                               run_dir)
                      .generic_string()},
         {"weight", mixture.weights()[i]},
         {"kind", policy_kind_name(c.kind)},
         {"hash", hex64(c.content_hash())}});
  }
  return pool;
}

std::vector<std::string> expand(const std::string& pattern) {
  if (pattern.find_first_of("*?[") == std::string::npos) return {pattern};
  glob_t g{};
  std::vector<std::string> out;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
    for (size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  }
  ::globfree(&g);
  if (out.empty()) throw ConfigError("no files match '" + pattern + "'");
  std::sort(out.begin(), out.end());
  return out;
}

ExperimentConfig read_run_config(const fs::path& run_dir) {
  const fs::path path = run_dir / "config.txt";
  if (!fs::exists(path)) {
    throw MissingCheckpointError("'" + run_dir.string() +
                                 "' is not a run directory (no config.txt)");
  }
  return ExperimentConfig::parse(read_file_text(path));
}

}  // namespace

fs::path cmd_train(const ExperimentConfig& config, const fs::path& out_root,
                   std::ostream* log) {
  config.validate();
  const auto env = envs::make_env(config.env_name, config.env);
  const fs::path run_dir = out_root / "runs" / config.run_name;
  fs::create_directories(run_dir);
  for (int side = 0; side < kNumSides; ++side) {
    fs::remove_all(run_dir / ("agent" + std::to_string(side)));
  }
  for (const char* stale : {"metrics.csv", "manifest.json", "report.json"}) {
    fs::remove(run_dir / stale);
  }
  write_file_atomic(run_dir / "config.txt", config.serialize());

  const FpConfig fp = config.fp_config();
  std::string metrics = std::string(kMetricsHeader) + "\n";
  std::vector<double> trace;

  auto write_manifest = [&](const FpHistory& history, int completed) {
    json manifest;
    manifest["env"] = config.env_name;
    manifest["env_params"] = config.env;
    manifest["seed"] = config.seed;
    manifest["config_hash"] = hex64(fp.config_hash);
    manifest["iterations"] = completed;
    manifest["shared_pool"] = config.shared_pool;
    json agents = json::array();
    for (int side = 0; side < kNumSides; ++side) {
      agents.push_back(
          {{"agent", side},
           {"initial", "agent" + std::to_string(side) + "/init.ckpt"},
           {"pool", pool_json(run_dir, history.mixtures[side], side)}});
    }
    manifest["agents"] = agents;
    write_file_atomic(run_dir / "manifest.json", manifest.dump(2) + "\n");
  };

  bool saved_initial = false;
  const FpCallback on_iteration = [&](const FpIterationRecord& record,
                                      const FpHistory& history) {
    if (!saved_initial) {
      for (int side = 0; side < kNumSides; ++side) {
        save_checkpoint(run_dir / ("agent" + std::to_string(side)) /
                            "init.ckpt",
                        history.initial[side]);
      }
      saved_initial = true;
    }
    for (int side = 0; side < kNumSides; ++side) {
      const MixturePolicy& mix = history.mixtures[side];
      save_checkpoint(checkpoint_path(run_dir, side, record.iteration),
                      mix.checkpoint(mix.size() - 1));
    }
    metrics += metrics_rows(record);
    write_file_atomic(run_dir / "metrics.csv", metrics);
    write_manifest(history, record.iteration + 1);
    trace.push_back(record.report.total);
    if (log != nullptr) {
      *log << "iteration " << record.iteration << ": eps_ego "
           << record.report.epsilon[0] << ", eps_opp "
           << record.report.epsilon[1] << ", total " << record.report.total
           << " (" << seconds(record.wall_seconds) << " s)" << std::endl;
    }
  };

  const FpHistory history =
      run_fictitious_play(*env, fp, config.seed, on_iteration);
  json report = json::parse(history.iterations.back().report.to_json());
  report["iteration"] = history.iterations.back().iteration;
  report["eps_total_trace"] = trace;
  write_file_atomic(run_dir / "report.json", report.dump(2) + "\n");
  return run_dir;
}

fs::path resolve_run(const std::string& run, const fs::path& out_root) {
  const fs::path direct(run);
  if (fs::is_directory(direct)) return direct;
  const fs::path named = out_root / "runs" / run;
  if (fs::is_directory(named)) return named;
  throw MissingCheckpointError("no run directory '" + run + "'");
}

RunData load_run(const fs::path& run_dir, std::optional<int> iteration) {
  RunData data;
  data.dir = run_dir;
  data.config = read_run_config(run_dir);
  int available = 0;
  while (fs::exists(checkpoint_path(run_dir, kEgoSide, available)) &&
         fs::exists(checkpoint_path(run_dir, kOppSide, available))) {
    ++available;
  }
  data.iterations = available;
  const int last = iteration.value_or(available - 1);
  if (available == 0 || last < 0 || last >= available) {
    throw MissingCheckpointError(
        "iteration " + std::to_string(last) + " not available in '" +
        run_dir.string() + "' (" + std::to_string(available) +
        " complete iterations)");
  }
  data.iteration = last;
  for (int side = 0; side < kNumSides; ++side) {
    for (int k = 0; k <= last; ++k) {
      PolicyCheckpoint c = load_checkpoint(checkpoint_path(run_dir, side, k));
      c.fp_iteration = k;
      data.mixtures[side] = mixture_update(data.mixtures[side], std::move(c));
    }
  }
  return data;
}

ExploitabilityReport cmd_exploit(const fs::path& run_dir,
                                 const ExploitOptions& options,
                                 const fs::path& report_path) {
  const RunData run = load_run(run_dir, options.iteration);
  EvalConfig eval = run.config.eval;
  if (options.oracle) eval.oracle = *options.oracle;
  if (options.episodes) eval.episodes = *options.episodes;
  if (options.br_steps) eval.br_steps = *options.br_steps;
  if (options.grid_n) eval.grid_n = *options.grid_n;
  const auto env = envs::make_env(run.config.env_name, run.config.env);
  const std::array<const Policy*, kNumSides> profile{&run.mixtures[0],
                                                     &run.mixtures[1]};
  const uint64_t seed = options.seed.value_or(
      evaluation_seed(run.config.seed, run.iteration));
  const ExploitabilityReport report =
      measure_exploitability(*env, profile, eval, seed, run.config.br);
  json out = json::parse(report.to_json());
  out["iteration"] = run.iteration;
  out["run"] = run_dir.filename().string();
  write_file_atomic(report_path, out.dump(2) + "\n");
  return report;
}

CrossPlayTable cmd_tournament(const TournamentOptions& options) {
  std::vector<std::string> paths;
  for (const std::string& e : options.entries) {
    for (std::string& p : expand(e)) paths.push_back(std::move(p));
  }
  if (paths.size() < 2 && !(options.self_play && paths.size() == 1)) {
    throw ConfigError("tournament: at least two entries are required");
  }
  std::string env_name = options.env_name;
  envs::EnvOverrides env_params = options.env;
  struct Loaded {
    std::string name;
    std::optional<RunData> run;
    std::shared_ptr<const Policy> policy;
  };
  std::vector<Loaded> loaded;
  for (const std::string& p : paths) {
    const fs::path path(p);
    Loaded l;
    if (fs::is_directory(path)) {
      l.run = load_run(path);
      l.name = path.filename().string();
      if (env_name.empty()) {
        env_name = l.run->config.env_name;
        env_params = l.run->config.env;
      }
    } else {
      l.policy = load_checkpoint(path).instantiate();
      l.name = (path.parent_path().filename() / path.stem()).generic_string();
    }
    loaded.push_back(std::move(l));
  }
  if (env_name.empty()) {
    throw ConfigError("--env: required when no run directory is given");
  }
  const auto env = envs::make_env(env_name, env_params);
  std::vector<CrossPlayEntry> entries;
  for (const Loaded& l : loaded) {
    CrossPlayEntry e;
    e.name = l.name;
    for (int side = 0; side < kNumSides; ++side) {
      if (l.run) {
        e.seats[side] =
            std::make_shared<MixturePolicy>(l.run->mixtures[side]);
      } else {
        try {
          check_policy_fits(env->spec(), side, *l.policy);
          e.seats[side] = l.policy;
        } catch (const ConfigError&) {
        }
      }
    }
    entries.push_back(std::move(e));
  }
  const CrossPlayTable table = cross_play(*env, entries, options.episodes,
                                          options.seed, options.self_play);
  write_file_atomic(options.csv_path, table.to_csv());
  write_file_atomic(options.summary_path, table.summary_json());
  return table;
}

int cmd_trace(const fs::path& run_dir, const TraceOptions& options) {
  const ExperimentConfig config = read_run_config(run_dir);
  const auto env = envs::make_env(config.env_name, config.env);
  if (!env->traceable()) {
    throw NotTraceableError("environment '" + config.env_name +
                            "' has no positional state to trace");
  }
  if (options.episodes < 1) throw ConfigError("--episodes: must be >= 1");
  const RunData run = load_run(run_dir, options.iteration);
  const GameSpec& spec = env->spec();
  const int max_act =
      *std::max_element(spec.act_dim.begin(), spec.act_dim.end());
  std::ostringstream csv;
  csv << "episode,step,agent,x,y";
  for (int d = 0; d < max_act; ++d) csv << ",action_" << d;
  csv << ",reward\n";
  int rows = 0;
  const uint64_t seed = options.seed.value_or(config.seed);
  const std::array<const Policy*, kNumSides> profile{&run.mixtures[0],
                                                     &run.mixtures[1]};
  for (int e = 0; e < options.episodes; ++e) {
    int step = 0;
    RolloutOptions ro;
    ro.on_step = [&](const Env& state, const JointAction& actions,
                     const StepResult& result) {
      for (int agent = 0; agent < spec.num_agents; ++agent) {
        const auto pos = state.position(agent);
        csv << e << ',' << step << ',' << agent << ',' << number(pos[0])
            << ',' << number(pos[1]);
        for (int d = 0; d < max_act; ++d) {
          csv << ',';
          if (d < spec.act_dim[agent]) csv << number(actions[agent][d]);
        }
        csv << ',' << number(result.rewards[agent]) << '\n';
        ++rows;
      }
      ++step;
    };
    rollout(*env, profile, seed + static_cast<uint64_t>(e), ro);
  }
  write_file_atomic(options.output, csv.str());
  return rows;
}

}  // namespace difffp
