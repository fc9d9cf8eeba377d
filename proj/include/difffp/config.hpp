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

#ifndef DIFFFP_CONFIG_HPP_
#define DIFFFP_CONFIG_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "difffp/envs.hpp"
#include "difffp/fictitious_play.hpp"

namespace difffp {

// Experiment description read from a flat `key = value` file with dotted
// keys. Lines starting with '#' are comments. Keys under `br.` apply to both
// sides unless given as `br.agent0.<key>` or `br.agent1.<key>`, which take
// precedence.
struct ExperimentConfig {
  std::string env_name;
  envs::EnvOverrides env;
  int iterations = 20;
  bool simultaneous = false;
  bool shared_pool = false;
  bool oracle_br = false;
  std::array<BrConfig, kNumSides> br;
  EvalConfig eval;
  uint64_t seed = 0;
  std::string run_name = "run";
  std::string run_out = ".";

  // Throws ConfigError whose message starts with the offending key.
  static ExperimentConfig parse(const std::string& text);
  // Canonical form: every effective key, sorted, one per line.
  std::string serialize() const;
  uint64_t hash() const;

  void validate() const;
  FpConfig fp_config() const;
};

// Keys accepted by ExperimentConfig::parse besides env.<parameter> and the
// per-agent br overrides.
std::vector<std::string> config_keys();

}  // namespace difffp

#endif  // DIFFFP_CONFIG_HPP_
