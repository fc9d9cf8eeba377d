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

#include "difffp/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "difffp/errors.hpp"
#include "difffp/io.hpp"

namespace difffp {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw ConfigError(key + ": " + what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    bad(key, "cannot parse '" + v + "' as a number");
  }
  return out;
}

template <class T>
std::string format_number(T value) {
  char buf[64];
  char* ptr = std::to_chars(buf, buf + sizeof(buf), value).ptr;
  return std::string(buf, ptr);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad(key, "expected true or false, got '" + v + "'");
}

std::string format_bool(bool b) { return b ? "true" : "false"; }

std::vector<int> parse_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    out.push_back(parse_number<int>(key, trim(item)));
  }
  if (out.empty()) bad(key, "expected a comma-separated list of widths");
  return out;
}

std::string format_list(const std::vector<int>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

template <class T>
struct Field {
  std::function<std::string(const T&)> get;
  std::function<void(T&, const std::string& key, const std::string& value)>
      set;
};

#define DIFFFP_NUM_FIELD(T, expr, type)                                 \
  Field<T> {                                                            \
    [](const T& c) { return format_number(c.expr); },                   \
        [](T& c, const std::string& k, const std::string& v) {          \
          c.expr = parse_number<type>(k, v);                            \
        }                                                               \
  }
#define DIFFFP_BOOL_FIELD(T, expr)                                      \
  Field<T> {                                                            \
    [](const T& c) { return format_bool(c.expr); },                     \
        [](T& c, const std::string& k, const std::string& v) {          \
          c.expr = parse_bool(k, v);                                    \
        }                                                               \
  }

// Keys stored per side. Keys with a section prefix (diffusion., critic.)
// always apply to both sides.
const std::map<std::string, Field<BrConfig>>& side_fields() {
  static const std::map<std::string, Field<BrConfig>> fields = {
      {"br.kind",
       {[](const BrConfig& c) { return std::string(learner_kind_name(c.kind)); },
        [](BrConfig& c, const std::string& k, const std::string& v) {
          try {
            c.kind = learner_kind_from_name(v);
          } catch (const ConfigError&) {
            bad(k, "expected diffusion or gaussian, got '" + v + "'");
          }
        }}},
      {"br.env_steps", DIFFFP_NUM_FIELD(BrConfig, env_steps, int)},
      {"br.warmup_steps", DIFFFP_NUM_FIELD(BrConfig, warmup_steps, int)},
      {"br.batch_size", DIFFFP_NUM_FIELD(BrConfig, batch_size, int)},
      {"br.updates_per_step", DIFFFP_NUM_FIELD(BrConfig, updates_per_step, int)},
      {"br.update_every", DIFFFP_NUM_FIELD(BrConfig, update_every, int)},
      {"br.buffer_capacity", DIFFFP_NUM_FIELD(BrConfig, buffer_capacity, int)},
      {"br.actor_lr", DIFFFP_NUM_FIELD(BrConfig, actor_lr, float)},
      {"br.critic_lr", DIFFFP_NUM_FIELD(BrConfig, critic_lr, float)},
      {"br.entropy_weight", DIFFFP_NUM_FIELD(BrConfig, entropy_weight, float)},
      {"br.warm_start", DIFFFP_BOOL_FIELD(BrConfig, warm_start)},
      {"br.actor_hidden",
       {[](const BrConfig& c) { return format_list(c.actor_hidden); },
        [](BrConfig& c, const std::string& k, const std::string& v) {
          c.actor_hidden = parse_list(k, v);
        }}},
      {"br.critic_hidden",
       {[](const BrConfig& c) { return format_list(c.critic_hidden); },
        [](BrConfig& c, const std::string& k, const std::string& v) {
          c.critic_hidden = parse_list(k, v);
        }}},
      {"diffusion.steps", DIFFFP_NUM_FIELD(BrConfig, diffusion.steps, int)},
      {"diffusion.beta_min",
       DIFFFP_NUM_FIELD(BrConfig, diffusion.beta_min, double)},
      {"diffusion.beta_max",
       DIFFFP_NUM_FIELD(BrConfig, diffusion.beta_max, double)},
      {"diffusion.schedule",
       {[](const BrConfig& c) {
          return std::string(schedule_kind_name(c.diffusion.schedule));
        },
        [](BrConfig& c, const std::string& k, const std::string& v) {
          try {
            c.diffusion.schedule = schedule_kind_from_name(v);
          } catch (const ConfigError&) {
            bad(k, "expected vp or linear, got '" + v + "'");
          }
        }}},
      {"diffusion.eta", DIFFFP_NUM_FIELD(BrConfig, diffusion.eta, float)},
      {"diffusion.lambda", DIFFFP_NUM_FIELD(BrConfig, diffusion.lambda, float)},
      {"diffusion.guidance_steps",
       DIFFFP_NUM_FIELD(BrConfig, diffusion.guidance_steps, int)},
      {"diffusion.temperature",
       DIFFFP_NUM_FIELD(BrConfig, diffusion.temperature, double)},
      {"diffusion.clip", DIFFFP_NUM_FIELD(BrConfig, diffusion.clip, double)},
      {"diffusion.weighting",
       {[](const BrConfig& c) {
          return std::string(weight_target_name(c.diffusion.weighting));
        },
        [](BrConfig& c, const std::string& k, const std::string& v) {
          try {
            c.diffusion.weighting = weight_target_from_name(v);
          } catch (const ConfigError&) {
            bad(k, "expected denoise, distill or none, got '" + v + "'");
          }
        }}},
      {"diffusion.guide_fresh",
       DIFFFP_BOOL_FIELD(BrConfig, diffusion.guide_fresh)},
      {"critic.gamma", DIFFFP_NUM_FIELD(BrConfig, critic.gamma, double)},
      {"critic.tau", DIFFFP_NUM_FIELD(BrConfig, critic.tau, float)},
      {"critic.target_samples",
       DIFFFP_NUM_FIELD(BrConfig, critic.target_samples, int)},
  };
  return fields;
}

const std::map<std::string, Field<ExperimentConfig>>& global_fields() {
  static const std::map<std::string, Field<ExperimentConfig>> fields = {
      {"env.name",
       {[](const ExperimentConfig& c) { return c.env_name; },
        [](ExperimentConfig& c, const std::string&, const std::string& v) {
          c.env_name = v;
        }}},
      {"fp.iterations", DIFFFP_NUM_FIELD(ExperimentConfig, iterations, int)},
      {"fp.simultaneous", DIFFFP_BOOL_FIELD(ExperimentConfig, simultaneous)},
      {"fp.shared_pool", DIFFFP_BOOL_FIELD(ExperimentConfig, shared_pool)},
      {"fp.oracle_br", DIFFFP_BOOL_FIELD(ExperimentConfig, oracle_br)},
      {"eval.episodes", DIFFFP_NUM_FIELD(ExperimentConfig, eval.episodes, int)},
      {"eval.oracle",
       {[](const ExperimentConfig& c) {
          return std::string(oracle_kind_name(c.eval.oracle));
        },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          try {
            c.eval.oracle = oracle_kind_from_name(v);
          } catch (const ConfigError&) {
            bad(k, "expected grid or rl, got '" + v + "'");
          }
        }}},
      {"eval.br_steps", DIFFFP_NUM_FIELD(ExperimentConfig, eval.br_steps, int)},
      {"eval.grid_n", DIFFFP_NUM_FIELD(ExperimentConfig, eval.grid_n, int)},
      {"eval.discounted", DIFFFP_BOOL_FIELD(ExperimentConfig, eval.discounted)},
      {"eval.stratified", DIFFFP_BOOL_FIELD(ExperimentConfig, eval.stratified)},
      {"seed", DIFFFP_NUM_FIELD(ExperimentConfig, seed, uint64_t)},
      {"run.name",
       {[](const ExperimentConfig& c) { return c.run_name; },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          if (v.empty() || v.find('/') != std::string::npos || v == "." ||
              v == "..") {
            bad(k, "must be a plain directory name");
          }
          c.run_name = v;
        }}},
      {"run.out",
       {[](const ExperimentConfig& c) { return c.run_out; },
        [](ExperimentConfig& c, const std::string&, const std::string& v) {
          c.run_out = v;
        }}},
  };
  return fields;
}

#undef DIFFFP_NUM_FIELD
#undef DIFFFP_BOOL_FIELD

bool is_per_side(const std::string& key) { return key.rfind("br.", 0) == 0; }

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, f] : global_fields()) keys.push_back(k);
  for (const auto& [k, f] : side_fields()) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  return keys;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  std::map<std::string, std::string> entries;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) +
                        ": expected key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(number) + ": empty key");
    }
    if (!entries.emplace(key, value).second) bad(key, "duplicate key");
  }

  ExperimentConfig c;
  std::vector<std::pair<int, std::pair<std::string, std::string>>> agent_keys;
  for (const auto& [key, value] : entries) {
    if (key.rfind("br.agent", 0) == 0) {
      const auto dot = key.find('.', 8);
      const std::string index = key.substr(8, dot == std::string::npos
                                                  ? std::string::npos
                                                  : dot - 8);
      if (dot == std::string::npos || (index != "0" && index != "1")) {
        bad(key, "unknown key");
      }
      const std::string inner = "br." + key.substr(dot + 1);
      if (side_fields().count(inner) == 0) bad(key, "unknown key");
      agent_keys.push_back({index == "0" ? 0 : 1, {key, inner}});
      continue;
    }
    if (auto it = global_fields().find(key); it != global_fields().end()) {
      it->second.set(c, key, value);
    } else if (auto f = side_fields().find(key); f != side_fields().end()) {
      for (BrConfig& b : c.br) f->second.set(b, key, value);
    } else if (key.rfind("env.", 0) == 0) {
      c.env[key.substr(4)] = parse_number<double>(key, value);
    } else {
      bad(key, "unknown key");
    }
  }
  for (const auto& [side, names] : agent_keys) {
    side_fields().at(names.second).set(c.br[side], names.first,
                                       entries.at(names.first));
  }
  return c;
}

std::string ExperimentConfig::serialize() const {
  std::map<std::string, std::string> out;
  for (const auto& [key, field] : global_fields()) out[key] = field.get(*this);
  for (const auto& [key, field] : side_fields()) {
    const std::string a = field.get(br[0]);
    const std::string b = field.get(br[1]);
    if (a == b || !is_per_side(key)) {
      out[key] = a;
    } else {
      const std::string rest = key.substr(3);
      out["br.agent0." + rest] = a;
      out["br.agent1." + rest] = b;
    }
  }
  for (const auto& [param, value] : env) {
    out["env." + param] = format_number(value);
  }
  std::string text;
  for (const auto& [key, value] : out) text += key + "=" + value + "\n";
  return text;
}

uint64_t ExperimentConfig::hash() const { return fnv1a64(serialize()); }

void ExperimentConfig::validate() const {
  if (env_name.empty()) bad("env.name", "required");
  try {
    envs::make_env(env_name, env);
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind("env.", 0) == 0) throw;
    bad("env.name", what);
  }
  if (iterations < 1) bad("fp.iterations", "must be >= 1");
  for (const BrConfig& b : br) b.validate();
  eval.validate();
}

FpConfig ExperimentConfig::fp_config() const {
  FpConfig f;
  f.iterations = iterations;
  f.simultaneous = simultaneous;
  f.shared_pool = shared_pool;
  f.oracle_br = oracle_br;
  f.br = br;
  f.eval = eval;
  f.config_hash = hash();
  return f;
}

}  // namespace difffp
