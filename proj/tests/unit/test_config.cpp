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

#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "difffp/config.hpp"
#include "difffp/errors.hpp"
#include "difffp/io.hpp"

namespace difffp {
namespace {

const char* kBase =
    "# scalar duel\n"
    "env.name = scalar-duel\n"
    "fp.iterations = 4\n"
    "br.env_steps = 1200\n"
    "diffusion.steps = 6\n"
    "seed = 12\n";

std::string error_of(const std::string& text) {
  try {
    ExperimentConfig::parse(text).validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, ParsesTypedValues) {
  const auto c = ExperimentConfig::parse(
      std::string(kBase) +
      "br.actor_hidden = 32, 16\nfp.simultaneous = true\n"
      "eval.oracle = rl\nenv.horizon = 1\n");
  EXPECT_EQ(c.env_name, "scalar-duel");
  EXPECT_EQ(c.iterations, 4);
  EXPECT_TRUE(c.simultaneous);
  EXPECT_EQ(c.seed, 12u);
  EXPECT_EQ(c.eval.oracle, OracleKind::kRl);
  for (const auto& b : c.br) {
    EXPECT_EQ(b.env_steps, 1200);
    EXPECT_EQ(b.diffusion.steps, 6);
    EXPECT_EQ(b.actor_hidden, (std::vector<int>{32, 16}));
  }
  EXPECT_EQ(c.env.at("horizon"), 1.0);
}

TEST(Config, RoundTripIsAFixedPoint) {
  const auto c = ExperimentConfig::parse(
      std::string(kBase) + "br.agent1.kind = gaussian\nbr.agent0.actor_lr = 0.002\n");
  const std::string once = c.serialize();
  const auto again = ExperimentConfig::parse(once);
  EXPECT_EQ(again.serialize(), once);
  EXPECT_EQ(again.hash(), c.hash());
  EXPECT_EQ(again.br[1].kind, LearnerKind::kGaussian);
  EXPECT_FLOAT_EQ(again.br[0].actor_lr, 0.002f);
}

TEST(Config, HashIgnoresLayout) {
  const auto a = ExperimentConfig::parse(kBase);
  const auto b = ExperimentConfig::parse(
      "\n\nseed=12\n   # comment\ndiffusion.steps   =6\n"
      "br.env_steps = 1200   \nfp.iterations=4\n\tenv.name = scalar-duel\n");
  EXPECT_EQ(a.hash(), b.hash());
  const auto c = ExperimentConfig::parse(std::string(kBase) + "eval.episodes = 7\n");
  EXPECT_NE(a.hash(), c.hash());
}

TEST(Config, DefaultsAreExplicit) {
  const auto a = ExperimentConfig::parse(kBase);
  const auto b = ExperimentConfig::parse(std::string(kBase) +
                                         "eval.episodes = 100\n");
  EXPECT_EQ(a.hash(), b.hash());
}

TEST(Config, PerAgentOverrideWins) {
  const auto c = ExperimentConfig::parse(
      "env.name = scalar-duel\nbr.agent1.batch_size = 32\nbr.batch_size = 16\n");
  EXPECT_EQ(c.br[0].batch_size, 16);
  EXPECT_EQ(c.br[1].batch_size, 32);
  // Diffusion and critic settings are shared by both sides.
  EXPECT_THROW(ExperimentConfig::parse(
                   "env.name = scalar-duel\nbr.agent0.diffusion.eta = 0.5\n"),
               ConfigError);
}

TEST(Config, ErrorsStartWithTheKey) {
  EXPECT_EQ(error_of("env.name = scalar-duel\nfp.iteratons = 3\n")
                .rfind("fp.iteratons", 0),
            0u);
  EXPECT_EQ(error_of("env.name = scalar-duel\nfp.iterations = three\n")
                .rfind("fp.iterations", 0),
            0u);
  EXPECT_EQ(error_of("env.name = scalar-duel\nseed = 1\nseed = 2\n")
                .rfind("seed", 0),
            0u);
  EXPECT_EQ(error_of("fp.iterations = 3\n").rfind("env.name", 0), 0u);
  EXPECT_EQ(error_of("env.name = pong\n").rfind("env.name", 0), 0u);
  EXPECT_EQ(error_of("env.name = scalar-duel\nbr.warmup_steps = 99999\n")
                .rfind("br.warmup_steps", 0),
            0u);
  EXPECT_EQ(error_of("env.name = particle-tag\nenv.bogus = 1\n")
                .rfind("env.bogus", 0),
            0u);
  EXPECT_EQ(error_of("env.name = scalar-duel\nbr.agent2.kind = gaussian\n")
                .rfind("br.agent2.kind", 0),
            0u);
  EXPECT_EQ(error_of("env.name = scalar-duel\nno equals sign\n").empty(),
            false);
  EXPECT_EQ(error_of(kBase), "");
}

TEST(Config, FpConfigCarriesEverything) {
  const auto c = ExperimentConfig::parse(
      std::string(kBase) + "fp.oracle_br = true\neval.grid_n = 11\n");
  const FpConfig fp = c.fp_config();
  EXPECT_EQ(fp.iterations, 4);
  EXPECT_TRUE(fp.oracle_br);
  EXPECT_EQ(fp.eval.grid_n, 11);
  EXPECT_EQ(fp.config_hash, c.hash());
  EXPECT_EQ(fp.br[0].env_steps, 1200);
}

TEST(Config, KeyListIsSortedAndComplete) {
  const auto keys = config_keys();
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  for (const char* k : {"env.name", "fp.iterations", "br.kind",
                        "diffusion.lambda", "critic.target_samples",
                        "eval.br_steps", "seed", "run.name", "run.out"}) {
    EXPECT_NE(std::find(keys.begin(), keys.end(), k), keys.end()) << k;
  }
}

TEST(Config, ShippedExamplesValidate) {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(
           std::filesystem::path(DIFFFP_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".txt") continue;
    const auto c = ExperimentConfig::parse(read_file_text(entry.path()));
    EXPECT_NO_THROW(c.validate()) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 1);
}

}  // namespace
}  // namespace difffp
