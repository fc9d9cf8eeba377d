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

#include <algorithm>
#include <cmath>
#include <vector>

#include "difffp/envs.hpp"
#include "difffp/errors.hpp"
#include "difffp/fictitious_play.hpp"
#include "difffp/mixture.hpp"
#include "test_support.hpp"

namespace difffp {
namespace {

using testing::constant_checkpoint;

// One-step duel whose rewards are not numbers.
class NanDuel final : public Env {
 public:
  NanDuel() : spec_(envs::make_env("scalar-duel")->spec()) {}
  const GameSpec& spec() const override { return spec_; }
  JointObservation reset(uint64_t) override { return {{0.0f}, {0.0f}}; }
  StepResult step(const JointAction&) override {
    StepResult s;
    s.obs = {{0.0f}, {0.0f}};
    s.rewards = {std::nan(""), std::nan("")};
    s.terminated = true;
    return s;
  }
  int step_count() const override { return 0; }
  std::unique_ptr<Env> clone() const override {
    return std::make_unique<NanDuel>();
  }

 private:
  GameSpec spec_;
};

FpConfig oracle_config(int iterations) {
  FpConfig c;
  c.iterations = iterations;
  c.oracle_br = true;
  c.eval.episodes = 200;
  c.eval.grid_n = 41;
  return c;
}

TEST(Mixture, ClosedFormWeightsUpToHundred) {
  MixturePolicy mix;
  for (int k = 0; k < 100; ++k) {
    mix = mixture_update(mix, constant_checkpoint(0.0f, k));
    ASSERT_EQ(mix.size(), static_cast<size_t>(k + 1));
    double sum = 0.0;
    for (double w : mix.weights()) {
      EXPECT_EQ(w, 1.0 / (k + 1));
      sum += w;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    const auto [lo, hi] =
        std::minmax_element(mix.weights().begin(), mix.weights().end());
    EXPECT_EQ(*hi - *lo, 0.0);
  }
}

TEST(Mixture, RecursionMatchesClosedForm) {
  // pi_{k+1} = k/(k+1) pi_k + 1/(k+1) BR_k, unrolled in double.
  std::vector<double> w;
  MixturePolicy mix;
  for (int k = 0; k < 30; ++k) {
    for (double& v : w) v *= static_cast<double>(k) / (k + 1);
    w.push_back(1.0 / (k + 1));
    mix = mixture_update(mix, constant_checkpoint(0.0f, k));
    for (size_t i = 0; i < w.size(); ++i) {
      EXPECT_NEAR(mix.weights()[i], w[i], 1e-15);
    }
  }
}

TEST(Mixture, RejectsOutOfOrderIteration) {
  MixturePolicy mix;
  EXPECT_THROW(mixture_update(mix, constant_checkpoint(0.0f, 1)),
               ConfigError);
}

TEST(Mixture, EmptyPoolCannotSelect) {
  const MixturePolicy mix;
  Rng rng = seed_stream(1, 0);
  EXPECT_THROW(mix.sample_index(rng), ConfigError);
  EXPECT_THROW(mix.select(0.5), ConfigError);
}

TEST(Mixture, SingleMemberAlwaysChosen) {
  const auto mix = testing::constant_mixture({0.3f});
  Rng rng = seed_stream(2, 0);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(mix.sample_index(rng), 0u);
}

TEST(Mixture, UniformFrequencies) {
  const auto mix = testing::constant_mixture({-1.0f, 0.0f, 1.0f});
  Rng rng = seed_stream(3, 0);
  std::vector<int> counts(3, 0);
  const int n = 30000;
  for (int k = 0; k < n; ++k) ++counts[mix.sample_index(rng)];
  for (int c : counts) EXPECT_NEAR(static_cast<double>(c) / n, 1.0 / 3, 0.01);
}

TEST(Mixture, SeededIndexSequenceRepeats) {
  const auto mix = testing::constant_mixture({-1.0f, 0.0f, 1.0f, 0.5f});
  Rng a = seed_stream(4, 0), b = seed_stream(4, 0);
  for (int k = 0; k < 100; ++k) {
    EXPECT_EQ(mix.sample_index(a), mix.sample_index(b));
  }
}

TEST(Mixture, InverseCdfIndex) {
  const auto mix = testing::constant_mixture({-1.0f, 0.0f, 1.0f, 0.5f});
  EXPECT_EQ(mix.index_for(0.0), 0u);
  EXPECT_EQ(mix.index_for(0.26), 1u);
  EXPECT_EQ(mix.index_for(0.999999), 3u);
}

TEST(FictitiousPlay, SingleIterationMixtureIsFirstBestResponse) {
  auto env = envs::make_env("scalar-duel");
  const auto h = run_fictitious_play(*env, oracle_config(1), 3);
  for (int s = 0; s < kNumSides; ++s) {
    ASSERT_EQ(h.mixtures[s].size(), 1u);
    EXPECT_EQ(h.mixtures[s].weights()[0], 1.0);
    EXPECT_EQ(h.mixtures[s].checkpoint(0).fp_iteration, 0);
  }
  ASSERT_EQ(h.iterations.size(), 1u);
}

TEST(FictitiousPlay, SequentialPoolSizes) {
  auto env = envs::make_env("scalar-duel");
  const auto h = run_fictitious_play(*env, oracle_config(6), 4);
  for (const auto& rec : h.iterations) {
    const int k = rec.iteration;
    // The initial random policy stands in for an empty pool at k = 0.
    EXPECT_EQ(rec.opponent_pool_size[kEgoSide], static_cast<size_t>(k));
    EXPECT_EQ(rec.opponent_pool_size[kOppSide], static_cast<size_t>(k + 1));
  }
  auto sim = oracle_config(4);
  sim.simultaneous = true;
  const auto hs = run_fictitious_play(*env, sim, 4);
  for (const auto& rec : hs.iterations) {
    EXPECT_EQ(rec.opponent_pool_size[kOppSide],
              static_cast<size_t>(rec.iteration));
  }
}

TEST(FictitiousPlay, OracleTraceConvergesOnScalarDuel) {
  auto env = envs::make_env("scalar-duel");
  const auto h = run_fictitious_play(*env, oracle_config(50), 7);
  ASSERT_EQ(h.iterations.size(), 50u);
  EXPECT_GT(h.iterations[0].report.total, 1.0);
  // Classical FP on the bilinear game oscillates, so the trace is checked
  // against an envelope: late peaks stay below early peaks.
  auto peak = [&](size_t from, size_t to) {
    double m = 0.0;
    for (size_t k = from; k < to; ++k) {
      m = std::max(m, h.iterations[k].report.total);
    }
    return m;
  };
  EXPECT_LT(peak(25, 50), peak(3, 13));
  EXPECT_LT(peak(40, 50), 0.3);
  EXPECT_LE(h.iterations.back().report.total, 0.1);
}

TEST(FictitiousPlay, IdenticalSeedsGiveIdenticalPools) {
  auto env = envs::make_env("scalar-duel");
  FpConfig c;
  c.iterations = 2;
  for (auto& b : c.br) {
    b.env_steps = 200;
    b.warmup_steps = 50;
  }
  c.eval.episodes = 20;
  const auto a = run_fictitious_play(*env, c, 9);
  const auto b = run_fictitious_play(*env, c, 9);
  for (int s = 0; s < kNumSides; ++s) {
    ASSERT_EQ(a.mixtures[s].size(), b.mixtures[s].size());
    for (size_t i = 0; i < a.mixtures[s].size(); ++i) {
      EXPECT_EQ(a.mixtures[s].checkpoint(i).content_hash(),
                b.mixtures[s].checkpoint(i).content_hash());
    }
    EXPECT_EQ(a.initial[s].content_hash(), b.initial[s].content_hash());
  }
  EXPECT_EQ(a.iterations.back().report.total,
            b.iterations.back().report.total);
}

TEST(FictitiousPlay, ErrorsCarryIterationAndAgent) {
  const NanDuel env;
  FpConfig c;
  c.iterations = 1;
  c.evaluate = false;
  for (auto& b : c.br) {
    b.env_steps = 40;
    b.warmup_steps = 10;
    b.batch_size = 8;
  }
  try {
    run_fictitious_play(env, c, 1);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("fp iteration 0, agent 0: ", 0), 0u)
        << e.what();
  }
  FpConfig zero;
  zero.iterations = 0;
  EXPECT_THROW(zero.validate(), ConfigError);
  auto tag = envs::make_env("particle-tag");
  EXPECT_THROW(run_fictitious_play(*tag, oracle_config(1), 1), ConfigError);
}

TEST(FictitiousPlay, SharedPoolServesBothSeats) {
  auto env = envs::make_env("track-duel",
                            {{"collision_penalty", 0.0}, {"wall_penalty", 0.0},
                             {"horizon", 10}});
  FpConfig c;
  c.iterations = 2;
  c.shared_pool = true;
  c.evaluate = false;
  for (auto& b : c.br) {
    b.env_steps = 60;
    b.warmup_steps = 30;
    b.batch_size = 16;
  }
  const auto h = run_fictitious_play(*env, c, 5);
  EXPECT_EQ(h.mixtures[kEgoSide].size(), 2u);
  EXPECT_EQ(h.mixtures[kOppSide].size(), 2u);
  EXPECT_EQ(h.mixtures[kEgoSide].checkpoint(1).content_hash(),
            h.mixtures[kOppSide].checkpoint(1).content_hash());
}

}  // namespace
}  // namespace difffp
