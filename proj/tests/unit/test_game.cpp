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

#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "difffp/envs.hpp"
#include "difffp/errors.hpp"
#include "difffp/game.hpp"
#include "difffp/rng.hpp"
#include "test_support.hpp"

namespace difffp {
namespace {

class NanPolicy final : public Policy {
 public:
  PolicySignature signature() const override { return {-1, -1, 1}; }
  void act(int, std::span<const float>, Rng&,
           std::span<float> action) const override {
    action[0] = std::numeric_limits<float>::quiet_NaN();
  }
};

// Records every observation handed to it.
class SpyPolicy final : public Policy {
 public:
  explicit SpyPolicy(int act_dim) : act_dim_(act_dim) {}
  PolicySignature signature() const override { return {-1, -1, act_dim_}; }
  void act(int member, std::span<const float> obs, Rng&,
           std::span<float> action) const override {
    seen.emplace_back(member, std::vector<float>(obs.begin(), obs.end()));
    for (float& a : action) a = 0.0f;
  }
  mutable std::vector<std::pair<int, std::vector<float>>> seen;

 private:
  int act_dim_;
};

Rollout play(Env& env, const Policy& ego, const Policy& opp, uint64_t seed,
             const RolloutOptions& options = {}) {
  const Policy* profile[] = {&ego, &opp};
  return rollout(env, profile, seed, options);
}

TEST(Rollout, ScalarDuelZeroActions) {
  auto env = envs::make_env("scalar-duel");
  const ConstantPolicy zero({0.0f});
  const auto r = play(*env, zero, zero, 1);
  EXPECT_EQ(r.result.length, 1);
  EXPECT_EQ(r.result.returns, (std::vector<double>{0.0, -0.0}));
  EXPECT_EQ(r.result.returns[0] + r.result.returns[1], 0.0);
}

TEST(Rollout, ScalarDuelOnes) {
  auto env = envs::make_env("scalar-duel");
  const ConstantPolicy one({1.0f});
  const auto r = play(*env, one, one, 1);
  EXPECT_DOUBLE_EQ(r.result.returns[0], 1.0);
  EXPECT_DOUBLE_EQ(r.result.returns[1], -1.0);
  EXPECT_EQ(r.result.outcome, Outcome::kNone);
}

TEST(Rollout, ParticleTagIsDeterministic) {
  auto env = envs::make_env("particle-tag");
  const ConstantPolicy zero({0.0f, 0.0f});
  RolloutOptions opts;
  opts.record = true;
  const auto a = play(*env, zero, zero, 7, opts);
  const auto b = play(*env, zero, zero, 7, opts);
  EXPECT_EQ(a.result.returns, b.result.returns);
  EXPECT_EQ(a.result.raw_returns, b.result.raw_returns);
  EXPECT_EQ(a.result.length, b.result.length);
  EXPECT_EQ(a.result.outcome, b.result.outcome);
  ASSERT_EQ(a.transitions.size(), b.transitions.size());
  for (size_t i = 0; i < a.transitions.size(); ++i) {
    EXPECT_EQ(a.transitions[i].obs, b.transitions[i].obs);
  }
}

TEST(Rollout, RecordedTransitionsAreConsistent) {
  auto env = envs::make_env("particle-tag");
  const ConstantPolicy push({0.3f, -0.2f});
  RolloutOptions opts;
  opts.record = true;
  const auto r = play(*env, push, push, 3, opts);
  ASSERT_EQ(static_cast<int>(r.transitions.size()), r.result.length);
  EXPECT_LE(r.result.length, env->spec().horizon);
  for (size_t i = 0; i + 1 < r.transitions.size(); ++i) {
    EXPECT_EQ(r.transitions[i].next_obs, r.transitions[i + 1].obs);
    EXPECT_FALSE(r.transitions[i].terminated || r.transitions[i].truncated);
  }
  const auto& last = r.transitions.back();
  EXPECT_NE(last.terminated, last.truncated);
  if (last.truncated) {
    EXPECT_EQ(r.result.length, env->spec().horizon);
  }
}

TEST(Rollout, DimensionMismatchIsConfigError) {
  auto env = envs::make_env("scalar-duel");
  const ConstantPolicy wide({0.0f, 0.0f});
  const ConstantPolicy zero({0.0f});
  EXPECT_THROW(play(*env, wide, zero, 1), ConfigError);
}

TEST(Rollout, NanActionNamesAgent) {
  auto env = envs::make_env("scalar-duel");
  const NanPolicy nan;
  const ConstantPolicy zero({0.0f});
  try {
    play(*env, zero, nan, 1);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("agent 1"), std::string::npos);
  }
}

TEST(Rollout, PoliciesSeeOnlyTheirOwnObservation) {
  auto env = envs::make_env("particle-deception");
  SpyPolicy ego(2), adv(2);
  RolloutOptions opts;
  opts.record = true;
  const auto r = play(*env, ego, adv, 5, opts);
  const auto& spec = env->spec();
  // Ego members observe the true goal; the adversary does not.
  ASSERT_FALSE(ego.seen.empty());
  for (const auto& [member, obs] : ego.seen) {
    EXPECT_EQ(static_cast<int>(obs.size()), spec.obs_dim[member]);
  }
  for (const auto& [member, obs] : adv.seen) {
    EXPECT_EQ(member, 0);
    EXPECT_EQ(static_cast<int>(obs.size()), spec.obs_dim[2]);
  }
  EXPECT_NE(spec.obs_dim[0], spec.obs_dim[2]);
  const auto& first = r.transitions.front().obs;
  EXPECT_EQ(ego.seen[0].second, first[0]);
  EXPECT_EQ(ego.seen[1].second, first[1]);
  EXPECT_EQ(adv.seen[0].second, first[2]);
}

TEST(EstimatePayoff, DeterministicConstants) {
  auto env = envs::make_env("scalar-duel");
  const ConstantPolicy x({1.0f}), y({-1.0f});
  const Policy* profile[] = {&x, &y};
  for (int n : {1, 7, 50}) {
    const auto est = estimate_payoff(*env, profile, n, 3);
    EXPECT_DOUBLE_EQ(est.mean[0], -1.0);
    EXPECT_DOUBLE_EQ(est.mean[1], 1.0);
    EXPECT_EQ(est.std_error[0], 0.0);
  }
}

TEST(EstimatePayoff, MixtureAgainstConstantConvergesToZero) {
  auto env = envs::make_env("scalar-duel");
  const auto mix = testing::constant_mixture({-1.0f, 1.0f});
  const ConstantPolicy one({1.0f});
  const Policy* profile[] = {&mix, &one};
  PayoffOptions opts;
  opts.stratified = false;
  const auto est = estimate_payoff(*env, profile, 10000, 11, opts);
  EXPECT_GT(est.std_error[0], 0.0);
  EXPECT_LE(std::abs(est.mean[0]), 3.0 * est.std_error[0]);
}

TEST(EstimatePayoff, SingleEpisodeEqualsRollout) {
  auto env = envs::make_env("track-duel");
  const ConstantPolicy a({0.5f, 0.1f}), b({0.2f, -0.3f});
  const Policy* profile[] = {&a, &b};
  const auto est = estimate_payoff(*env, profile, 1, 21);
  const auto r = rollout(*env, profile, 21);
  EXPECT_DOUBLE_EQ(est.mean[0], r.result.raw_returns[0]);
  EXPECT_DOUBLE_EQ(est.mean[1], r.result.raw_returns[1]);
}

TEST(EstimatePayoff, RejectsZeroEpisodes) {
  auto env = envs::make_env("scalar-duel");
  const ConstantPolicy a({0.0f});
  const Policy* profile[] = {&a, &a};
  EXPECT_THROW(estimate_payoff(*env, profile, 0, 1), ConfigError);
}

TEST(EstimatePayoff, IndependentOfWorkerSchedule) {
  auto env = envs::make_env("particle-tag");
  const ConstantPolicy a({0.4f, 0.4f}), b({-0.2f, 0.6f});
  const Policy* profile[] = {&a, &b};
  const auto x = estimate_payoff(*env, profile, 40, 9);
  const auto y = estimate_payoff(*env, profile, 40, 9);
  EXPECT_EQ(x.mean, y.mean);
  EXPECT_EQ(x.lengths, y.lengths);
}

TEST(SeedStream, Reproducible) {
  Rng a = seed_stream(42, 0), b = seed_stream(42, 0);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(SeedStream, StreamsAndRootsDiffer) {
  Rng base = seed_stream(42, 0), other_stream = seed_stream(42, 1);
  Rng r1 = seed_stream(1, 0), r2 = seed_stream(2, 0);
  int same_stream = 0, same_root = 0;
  for (int i = 0; i < 100; ++i) {
    same_stream += base() == other_stream();
    same_root += r1() == r2();
  }
  EXPECT_EQ(same_stream, 0);
  EXPECT_EQ(same_root, 0);
  std::set<uint64_t> seeds;
  for (uint64_t s = 0; s < 1000; ++s) seeds.insert(derive_seed(7, s));
  EXPECT_EQ(seeds.size(), 1000u);
}

TEST(GameSpec, ValidateRejectsBadSpecs) {
  GameSpec spec = envs::make_env("scalar-duel")->spec();
  EXPECT_NO_THROW(spec.validate());
  GameSpec bad = spec;
  bad.obs_dim[0] = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = spec;
  bad.action_low[1][0] = 1.0f;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = spec;
  bad.discount = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

}  // namespace
}  // namespace difffp
