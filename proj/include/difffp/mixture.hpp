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

#ifndef DIFFFP_MIXTURE_HPP_
#define DIFFFP_MIXTURE_HPP_

#include <memory>
#include <vector>

#include "difffp/checkpoint.hpp"
#include "difffp/game.hpp"
#include "difffp/rng.hpp"

namespace difffp {

// Average strategy as a weighted pool of best-response checkpoints. Acting
// requires choosing a member first via select(); rollouts do this once per
// episode.
class MixturePolicy final : public Policy {
 public:
  MixturePolicy() = default;
  // Uniform weights over `pool`.
  explicit MixturePolicy(std::vector<PolicyCheckpoint> pool);

  size_t size() const { return pool_.size(); }
  bool empty() const { return pool_.empty(); }
  const std::vector<double>& weights() const { return weights_; }
  const PolicyCheckpoint& checkpoint(size_t i) const { return pool_.at(i); }
  const std::vector<PolicyCheckpoint>& pool() const { return pool_; }
  const Policy& member(size_t i) const { return *members_.at(i); }

  // Inverse-CDF member index for u in [0, 1).
  size_t index_for(double u) const;
  // Draws a member index with probability equal to its weight.
  size_t sample_index(Rng& rng) const;

  PolicySignature signature() const override;
  const Policy& select(double u) const override;
  void act(int member, std::span<const float> obs, Rng& rng,
           std::span<float> action) const override;

 private:
  friend MixturePolicy mixture_update(const MixturePolicy&, PolicyCheckpoint);

  std::vector<PolicyCheckpoint> pool_;
  std::vector<std::shared_ptr<const Policy>> members_;
  std::vector<double> weights_;
};

// Appends the best response of iteration k = mixture.size() and resets all
// weights to 1 / (k + 1).
MixturePolicy mixture_update(const MixturePolicy& mixture,
                             PolicyCheckpoint best_response);

}  // namespace difffp

#endif  // DIFFFP_MIXTURE_HPP_
