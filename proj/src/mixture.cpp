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

#include "difffp/mixture.hpp"

#include <algorithm>
#include <cmath>

#include "difffp/errors.hpp"

namespace difffp {

MixturePolicy::MixturePolicy(std::vector<PolicyCheckpoint> pool)
    : pool_(std::move(pool)) {
  const double w = pool_.empty() ? 0.0 : 1.0 / static_cast<double>(pool_.size());
  weights_.assign(pool_.size(), w);
  for (const PolicyCheckpoint& c : pool_) members_.push_back(c.instantiate());
}

size_t MixturePolicy::index_for(double u) const {
  if (pool_.empty()) throw ConfigError("mixture: empty pool");
  const size_t k = pool_.size();
  const auto idx = static_cast<size_t>(std::floor(u * static_cast<double>(k)));
  return std::min(idx, k - 1);
}

size_t MixturePolicy::sample_index(Rng& rng) const {
  return index_for(uniform_sample(rng));
}

PolicySignature MixturePolicy::signature() const {
  if (pool_.empty()) throw ConfigError("mixture: empty pool");
  PolicySignature sig = members_.front()->signature();
  for (const auto& m : members_) {
    const PolicySignature s = m->signature();
    if (sig.team_size < 0) sig.team_size = s.team_size;
    if (sig.obs_dim < 0) sig.obs_dim = s.obs_dim;
    if (sig.act_dim < 0) sig.act_dim = s.act_dim;
  }
  return sig;
}

const Policy& MixturePolicy::select(double u) const {
  return *members_[index_for(u)];
}

void MixturePolicy::act(int, std::span<const float>, Rng&,
                        std::span<float>) const {
  throw ConfigError("mixture: select a member before acting");
}

MixturePolicy mixture_update(const MixturePolicy& mixture,
                             PolicyCheckpoint best_response) {
  if (best_response.fp_iteration != static_cast<int>(mixture.size())) {
    throw ConfigError("mixture update: expected best response of iteration " +
                      std::to_string(mixture.size()) + ", got " +
                      std::to_string(best_response.fp_iteration));
  }
  MixturePolicy out = mixture;
  out.members_.push_back(best_response.instantiate());
  out.pool_.push_back(std::move(best_response));
  out.weights_.assign(out.pool_.size(),
                      1.0 / static_cast<double>(out.pool_.size()));
  return out;
}

}  // namespace difffp
