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

#ifndef DIFFFP_RNG_HPP_
#define DIFFFP_RNG_HPP_

#include <cstdint>
#include <random>

namespace difffp {

using Rng = std::mt19937_64;

// Well-known stream ids. Streams derived from the same root seed with
// different ids are statistically independent.
namespace streams {
inline constexpr uint64_t kEnv = 0;
inline constexpr uint64_t kSelect = 8;     // + side: mixture member choice
inline constexpr uint64_t kAct = 16;       // + side: action sampling
inline constexpr uint64_t kStrata = 24;    // + side: stratified selection
inline constexpr uint64_t kInit = 32;      // network initialization
inline constexpr uint64_t kBuffer = 33;    // replay sampling
inline constexpr uint64_t kUpdate = 34;    // noise in gradient updates
inline constexpr uint64_t kEpisodes = 35;  // episode seeds during training
}  // namespace streams

// Deterministic generator for (root_seed, stream_id).
Rng seed_stream(uint64_t root_seed, uint64_t stream_id);

// Derives a child seed; used to hand independent seeds to sub-computations.
uint64_t derive_seed(uint64_t root_seed, uint64_t stream_id);

inline float normal_sample(Rng& rng) {
  return std::normal_distribution<float>(0.0f, 1.0f)(rng);
}

inline double uniform_sample(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace difffp

#endif  // DIFFFP_RNG_HPP_
