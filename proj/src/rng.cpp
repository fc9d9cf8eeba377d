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

#include "difffp/rng.hpp"

namespace difffp {

Rng seed_stream(uint64_t root_seed, uint64_t stream_id) {
  std::seed_seq seq{static_cast<uint32_t>(root_seed),
                    static_cast<uint32_t>(root_seed >> 32),
                    static_cast<uint32_t>(stream_id),
                    static_cast<uint32_t>(stream_id >> 32)};
  return Rng(seq);
}

uint64_t derive_seed(uint64_t root_seed, uint64_t stream_id) {
  Rng rng = seed_stream(root_seed, stream_id);
  return rng();
}

}  // namespace difffp
