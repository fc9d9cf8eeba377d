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

#ifndef DIFFFP_PARALLEL_HPP_
#define DIFFFP_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace difffp {

// Worker count: hardware concurrency capped by the DIFFFP_THREADS
// environment variable (when set and positive).
int worker_count();

// Runs fn(worker, begin, end) over contiguous chunks of [0, n). Each index is
// visited exactly once; callers aggregate by index so results do not depend
// on the schedule.
void parallel_for(size_t n,
                  const std::function<void(int, size_t, size_t)>& fn);

}  // namespace difffp

#endif  // DIFFFP_PARALLEL_HPP_
