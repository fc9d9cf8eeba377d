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

#ifndef DIFFFP_REPLAY_HPP_
#define DIFFFP_REPLAY_HPP_

#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "difffp/errors.hpp"
#include "difffp/rng.hpp"

namespace difffp {

// Fixed-capacity FIFO ring buffer with uniform sampling with replacement.
template <class T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay buffer: capacity must be > 0");
    items_.reserve(std::min<size_t>(capacity, 1 << 16));
  }

  size_t capacity() const { return capacity_; }
  size_t size() const { return items_.size(); }
  bool ready(size_t batch_size) const {
    return batch_size > 0 && size() >= batch_size;
  }

  void push(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[cursor_] = std::move(item);
    }
    cursor_ = (cursor_ + 1) % capacity_;
  }

  // Element i in insertion order; 0 is the oldest live item.
  const T& at(size_t i) const {
    if (i >= size()) throw ConfigError("replay buffer: index out of range");
    const size_t start = items_.size() < capacity_ ? 0 : cursor_;
    return items_[(start + i) % items_.size()];
  }

  // Indices usable with at(); nullopt when fewer than batch_size items are
  // stored.
  std::optional<std::vector<size_t>> sample(size_t batch_size,
                                            Rng& rng) const {
    if (!ready(batch_size)) return std::nullopt;
    std::uniform_int_distribution<size_t> pick(0, size() - 1);
    std::vector<size_t> out(batch_size);
    for (size_t& i : out) i = pick(rng);
    return out;
  }

  void clear() {
    items_.clear();
    cursor_ = 0;
  }

 private:
  size_t capacity_;
  size_t cursor_ = 0;
  std::vector<T> items_;
};

}  // namespace difffp

#endif  // DIFFFP_REPLAY_HPP_
