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

#ifndef DIFFFP_CHECKPOINT_HPP_
#define DIFFFP_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "difffp/game.hpp"
#include "difffp/nn.hpp"

namespace difffp {

enum class PolicyKind { kDiffusion, kGaussian, kConstant };

const char* policy_kind_name(PolicyKind kind);
PolicyKind policy_kind_from_name(const std::string& name);

// Immutable snapshot of one best-response actor.
struct PolicyCheckpoint {
  PolicyKind kind = PolicyKind::kConstant;
  int fp_iteration = 0;
  int side = kEgoSide;
  int team_size = 1;
  int obs_dim = 1;  // per-agent environment observation width
  int act_dim = 1;
  std::vector<float> low;
  std::vector<float> high;
  std::vector<int> hidden;
  nn::Activation activation = nn::Activation::kMish;
  std::vector<double> betas;  // diffusion only
  std::vector<float> params;  // actor parameters, or the constant action

  uint64_t seed = 0;
  std::string env_name;
  uint64_t config_hash = 0;

  std::vector<nn::Tensor> to_tensors() const;
  static PolicyCheckpoint from_tensors(const std::vector<nn::Tensor>& tensors);

  // Builds an executable policy. Equal checkpoints yield policies with equal
  // sample streams.
  std::shared_ptr<const Policy> instantiate() const;

  // FNV-1a of the encoded file bytes.
  uint64_t content_hash() const;
};

inline constexpr uint32_t kCheckpointVersion = 1;

// "DFPW" | version u32 | count u32 | tensors | crc32 u32, little-endian.
std::vector<uint8_t> encode_tensors(const std::vector<nn::Tensor>& tensors);
// Throws CheckpointFormatError on a bad magic, version, layout, or CRC.
std::vector<nn::Tensor> decode_tensors(std::span<const uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path,
                     const PolicyCheckpoint& checkpoint);
// Throws MissingCheckpointError when the file is absent.
PolicyCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace difffp

#endif  // DIFFFP_CHECKPOINT_HPP_
