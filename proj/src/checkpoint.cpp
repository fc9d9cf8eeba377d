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

#include "difffp/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <map>

#include <zlib.h>

#include "difffp/diffusion.hpp"
#include "difffp/errors.hpp"
#include "difffp/gaussian.hpp"
#include "difffp/io.hpp"
#include "difffp/policy.hpp"

namespace difffp {

const char* policy_kind_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kDiffusion: return "diffusion";
    case PolicyKind::kGaussian: return "gaussian";
    case PolicyKind::kConstant: return "constant";
  }
  return "constant";
}

PolicyKind policy_kind_from_name(const std::string& name) {
  if (name == "diffusion") return PolicyKind::kDiffusion;
  if (name == "gaussian") return PolicyKind::kGaussian;
  if (name == "constant") return PolicyKind::kConstant;
  throw ConfigError("unknown policy kind '" + name + "'");
}

namespace {

// 64-bit values travel as four exact 16-bit chunks.
void push_u64(std::vector<float>& out, uint64_t v) {
  for (int k = 0; k < 4; ++k) {
    out.push_back(static_cast<float>((v >> (16 * k)) & 0xffffu));
  }
}

uint64_t read_u64(std::span<const float> in) {
  uint64_t v = 0;
  for (int k = 0; k < 4; ++k) {
    v |= static_cast<uint64_t>(in[k]) << (16 * k);
  }
  return v;
}

nn::Tensor scalar(const std::string& name, float value) {
  return {name, {1}, {value}};
}

nn::Tensor vector_tensor(const std::string& name, std::vector<float> values) {
  return {name, {static_cast<uint32_t>(values.size())}, std::move(values)};
}

template <class T>
std::vector<float> as_floats(const std::vector<T>& values) {
  return std::vector<float>(values.begin(), values.end());
}

class TensorIndex {
 public:
  explicit TensorIndex(const std::vector<nn::Tensor>& tensors) {
    for (const nn::Tensor& t : tensors) by_name_[t.name] = &t;
  }
  const nn::Tensor& get(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) {
      throw CheckpointFormatError("checkpoint lacks tensor '" + name + "'");
    }
    return *it->second;
  }
  bool has(const std::string& name) const { return by_name_.count(name) > 0; }
  int integer(const std::string& name) const {
    const nn::Tensor& t = get(name);
    if (t.data.size() != 1) {
      throw CheckpointFormatError("tensor '" + name + "' is not a scalar");
    }
    return static_cast<int>(t.data[0]);
  }

 private:
  std::map<std::string, const nn::Tensor*> by_name_;
};

nn::Mlp actor_net(const PolicyCheckpoint& c) {
  const int in = actor_input_dim(c.obs_dim, c.team_size);
  std::vector<int> widths;
  if (c.kind == PolicyKind::kDiffusion) {
    widths.push_back(c.act_dim + in + kTimeFeatures);
  } else {
    widths.push_back(in);
  }
  widths.insert(widths.end(), c.hidden.begin(), c.hidden.end());
  widths.push_back(c.kind == PolicyKind::kDiffusion ? c.act_dim
                                                    : 2 * c.act_dim);
  return nn::Mlp(widths, c.activation);
}

}  // namespace

std::vector<nn::Tensor> PolicyCheckpoint::to_tensors() const {
  std::vector<nn::Tensor> out;
  out.push_back(scalar("meta.kind", static_cast<float>(kind)));
  out.push_back(scalar("meta.fp_iteration", static_cast<float>(fp_iteration)));
  out.push_back(scalar("meta.side", static_cast<float>(side)));
  out.push_back(scalar("meta.team_size", static_cast<float>(team_size)));
  out.push_back(scalar("meta.obs_dim", static_cast<float>(obs_dim)));
  out.push_back(scalar("meta.act_dim", static_cast<float>(act_dim)));
  out.push_back(vector_tensor("meta.low", low));
  out.push_back(vector_tensor("meta.high", high));
  out.push_back(vector_tensor("meta.hidden", as_floats(hidden)));
  out.push_back(scalar("meta.activation", static_cast<float>(activation)));
  std::vector<float> seed_bits, hash_bits, beta_bits;
  push_u64(seed_bits, seed);
  push_u64(hash_bits, config_hash);
  for (double b : betas) push_u64(beta_bits, std::bit_cast<uint64_t>(b));
  out.push_back(vector_tensor("meta.seed", seed_bits));
  out.push_back(vector_tensor("meta.config_hash", hash_bits));
  out.push_back({"meta.betas",
                 {static_cast<uint32_t>(betas.size()), 4},
                 std::move(beta_bits)});
  std::vector<float> name_chars;
  for (unsigned char ch : env_name) name_chars.push_back(ch);
  out.push_back(vector_tensor("meta.env", name_chars));
  if (kind == PolicyKind::kConstant) {
    out.push_back(vector_tensor("constant.action", params));
  } else {
    nn::Mlp net = actor_net(*this);
    net.unflatten(params);
    for (nn::Tensor& t : net.to_tensors("actor")) out.push_back(std::move(t));
  }
  return out;
}

PolicyCheckpoint PolicyCheckpoint::from_tensors(
    const std::vector<nn::Tensor>& tensors) {
  const TensorIndex index(tensors);
  PolicyCheckpoint c;
  const int kind = index.integer("meta.kind");
  if (kind < 0 || kind > 2) throw CheckpointFormatError("bad policy kind");
  c.kind = static_cast<PolicyKind>(kind);
  c.fp_iteration = index.integer("meta.fp_iteration");
  c.side = index.integer("meta.side");
  c.team_size = index.integer("meta.team_size");
  c.obs_dim = index.integer("meta.obs_dim");
  c.act_dim = index.integer("meta.act_dim");
  c.low = index.get("meta.low").data;
  c.high = index.get("meta.high").data;
  for (float h : index.get("meta.hidden").data) {
    c.hidden.push_back(static_cast<int>(h));
  }
  const int act = index.integer("meta.activation");
  if (act < 0 || act > 2) throw CheckpointFormatError("bad activation");
  c.activation = static_cast<nn::Activation>(act);
  const auto& seed = index.get("meta.seed").data;
  const auto& hash = index.get("meta.config_hash").data;
  if (seed.size() != 4 || hash.size() != 4) {
    throw CheckpointFormatError("bad 64-bit metadata tensor");
  }
  c.seed = read_u64(seed);
  c.config_hash = read_u64(hash);
  const auto& beta_bits = index.get("meta.betas").data;
  if (beta_bits.size() % 4 != 0) throw CheckpointFormatError("bad betas");
  for (size_t i = 0; i < beta_bits.size(); i += 4) {
    c.betas.push_back(std::bit_cast<double>(
        read_u64(std::span<const float>(beta_bits).subspan(i, 4))));
  }
  for (float ch : index.get("meta.env").data) {
    c.env_name.push_back(static_cast<char>(static_cast<int>(ch)));
  }
  if (c.low.size() != static_cast<size_t>(c.act_dim) ||
      c.high.size() != static_cast<size_t>(c.act_dim) || c.team_size < 1 ||
      c.obs_dim < 1 || c.act_dim < 1) {
    throw CheckpointFormatError("inconsistent checkpoint metadata");
  }
  if (c.kind == PolicyKind::kConstant) {
    c.params = index.get("constant.action").data;
    if (c.params.size() != static_cast<size_t>(c.act_dim)) {
      throw CheckpointFormatError("constant action has the wrong width");
    }
  } else {
    nn::Mlp net = actor_net(c);
    try {
      net.load_tensors(tensors, "actor");
    } catch (const ConfigError& e) {
      throw CheckpointFormatError(std::string("actor tensors: ") + e.what());
    }
    c.params = net.flatten();
  }
  return c;
}

std::shared_ptr<const Policy> PolicyCheckpoint::instantiate() const {
  switch (kind) {
    case PolicyKind::kConstant:
      return std::make_shared<ConstantPolicy>(params);
    case PolicyKind::kDiffusion: {
      auto actor = std::make_shared<DiffusionActor>(
          actor_input_dim(obs_dim, team_size), act_dim,
          NoiseSchedule::from_betas(betas), low, high, hidden, activation);
      actor->net().unflatten(params);
      return std::make_shared<DiffusionPolicy>(std::move(actor), team_size);
    }
    case PolicyKind::kGaussian: {
      auto actor = std::make_shared<GaussianActor>(
          actor_input_dim(obs_dim, team_size), act_dim, low, high, hidden,
          activation);
      actor->net().unflatten(params);
      return std::make_shared<GaussianPolicy>(std::move(actor), team_size);
    }
  }
  throw ConfigError("unknown policy kind");
}

uint64_t PolicyCheckpoint::content_hash() const {
  return fnv1a64(encode_tensors(to_tensors()));
}

// ------------------------------------------------------------- file format

namespace {

constexpr uint8_t kMagic[4] = {'D', 'F', 'P', 'W'};

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<uint8_t>(v >> (8 * k)));
}

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}
  void need(size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw CheckpointFormatError("checkpoint truncated");
    }
  }
  uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  uint16_t u16() {
    need(2);
    const uint16_t v = static_cast<uint16_t>(bytes_[pos_] |
                                             (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
      v |= static_cast<uint32_t>(bytes_[pos_ + k]) << (8 * k);
    }
    pos_ += 4;
    return v;
  }
  std::span<const uint8_t> take(size_t n) {
    need(n);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  size_t pos() const { return pos_; }

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

uint32_t crc32_of(std::span<const uint8_t> bytes) {
  return static_cast<uint32_t>(
      ::crc32(::crc32(0L, Z_NULL, 0), bytes.data(),
              static_cast<uInt>(bytes.size())));
}

}  // namespace

std::vector<uint8_t> encode_tensors(const std::vector<nn::Tensor>& tensors) {
  std::vector<uint8_t> out(kMagic, kMagic + 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<uint32_t>(tensors.size()));
  for (const nn::Tensor& t : tensors) {
    t.validate();
    if (t.name.size() > 0xffff) throw ConfigError("tensor name too long");
    if (t.shape.size() > 0xff) throw ConfigError("tensor rank too large");
    put_u16(out, static_cast<uint16_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    out.push_back(static_cast<uint8_t>(t.shape.size()));
    for (uint32_t d : t.shape) put_u32(out, d);
    for (float f : t.data) put_u32(out, std::bit_cast<uint32_t>(f));
  }
  put_u32(out, crc32_of(out));
  return out;
}

std::vector<nn::Tensor> decode_tensors(std::span<const uint8_t> bytes) {
  if (bytes.size() < 16) throw CheckpointFormatError("checkpoint truncated");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CheckpointFormatError("bad checkpoint magic");
  }
  const auto body = bytes.first(bytes.size() - 4);
  Reader tail(bytes.last(4));
  if (crc32_of(body) != tail.u32()) {
    throw CheckpointFormatError("checkpoint CRC mismatch");
  }
  Reader in(body);
  in.take(4);
  const uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointFormatError("unsupported checkpoint version " +
                                std::to_string(version));
  }
  const uint32_t count = in.u32();
  std::vector<nn::Tensor> out;
  for (uint32_t i = 0; i < count; ++i) {
    nn::Tensor t;
    const uint16_t name_len = in.u16();
    const auto name = in.take(name_len);
    t.name.assign(name.begin(), name.end());
    const uint8_t ndim = in.u8();
    size_t numel = 1;
    for (uint8_t d = 0; d < ndim; ++d) {
      t.shape.push_back(in.u32());
      numel *= t.shape.back();
    }
    in.need(numel * 4);
    t.data.resize(numel);
    for (size_t k = 0; k < numel; ++k) {
      t.data[k] = std::bit_cast<float>(in.u32());
    }
    out.push_back(std::move(t));
  }
  if (in.pos() != body.size()) {
    throw CheckpointFormatError("trailing bytes after the last tensor");
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path,
                     const PolicyCheckpoint& checkpoint) {
  write_file_atomic(path, encode_tensors(checkpoint.to_tensors()));
}

PolicyCheckpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingCheckpointError("missing checkpoint " + path.string());
  }
  return PolicyCheckpoint::from_tensors(decode_tensors(read_file_bytes(path)));
}

}  // namespace difffp
