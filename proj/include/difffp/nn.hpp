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

#ifndef DIFFFP_NN_HPP_
#define DIFFFP_NN_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "difffp/rng.hpp"

namespace difffp::nn {

// Batches are rows.
using Matrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<float, 1, Eigen::Dynamic>;

// Named dense tensor of 32-bit floats in row-major order. This is the unit
// of the checkpoint file format.
struct Tensor {
  std::string name;
  std::vector<uint32_t> shape;
  std::vector<float> data;

  size_t numel() const;
  // Throws ConfigError if data.size() differs from the product of shape.
  void validate() const;
};

enum class Activation { kRelu, kTanh, kMish };

const char* activation_name(Activation activation);
Activation activation_from_name(const std::string& name);

// Fully connected network: affine + activation per hidden layer, linear
// output. All parameters live in one contiguous vector (per layer: weight
// [in x out] row-major, then bias [out]) so optimizers and Polyak averaging
// work on flat spans.
class Mlp {
 public:
  // Intermediate values recorded by forward() and consumed by backward().
  struct Tape {
    std::vector<Matrix> inputs;
    std::vector<Matrix> pre;
  };

  Mlp() = default;
  // widths = {input, hidden..., output}; at least two entries.
  Mlp(std::vector<int> widths, Activation hidden_activation);

  int input_dim() const { return widths_.front(); }
  int output_dim() const { return widths_.back(); }
  int num_layers() const { return static_cast<int>(widths_.size()) - 1; }
  const std::vector<int>& widths() const { return widths_; }
  Activation activation() const { return activation_; }

  size_t num_params() const { return params_.size(); }
  std::span<float> params() { return params_; }
  std::span<const float> params() const { return params_; }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)); the output layer is further
  // scaled by output_scale.
  void init(Rng& rng, float output_scale = 1.0f);

  Eigen::Map<const Matrix> weight(int layer) const;
  Eigen::Map<Matrix> weight(int layer);
  Eigen::Map<const RowVector> bias(int layer) const;
  Eigen::Map<RowVector> bias(int layer);

  Matrix forward(const Matrix& input, Tape* tape = nullptr) const;
  // Adds parameter gradients into `grads` (num_params entries) and returns
  // the gradient with respect to the input batch.
  Matrix backward(const Tape& tape, const Matrix& upstream,
                  std::span<float> grads) const;

  std::vector<float> flatten() const { return params_; }
  void unflatten(std::span<const float> values);

  std::vector<Tensor> to_tensors(const std::string& prefix) const;
  // Loads parameters from tensors named like to_tensors(prefix) produced.
  void load_tensors(const std::vector<Tensor>& tensors,
                    const std::string& prefix);

 private:
  size_t weight_offset(int layer) const { return offsets_[layer]; }
  size_t bias_offset(int layer) const {
    return offsets_[layer] +
           static_cast<size_t>(widths_[layer]) * widths_[layer + 1];
  }

  std::vector<int> widths_;
  Activation activation_ = Activation::kRelu;
  std::vector<size_t> offsets_;
  std::vector<float> params_;
};

// Single-sample conveniences.
std::vector<float> mlp_forward(const Mlp& net, std::span<const float> input);

struct MlpGradients {
  std::vector<float> params;
  std::vector<float> input;
};
MlpGradients mlp_backward(const Mlp& net, std::span<const float> input,
                          std::span<const float> upstream);

struct AdamState {
  AdamState() = default;
  AdamState(size_t num_params, float learning_rate);

  std::vector<float> m;
  std::vector<float> v;
  int64_t step = 0;
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
};

// Bias-corrected Adam. Non-finite gradients raise NumericError.
void adam_step(AdamState& state, std::span<float> params,
               std::span<const float> grads);

// target <- (1 - tau) * target + tau * online.
void polyak_update(std::span<float> target, std::span<const float> online,
                   float tau);

// Raises NumericError naming `what` if any value is NaN or infinite.
void check_finite(std::span<const float> values, const std::string& what);

}  // namespace difffp::nn

#endif  // DIFFFP_NN_HPP_
