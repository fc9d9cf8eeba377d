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

#include "difffp/nn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "difffp/errors.hpp"

namespace difffp::nn {
namespace {

float softplus(float x) {
  return x > 20.0f ? x : std::log1p(std::exp(x));
}

float activate(Activation act, float x) {
  switch (act) {
    case Activation::kRelu: return x > 0.0f ? x : 0.0f;
    case Activation::kTanh: return std::tanh(x);
    case Activation::kMish: return x * std::tanh(softplus(x));
  }
  return x;
}

float activate_grad(Activation act, float x) {
  switch (act) {
    case Activation::kRelu: return x > 0.0f ? 1.0f : 0.0f;
    case Activation::kTanh: {
      const float t = std::tanh(x);
      return 1.0f - t * t;
    }
    case Activation::kMish: {
      const float t = std::tanh(softplus(x));
      const float sigmoid = 1.0f / (1.0f + std::exp(-x));
      return t + x * (1.0f - t * t) * sigmoid;
    }
  }
  return 1.0f;
}

}  // namespace

size_t Tensor::numel() const {
  return std::accumulate(shape.begin(), shape.end(), size_t{1},
                         std::multiplies<size_t>());
}

void Tensor::validate() const {
  if (data.size() != numel()) {
    throw ConfigError("tensor '" + name + "': data length " +
                      std::to_string(data.size()) + " != shape product " +
                      std::to_string(numel()));
  }
}

const char* activation_name(Activation activation) {
  switch (activation) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kMish: return "mish";
  }
  return "relu";
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "mish") return Activation::kMish;
  throw ConfigError("unknown activation '" + name + "'");
}

Mlp::Mlp(std::vector<int> widths, Activation hidden_activation)
    : widths_(std::move(widths)), activation_(hidden_activation) {
  if (widths_.size() < 2) throw ConfigError("mlp needs at least two widths");
  for (int w : widths_) {
    if (w <= 0) throw ConfigError("mlp widths must be positive");
  }
  size_t total = 0;
  for (int l = 0; l < num_layers(); ++l) {
    offsets_.push_back(total);
    total += static_cast<size_t>(widths_[l]) * widths_[l + 1] + widths_[l + 1];
  }
  params_.assign(total, 0.0f);
}

void Mlp::init(Rng& rng, float output_scale) {
  for (int l = 0; l < num_layers(); ++l) {
    const float bound = 1.0f / std::sqrt(static_cast<float>(widths_[l]));
    const float scale = l + 1 == num_layers() ? output_scale : 1.0f;
    std::uniform_real_distribution<float> dist(-bound, bound);
    auto w = weight(l);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = scale * dist(rng);
    auto b = bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = scale * dist(rng);
  }
}

Eigen::Map<const Matrix> Mlp::weight(int layer) const {
  return {params_.data() + weight_offset(layer), widths_[layer],
          widths_[layer + 1]};
}

Eigen::Map<Matrix> Mlp::weight(int layer) {
  return {params_.data() + weight_offset(layer), widths_[layer],
          widths_[layer + 1]};
}

Eigen::Map<const RowVector> Mlp::bias(int layer) const {
  return {params_.data() + bias_offset(layer), widths_[layer + 1]};
}

Eigen::Map<RowVector> Mlp::bias(int layer) {
  return {params_.data() + bias_offset(layer), widths_[layer + 1]};
}

Matrix Mlp::forward(const Matrix& input, Tape* tape) const {
  if (input.cols() != input_dim()) {
    throw ConfigError("mlp input width " + std::to_string(input.cols()) +
                      " != " + std::to_string(input_dim()));
  }
  if (tape != nullptr) {
    tape->inputs.resize(num_layers());
    tape->pre.resize(num_layers());
  }
  Matrix h = input;
  for (int l = 0; l < num_layers(); ++l) {
    Matrix z = h * weight(l);
    z.rowwise() += bias(l);
    if (tape != nullptr) {
      tape->inputs[l] = std::move(h);
      tape->pre[l] = z;
    }
    if (l + 1 < num_layers()) {
      const Activation act = activation_;
      h = z.unaryExpr([act](float x) { return activate(act, x); });
    } else {
      h = std::move(z);
    }
  }
  return h;
}

Matrix Mlp::backward(const Tape& tape, const Matrix& upstream,
                     std::span<float> grads) const {
  if (upstream.cols() != output_dim()) {
    throw ConfigError("mlp upstream width " + std::to_string(upstream.cols()) +
                      " != " + std::to_string(output_dim()));
  }
  if (grads.size() != params_.size()) {
    throw ConfigError("mlp gradient buffer has the wrong size");
  }
  if (tape.pre.size() != static_cast<size_t>(num_layers())) {
    throw ConfigError("mlp backward called without a forward tape");
  }
  Matrix g = upstream;
  for (int l = num_layers() - 1; l >= 0; --l) {
    if (l + 1 < num_layers()) {
      const Activation act = activation_;
      g.array() *= tape.pre[l]
                       .unaryExpr([act](float x) { return activate_grad(act, x); })
                       .array();
    }
    Eigen::Map<Matrix> gw(grads.data() + weight_offset(l), widths_[l],
                          widths_[l + 1]);
    Eigen::Map<RowVector> gb(grads.data() + bias_offset(l), widths_[l + 1]);
    gw.noalias() += tape.inputs[l].transpose() * g;
    gb += g.colwise().sum();
    g = g * weight(l).transpose();
  }
  return g;
}

void Mlp::unflatten(std::span<const float> values) {
  if (values.size() != params_.size()) {
    throw ConfigError("mlp unflatten: expected " +
                      std::to_string(params_.size()) + " values, got " +
                      std::to_string(values.size()));
  }
  std::copy(values.begin(), values.end(), params_.begin());
}

std::vector<Tensor> Mlp::to_tensors(const std::string& prefix) const {
  std::vector<Tensor> out;
  for (int l = 0; l < num_layers(); ++l) {
    const auto in = static_cast<uint32_t>(widths_[l]);
    const auto outw = static_cast<uint32_t>(widths_[l + 1]);
    Tensor w{prefix + ".l" + std::to_string(l) + ".weight", {in, outw}, {}};
    w.data.assign(params_.begin() + weight_offset(l),
                  params_.begin() + bias_offset(l));
    Tensor b{prefix + ".l" + std::to_string(l) + ".bias", {outw}, {}};
    b.data.assign(params_.begin() + bias_offset(l),
                  params_.begin() + bias_offset(l) + outw);
    out.push_back(std::move(w));
    out.push_back(std::move(b));
  }
  return out;
}

void Mlp::load_tensors(const std::vector<Tensor>& tensors,
                       const std::string& prefix) {
  auto find = [&](const std::string& name) -> const Tensor& {
    for (const auto& t : tensors) {
      if (t.name == name) return t;
    }
    throw ConfigError("missing tensor '" + name + "'");
  };
  for (int l = 0; l < num_layers(); ++l) {
    const Tensor& w = find(prefix + ".l" + std::to_string(l) + ".weight");
    const Tensor& b = find(prefix + ".l" + std::to_string(l) + ".bias");
    w.validate();
    b.validate();
    const std::vector<uint32_t> wshape{static_cast<uint32_t>(widths_[l]),
                                       static_cast<uint32_t>(widths_[l + 1])};
    if (w.shape != wshape ||
        b.shape != std::vector<uint32_t>{wshape[1]}) {
      throw ConfigError("tensor shape mismatch for layer " +
                        std::to_string(l) + " of '" + prefix + "'");
    }
    std::copy(w.data.begin(), w.data.end(),
              params_.begin() + weight_offset(l));
    std::copy(b.data.begin(), b.data.end(), params_.begin() + bias_offset(l));
  }
}

std::vector<float> mlp_forward(const Mlp& net, std::span<const float> input) {
  Matrix x = Eigen::Map<const Matrix>(input.data(), 1,
                                      static_cast<Eigen::Index>(input.size()));
  Matrix y = net.forward(x);
  return {y.data(), y.data() + y.size()};
}

MlpGradients mlp_backward(const Mlp& net, std::span<const float> input,
                          std::span<const float> upstream) {
  Matrix x = Eigen::Map<const Matrix>(input.data(), 1,
                                      static_cast<Eigen::Index>(input.size()));
  Mlp::Tape tape;
  net.forward(x, &tape);
  Matrix up = Eigen::Map<const Matrix>(
      upstream.data(), 1, static_cast<Eigen::Index>(upstream.size()));
  MlpGradients out;
  out.params.assign(net.num_params(), 0.0f);
  Matrix gin = net.backward(tape, up, out.params);
  out.input.assign(gin.data(), gin.data() + gin.size());
  return out;
}

AdamState::AdamState(size_t num_params, float learning_rate)
    : m(num_params, 0.0f), v(num_params, 0.0f), lr(learning_rate) {}

void adam_step(AdamState& state, std::span<float> params,
               std::span<const float> grads) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ConfigError("adam: parameter, gradient, and state sizes differ");
  }
  check_finite(grads, "adam gradient");
  state.step += 1;
  const double c1 = 1.0 - std::pow(static_cast<double>(state.beta1),
                                   static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(static_cast<double>(state.beta2),
                                   static_cast<double>(state.step));
  const float b1 = state.beta1;
  const float b2 = state.beta2;
  for (size_t i = 0; i < params.size(); ++i) {
    const float g = grads[i];
    state.m[i] = b1 * state.m[i] + (1.0f - b1) * g;
    state.v[i] = b2 * state.v[i] + (1.0f - b2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= static_cast<float>(state.lr * m_hat /
                                    (std::sqrt(v_hat) + state.eps));
  }
}

void polyak_update(std::span<float> target, std::span<const float> online,
                   float tau) {
  if (target.size() != online.size()) {
    throw ConfigError("polyak: size mismatch");
  }
  if (!(tau >= 0.0f && tau <= 1.0f)) throw ConfigError("polyak: tau outside [0, 1]");
  for (size_t i = 0; i < target.size(); ++i) {
    target[i] = (1.0f - tau) * target[i] + tau * online[i];
  }
}

void check_finite(std::span<const float> values, const std::string& what) {
  for (size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericError(what + ": non-finite value at index " +
                         std::to_string(i));
    }
  }
}

}  // namespace difffp::nn
