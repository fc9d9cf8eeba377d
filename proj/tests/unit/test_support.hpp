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

#ifndef DIFFFP_TESTS_TEST_SUPPORT_HPP_
#define DIFFFP_TESTS_TEST_SUPPORT_HPP_

#include <cmath>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "difffp/checkpoint.hpp"
#include "difffp/game.hpp"
#include "difffp/mixture.hpp"
#include "difffp/nn.hpp"

namespace difffp::testing {

inline PolicyCheckpoint constant_checkpoint(float action, int iteration = 0,
                                            int side = kEgoSide) {
  PolicyCheckpoint c;
  c.kind = PolicyKind::kConstant;
  c.fp_iteration = iteration;
  c.side = side;
  c.low = {-1.0f};
  c.high = {1.0f};
  c.params = {action};
  c.env_name = "scalar-duel";
  return c;
}

// Uniform mixture over constant one-dimensional actions.
inline MixturePolicy constant_mixture(const std::vector<float>& actions,
                                      int side = kEgoSide) {
  MixturePolicy mix;
  for (size_t i = 0; i < actions.size(); ++i) {
    mix = mixture_update(
        mix, constant_checkpoint(actions[i], static_cast<int>(i), side));
  }
  return mix;
}

// Reference forward pass in double precision, written against the
// documented parameter layout rather than the library's forward().
inline double activate(nn::Activation act, double x) {
  switch (act) {
    case nn::Activation::kRelu:
      return x > 0.0 ? x : 0.0;
    case nn::Activation::kTanh:
      return std::tanh(x);
    case nn::Activation::kMish:
      return x * std::tanh(std::log1p(std::exp(x)));
  }
  return x;
}

inline std::vector<double> reference_forward(
    const std::vector<int>& widths, nn::Activation act,
    const std::vector<double>& params, const std::vector<double>& input) {
  std::vector<double> h = input;
  size_t offset = 0;
  const size_t layers = widths.size() - 1;
  for (size_t l = 0; l < layers; ++l) {
    const int in = widths[l];
    const int out = widths[l + 1];
    std::vector<double> next(out, 0.0);
    for (int o = 0; o < out; ++o) {
      double sum = params[offset + static_cast<size_t>(in) * out + o];
      for (int i = 0; i < in; ++i) {
        sum += h[i] * params[offset + static_cast<size_t>(i) * out + o];
      }
      next[o] = l + 1 < layers ? activate(act, sum) : sum;
    }
    offset += static_cast<size_t>(in) * out + out;
    h = std::move(next);
  }
  return h;
}

inline double relative_error(double a, double b, double floor = 1e-3) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("difffp_test_" + name + "_" +
                    std::to_string(std::random_device{}()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace difffp::testing

#endif  // DIFFFP_TESTS_TEST_SUPPORT_HPP_
