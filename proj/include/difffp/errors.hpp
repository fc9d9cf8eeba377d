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

#ifndef DIFFFP_ERRORS_HPP_
#define DIFFFP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace difffp {

// Invalid configuration, shapes, or arguments. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values produced during training or sampling (exit code 3).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A checkpoint or FP iteration that does not exist on disk (exit code 4).
class MissingCheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A checkpoint file that fails validation: bad magic, version, CRC, or
// layout (exit code 4).
class CheckpointFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The environment has no positional state to trace (exit code 5).
class NotTraceableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace difffp

#endif  // DIFFFP_ERRORS_HPP_
