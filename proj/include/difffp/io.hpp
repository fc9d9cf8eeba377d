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

#ifndef DIFFFP_IO_HPP_
#define DIFFFP_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace difffp {

// FNV-1a, 64-bit.
uint64_t fnv1a64(std::span<const uint8_t> bytes,
                 uint64_t basis = 0xcbf29ce484222325ULL);
uint64_t fnv1a64(std::string_view text);

std::string hex64(uint64_t value);

// Writes to a sibling temporary file and renames it over `path`, creating
// parent directories as needed.
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view text);

// Throws MissingCheckpointError when the file cannot be opened.
std::vector<uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);

}  // namespace difffp

#endif  // DIFFFP_IO_HPP_
