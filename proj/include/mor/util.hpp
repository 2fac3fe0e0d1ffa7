// Copyright 2026 The MoR Forge Authors.
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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mor {

using Json = nlohmann::json;

using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::string_view data);
std::string to_hex(std::span<const std::uint8_t> bytes);
inline std::string sha256_hex(std::string_view data) { return to_hex(sha256(data)); }

// First 8 digest bytes as a big-endian integer; used to derive per-item seeds.
std::uint64_t sha256_u64(std::string_view data);

// Canonical JSON text: sorted keys (nlohmann's std::map ordering), no
// whitespace, shortest round-trip number formatting. Byte-stable.
std::string canonical_json(const Json& value);

// Uniform integer in [0, bound) from raw mt19937_64 output by rejection.
// std::uniform_int_distribution is implementation-defined, so it cannot
// back artifacts that must be byte-identical across toolchains.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

// First `count` positions of a Fisher-Yates shuffle of [0, n). Drawing a
// shorter prefix with the same seed yields a prefix of the longer draw.
std::vector<std::size_t> shuffled_prefix(std::size_t n, std::size_t count,
                                         std::uint64_t seed);

std::string ascii_lower(std::string_view text);
std::string trim(std::string_view text);
std::string collapse_whitespace(std::string_view text);
std::vector<std::string> split_lines(std::string_view text);

// ISO-8601 UTC, second resolution: 2026-01-31T12:00:00Z
std::string format_utc(std::int64_t unix_seconds);
std::string utc_now();

std::string read_file(const std::filesystem::path& path);

// Write to a sibling temp file, then rename over the target. Readers never
// observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

// Reads JSON Lines, or a single top-level JSON array of records. Blank lines
// are skipped; line numbers in errors are 1-based.
std::vector<Json> read_json_records(const std::filesystem::path& path);

// Runs fn(i) for i in [0, count) on up to `workers` threads. The first
// exception stops further work and is rethrown after all threads join.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace mor
