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

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mor {

// Every failure the library raises carries one of these codes. The C API
// maps them one-to-one onto mor_status.
enum class Errc {
  InvalidArgument,
  Config,
  Parse,
  Io,
  Auth,
  RateLimited,
  Unavailable,  // transient transport / 5xx failure
  MalformedResponse,
  Provider,
  NoMatch,
  BudgetExhausted,
  DuplicateId,
  NotEnoughSamples,
  MissingSetting,
  KTooLarge,
  ConfigMismatch,
  MissingDataset,
  WrongArity,
  UnknownKind,
  UnsupportedDataset,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  // Parse errors point at a 1-based line of the offending file.
  Error(Errc code, const std::string& message, std::size_t line)
      : std::runtime_error(message + " (line " + std::to_string(line) + ")"),
        code_(code),
        line_(line) {}

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

  // Transient failures are the only ones the provider retries.
  bool transient() const noexcept {
    return code_ == Errc::RateLimited || code_ == Errc::Unavailable;
  }

 private:
  Errc code_;
  std::optional<std::size_t> line_;
};

}  // namespace mor
