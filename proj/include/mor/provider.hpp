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

// Chat-completion gateway. A Provider wraps one Backend (live HTTP or a
// scripted mock) with a content-addressed response cache, single-flight
// deduplication of concurrent identical requests, bounded concurrency and
// retry of transient failures.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "mor/util.hpp"

namespace mor {

enum class Role { System, User, Assistant };

std::string_view role_name(Role role) noexcept;
Role parse_role(std::string_view name);

struct ChatMessage {
  Role role = Role::User;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  double top_p = 1.0;
  std::int64_t max_tokens = 1024;

  // Throws InvalidArgument on an empty message list, a leading assistant
  // turn, or out-of-range sampling parameters.
  void validate() const;

  Json to_json() const;
  static ChatRequest from_json(const Json& j);

  // All user-visible text concatenated; what scripted matchers look at.
  std::string joined_content() const;

  bool operator==(const ChatRequest&) const = default;
};

enum class FinishReason { Stop, Length, Error };

std::string_view finish_reason_name(FinishReason reason) noexcept;
FinishReason parse_finish_reason(std::string_view name);

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  bool operator==(const Usage&) const = default;
};

struct ChatResponse {
  std::string content;
  FinishReason finish_reason = FinishReason::Stop;
  Usage usage;
  bool cached = false;

  Json to_json() const;
  static ChatResponse from_json(const Json& j);
};

// SHA-256 of the canonical request serialization. Model id and every
// sampling parameter take part, so switching teachers never aliases.
struct CacheKey {
  Sha256Digest digest{};

  static CacheKey of(const ChatRequest& request);
  std::string hex() const { return to_hex(digest); }

  bool operator==(const CacheKey&) const = default;
};

class Backend {
 public:
  virtual ~Backend() = default;
  // Performs one call. Throws mor::Error; transient() errors are retried by
  // the Provider.
  virtual ChatResponse invoke(const ChatRequest& request) = 0;
};

// Deterministic mock. Rules are tried in declaration order, first match
// wins; with no match the default reply (if any) is served, otherwise the
// responder callback, otherwise NoMatch is thrown.
class ScriptedBackend final : public Backend {
 public:
  struct Rule {
    enum class Kind { Contains, Digest } kind = Kind::Contains;
    std::string pattern;  // substring of joined_content(), or CacheKey hex
    std::string response;
  };
  using Responder = std::function<std::optional<std::string>(const ChatRequest&)>;

  ScriptedBackend() = default;
  ScriptedBackend(std::vector<Rule> rules, std::optional<std::string> fallback)
      : rules_(std::move(rules)), default_(std::move(fallback)) {}
  explicit ScriptedBackend(Responder responder) : responder_(std::move(responder)) {}

  // Script file: {"default": "...", "rules": [{"contains"|"digest": "...",
  // "response": "..."}]}
  static std::shared_ptr<ScriptedBackend> from_json(const Json& script);
  static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

  void add_rule(Rule rule) { rules_.push_back(std::move(rule)); }
  void set_default(std::string reply) { default_ = std::move(reply); }
  void set_responder(Responder responder) { responder_ = std::move(responder); }

  ChatResponse invoke(const ChatRequest& request) override;

 private:
  std::vector<Rule> rules_;
  std::optional<std::string> default_;
  Responder responder_;
};

struct RetryPolicy {
  int max_retries = 3;
  std::vector<std::chrono::milliseconds> backoff{std::chrono::seconds(1),
                                                 std::chrono::seconds(4),
                                                 std::chrono::seconds(16)};
  double jitter = 0.2;
  // Replaced in tests to avoid real sleeps.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct ProviderOptions {
  std::string model_id;
  std::optional<std::filesystem::path> cache_dir;
  std::size_t max_concurrency = 8;
  RetryPolicy retry;
};

class Provider {
 public:
  Provider(std::shared_ptr<Backend> backend, ProviderOptions options);
  Provider(const Provider&) = delete;
  Provider& operator=(const Provider&) = delete;

  const std::string& model_id() const noexcept { return options_.model_id; }

  // Request pre-filled with this provider's model id.
  ChatRequest make_request(std::vector<ChatMessage> messages,
                           double temperature = 0.0,
                           std::int64_t max_tokens = 1024) const;

  ChatResponse complete(const ChatRequest& request);

  // Number of times the backend was actually invoked (including failed
  // attempts). Cache hits and single-flight joins do not count.
  std::uint64_t backend_calls() const noexcept { return backend_calls_.load(); }

  std::optional<std::filesystem::path> cache_path(const CacheKey& key) const;

 private:
  ChatResponse call_with_retry(const ChatRequest& request);
  std::optional<ChatResponse> load_from_disk(const CacheKey& key) const;
  void store_to_disk(const CacheKey& key, const ChatRequest& request,
                     const ChatResponse& response) const;

  std::shared_ptr<Backend> backend_;
  ProviderOptions options_;
  std::counting_semaphore<1024> slots_;
  std::atomic<std::uint64_t> backend_calls_{0};

  std::mutex mu_;
  std::map<std::string, ChatResponse> memo_;
  std::map<std::string, std::shared_future<ChatResponse>> inflight_;
};

using ProviderHandle = std::shared_ptr<Provider>;

// Live OpenAI-style chat-completions backend.
struct HttpBackendOptions {
  std::string endpoint;  // e.g. https://api.openai.com/v1/chat/completions
  std::string api_key;   // sent as a bearer token when non-empty
  std::chrono::seconds timeout{120};
};

std::shared_ptr<Backend> make_http_backend(HttpBackendOptions options);

// Reads the credential from the named environment variable (empty if unset).
std::string api_key_from_env(const std::string& variable);

}  // namespace mor
