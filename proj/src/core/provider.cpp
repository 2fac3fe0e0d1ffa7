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

#include "mor/provider.hpp"

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <random>
#include <thread>

#include "mor/error.hpp"

namespace mor {

std::string_view role_name(Role role) noexcept {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

Role parse_role(std::string_view name) {
  if (name == "system") return Role::System;
  if (name == "user") return Role::User;
  if (name == "assistant") return Role::Assistant;
  throw Error(Errc::InvalidArgument, "unknown chat role '" + std::string(name) + "'");
}

std::string_view finish_reason_name(FinishReason reason) noexcept {
  switch (reason) {
    case FinishReason::Stop: return "stop";
    case FinishReason::Length: return "length";
    case FinishReason::Error: return "error";
  }
  return "error";
}

FinishReason parse_finish_reason(std::string_view name) {
  if (name == "stop") return FinishReason::Stop;
  if (name == "length") return FinishReason::Length;
  return FinishReason::Error;
}

void ChatRequest::validate() const {
  if (model_id.empty()) throw Error(Errc::InvalidArgument, "request has no model id");
  if (messages.empty()) throw Error(Errc::InvalidArgument, "request has no messages");
  if (messages.front().role == Role::Assistant)
    throw Error(Errc::InvalidArgument, "first message must be system or user");
  if (!(temperature >= 0.0 && temperature <= 2.0))
    throw Error(Errc::InvalidArgument, "temperature outside [0, 2]");
  if (!(top_p > 0.0 && top_p <= 1.0))
    throw Error(Errc::InvalidArgument, "top_p outside (0, 1]");
  if (max_tokens <= 0) throw Error(Errc::InvalidArgument, "max_tokens must be positive");
}

Json ChatRequest::to_json() const {
  Json msgs = Json::array();
  for (const auto& m : messages)
    msgs.push_back({{"role", role_name(m.role)}, {"content", m.content}});
  return {{"model", model_id},
          {"messages", std::move(msgs)},
          {"temperature", temperature},
          {"top_p", top_p},
          {"max_tokens", max_tokens}};
}

ChatRequest ChatRequest::from_json(const Json& j) {
  try {
    ChatRequest r;
    r.model_id = j.at("model").get<std::string>();
    for (const auto& m : j.at("messages"))
      r.messages.push_back({parse_role(m.at("role").get<std::string>()),
                            m.at("content").get<std::string>()});
    r.temperature = j.value("temperature", 0.0);
    r.top_p = j.value("top_p", 1.0);
    r.max_tokens = j.value("max_tokens", std::int64_t{1024});
    return r;
  } catch (const Json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("bad request JSON: ") + e.what());
  }
}

std::string ChatRequest::joined_content() const {
  std::string out;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (i) out.push_back('\n');
    out += messages[i].content;
  }
  return out;
}

Json ChatResponse::to_json() const {
  return {{"content", content},
          {"finish_reason", finish_reason_name(finish_reason)},
          {"usage",
           {{"prompt_tokens", usage.prompt_tokens},
            {"completion_tokens", usage.completion_tokens}}},
          {"cached", cached}};
}

ChatResponse ChatResponse::from_json(const Json& j) {
  ChatResponse r;
  r.content = j.at("content").get<std::string>();
  r.finish_reason = parse_finish_reason(j.at("finish_reason").get<std::string>());
  if (j.contains("usage")) {
    r.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
    r.usage.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
  }
  r.cached = j.value("cached", false);
  return r;
}

CacheKey CacheKey::of(const ChatRequest& request) {
  return CacheKey{sha256(canonical_json(request.to_json()))};
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_json(const Json& script) {
  auto backend = std::make_shared<ScriptedBackend>();
  if (!script.is_object()) throw Error(Errc::Parse, "script must be a JSON object");
  if (script.contains("default") && !script["default"].is_null())
    backend->set_default(script["default"].get<std::string>());
  if (script.contains("rules")) {
    for (const auto& r : script["rules"]) {
      Rule rule;
      if (r.contains("contains")) {
        rule.kind = Rule::Kind::Contains;
        rule.pattern = r["contains"].get<std::string>();
      } else if (r.contains("digest")) {
        rule.kind = Rule::Kind::Digest;
        rule.pattern = r["digest"].get<std::string>();
      } else {
        throw Error(Errc::Parse, "script rule needs 'contains' or 'digest'");
      }
      if (!r.contains("response")) throw Error(Errc::Parse, "script rule without 'response'");
      rule.response = r["response"].get<std::string>();
      backend->add_rule(std::move(rule));
    }
  }
  return backend;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
  try {
    return from_json(Json::parse(read_file(path)));
  } catch (const Json::exception& e) {
    throw Error(Errc::Parse, path.string() + ": " + e.what());
  }
}

ChatResponse ScriptedBackend::invoke(const ChatRequest& request) {
  const std::string text = request.joined_content();
  std::optional<std::string> reply;
  std::optional<std::string> digest;
  for (const auto& rule : rules_) {
    bool hit = false;
    if (rule.kind == Rule::Kind::Contains) {
      hit = text.find(rule.pattern) != std::string::npos;
    } else {
      if (!digest) digest = CacheKey::of(request).hex();
      hit = *digest == rule.pattern;
    }
    if (hit) {
      reply = rule.response;
      break;
    }
  }
  if (!reply && responder_) reply = responder_(request);
  if (!reply) reply = default_;
  if (!reply) throw Error(Errc::NoMatch, "scripted provider has no reply for request");

  ChatResponse resp;
  resp.content = std::move(*reply);
  resp.usage.prompt_tokens = static_cast<std::int64_t>(text.size() / 4);
  resp.usage.completion_tokens = static_cast<std::int64_t>(resp.content.size() / 4);
  return resp;
}

Provider::Provider(std::shared_ptr<Backend> backend, ProviderOptions options)
    : backend_(std::move(backend)),
      options_(std::move(options)),
      slots_(static_cast<std::ptrdiff_t>(
          std::clamp<std::size_t>(options_.max_concurrency, 1, 1024))) {
  if (!backend_) throw Error(Errc::InvalidArgument, "provider needs a backend");
  if (!options_.retry.sleep)
    options_.retry.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

ChatRequest Provider::make_request(std::vector<ChatMessage> messages, double temperature,
                                   std::int64_t max_tokens) const {
  ChatRequest r;
  r.model_id = options_.model_id;
  r.messages = std::move(messages);
  r.temperature = temperature;
  r.max_tokens = max_tokens;
  return r;
}

std::optional<std::filesystem::path> Provider::cache_path(const CacheKey& key) const {
  if (!options_.cache_dir) return std::nullopt;
  const auto hex = key.hex();
  return *options_.cache_dir / hex.substr(0, 2) / (hex + ".json");
}

std::optional<ChatResponse> Provider::load_from_disk(const CacheKey& key) const {
  const auto path = cache_path(key);
  if (!path || !std::filesystem::exists(*path)) return std::nullopt;
  try {
    const auto entry = Json::parse(read_file(*path));
    auto resp = ChatResponse::from_json(entry.at("response"));
    resp.cached = true;
    return resp;
  } catch (const std::exception& e) {
    spdlog::warn("ignoring unreadable cache entry {}: {}", path->string(), e.what());
    return std::nullopt;
  }
}

void Provider::store_to_disk(const CacheKey& key, const ChatRequest& request,
                             const ChatResponse& response) const {
  const auto path = cache_path(key);
  if (!path) return;
  auto stored = response.to_json();
  stored.erase("cached");
  const Json entry = {{"request", request.to_json()},
                      {"response", std::move(stored)},
                      {"timestamp", utc_now()}};
  write_file_atomic(*path, canonical_json(entry));
}

ChatResponse Provider::call_with_retry(const ChatRequest& request) {
  thread_local std::mt19937_64 jitter_rng{std::random_device{}()};
  const auto& policy = options_.retry;
  for (int attempt = 0;; ++attempt) {
    try {
      slots_.acquire();
      ++backend_calls_;
      struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
      } release{slots_};
      return backend_->invoke(request);
    } catch (const Error& e) {
      if (!e.transient() || attempt >= policy.max_retries) throw;
      auto base = policy.backoff.empty()
                      ? std::chrono::milliseconds(0)
                      : policy.backoff[std::min<std::size_t>(attempt, policy.backoff.size() - 1)];
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      const double factor = 1.0 + policy.jitter * unit(jitter_rng);
      const auto delay = std::chrono::milliseconds(
          static_cast<std::int64_t>(static_cast<double>(base.count()) * factor));
      spdlog::warn("transient provider failure ({}), retry {}/{} in {} ms", e.what(),
                   attempt + 1, policy.max_retries, delay.count());
      policy.sleep(delay);
    } catch (const std::exception& e) {
      throw Error(Errc::Provider, std::string("backend failure: ") + e.what());
    }
  }
}

ChatResponse Provider::complete(const ChatRequest& request) {
  request.validate();
  const auto key = CacheKey::of(request);
  const auto hex = key.hex();

  std::promise<ChatResponse> promise;
  {
    std::unique_lock lock(mu_);
    if (auto it = memo_.find(hex); it != memo_.end()) {
      auto resp = it->second;
      resp.cached = true;
      return resp;
    }
    if (auto it = inflight_.find(hex); it != inflight_.end()) {
      auto fut = it->second;
      lock.unlock();
      auto resp = fut.get();
      resp.cached = true;
      return resp;
    }
    inflight_.emplace(hex, promise.get_future().share());
  }

  try {
    ChatResponse resp;
    if (auto disk = load_from_disk(key)) {
      resp = std::move(*disk);
    } else {
      resp = call_with_retry(request);
      resp.cached = false;
      if (resp.content.empty()) resp.finish_reason = FinishReason::Error;
      if (resp.finish_reason != FinishReason::Error) store_to_disk(key, request, resp);
    }
    {
      std::lock_guard lock(mu_);
      if (resp.finish_reason != FinishReason::Error) memo_[hex] = resp;
      inflight_.erase(hex);
    }
    promise.set_value(resp);
    return resp;
  } catch (...) {
    {
      std::lock_guard lock(mu_);
      inflight_.erase(hex);
    }
    promise.set_exception(std::current_exception());
    throw;
  }
}

std::string api_key_from_env(const std::string& variable) {
  if (variable.empty()) return {};
  const char* v = std::getenv(variable.c_str());
  return v ? std::string(v) : std::string();
}

}  // namespace mor
