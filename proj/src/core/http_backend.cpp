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

#include <httplib.h>

#include "mor/error.hpp"
#include "mor/provider.hpp"

namespace mor {
namespace {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw Error(Errc::Config, "endpoint must start with http:// or https://: " + url);
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    throw Error(Errc::Config, "unsupported endpoint scheme '" + scheme + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendOptions options)
      : options_(std::move(options)), endpoint_(split_endpoint(options_.endpoint)) {}

  ChatResponse invoke(const ChatRequest& request) override {
    httplib::Client client(endpoint_.base);
    client.set_connection_timeout(std::chrono::seconds(30));
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);
    httplib::Headers headers;
    if (!options_.api_key.empty())
      headers.emplace("Authorization", "Bearer " + options_.api_key);

    const auto body = canonical_json(request.to_json());
    auto res = client.Post(endpoint_.path, headers, body, "application/json");
    if (!res)
      throw Error(Errc::Unavailable, "transport error: " + httplib::to_string(res.error()));

    const int status = res->status;
    if (status == 401 || status == 403)
      throw Error(Errc::Auth, "endpoint rejected credentials (HTTP " + std::to_string(status) + ")");
    if (status == 429) throw Error(Errc::RateLimited, "rate limited (HTTP 429)");
    if (status >= 500)
      throw Error(Errc::Unavailable, "server error (HTTP " + std::to_string(status) + ")");
    if (status != 200)
      throw Error(Errc::Provider, "unexpected HTTP " + std::to_string(status) + ": " +
                                      res->body.substr(0, 200));
    return parse(res->body);
  }

 private:
  static ChatResponse parse(const std::string& body) {
    try {
      const auto doc = Json::parse(body);
      const auto& choice = doc.at("choices").at(0);
      ChatResponse resp;
      const auto& content = choice.at("message").at("content");
      resp.content = content.is_null() ? std::string() : content.get<std::string>();
      const auto finish = choice.value("finish_reason", std::string("stop"));
      resp.finish_reason = parse_finish_reason(finish.empty() ? "stop" : finish);
      if (doc.contains("usage") && doc["usage"].is_object()) {
        resp.usage.prompt_tokens = doc["usage"].value("prompt_tokens", std::int64_t{0});
        resp.usage.completion_tokens = doc["usage"].value("completion_tokens", std::int64_t{0});
      }
      return resp;
    } catch (const Json::exception& e) {
      throw Error(Errc::MalformedResponse, std::string("unparseable completion: ") + e.what());
    }
  }

  HttpBackendOptions options_;
  Endpoint endpoint_;
};

}  // namespace

std::shared_ptr<Backend> make_http_backend(HttpBackendOptions options) {
  return std::make_shared<HttpBackend>(std::move(options));
}

}  // namespace mor
