// Copyright 2026 The ontosql Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"
#include "ontosql/chat.hpp"
#include "ontosql/embedding.hpp"
#include "ontosql/errors.hpp"

namespace ontosql {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base URL needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

nlohmann::json post_json(const HttpEndpoint& endpoint, const std::string& route,
                         const nlohmann::json& body) {
  const auto url = split_url(endpoint.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(std::chrono::seconds(30));
  client.set_read_timeout(endpoint.timeout);
  client.set_write_timeout(endpoint.timeout);
  httplib::Headers headers;
  if (!endpoint.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint.api_key);

  auto res = client.Post(url.path + route, headers, body.dump(), "application/json");
  if (!res) {
    throw TransientProviderError("transport error: " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw TransientProviderError("HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw ProviderError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500));
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProviderError(std::string("malformed provider response: ") + e.what());
  }
}

}  // namespace

HttpChatProvider::HttpChatProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  split_url(endpoint_.base_url);
  if (endpoint_.model.empty()) throw ConfigError("chat model name is empty");
}

std::string HttpChatProvider::chat(const ChatRequest& request) {
  request.validate();
  nlohmann::json body;
  body["model"] = endpoint_.model;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output_tokens;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : request.messages) {
    body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.text}});
  }
  const auto doc = post_json(endpoint_, "/chat/completions", body);
  try {
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string{} : content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("unexpected chat response shape: ") + e.what(),
                        request.fingerprint());
  }
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed(std::span<const std::string> texts) {
  if (texts.empty()) return {};
  nlohmann::json body;
  body["model"] = endpoint_.model;
  body["input"] = std::vector<std::string>(texts.begin(), texts.end());
  const auto doc = post_json(endpoint_, "/embeddings", body);
  std::vector<EmbeddingVector> out;
  try {
    const auto& data = doc.at("data");
    if (data.size() != texts.size()) throw ProviderError("embedding response has wrong count");
    std::vector<std::optional<EmbeddingVector>> slots(texts.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto idx = data[i].value("index", i);
      if (idx >= slots.size()) throw ProviderError("embedding response index out of range");
      slots[idx].emplace(data[i].at("embedding").get<std::vector<double>>());
    }
    for (auto& s : slots) {
      if (!s) throw ProviderError("embedding response is missing an index");
      out.push_back(std::move(*s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("unexpected embedding response shape: ") + e.what());
  }
  return out;
}

}  // namespace ontosql
