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

#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ontosql {

enum class Role { kSystem, kUser, kAssistant };

std::string_view to_string(Role role);

struct ChatMessage {
  Role role = Role::kUser;
  std::string text;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_output_tokens = 4096;

  /// Throws std::invalid_argument: no messages, negative temperature,
  /// non-positive token cap, or two assistant messages in a row.
  void validate() const;

  /// SHA-256 over the message texts joined by U+001E; the scripted provider
  /// key and the id attached to provider errors.
  std::string fingerprint() const;

  std::size_t estimated_tokens() const;
};

/// Budget heuristic: ceil(code points / 4).
std::size_t estimate_tokens(std::string_view text);

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string chat(const ChatRequest& request) = 0;
  virtual std::string id() const = 0;
};

/// Replays canned replies. A reply is looked up by request fingerprint
/// first, then taken from the ordered sequence, then the default reply.
/// Script document:
///   {"by_hash": {"<sha256>": "reply"}, "sequence": ["reply", ...],
///    "default": "reply"}
/// All keys optional.
class ScriptedChatProvider final : public ChatProvider {
 public:
  ScriptedChatProvider() = default;
  static std::unique_ptr<ScriptedChatProvider> from_file(const std::filesystem::path& path);
  static std::unique_ptr<ScriptedChatProvider> from_json(std::string_view document);

  void add_reply(std::string fingerprint, std::string reply);
  void push_sequence(std::string reply);
  void set_default(std::string reply);

  std::string chat(const ChatRequest& request) override;
  std::string id() const override { return "scripted"; }

  std::size_t call_count() const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::string> by_hash_;
  std::vector<std::string> sequence_;
  std::size_t cursor_ = 0;
  std::optional<std::string> default_;
  std::size_t calls_ = 0;
};

/// Passes requests through and remembers (fingerprint, reply) pairs so a run
/// can be frozen into a hash-keyed script.
class RecordingChatProvider final : public ChatProvider {
 public:
  explicit RecordingChatProvider(std::shared_ptr<ChatProvider> inner)
      : inner_(std::move(inner)) {}

  std::string chat(const ChatRequest& request) override;
  std::string id() const override { return inner_->id(); }

  /// {"by_hash": {...}} document, keys sorted.
  std::string to_script_json() const;

 private:
  std::shared_ptr<ChatProvider> inner_;
  mutable std::mutex mu_;
  std::vector<std::pair<std::string, std::string>> records_;
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_delay{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_delay{8000};
};

/// Retries TransientProviderError with exponential backoff; exhaustion
/// becomes ProviderError carrying the request fingerprint.
class RetryingChatProvider final : public ChatProvider {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  RetryingChatProvider(std::shared_ptr<ChatProvider> inner, RetryPolicy policy,
                       Sleeper sleeper = {});

  std::string chat(const ChatRequest& request) override;
  std::string id() const override { return inner_->id(); }

 private:
  std::shared_ptr<ChatProvider> inner_;
  RetryPolicy policy_;
  Sleeper sleeper_;
};

struct HttpEndpoint {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key;
  std::chrono::seconds timeout{120};
};

/// OpenAI-compatible /chat/completions client. 429, 5xx and transport
/// failures are transient; other non-200 responses are permanent.
class HttpChatProvider final : public ChatProvider {
 public:
  explicit HttpChatProvider(HttpEndpoint endpoint);
  std::string chat(const ChatRequest& request) override;
  std::string id() const override { return "http:" + endpoint_.model; }

 private:
  HttpEndpoint endpoint_;
};

}  // namespace ontosql
