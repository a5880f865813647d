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

#include "ontosql/chat.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "ontosql/errors.hpp"
#include "ontosql/util.hpp"

namespace ontosql {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

void ChatRequest::validate() const {
  if (messages.empty()) throw std::invalid_argument("chat request has no messages");
  if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
  if (max_output_tokens <= 0) throw std::invalid_argument("max_output_tokens must be positive");
  for (std::size_t i = 1; i < messages.size(); ++i) {
    if (messages[i].role == Role::kAssistant && messages[i - 1].role == Role::kAssistant) {
      throw std::invalid_argument("two consecutive assistant messages");
    }
  }
}

std::string ChatRequest::fingerprint() const {
  std::string joined;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (i > 0) joined.push_back('\x1e');
    joined += messages[i].text;
  }
  return sha256_hex(joined);
}

std::size_t estimate_tokens(std::string_view text) {
  std::size_t code_points = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++code_points;
  }
  return (code_points + 3) / 4;
}

std::size_t ChatRequest::estimated_tokens() const {
  std::size_t total = 0;
  for (const auto& m : messages) total += estimate_tokens(m.text);
  return total;
}

std::unique_ptr<ScriptedChatProvider> ScriptedChatProvider::from_json(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("chat script: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("chat script: expected an object");
  auto provider = std::make_unique<ScriptedChatProvider>();
  try {
    if (doc.contains("by_hash")) {
      for (const auto& [hash, reply] : doc["by_hash"].items()) {
        provider->add_reply(hash, reply.get<std::string>());
      }
    }
    if (doc.contains("sequence")) {
      for (const auto& reply : doc["sequence"]) provider->push_sequence(reply.get<std::string>());
    }
    if (doc.contains("default")) provider->set_default(doc["default"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("chat script: ") + e.what());
  }
  return provider;
}

std::unique_ptr<ScriptedChatProvider> ScriptedChatProvider::from_file(
    const std::filesystem::path& path) {
  return from_json(read_file(path));
}

void ScriptedChatProvider::add_reply(std::string fingerprint, std::string reply) {
  std::lock_guard lock(mu_);
  by_hash_[std::move(fingerprint)] = std::move(reply);
}

void ScriptedChatProvider::push_sequence(std::string reply) {
  std::lock_guard lock(mu_);
  sequence_.push_back(std::move(reply));
}

void ScriptedChatProvider::set_default(std::string reply) {
  std::lock_guard lock(mu_);
  default_ = std::move(reply);
}

std::string ScriptedChatProvider::chat(const ChatRequest& request) {
  request.validate();
  const std::string fp = request.fingerprint();
  std::lock_guard lock(mu_);
  ++calls_;
  if (auto it = by_hash_.find(fp); it != by_hash_.end()) return it->second;
  if (cursor_ < sequence_.size()) return sequence_[cursor_++];
  if (default_) return *default_;
  throw ProviderError("scripted provider has no reply for request " + fp, fp);
}

std::size_t ScriptedChatProvider::call_count() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::string RecordingChatProvider::chat(const ChatRequest& request) {
  std::string reply = inner_->chat(request);
  std::lock_guard lock(mu_);
  records_.emplace_back(request.fingerprint(), reply);
  return reply;
}

std::string RecordingChatProvider::to_script_json() const {
  std::lock_guard lock(mu_);
  std::map<std::string, std::string> sorted(records_.begin(), records_.end());
  nlohmann::ordered_json doc;
  doc["by_hash"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : sorted) doc["by_hash"][k] = v;
  return doc.dump(2) + "\n";
}

RetryingChatProvider::RetryingChatProvider(std::shared_ptr<ChatProvider> inner,
                                           RetryPolicy policy, Sleeper sleeper)
    : inner_(std::move(inner)), policy_(policy), sleeper_(std::move(sleeper)) {
  if (!sleeper_) {
    sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
  if (policy_.max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
}

std::string RetryingChatProvider::chat(const ChatRequest& request) {
  auto delay = policy_.initial_delay;
  std::string last_error;
  for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
    try {
      return inner_->chat(request);
    } catch (const TransientProviderError& e) {
      last_error = e.what();
    }
    if (attempt < policy_.max_attempts) {
      sleeper_(delay);
      auto next = std::chrono::milliseconds(
          static_cast<std::int64_t>(static_cast<double>(delay.count()) * policy_.multiplier));
      delay = std::min(next, policy_.max_delay);
    }
  }
  const std::string fp = request.fingerprint();
  throw ProviderError("chat failed after " + std::to_string(policy_.max_attempts) +
                          " attempts (request " + fp + "): " + last_error,
                      fp);
}

}  // namespace ontosql
