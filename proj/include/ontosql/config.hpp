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

#include <filesystem>
#include <memory>
#include <set>
#include <string>

#include "ontosql/chat.hpp"
#include "ontosql/embedding.hpp"
#include "ontosql/evaluation.hpp"
#include "ontosql/pipeline.hpp"

namespace ontosql {

struct ChatSettings {
  std::string provider = "scripted";  // scripted | http
  std::filesystem::path script;       // scripted replies (JSON)
  std::string base_url;
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_seconds = 120;
  RetryPolicy retry;
};

struct EmbeddingSettings {
  std::string provider = "hashing";  // none | hashing | scripted | http
  std::size_t dimension = 256;
  std::filesystem::path table;  // scripted vectors (JSON)
  std::string base_url;
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_seconds = 120;
  std::size_t batch_size = 64;
};

/// Everything a config file can set. Relative paths are resolved against the
/// directory holding the file.
struct AppConfig {
  RunConfig run;
  ChatSettings chat;
  EmbeddingSettings embedding;
  EvalOptions eval;
  // Keys of [run] given explicitly, so a direct_update run can default its
  // query-only switches to off without overriding a user's choice.
  std::set<std::string> explicit_run_keys;

  /// Applies defaults that depend on other settings, then validates.
  /// Throws ConfigError.
  void finalize();
};

/// INI-style sections [run], [chat], [embedding], [eval] with key = value
/// lines and ';' or '#' comments. Unknown sections or keys are errors.
AppConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
AppConfig load_config(const std::filesystem::path& path);

/// Builds the configured chat provider, wrapped in retries when it talks to
/// the network. Throws ConfigError or ProviderError.
std::unique_ptr<ChatProvider> make_chat_provider(const ChatSettings& settings);

/// Null for provider "none"; otherwise a cached provider.
std::shared_ptr<EmbeddingProvider> make_embedding_provider(const EmbeddingSettings& settings);

/// Canonical JSON of the effective configuration (no secrets).
std::string config_json(const AppConfig& config);

}  // namespace ontosql
