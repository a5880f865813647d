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

#include <stdexcept>
#include <string>

namespace ontosql {

// Malformed documents: ontology JSON, corpora, scripted provider tables.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid run configuration or missing prompt templates.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem or database file failures.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A chat or embedding provider failed permanently (retries exhausted or a
// non-retryable response).
class ProviderError : public std::runtime_error {
 public:
  ProviderError(const std::string& message, std::string fingerprint = {})
      : std::runtime_error(message), fingerprint_(std::move(fingerprint)) {}

  const std::string& fingerprint() const noexcept { return fingerprint_; }

 private:
  std::string fingerprint_;
};

// Retryable provider failure (timeout, 429, 5xx). Providers throw this and
// RetryingChatProvider converts exhaustion into ProviderError.
class TransientProviderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ontosql
