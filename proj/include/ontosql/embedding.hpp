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

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ontosql/chat.hpp"

namespace ontosql {

/// Unit-length embedding. Construction L2-normalizes; zero or non-finite
/// input throws std::invalid_argument.
class EmbeddingVector {
 public:
  explicit EmbeddingVector(std::vector<double> components);

  std::span<const double> components() const { return components_; }
  std::size_t dimension() const { return components_.size(); }

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> components_;
};

/// Dot product of unit vectors, clamped to [-1, 1]. Throws
/// std::invalid_argument on dimension mismatch.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// One vector per input text, in order.
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
  virtual std::string id() const = 0;
};

/// Offline lexical embedding: signed feature hashing of lowercase words and
/// boundary-marked character trigrams. Deterministic on every platform.
class HashingEmbedder final : public EmbeddingProvider {
 public:
  explicit HashingEmbedder(std::size_t dimension = 256) : dimension_(dimension) {}
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
  std::string id() const override { return "hashing:" + std::to_string(dimension_); }

  EmbeddingVector embed_one(const std::string& text) const;

 private:
  std::size_t dimension_;
};

/// Text → vector table loaded from JSON:
///   {"dimension": 3, "vectors": {"centre": [1, 0, 0], ...},
///    "fallback": "hashing"}
/// Texts missing from the table use the hashing fallback when enabled and
/// raise ProviderError otherwise.
class ScriptedEmbeddingProvider final : public EmbeddingProvider {
 public:
  ScriptedEmbeddingProvider(std::size_t dimension, bool hashing_fallback);
  static std::unique_ptr<ScriptedEmbeddingProvider> from_file(const std::filesystem::path& path);
  static std::unique_ptr<ScriptedEmbeddingProvider> from_json(std::string_view document);

  void set(std::string text, std::vector<double> components);

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
  std::string id() const override { return "scripted"; }

 private:
  std::size_t dimension_;
  std::map<std::string, EmbeddingVector> table_;
  std::optional<HashingEmbedder> fallback_;
};

/// Memoizes vectors by exact text. Misses are de-duplicated and sent to the
/// inner provider in chunks of `batch_size`. Safe for concurrent callers.
class CachingEmbedder final : public EmbeddingProvider {
 public:
  explicit CachingEmbedder(std::shared_ptr<EmbeddingProvider> inner, std::size_t batch_size = 64);

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
  std::string id() const override { return inner_->id(); }

  std::size_t provider_calls() const;
  std::size_t cached_texts() const;

 private:
  std::shared_ptr<EmbeddingProvider> inner_;
  std::size_t batch_size_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, EmbeddingVector> cache_;
  std::size_t provider_calls_ = 0;
};

/// Retries TransientProviderError like RetryingChatProvider.
class RetryingEmbeddingProvider final : public EmbeddingProvider {
 public:
  RetryingEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner, RetryPolicy policy,
                            RetryingChatProvider::Sleeper sleeper = {});

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
  std::string id() const override { return inner_->id(); }

 private:
  std::shared_ptr<EmbeddingProvider> inner_;
  RetryPolicy policy_;
  RetryingChatProvider::Sleeper sleeper_;
};

/// OpenAI-compatible /embeddings client (works with local sentence-transformer
/// servers exposing the same route).
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
  std::string id() const override { return "http:" + endpoint_.model; }

 private:
  HttpEndpoint endpoint_;
};

}  // namespace ontosql
