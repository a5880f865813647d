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

#include "ontosql/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "json.hpp"
#include "ontosql/errors.hpp"
#include "ontosql/util.hpp"

namespace ontosql {

EmbeddingVector::EmbeddingVector(std::vector<double> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("embedding has no components");
  double norm2 = 0.0;
  for (double x : components_) {
    if (!std::isfinite(x)) throw std::invalid_argument("embedding has non-finite component");
    norm2 += x * x;
  }
  if (norm2 <= 0.0) throw std::invalid_argument("embedding has zero norm");
  const double norm = std::sqrt(norm2);
  for (double& x : components_) x /= norm;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    throw std::invalid_argument("embedding dimension mismatch: " + std::to_string(a.dimension()) +
                                " vs " + std::to_string(b.dimension()));
  }
  double dot = 0.0;
  auto ca = a.components();
  auto cb = b.components();
  for (std::size_t i = 0; i < ca.size(); ++i) dot += ca[i] * cb[i];
  return std::clamp(dot, -1.0, 1.0);
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

EmbeddingVector HashingEmbedder::embed_one(const std::string& text) const {
  std::vector<double> v(dimension_, 0.0);
  auto add = [&](std::string_view feature, double weight) {
    const std::uint64_t h = fnv1a(feature);
    const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
    v[h % dimension_] += sign * weight;
  };
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    add("w:" + word, 1.0);
    const std::string marked = "#" + word + "#";
    for (std::size_t i = 0; i + 3 <= marked.size(); ++i) add(marked.substr(i, 3), 1.0);
    word.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c) != 0 || c >= 0x80) {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v[0] = 1.0;
  return EmbeddingVector(std::move(v));
}

std::vector<EmbeddingVector> HashingEmbedder::embed(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

ScriptedEmbeddingProvider::ScriptedEmbeddingProvider(std::size_t dimension, bool hashing_fallback)
    : dimension_(dimension) {
  if (dimension_ == 0) throw std::invalid_argument("embedding dimension must be positive");
  if (hashing_fallback) fallback_.emplace(dimension_);
}

std::unique_ptr<ScriptedEmbeddingProvider> ScriptedEmbeddingProvider::from_json(
    std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("embedding table: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("dimension")) {
    throw ParseError("embedding table: expected an object with \"dimension\"");
  }
  try {
    const auto dim = doc["dimension"].get<std::size_t>();
    const bool fallback = doc.value("fallback", std::string{}) == "hashing";
    auto provider = std::make_unique<ScriptedEmbeddingProvider>(dim, fallback);
    if (doc.contains("vectors")) {
      for (const auto& [text, vec] : doc["vectors"].items()) {
        provider->set(text, vec.get<std::vector<double>>());
      }
    }
    return provider;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("embedding table: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("embedding table: ") + e.what());
  }
}

std::unique_ptr<ScriptedEmbeddingProvider> ScriptedEmbeddingProvider::from_file(
    const std::filesystem::path& path) {
  return from_json(read_file(path));
}

void ScriptedEmbeddingProvider::set(std::string text, std::vector<double> components) {
  if (components.size() != dimension_) {
    throw std::invalid_argument("vector for \"" + text + "\" has dimension " +
                                std::to_string(components.size()) + ", expected " +
                                std::to_string(dimension_));
  }
  table_.insert_or_assign(std::move(text), EmbeddingVector(std::move(components)));
}

std::vector<EmbeddingVector> ScriptedEmbeddingProvider::embed(
    std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    if (auto it = table_.find(t); it != table_.end()) {
      out.push_back(it->second);
    } else if (fallback_) {
      out.push_back(fallback_->embed_one(t));
    } else {
      throw ProviderError("no scripted embedding for \"" + t + "\"");
    }
  }
  return out;
}

CachingEmbedder::CachingEmbedder(std::shared_ptr<EmbeddingProvider> inner, std::size_t batch_size)
    : inner_(std::move(inner)), batch_size_(std::max<std::size_t>(1, batch_size)) {}

std::vector<EmbeddingVector> CachingEmbedder::embed(std::span<const std::string> texts) {
  std::vector<std::string> misses;
  {
    std::lock_guard lock(mu_);
    std::unordered_set<std::string> queued;
    for (const auto& t : texts) {
      if (!cache_.contains(t) && queued.insert(t).second) misses.push_back(t);
    }
  }
  for (std::size_t start = 0; start < misses.size(); start += batch_size_) {
    const std::size_t n = std::min(batch_size_, misses.size() - start);
    std::span<const std::string> chunk(misses.data() + start, n);
    auto vectors = inner_->embed(chunk);
    if (vectors.size() != n) throw ProviderError("embedding provider returned wrong count");
    std::lock_guard lock(mu_);
    ++provider_calls_;
    for (std::size_t i = 0; i < n; ++i) cache_.insert_or_assign(chunk[i], std::move(vectors[i]));
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  std::lock_guard lock(mu_);
  for (const auto& t : texts) out.push_back(cache_.at(t));
  return out;
}

std::size_t CachingEmbedder::provider_calls() const {
  std::lock_guard lock(mu_);
  return provider_calls_;
}

std::size_t CachingEmbedder::cached_texts() const {
  std::lock_guard lock(mu_);
  return cache_.size();
}

RetryingEmbeddingProvider::RetryingEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner,
                                                     RetryPolicy policy,
                                                     RetryingChatProvider::Sleeper sleeper)
    : inner_(std::move(inner)), policy_(policy), sleeper_(std::move(sleeper)) {
  if (!sleeper_) {
    sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

std::vector<EmbeddingVector> RetryingEmbeddingProvider::embed(std::span<const std::string> texts) {
  auto delay = policy_.initial_delay;
  std::string last_error;
  for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
    try {
      return inner_->embed(texts);
    } catch (const TransientProviderError& e) {
      last_error = e.what();
    }
    if (attempt < policy_.max_attempts) {
      sleeper_(delay);
      delay = std::min(std::chrono::milliseconds(static_cast<std::int64_t>(
                           static_cast<double>(delay.count()) * policy_.multiplier)),
                       policy_.max_delay);
    }
  }
  throw ProviderError("embedding failed after " + std::to_string(policy_.max_attempts) +
                      " attempts: " + last_error);
}

}  // namespace ontosql
