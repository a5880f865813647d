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

#include <algorithm>
#include <set>
#include <stdexcept>
#include <tuple>

#include "ontosql/pipeline.hpp"

namespace ontosql {

std::string_view to_string(ConceptKind kind) {
  switch (kind) {
    case ConceptKind::kTable: return "table";
    case ConceptKind::kColumn: return "column";
    case ConceptKind::kValue: return "value";
  }
  return "value";
}

std::vector<StoredConcept> concept_pool(const DbSnapshot& snapshot) {
  std::vector<StoredConcept> pool;
  std::set<std::tuple<int, std::string, std::string, std::string>> seen;
  auto push = [&](StoredConcept c) {
    if (seen.emplace(static_cast<int>(c.kind), c.text, c.table, c.column).second) {
      pool.push_back(std::move(c));
    }
  };
  for (const auto& table : snapshot.tables) {
    push({table.name, ConceptKind::kTable, {}, {}});
    for (const auto& column : table.columns) {
      push({column.name, ConceptKind::kColumn, table.name, {}});
      if (!column.values) continue;
      for (const auto& v : *column.values) push({v, ConceptKind::kValue, table.name, column.name});
    }
  }
  return pool;
}

namespace {

void check_params(double threshold, std::size_t max_results) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("similarity threshold must be in (0, 1)");
  }
  if (max_results < 1) throw std::invalid_argument("max_results must be >= 1");
}

std::vector<SimilarConcept> rank(std::vector<SimilarConcept> hits, std::size_t max_results) {
  std::sort(hits.begin(), hits.end(), [](const SimilarConcept& a, const SimilarConcept& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return std::tie(a.stored.text, a.stored.table, a.stored.column) <
           std::tie(b.stored.text, b.stored.table, b.stored.column);
  });
  if (hits.size() > max_results) hits.resize(max_results);
  return hits;
}

std::vector<std::string> pool_texts(const std::vector<StoredConcept>& pool) {
  std::vector<std::string> texts;
  texts.reserve(pool.size());
  for (const auto& c : pool) texts.push_back(c.text);
  return texts;
}

}  // namespace

std::vector<SimilarConcept> similar_concepts(const std::string& term,
                                             const std::vector<StoredConcept>& pool,
                                             EmbeddingProvider& embedder, double threshold,
                                             std::size_t max_results) {
  check_params(threshold, max_results);
  if (pool.empty()) return {};
  const auto term_vec = embedder.embed(std::vector<std::string>{term});
  const auto pool_vecs = embedder.embed(pool_texts(pool));
  std::vector<SimilarConcept> hits;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double sim = cosine_similarity(term_vec.front(), pool_vecs[i]);
    if (sim > threshold) hits.push_back({pool[i], sim});
  }
  return rank(std::move(hits), max_results);
}

std::vector<SimilarConcept> similarity_augment(const std::vector<std::string>& query_terms,
                                               const DbSnapshot& snapshot,
                                               EmbeddingProvider& embedder, double threshold,
                                               std::size_t max_results) {
  check_params(threshold, max_results);
  const auto pool = concept_pool(snapshot);
  if (pool.empty() || query_terms.empty()) return {};
  const auto term_vecs = embedder.embed(query_terms);
  const auto pool_vecs = embedder.embed(pool_texts(pool));
  std::vector<SimilarConcept> hits;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    double best = -1.0;
    for (const auto& tv : term_vecs) best = std::max(best, cosine_similarity(tv, pool_vecs[i]));
    if (best > threshold) hits.push_back({pool[i], best});
  }
  return rank(std::move(hits), max_results);
}

}  // namespace ontosql
