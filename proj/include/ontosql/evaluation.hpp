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

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ontosql/embedding.hpp"
#include "ontosql/ontology.hpp"

namespace ontosql {

enum class MatchMode { kLiteral, kFuzzy, kContinuous };

std::string_view to_string(MatchMode mode);
/// Accepts "literal", "fuzzy", "continuous". Throws ConfigError otherwise.
MatchMode parse_match_mode(std::string_view text);

inline constexpr std::array<MatchMode, 3> kAllMatchModes = {
    MatchMode::kLiteral, MatchMode::kFuzzy, MatchMode::kContinuous};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Zero denominators give zero rather than NaN.
Prf prf(std::size_t tp, std::size_t fp, std::size_t fn);

/// Recall over gold nodes: matched_gold / (matched_gold + fn). Under fuzzy
/// matching several predictions may hit one gold label, so tp can exceed the
/// number of gold labels covered; precision still uses tp.
Prf prf(std::size_t tp, std::size_t fp, std::size_t matched_gold, std::size_t fn);

struct MatchOutcome {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t matched_gold = 0;  // gold labels with a match; equals tp for literal
  std::vector<std::pair<Label, Label>> mapping;  // (predicted, gold), sorted by predicted
};

/// sim(predicted, gold).
using SimilarityFn = std::function<double(const Label& pred, const Label& gold)>;

MatchOutcome match_literal(const LabelSet& pred, const LabelSet& gold);

/// A prediction is a true positive when some gold label is strictly above
/// `threshold`; it maps to its most similar gold (ties: smaller label).
MatchOutcome match_fuzzy(const LabelSet& pred, const LabelSet& gold, const SimilarityFn& sim,
                         double threshold);

/// Each gold label claims its most similar prediction (ties: smaller label)
/// when that similarity is strictly above `threshold`. Claimed predictions
/// are true positives and map to the claiming gold with the highest
/// similarity; everything else predicted is a false positive.
MatchOutcome match_continuous(const LabelSet& pred, const LabelSet& gold, const SimilarityFn& sim,
                              double threshold);

MatchOutcome match(MatchMode mode, const LabelSet& pred, const LabelSet& gold,
                   const SimilarityFn& sim, double threshold);

/// Embeds every label of both graphs once and returns cosine similarity
/// between them. Labels outside the graphs are embedded on demand.
SimilarityFn embedding_similarity(EmbeddingProvider& embedder, const OntologyGraph& a,
                                  const OntologyGraph& b);

enum class Category { kDomains, kSlots, kValues, kUserIntents, kSystemActions };
inline constexpr std::size_t kCategoryCount = 5;
std::string_view to_string(Category category);

struct CategoryScore {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t matched_gold = 0;
  Prf scores;
};

struct ModeReport {
  MatchMode mode = MatchMode::kLiteral;
  std::array<CategoryScore, kCategoryCount> categories{};
  Prf macro;  // unweighted mean of the five category scores
  Prf micro;  // prf over counts pooled across categories

  const CategoryScore& operator[](Category c) const {
    return categories[static_cast<std::size_t>(c)];
  }
};

struct EvalOptions {
  double threshold = 0.436;
  /// When set, slots and values below unmatched gold parents count as false
  /// negatives instead of being left out.
  bool count_unmatched_gold_children = false;
};

/// Top-down matching: domains, then slots under matched domain pairs, then
/// values under matched slot pairs, then intents and actions as flat sets.
/// Children of unmatched parents are excluded on both sides by default.
/// `sim` may be empty for literal mode.
ModeReport evaluate(const OntologyGraph& predicted, const OntologyGraph& gold, MatchMode mode,
                    const SimilarityFn& sim, const EvalOptions& options = {});

struct EvalReport {
  double threshold = 0.436;
  bool count_unmatched_gold_children = false;
  std::vector<ModeReport> modes;

  std::string to_json() const;
  /// Categories by rows, one P/R/F1 column group per mode, in percent.
  std::string to_text() const;
};

/// Runs `modes` in order. `embedder` is required for fuzzy and continuous.
EvalReport evaluate_modes(const OntologyGraph& predicted, const OntologyGraph& gold,
                          const std::vector<MatchMode>& modes, EmbeddingProvider* embedder,
                          const EvalOptions& options = {});

}  // namespace ontosql
