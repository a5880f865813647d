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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ontosql/chat.hpp"
#include "ontosql/datasets.hpp"
#include "ontosql/db_session.hpp"
#include "ontosql/embedding.hpp"
#include "ontosql/ontology.hpp"

namespace ontosql {

enum class Variant { kDirectUpdate, kQueryUpdate };

std::string_view to_string(Variant variant);
Variant parse_variant(std::string_view text);

inline constexpr double kDefaultSimilarityThreshold = 0.436;

struct RunConfig {
  Variant variant = Variant::kQueryUpdate;
  bool use_dst = true;
  bool use_similarity = false;
  bool use_value_examples = true;
  bool use_success = true;
  std::size_t batch_size = 1;
  std::size_t prompt_budget = 120000;  // estimated tokens
  std::uint64_t seed = 0;
  bool shuffle = false;  // permute corpus order with `seed` before batching
  std::filesystem::path prompt_set = "prompts";

  double similarity_threshold = kDefaultSimilarityThreshold;
  std::size_t similarity_max_results = 5;
  std::size_t value_examples_k = 5;
  double temperature = 0.0;
  int max_output_tokens = 4096;

  /// Throws ConfigError. The DST/similarity/examples/success switches only
  /// make sense for the query-update variant.
  void validate() const;
};

/// The prompt templates. Files in the prompt directory:
///   1_inspect.txt 2_select.txt 3_dst.txt 4_update.txt   (required)
///   0_direct.txt                                         (optional)
/// Templates use {db_result_input}; {dialogue} is optional, and the batch is
/// appended when it is absent. In 4_update.txt the text between [[success]]
/// and [[/success]] is kept only when the success clause is enabled.
struct PromptSet {
  std::string inspect;
  std::string select;
  std::string dst;
  std::string update;
  std::string direct;

  /// Throws ConfigError naming the missing file.
  static PromptSet load(const std::filesystem::path& dir);

  std::string update_prompt(bool with_success) const;
};

/// Substitutes {db_result_input} and {dialogue}. When the template has no
/// {dialogue} placeholder and `append_dialogue` is set, the dialogue is
/// appended after a "Dialogue(s):" heading.
std::string fill_template(const std::string& tmpl, const std::string& db_result_input,
                          const std::string& dialogue, bool append_dialogue);

/// Drops content from the left (oldest messages first, then the head of the
/// oldest remaining message) until the estimate fits `budget` tokens.
/// Returns true if anything was removed.
bool truncate_left(std::vector<ChatMessage>& messages, std::size_t budget);

enum class ConceptKind { kTable, kColumn, kValue };

std::string_view to_string(ConceptKind kind);

struct StoredConcept {
  std::string text;
  ConceptKind kind = ConceptKind::kValue;
  std::string table;   // owning table (columns and values)
  std::string column;  // owning column (values)
};

struct SimilarConcept {
  StoredConcept stored;
  double similarity = 0.0;
};

/// Every table name, column name and distinct cell value in the snapshot.
std::vector<StoredConcept> concept_pool(const DbSnapshot& snapshot);

/// Pool entries whose similarity to `term` is strictly above `threshold`,
/// best first (ties by text), at most `max_results`.
std::vector<SimilarConcept> similar_concepts(const std::string& term,
                                             const std::vector<StoredConcept>& pool,
                                             EmbeddingProvider& embedder, double threshold,
                                             std::size_t max_results);

/// As similar_concepts over several terms, scoring each candidate by its best
/// similarity to any term.
std::vector<SimilarConcept> similarity_augment(const std::vector<std::string>& query_terms,
                                               const DbSnapshot& snapshot,
                                               EmbeddingProvider& embedder, double threshold,
                                               std::size_t max_results);

struct SimilarityLookup {
  std::string term;
  std::vector<SimilarConcept> matches;
  std::vector<QueryResult> requeries;  // original SELECT with the literal swapped
};

/// Per-batch record of what each step saw and did. Optional members are
/// present exactly when the corresponding step or feature ran.
struct StepTrace {
  std::int64_t batch_index = 0;
  std::vector<std::string> dialogue_ids;

  std::optional<std::vector<std::string>> tables;                   // step 1 input
  std::optional<std::vector<QueryResult>> inspect_results;          // step 1
  std::optional<std::vector<QueryResult>> select_results;           // step 2
  std::optional<std::map<std::string, std::vector<std::string>>> value_examples;
  std::optional<std::vector<SimilarityLookup>> similarity;
  std::optional<std::string> dst_summary;                           // step 3
  std::optional<UpdateOutcome> updates;                             // step 4

  std::vector<std::string> diagnostics;
  std::size_t chat_calls = 0;
  bool truncated = false;
  bool failed = false;
  std::string error;

  std::string to_json() const;
};

struct RunStats {
  std::size_t table_count = 0;
  SessionStats sql;
  std::size_t dialogues = 0;
  std::size_t batches_total = 0;
  std::size_t batches_processed = 0;
  std::size_t batches_failed = 0;
  std::uint64_t chat_calls = 0;

  double error_ratio() const { return sql.error_ratio(); }
  std::string to_json() const;
  static RunStats from_json(std::string_view document);
};

struct RunOptions {
  std::int64_t start_batch = 0;
  std::optional<std::size_t> max_batches;  // stop early (used to simulate interruption)
  std::function<void(const StepTrace&)> on_trace;
  // Prior totals when resuming; added to this run's counts.
  std::uint64_t prior_chat_calls = 0;
  std::uint64_t prior_failed_batches = 0;
};

struct RunResult {
  OntologyGraph ontology;
  RunStats stats;
};

/// Drives the model through inspect → select → (track) → update for each
/// batch against one database session. Calls are strictly sequential: the
/// database after batch i is the input to batch i+1.
class Pipeline {
 public:
  /// `embedder` may be null unless cfg.use_similarity is set.
  Pipeline(DbSession& session, ChatProvider& chat, EmbeddingProvider* embedder, PromptSet prompts,
           RunConfig cfg, AuditLog* audit = nullptr);

  struct BatchContext {
    Batch batch;
    std::string dialogue_text;
    std::vector<ChatMessage> conversation;
    StepTrace trace;
  };

  BatchContext start_batch(Batch batch, std::int64_t index) const;

  void step1_inspect(BatchContext& ctx);
  void step2_selects(BatchContext& ctx);
  void step3_dst(BatchContext& ctx);
  void step4_update(BatchContext& ctx);

  /// One batch through the configured variant. Provider failures mark the
  /// trace failed instead of propagating.
  StepTrace run_dialogue(Batch batch, std::int64_t index);

  RunResult run_dataset(const Corpus& corpus, const RunOptions& options = {});

  const RunConfig& config() const { return cfg_; }

 private:
  std::string ask(BatchContext& ctx, std::string user_text);
  std::vector<QueryResult> run_retrievals(BatchContext& ctx, const std::string& reply,
                                          std::string_view step);
  std::string render_select_context(const BatchContext& ctx) const;

  DbSession& session_;
  ChatProvider& chat_;
  EmbeddingProvider* embedder_;
  PromptSet prompts_;
  RunConfig cfg_;
  AuditLog* audit_;
};

}  // namespace ontosql
