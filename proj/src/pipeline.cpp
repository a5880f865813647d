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

#include "ontosql/pipeline.hpp"

#include <cstdio>
#include <regex>
#include <set>

#include "json.hpp"
#include "ontosql/errors.hpp"
#include "ontosql/util.hpp"

namespace ontosql {

std::string_view to_string(Variant variant) {
  return variant == Variant::kDirectUpdate ? "direct_update" : "query_update";
}

Variant parse_variant(std::string_view text) {
  const auto t = to_lower(text);
  if (t == "direct_update" || t == "direct") return Variant::kDirectUpdate;
  if (t == "query_update" || t == "query") return Variant::kQueryUpdate;
  throw ConfigError("unknown variant \"" + std::string(text) +
                    "\" (expected direct_update or query_update)");
}

void RunConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (prompt_budget < 1) throw ConfigError("prompt_budget must be >= 1");
  if (variant == Variant::kDirectUpdate &&
      (use_dst || use_similarity || use_value_examples || use_success)) {
    throw ConfigError(
        "direct_update skips the database queries; dst, similarity, value examples and success "
        "require query_update");
  }
  if (!(similarity_threshold > 0.0 && similarity_threshold < 1.0)) {
    throw ConfigError("similarity_threshold must be in (0, 1)");
  }
  if (similarity_max_results < 1) throw ConfigError("similarity_max_results must be >= 1");
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (max_output_tokens < 1) throw ConfigError("max_output_tokens must be >= 1");
}

namespace {

const SqlStatement kListTables{
    "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' ORDER BY "
    "name",
    StatementKind::kRetrieval};

std::string python_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ", ";
    out += quote_literal(items[i]);
  }
  return out + "]";
}

std::string render_results(const std::vector<QueryResult>& results) {
  if (results.empty()) return "No queries were executed.";
  std::string out;
  for (const auto& r : results) {
    out += r.sql + ";\n" + r.render() + "\n";
  }
  return out;
}

std::string render_schema(const DbSnapshot& snap) {
  if (snap.empty()) return "The database has no tables yet.\n";
  std::string out;
  for (const auto& t : snap.tables) {
    out += t.name + "(";
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      if (i > 0) out += ", ";
      out += t.columns[i].name;
      if (!t.columns[i].declared_type.empty()) out += " " + t.columns[i].declared_type;
    }
    out += ")\n";
  }
  return out;
}

std::string format_similarity(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", s);
  return buf;
}

// Table named by PRAGMA table_info(<t>) / table_xinfo(<t>), if any.
std::optional<std::string> pragma_table(const std::string& sql) {
  static const std::regex kPragma(
      R"(pragma\s+table_x?info\s*\(\s*['"`\[]?([^'"`\]\)]+?)['"`\]]?\s*\))",
      std::regex::ECMAScript | std::regex::icase);
  std::smatch m;
  if (std::regex_search(sql, m, kPragma)) return trim(m[1].str());
  return std::nullopt;
}

std::string strip_wildcards(const std::string& literal, std::string* prefix, std::string* suffix) {
  std::size_t b = 0, e = literal.size();
  while (b < e && literal[b] == '%') ++b;
  while (e > b && literal[e - 1] == '%') --e;
  *prefix = literal.substr(0, b);
  *suffix = literal.substr(e);
  return literal.substr(b, e - b);
}

void replace_first(std::string& s, const std::string& from, const std::string& to) {
  if (auto pos = s.find(from); pos != std::string::npos) s.replace(pos, from.size(), to);
}

nlohmann::ordered_json result_json(const QueryResult& r) {
  nlohmann::ordered_json j;
  j["sql"] = r.sql;
  if (r.error) {
    j["error"] = *r.error;
  } else {
    j["columns"] = r.columns;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
      auto cells = nlohmann::ordered_json::array();
      for (const auto& c : row) {
        if (c.type == CellType::kNull) {
          cells.push_back(nullptr);
        } else {
          cells.push_back(c.text);
        }
      }
      rows.push_back(std::move(cells));
    }
    j["rows"] = std::move(rows);
    if (r.truncated) j["truncated"] = true;
  }
  return j;
}

}  // namespace

std::string StepTrace::to_json() const {
  nlohmann::ordered_json j;
  j["batch"] = batch_index;
  j["dialogues"] = dialogue_ids;
  if (tables) j["tables"] = *tables;
  auto results = [](const std::vector<QueryResult>& rs) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rs) arr.push_back(result_json(r));
    return arr;
  };
  if (inspect_results) j["inspect"] = results(*inspect_results);
  if (select_results) j["select"] = results(*select_results);
  if (value_examples) j["value_examples"] = *value_examples;
  if (similarity) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& lookup : *similarity) {
      nlohmann::ordered_json l;
      l["term"] = lookup.term;
      auto matches = nlohmann::ordered_json::array();
      for (const auto& m : lookup.matches) {
        matches.push_back({{"text", m.stored.text},
                           {"kind", to_string(m.stored.kind)},
                           {"table", m.stored.table},
                           {"column", m.stored.column},
                           {"similarity", m.similarity}});
      }
      l["matches"] = std::move(matches);
      l["requeries"] = results(lookup.requeries);
      arr.push_back(std::move(l));
    }
    j["similarity"] = std::move(arr);
  }
  if (dst_summary) j["dst"] = *dst_summary;
  if (updates) {
    auto stmts = nlohmann::ordered_json::array();
    for (const auto& s : updates->statements) {
      stmts.push_back({{"kind", to_string(s.kind)}, {"sql", s.text}});
    }
    auto failures = nlohmann::ordered_json::array();
    for (const auto& f : updates->failures) {
      failures.push_back({{"index", f.index}, {"error", f.message}});
    }
    j["updates"] = {{"statements", std::move(stmts)}, {"failures", std::move(failures)}};
  }
  j["diagnostics"] = diagnostics;
  j["chat_calls"] = chat_calls;
  j["truncated"] = truncated;
  j["failed"] = failed;
  if (failed) j["error"] = error;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string RunStats::to_json() const {
  nlohmann::ordered_json j;
  j["table_count"] = table_count;
  j["update_statements"] = sql.update_statements;
  j["failed_updates"] = sql.failed_updates;
  j["sql_error_ratio"] = error_ratio();
  j["retrievals"] = sql.retrievals;
  j["failed_retrievals"] = sql.failed_retrievals;
  j["dialogues"] = dialogues;
  j["batches_total"] = batches_total;
  j["batches_processed"] = batches_processed;
  j["batches_failed"] = batches_failed;
  j["chat_calls"] = chat_calls;
  return j.dump(2) + "\n";
}

RunStats RunStats::from_json(std::string_view document) {
  try {
    const auto j = nlohmann::json::parse(document);
    RunStats s;
    s.table_count = j.at("table_count").get<std::size_t>();
    s.sql.update_statements = j.at("update_statements").get<std::uint64_t>();
    s.sql.failed_updates = j.at("failed_updates").get<std::uint64_t>();
    s.sql.retrievals = j.value("retrievals", std::uint64_t{0});
    s.sql.failed_retrievals = j.value("failed_retrievals", std::uint64_t{0});
    s.dialogues = j.value("dialogues", std::size_t{0});
    s.batches_total = j.value("batches_total", std::size_t{0});
    s.batches_processed = j.value("batches_processed", std::size_t{0});
    s.batches_failed = j.value("batches_failed", std::size_t{0});
    s.chat_calls = j.value("chat_calls", std::uint64_t{0});
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("run stats: ") + e.what());
  }
}

Pipeline::Pipeline(DbSession& session, ChatProvider& chat, EmbeddingProvider* embedder,
                   PromptSet prompts, RunConfig cfg, AuditLog* audit)
    : session_(session),
      chat_(chat),
      embedder_(embedder),
      prompts_(std::move(prompts)),
      cfg_(std::move(cfg)),
      audit_(audit) {
  cfg_.validate();
  if (cfg_.use_similarity && embedder_ == nullptr) {
    throw ConfigError("similarity matching needs an embedding provider");
  }
  session_.attach_audit_log(audit_);
}

Pipeline::BatchContext Pipeline::start_batch(Batch batch, std::int64_t index) const {
  BatchContext ctx;
  ctx.batch = batch;
  ctx.trace.batch_index = index;
  for (const auto& d : batch) {
    ctx.trace.dialogue_ids.push_back(d.id);
    if (batch.size() > 1) ctx.dialogue_text += "### Dialogue " + d.id + "\n";
    ctx.dialogue_text += d.render();
    if (batch.size() > 1) ctx.dialogue_text += "\n";
  }
  return ctx;
}

std::string Pipeline::ask(BatchContext& ctx, std::string user_text) {
  ctx.conversation.push_back({Role::kUser, std::move(user_text)});
  ChatRequest request;
  request.messages = ctx.conversation;
  request.temperature = cfg_.temperature;
  request.max_output_tokens = cfg_.max_output_tokens;
  if (truncate_left(request.messages, cfg_.prompt_budget)) ctx.trace.truncated = true;
  ++ctx.trace.chat_calls;
  std::string reply = chat_.chat(request);
  ctx.conversation.push_back({Role::kAssistant, reply});
  return reply;
}

std::vector<QueryResult> Pipeline::run_retrievals(BatchContext& ctx, const std::string& reply,
                                                  std::string_view step) {
  auto extraction = extract_statements(reply);
  for (auto& d : extraction.diagnostics) {
    ctx.trace.diagnostics.push_back(std::string(step) + ": " + d);
  }
  session_.set_audit_context(ctx.trace.batch_index, std::string(step));
  std::vector<QueryResult> results;
  for (const auto& stmt : extraction.statements) {
    if (stmt.kind != StatementKind::kRetrieval) {
      ctx.trace.diagnostics.push_back(std::string(step) + ": discarded " +
                                      std::string(to_string(stmt.kind)) +
                                      " statement: " + stmt.text.substr(0, 80));
      continue;
    }
    results.push_back(session_.execute_retrieval(stmt));
  }
  return results;
}

void Pipeline::step1_inspect(BatchContext& ctx) {
  session_.set_audit_context(ctx.trace.batch_index, "tables");
  const auto listing = session_.execute_retrieval(kListTables);
  std::vector<std::string> tables;
  for (const auto& row : listing.rows) tables.push_back(row.at(0).text);
  ctx.trace.tables = tables;

  const auto prompt = fill_template(prompts_.inspect, python_list(tables), ctx.dialogue_text,
                                    /*append_dialogue=*/true);
  const auto reply = ask(ctx, prompt);
  ctx.trace.inspect_results = run_retrievals(ctx, reply, "inspect");
}

void Pipeline::step2_selects(BatchContext& ctx) {
  std::string context = render_results(ctx.trace.inspect_results.value_or(std::vector<QueryResult>{}));

  if (cfg_.use_value_examples) {
    std::map<std::string, std::vector<std::string>> examples;
    const auto snap = session_.snapshot_schema();
    std::set<std::string> seen;
    for (const auto& r : ctx.trace.inspect_results.value_or(std::vector<QueryResult>{})) {
      if (!r.ok()) continue;
      auto name = pragma_table(r.sql);
      if (!name) continue;
      const TableInfo* table = snap.find_table(*name);
      if (table == nullptr || !seen.insert(table->name).second) continue;
      for (const auto& column : table->columns) {
        auto sample = session_.sample_column_values(table->name, column.name,
                                                    cfg_.value_examples_k, cfg_.seed);
        if (sample.error || sample.values.empty()) continue;
        examples[table->name + "." + column.name] = std::move(sample.values);
      }
    }
    if (!examples.empty()) {
      context += "\nColumn value examples:\n";
      for (const auto& [key, values] : examples) {
        context += key + ": " + python_list(values) + "\n";
      }
    }
    ctx.trace.value_examples = std::move(examples);
  }

  const auto prompt = fill_template(prompts_.select, context, ctx.dialogue_text,
                                    /*append_dialogue=*/false);
  const auto reply = ask(ctx, prompt);
  ctx.trace.select_results = run_retrievals(ctx, reply, "select");

  if (!cfg_.use_similarity) return;
  std::vector<SimilarityLookup> lookups;
  const auto pool = concept_pool(session_.snapshot_with_values());
  session_.set_audit_context(ctx.trace.batch_index, "similarity");
  for (const auto& result : *ctx.trace.select_results) {
    for (const auto& literal : string_literals(result.sql)) {
      std::string prefix, suffix;
      const std::string term = trim(strip_wildcards(literal, &prefix, &suffix));
      if (term.empty()) continue;
      SimilarityLookup lookup;
      lookup.term = term;
      lookup.matches = similar_concepts(term, pool, *embedder_, cfg_.similarity_threshold,
                                        cfg_.similarity_max_results);
      if (lookup.matches.empty()) continue;
      const bool found_nothing = !result.ok() || result.rows.empty();
      if (found_nothing) {
        for (const auto& m : lookup.matches) {
          if (m.stored.kind != ConceptKind::kValue || m.stored.text == term) continue;
          SqlStatement requery{result.sql, StatementKind::kRetrieval};
          replace_first(requery.text, quote_literal(literal),
                        quote_literal(prefix + m.stored.text + suffix));
          if (requery.text == result.sql) continue;
          auto r = session_.execute_retrieval(requery);
          if (r.ok() && !r.rows.empty()) lookup.requeries.push_back(std::move(r));
        }
      }
      lookups.push_back(std::move(lookup));
    }
  }
  ctx.trace.similarity = std::move(lookups);
}

std::string Pipeline::render_select_context(const BatchContext& ctx) const {
  std::string out = render_results(ctx.trace.select_results.value_or(std::vector<QueryResult>{}));
  if (ctx.trace.similarity && !ctx.trace.similarity->empty()) {
    out += "\nSimilar stored concepts (similarity > " + format_number(cfg_.similarity_threshold) +
           "):\n";
    for (const auto& lookup : *ctx.trace.similarity) {
      for (const auto& m : lookup.matches) {
        out += "- " + quote_literal(lookup.term) + " ~ " + std::string(to_string(m.stored.kind)) +
               " " + quote_literal(m.stored.text);
        if (m.stored.kind == ConceptKind::kColumn) out += " (table " + m.stored.table + ")";
        if (m.stored.kind == ConceptKind::kValue) {
          out += " (" + m.stored.table + "." + m.stored.column + ")";
        }
        out += " " + format_similarity(m.similarity) + "\n";
      }
      for (const auto& r : lookup.requeries) out += r.sql + ";\n" + r.render() + "\n";
    }
  }
  return out;
}

void Pipeline::step3_dst(BatchContext& ctx) {
  const auto prompt = fill_template(prompts_.dst, render_select_context(ctx), ctx.dialogue_text,
                                    /*append_dialogue=*/false);
  ctx.trace.dst_summary = ask(ctx, prompt);
}

void Pipeline::step4_update(BatchContext& ctx) {
  std::string prompt;
  if (cfg_.variant == Variant::kDirectUpdate) {
    const std::string& tmpl = prompts_.direct.empty() ? prompts_.update_prompt(false)
                                                      : prompts_.direct;
    prompt = fill_template(tmpl, "", ctx.dialogue_text, /*append_dialogue=*/true);
  } else {
    const std::string context = "Schema:\n" + render_schema(session_.snapshot_schema()) +
                                "\nQuery results:\n" + render_select_context(ctx);
    prompt = fill_template(prompts_.update_prompt(cfg_.use_success), context, ctx.dialogue_text,
                           /*append_dialogue=*/false);
  }
  const auto reply = ask(ctx, prompt);

  auto extraction = extract_statements(reply);
  for (auto& d : extraction.diagnostics) ctx.trace.diagnostics.push_back("update: " + d);
  std::vector<SqlStatement> updates;
  for (auto& stmt : extraction.statements) {
    if (stmt.is_update()) {
      updates.push_back(std::move(stmt));
    } else {
      ctx.trace.diagnostics.push_back("update: discarded " + std::string(to_string(stmt.kind)) +
                                      " statement: " + stmt.text.substr(0, 80));
    }
  }
  session_.set_audit_context(ctx.trace.batch_index, "update");
  ctx.trace.updates = session_.execute_updates(updates);
}

StepTrace Pipeline::run_dialogue(Batch batch, std::int64_t index) {
  auto ctx = start_batch(batch, index);
  try {
    if (cfg_.variant == Variant::kDirectUpdate) {
      step4_update(ctx);
    } else {
      step1_inspect(ctx);
      step2_selects(ctx);
      if (cfg_.use_dst) step3_dst(ctx);
      step4_update(ctx);
    }
  } catch (const ProviderError& e) {
    ctx.trace.failed = true;
    ctx.trace.error = e.what();
  } catch (const TransientProviderError& e) {
    ctx.trace.failed = true;
    ctx.trace.error = e.what();
  }
  return std::move(ctx.trace);
}

RunResult Pipeline::run_dataset(const Corpus& corpus, const RunOptions& options) {
  if (corpus.items.empty()) throw ConfigError("corpus \"" + corpus.name + "\" is empty");
  const Corpus ordered = cfg_.shuffle ? permute(corpus, cfg_.seed) : corpus;
  const auto batches = batch(ordered, cfg_.batch_size);

  RunStats stats;
  stats.dialogues = ordered.items.size();
  stats.batches_total = batches.size();
  stats.chat_calls = options.prior_chat_calls;
  stats.batches_failed = options.prior_failed_batches;

  std::size_t processed = 0;
  auto index = static_cast<std::size_t>(std::max<std::int64_t>(0, options.start_batch));
  for (; index < batches.size(); ++index) {
    if (options.max_batches && processed >= *options.max_batches) break;
    const auto i = static_cast<std::int64_t>(index);
    std::vector<std::string> ids;
    for (const auto& d : batches[index]) ids.push_back(d.id);
    if (audit_ != nullptr) audit_->batch_begin(i, ids);
    session_.begin_batch();
    StepTrace trace;
    try {
      trace = run_dialogue(batches[index], i);
    } catch (...) {
      session_.rollback_batch();
      throw;
    }
    session_.set_completed_batches(i + 1);
    session_.commit_batch();
    if (audit_ != nullptr) audit_->batch_end(i, trace.failed ? "failed" : "ok", trace.chat_calls);
    stats.chat_calls += trace.chat_calls;
    if (trace.failed) ++stats.batches_failed;
    ++processed;
    if (options.on_trace) options.on_trace(trace);
  }
  stats.batches_processed = index;

  RunResult result;
  const auto snap = session_.snapshot_with_values();
  result.ontology = extract_ontology(snap);
  stats.table_count = snap.tables.size();
  stats.sql = session_.stats();
  result.stats = stats;
  return result;
}

}  // namespace ontosql
