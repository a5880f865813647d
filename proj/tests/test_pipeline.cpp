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

#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "ontosql/errors.hpp"
#include "ontosql/pipeline.hpp"
#include "ontosql/util.hpp"
#include "test_support.hpp"

using namespace ontosql;

namespace {

enum class Step { kInspect, kSelect, kDst, kUpdate, kDirect };

Step step_of(const ChatRequest& r) {
  const auto& text = r.messages.back().text;
  if (text.rfind("You've already examined", 0) == 0) return Step::kSelect;
  if (text.rfind("You've already run", 0) == 0) return Step::kDst;
  if (text.rfind("You have already reviewed", 0) == 0) return Step::kUpdate;
  if (text.find("two inputs") != std::string::npos) return Step::kInspect;
  return Step::kDirect;
}

Corpus corpus_of(std::initializer_list<std::pair<const char*, const char*>> items) {
  Corpus c;
  c.name = "test";
  for (const auto& [id, user] : items) {
    c.items.push_back({id, {{Speaker::kUser, user}, {Speaker::kSystem, "Sure."}}});
  }
  return c;
}

RunConfig query_config() {
  RunConfig cfg;
  cfg.variant = Variant::kQueryUpdate;
  cfg.use_dst = true;
  cfg.use_similarity = false;
  cfg.use_value_examples = true;
  cfg.use_success = true;
  return cfg;
}

RunConfig direct_config() {
  RunConfig cfg;
  cfg.variant = Variant::kDirectUpdate;
  cfg.use_dst = false;
  cfg.use_similarity = false;
  cfg.use_value_examples = false;
  cfg.use_success = false;
  return cfg;
}

PromptSet prompts() { return PromptSet::load(testing::prompts_dir()); }

std::string fenced(const std::string& sql) { return "```sql\n" + sql + "\n```"; }

// 0.83 between "Allenbell" and "The Allenbell", hashing for everything else.
std::unique_ptr<ScriptedEmbeddingProvider> allenbell_embedder() {
  auto e = std::make_unique<ScriptedEmbeddingProvider>(64, true);
  std::vector<double> a(64, 0.0), b(64, 0.0);
  a[0] = 1.0;
  b[0] = 0.83;
  b[1] = std::sqrt(1 - 0.83 * 0.83);
  e->set("Allenbell", a);
  e->set("The Allenbell", b);
  return e;
}

}  // namespace

TEST_CASE("prompt set loads all templates") {
  const auto p = prompts();
  for (const auto* t : {&p.inspect, &p.select, &p.dst, &p.update}) {
    CHECK(t->find("{db_result_input}") != std::string::npos);
  }
  CHECK_FALSE(p.direct.empty());
  const auto with = p.update_prompt(true);
  const auto without = p.update_prompt(false);
  CHECK(with.find("successfully handled") != std::string::npos);
  CHECK(without.find("successfully handled") == std::string::npos);
  CHECK(with.find("[[") == std::string::npos);
  CHECK(without.find("[[") == std::string::npos);
  testing::TempDir dir;
  CHECK_THROWS_AS(PromptSet::load(dir.path()), ConfigError);
}

TEST_CASE("fill_template") {
  CHECK(fill_template("A {db_result_input} B", "x", "d", false) == "A x B");
  CHECK(fill_template("A {db_result_input}\n", "x", "User: hi\n", true) ==
        "A x\n\nDialogue(s):\nUser: hi\n");
  CHECK(fill_template("{dialogue}|{db_result_input}", "x", "D", true) == "D|x");
}

TEST_CASE("left truncation keeps the newest text within budget") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ChatMessage> msgs;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      std::string text(rng() % 400, 'a' + static_cast<char>(i));
      if (i % 3 == 2) text += "\xC3\xA9\xE2\x82\xAC";  // multibyte tail
      msgs.push_back({i % 2 == 0 ? Role::kUser : Role::kAssistant, text});
    }
    const std::size_t budget = 1 + rng() % 200;
    auto cut = msgs;
    const bool changed = truncate_left(cut, budget);
    ChatRequest r;
    r.messages = cut;
    CHECK(r.estimated_tokens() <= budget);
    ChatRequest orig;
    orig.messages = msgs;
    CHECK(changed == (orig.estimated_tokens() > budget));
    // Whatever survives is a suffix of the original conversation.
    REQUIRE(!cut.empty());
    const auto offset = msgs.size() - cut.size();
    for (std::size_t i = 1; i < cut.size(); ++i) CHECK(cut[i] == msgs[offset + i]);
    const auto& head = msgs[offset].text;
    CHECK(head.compare(head.size() - cut[0].text.size(), std::string::npos, cut[0].text) == 0);
  }
}

TEST_CASE("similar concepts: threshold, ranking and cap") {
  auto embedder = allenbell_embedder();
  DbSnapshot snap;
  snap.tables.push_back({"guesthouses", {{"name", "TEXT", false, std::vector<std::string>{"The Allenbell"}}}});
  const auto hits = similarity_augment({"Allenbell"}, snap, *embedder, 0.436, 5);
  bool found = false;
  for (const auto& h : hits) {
    if (h.stored.text == "The Allenbell") {
      found = true;
      CHECK(h.similarity == doctest::Approx(0.83));
      CHECK(h.stored.kind == ConceptKind::kValue);
      CHECK(h.stored.column == "name");
    }
  }
  CHECK(found);

  ScriptedEmbeddingProvider grid(2, false);
  grid.set("term", {1, 0});
  std::vector<StoredConcept> pool;
  const std::vector<double> sims = {0.436, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 0.2};
  for (std::size_t i = 0; i < sims.size(); ++i) {
    const std::string name = "c" + std::to_string(i);
    grid.set(name, {sims[i], std::sqrt(1 - sims[i] * sims[i])});
    pool.push_back({name, ConceptKind::kValue, "t", "v"});
  }
  const auto top = similar_concepts("term", pool, grid, 0.436, 5);
  REQUIRE(top.size() == 5);
  const std::vector<std::string> want = {"c7", "c6", "c5", "c4", "c3"};
  for (std::size_t i = 0; i < 5; ++i) CHECK(top[i].stored.text == want[i]);
  // Rounding in normalization moves c0 off 0.436 by an ulp, so use its exact
  // computed similarity as the threshold to pin the strict comparison.
  const std::vector<std::string> probe = {"term", "c0"};
  const auto v = grid.embed(probe);
  const double boundary = cosine_similarity(v[0], v[1]);
  CHECK(boundary == doctest::Approx(0.436));
  const auto all = similar_concepts("term", pool, grid, boundary, 100);
  CHECK(all.size() == 7);  // c0 at the threshold and c8 at 0.2 excluded
  for (const auto& h : all) CHECK(h.stored.text != "c0");
  CHECK_THROWS_AS(similar_concepts("term", pool, grid, 1.0, 5), std::invalid_argument);
}

TEST_CASE("run config validation") {
  CHECK_NOTHROW(query_config().validate());
  CHECK_NOTHROW(direct_config().validate());
  auto bad = direct_config();
  bad.use_dst = true;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  auto t = query_config();
  t.similarity_threshold = 1.0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  auto b = query_config();
  b.batch_size = 0;
  CHECK_THROWS_AS(b.validate(), ConfigError);
  CHECK(parse_variant("direct") == Variant::kDirectUpdate);
  CHECK_THROWS_AS(parse_variant("both"), ConfigError);
  auto db = DbSession::open(":memory:");
  testing::CapturingChatProvider chat([](const ChatRequest&, std::size_t) { return ""; });
  auto sim = query_config();
  sim.use_similarity = true;
  CHECK_THROWS_AS(Pipeline(db, chat, nullptr, prompts(), sim), ConfigError);
}

TEST_CASE("chat calls per batch follow the variant") {
  const auto corpus = corpus_of({{"a", "hi"}, {"b", "hello"}, {"c", "hey"}});
  struct Case {
    RunConfig cfg;
    std::size_t per_batch;
  };
  auto no_dst = query_config();
  no_dst.use_dst = false;
  for (const auto& [cfg, per_batch] :
       {Case{direct_config(), 1}, Case{query_config(), 4}, Case{no_dst, 3}}) {
    auto db = DbSession::open(":memory:");
    testing::CapturingChatProvider chat([](const ChatRequest&, std::size_t) { return "ok"; });
    Pipeline p(db, chat, nullptr, prompts(), cfg);
    std::vector<std::size_t> calls;
    RunOptions opts;
    opts.on_trace = [&](const StepTrace& t) { calls.push_back(t.chat_calls); };
    const auto result = p.run_dataset(corpus, opts);
    CHECK(calls == std::vector<std::size_t>(3, per_batch));
    CHECK(result.stats.chat_calls == 3 * per_batch);
    CHECK(chat.requests.size() == 3 * per_batch);
  }
}

TEST_CASE("steps run in order and the conversation accumulates") {
  auto db = DbSession::open(":memory:");
  testing::CapturingChatProvider chat([](const ChatRequest&, std::size_t) { return "ok"; });
  Pipeline p(db, chat, nullptr, prompts(), query_config());
  p.run_dataset(corpus_of({{"a", "I need a cheap hotel"}}));
  REQUIRE(chat.requests.size() == 4);
  CHECK(step_of(chat.requests[0]) == Step::kInspect);
  CHECK(step_of(chat.requests[1]) == Step::kSelect);
  CHECK(step_of(chat.requests[2]) == Step::kDst);
  CHECK(step_of(chat.requests[3]) == Step::kUpdate);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(chat.requests[i].messages.size() == 2 * i + 1);
    CHECK(chat.requests[i].temperature == 0.0);
  }
  CHECK(chat.requests[0].messages[0].text.find("User: I need a cheap hotel") != std::string::npos);
  CHECK(chat.requests[0].messages[0].text.find("[]") != std::string::npos);
  CHECK(chat.requests[3].messages.back().text.find("successfully handled") != std::string::npos);
}

TEST_CASE("feature flags shape the trace") {
  const auto corpus = corpus_of({{"a", "hi"}});
  auto run = [&](RunConfig cfg, EmbeddingProvider* e) {
    auto db = DbSession::open(":memory:");
    testing::CapturingChatProvider chat([](const ChatRequest&, std::size_t) { return "ok"; });
    Pipeline p(db, chat, e, prompts(), cfg);
    StepTrace trace;
    RunOptions opts;
    opts.on_trace = [&](const StepTrace& t) { trace = t; };
    p.run_dataset(corpus, opts);
    return std::make_pair(trace, chat.requests);
  };
  HashingEmbedder embedder(32);

  auto [full, full_req] = run(query_config(), nullptr);
  CHECK(full.tables.has_value());
  CHECK(full.select_results.has_value());
  CHECK(full.value_examples.has_value());
  CHECK_FALSE(full.similarity.has_value());
  CHECK(full.dst_summary == std::optional<std::string>("ok"));
  CHECK(full.updates.has_value());

  auto lean = query_config();
  lean.use_dst = false;
  lean.use_value_examples = false;
  lean.use_success = false;
  lean.use_similarity = true;
  auto [t, req] = run(lean, &embedder);
  CHECK_FALSE(t.dst_summary.has_value());
  CHECK_FALSE(t.value_examples.has_value());
  CHECK(t.similarity.has_value());
  CHECK(req.back().messages.back().text.find("successfully handled") == std::string::npos);

  auto [d, dreq] = run(direct_config(), nullptr);
  CHECK_FALSE(d.tables.has_value());
  CHECK_FALSE(d.select_results.has_value());
  CHECK(d.updates.has_value());
  CHECK(step_of(dreq[0]) == Step::kDirect);
  CHECK(dreq[0].messages[0].text.find("User: hi") != std::string::npos);

  const auto j = nlohmann::json::parse(full.to_json());
  CHECK(j["chat_calls"] == 4);
  CHECK(j["failed"] == false);
  CHECK_FALSE(j.contains("similarity"));
}

TEST_CASE("update statements in inspect and select replies are discarded") {
  auto db = DbSession::open(":memory:");
  testing::CapturingChatProvider chat([](const ChatRequest& r, std::size_t) -> std::string {
    switch (step_of(r)) {
      case Step::kInspect: return fenced("CREATE TABLE sneaky (a TEXT);");
      case Step::kSelect: return fenced("INSERT INTO sneaky VALUES ('x'); SELECT 1;");
      case Step::kUpdate: return fenced("CREATE TABLE hotels (name TEXT);");
      default: return "none";
    }
  });
  Pipeline p(db, chat, nullptr, prompts(), query_config());
  StepTrace trace;
  RunOptions opts;
  opts.on_trace = [&](const StepTrace& t) { trace = t; };
  p.run_dataset(corpus_of({{"a", "hi"}}), opts);
  CHECK(db.table_names() == std::vector<std::string>{"hotels"});
  REQUIRE(trace.select_results.has_value());
  CHECK(trace.select_results->size() == 1);
  CHECK(trace.diagnostics.size() == 2);
  CHECK(trace.diagnostics[0].rfind("inspect: discarded schema_update", 0) == 0);
  CHECK(trace.diagnostics[1].rfind("select: discarded data_update", 0) == 0);
}

TEST_CASE("retrieval results and value examples reach later prompts") {
  auto db = DbSession::open(":memory:");
  db.execute_updates(std::vector<SqlStatement>{
      {"CREATE TABLE hotels (name TEXT, area TEXT)", StatementKind::kSchemaUpdate},
      {"INSERT INTO hotels VALUES ('Acorn', 'north')", StatementKind::kDataUpdate}});
  testing::CapturingChatProvider chat([](const ChatRequest& r, std::size_t) -> std::string {
    switch (step_of(r)) {
      case Step::kInspect: return fenced("PRAGMA table_info(hotels);");
      case Step::kSelect: return fenced("SELECT name FROM hotels WHERE area = 'north';");
      default: return "none";
    }
  });
  Pipeline p(db, chat, nullptr, prompts(), query_config());
  p.run_dataset(corpus_of({{"a", "hi"}}));
  const auto& inspect_prompt = chat.requests[0].messages.back().text;
  CHECK(inspect_prompt.find("['hotels']") != std::string::npos);
  const auto& select_prompt = chat.requests[1].messages.back().text;
  CHECK(select_prompt.find("PRAGMA table_info(hotels);\n[(0, 'name', 'TEXT', 0, None, 0)") !=
        std::string::npos);
  CHECK(select_prompt.find("Column value examples:\nhotels.area: ['north']\nhotels.name: ['Acorn']") !=
        std::string::npos);
  const auto& dst_prompt = chat.requests[2].messages.back().text;
  CHECK(dst_prompt.find("[('Acorn',)]") != std::string::npos);
  const auto& update_prompt = chat.requests[3].messages.back().text;
  CHECK(update_prompt.find("Schema:\nhotels(name TEXT, area TEXT)") != std::string::npos);
}

TEST_CASE("similarity matching recovers a near-miss literal") {
  auto run = [](bool use_similarity) {
    auto db = DbSession::open(":memory:");
    db.execute_updates(std::vector<SqlStatement>{
        {"CREATE TABLE guesthouses (name TEXT, area TEXT)", StatementKind::kSchemaUpdate},
        {"INSERT INTO guesthouses VALUES ('The Allenbell', 'east')", StatementKind::kDataUpdate}});
    testing::CapturingChatProvider chat([](const ChatRequest& r, std::size_t) -> std::string {
      if (step_of(r) == Step::kSelect) {
        return fenced("SELECT area FROM guesthouses WHERE name = 'Allenbell';");
      }
      return "none";
    });
    auto embedder = allenbell_embedder();
    auto cfg = query_config();
    cfg.use_similarity = use_similarity;
    Pipeline p(db, chat, embedder.get(), prompts(), cfg);
    StepTrace trace;
    RunOptions opts;
    opts.on_trace = [&](const StepTrace& t) { trace = t; };
    p.run_dataset(corpus_of({{"a", "Is the Allenbell in the east?"}}), opts);
    return std::make_pair(trace, chat.requests.at(2).messages.back().text);
  };
  auto [on, dst_on] = run(true);
  REQUIRE(on.similarity.has_value());
  REQUIRE(on.similarity->size() == 1);
  CHECK(on.similarity->at(0).term == "Allenbell");
  REQUIRE(on.similarity->at(0).requeries.size() == 1);
  CHECK(on.similarity->at(0).requeries[0].sql ==
        "SELECT area FROM guesthouses WHERE name = 'The Allenbell'");
  CHECK(dst_on.find("'Allenbell' ~ value 'The Allenbell' (guesthouses.name) 0.830") !=
        std::string::npos);
  CHECK(dst_on.find("[('east',)]") != std::string::npos);

  auto [off, dst_off] = run(false);
  CHECK_FALSE(off.similarity.has_value());
  CHECK(dst_off.find("The Allenbell") == std::string::npos);
  CHECK(dst_off.find("No Result") != std::string::npos);
}

TEST_CASE("prompt budget truncates from the left") {
  auto db = DbSession::open(":memory:");
  testing::CapturingChatProvider chat(
      [](const ChatRequest&, std::size_t) { return std::string(2000, 'r'); });
  auto cfg = query_config();
  cfg.prompt_budget = 1500;
  Pipeline p(db, chat, nullptr, prompts(), cfg);
  StepTrace trace;
  RunOptions opts;
  opts.on_trace = [&](const StepTrace& t) { trace = t; };
  p.run_dataset(corpus_of({{"a", "hi"}}), opts);
  CHECK(trace.truncated);
  for (const auto& r : chat.requests) {
    CHECK(r.estimated_tokens() <= 1500);
    CHECK(r.messages.back().role == Role::kUser);
  }
}

TEST_CASE("provider failure marks the batch and the run continues") {
  auto db = DbSession::open(":memory:");
  testing::CapturingChatProvider chat([](const ChatRequest& r, std::size_t) -> std::string {
    if (r.messages.back().text.find("User: boom") != std::string::npos) {
      throw ProviderError("quota exceeded", r.fingerprint());
    }
    if (r.messages.back().text.find("User: flaky") != std::string::npos) {
      throw TransientProviderError("timeout");
    }
    return fenced("CREATE TABLE IF NOT EXISTS t (a TEXT);");
  });
  Pipeline p(db, chat, nullptr, prompts(), direct_config());
  std::vector<StepTrace> traces;
  RunOptions opts;
  opts.on_trace = [&](const StepTrace& t) { traces.push_back(t); };
  const auto result = p.run_dataset(corpus_of({{"a", "boom"}, {"b", "fine"}, {"c", "flaky"}}), opts);
  REQUIRE(traces.size() == 3);
  CHECK(traces[0].failed);
  CHECK(traces[0].error.find("quota exceeded") != std::string::npos);
  CHECK_FALSE(traces[1].failed);
  CHECK(traces[2].failed);
  CHECK(result.stats.batches_failed == 2);
  CHECK(result.stats.batches_processed == 3);
  CHECK(result.stats.table_count == 1);
}

TEST_CASE("twenty updates with one invalid give a 5.00% error ratio") {
  auto db = DbSession::open(":memory:");
  std::string sql = "CREATE TABLE hotels (name TEXT, area TEXT);\n";
  for (int i = 0; i < 18; ++i) {
    sql += "INSERT INTO hotels VALUES ('h" + std::to_string(i) + "', 'east');\n";
    if (i == 8) sql += "INSERT INTO hotels (stars) VALUES (4);\n";
  }
  testing::CapturingChatProvider chat([&](const ChatRequest&, std::size_t) { return fenced(sql); });
  Pipeline p(db, chat, nullptr, prompts(), direct_config());
  StepTrace trace;
  RunOptions opts;
  opts.on_trace = [&](const StepTrace& t) { trace = t; };
  const auto result = p.run_dataset(corpus_of({{"a", "hi"}}), opts);
  CHECK(result.stats.sql.update_statements == 20);
  CHECK(result.stats.sql.failed_updates == 1);
  CHECK(format_percent(result.stats.error_ratio()) == "5.00%");
  REQUIRE(trace.updates.has_value());
  CHECK(trace.updates->failures.size() == 1);
  CHECK(trace.updates->failures[0].index == 10);
  const auto count = db.execute_retrieval({"SELECT count(*) FROM hotels", StatementKind::kRetrieval});
  CHECK(count.rows.at(0).at(0).text == "18");
  CHECK(result.ontology.values_of(Label::normalize("hotels"), Label::normalize("name")).size() == 18);
}

TEST_CASE("run stats round-trip and empty corpus is rejected") {
  RunStats s;
  s.table_count = 5;
  s.sql.update_statements = 17;
  s.sql.failed_updates = 2;
  s.chat_calls = 12;
  const auto back = RunStats::from_json(s.to_json());
  CHECK(back.to_json() == s.to_json());
  CHECK_THROWS_AS(RunStats::from_json("{}"), ParseError);

  auto db = DbSession::open(":memory:");
  testing::CapturingChatProvider chat([](const ChatRequest&, std::size_t) { return ""; });
  Pipeline p(db, chat, nullptr, prompts(), direct_config());
  CHECK_THROWS_AS(p.run_dataset(Corpus{}), ConfigError);
}

TEST_CASE("shuffle and batching change the batch composition") {
  auto db = DbSession::open(":memory:");
  testing::CapturingChatProvider chat([](const ChatRequest&, std::size_t) { return "ok"; });
  auto cfg = direct_config();
  cfg.batch_size = 2;
  cfg.shuffle = true;
  cfg.seed = 3;
  Pipeline p(db, chat, nullptr, prompts(), cfg);
  std::vector<std::vector<std::string>> seen;
  RunOptions opts;
  opts.on_trace = [&](const StepTrace& t) { seen.push_back(t.dialogue_ids); };
  const auto corpus = corpus_of({{"a", "1"}, {"b", "2"}, {"c", "3"}, {"d", "4"}, {"e", "5"}});
  p.run_dataset(corpus, opts);
  const auto order = permute(corpus, 3);
  REQUIRE(seen.size() == 3);
  CHECK(seen[0] == std::vector<std::string>{order.items[0].id, order.items[1].id});
  CHECK(seen[2] == std::vector<std::string>{order.items[4].id});
  CHECK(chat.requests[0].messages[0].text.find("### Dialogue " + order.items[0].id) !=
        std::string::npos);
}
