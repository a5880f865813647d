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

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "ontosql/audit_log.hpp"
#include "ontosql/db_session.hpp"
#include "ontosql/errors.hpp"
#include "ontosql/sql_statement.hpp"
#include "ontosql/util.hpp"
#include "test_support.hpp"

using namespace ontosql;

namespace {

std::vector<SqlStatement> parse_all(std::string_view text) {
  return extract_statements(text).statements;
}

SqlStatement stmt(std::string text) {
  auto kind = classify_statement(text);
  return {std::move(text), kind};
}

UpdateOutcome apply(DbSession& db, std::vector<std::string> sqls) {
  std::vector<SqlStatement> stmts;
  for (auto& s : sqls) stmts.push_back(stmt(std::move(s)));
  return db.execute_updates(stmts);
}

}  // namespace

TEST_CASE("classify_statement by first keyword") {
  CHECK(classify_statement("SELECT 1") == StatementKind::kRetrieval);
  CHECK(classify_statement("  pragma table_info(t)") == StatementKind::kRetrieval);
  CHECK(classify_statement("-- note\nCREATE TABLE t (a)") == StatementKind::kSchemaUpdate);
  CHECK(classify_statement("/* x */ alter table t add b") == StatementKind::kSchemaUpdate);
  CHECK(classify_statement("INSERT INTO t VALUES (1)") == StatementKind::kDataUpdate);
  CHECK(classify_statement("update t set a = 1") == StatementKind::kDataUpdate);
  CHECK(classify_statement("DELETE FROM t") == StatementKind::kDataUpdate);
  CHECK(classify_statement("DROP TABLE t") == StatementKind::kOther);
  CHECK(classify_statement("TRUNCATE t") == StatementKind::kOther);
  CHECK(classify_statement("WITH x AS (SELECT 1) SELECT * FROM x") == StatementKind::kOther);
  CHECK(classify_statement("") == StatementKind::kOther);
}

TEST_CASE("adversarial extraction fixtures") {
  const auto cases =
      nlohmann::json::parse(read_file(testing::data_dir() / "extraction" / "cases.json"));
  REQUIRE(cases.size() >= 25);
  for (const auto& c : cases) {
    CAPTURE(c["name"].get<std::string>());
    const auto got = extract_statements(c["input"].get<std::string>());
    REQUIRE(got.statements.size() == c["expected"].size());
    for (std::size_t i = 0; i < got.statements.size(); ++i) {
      CHECK(got.statements[i].text == c["expected"][i]["sql"].get<std::string>());
      CHECK(to_string(got.statements[i].kind) == c["expected"][i]["kind"].get<std::string>());
    }
    CHECK(got.diagnostics == c["diagnostics"].get<std::vector<std::string>>());
  }
}

TEST_CASE("retrieval-classified statements never start with an update keyword") {
  const auto cases =
      nlohmann::json::parse(read_file(testing::data_dir() / "extraction" / "cases.json"));
  for (const auto& c : cases) {
    for (const auto& s : parse_all(c["input"].get<std::string>())) {
      if (s.kind != StatementKind::kRetrieval) continue;
      const auto head = to_lower(trim(s.text)).substr(0, 6);
      CHECK(head != "create");
      CHECK(head != "insert");
      CHECK(head != "update");
      CHECK(head != "delete");
    }
  }
}

TEST_CASE("string literals and quoting") {
  CHECK(string_literals("SELECT * FROM t WHERE a = 'O''Brian' AND \"b'c\" = 'x'") ==
        std::vector<std::string>{"O'Brian", "x"});
  CHECK(string_literals("SELECT 1 -- 'not a literal'") .empty());
  CHECK(quote_literal("O'Brian") == "'O''Brian'");
  CHECK(quote_identifier("we\"ird") == "\"we\"\"ird\"");
}

TEST_CASE("open_session") {
  auto mem = DbSession::open(":memory:");
  CHECK(mem.snapshot_schema().empty());

  testing::TempDir dir;
  const auto path = (dir / "two.db").string();
  {
    auto db = DbSession::open(path);
    apply(db, {"CREATE TABLE a (x TEXT)", "CREATE TABLE b (y TEXT)"});
  }
  auto reopened = DbSession::open(path);
  CHECK(reopened.snapshot_schema().table_names() == std::vector<std::string>{"a", "b"});

  CHECK_THROWS_AS(DbSession::open((dir / "missing" / "sub" / "x.db").string()), IoError);
  {
    std::ofstream junk(dir / "junk.db");
    junk << "this is not a database file, just text padding it out to a header";
  }
  CHECK_THROWS_AS(DbSession::open((dir / "junk.db").string()), IoError);
}

TEST_CASE("execute_retrieval renders rows and captures errors") {
  auto db = DbSession::open(":memory:");
  auto empty = db.execute_retrieval(stmt("SELECT name FROM sqlite_master WHERE type='table'"));
  CHECK(empty.ok());
  CHECK(empty.rows.empty());
  CHECK(empty.render() == "No Result");

  apply(db, {"CREATE TABLE guesthouses (name TEXT, location TEXT, free_wifi INTEGER)",
             "INSERT INTO guesthouses VALUES ('The Allenbell', 'east', 0)"});
  auto r = db.execute_retrieval(
      stmt("SELECT name, location, free_wifi FROM guesthouses WHERE name = 'The Allenbell'"));
  REQUIRE(r.ok());
  CHECK(r.render() == "[('The Allenbell', 'east', 0)]");

  auto missing = db.execute_retrieval(stmt("SELECT * FROM nowhere"));
  CHECK_FALSE(missing.ok());
  CHECK(missing.error->find("no such table") != std::string::npos);
  CHECK(missing.render().rfind("Error:", 0) == 0);
}

TEST_CASE("retrievals cannot write") {
  auto db = DbSession::open(":memory:");
  apply(db, {"CREATE TABLE t (a TEXT)"});
  CHECK_FALSE(db.execute_retrieval(stmt("PRAGMA user_version = 5")).ok());
  CHECK_FALSE(db.execute_retrieval({"INSERT INTO t VALUES ('x')", StatementKind::kDataUpdate}).ok());
  CHECK_FALSE(db.execute_retrieval({"SELECT 1; SELECT 2", StatementKind::kRetrieval}).ok());
  CHECK(db.execute_retrieval(stmt("PRAGMA table_info(t)")).ok());
  CHECK(db.snapshot_with_values().tables.at(0).columns.at(0).values->empty());
}

TEST_CASE("retrieval row limit") {
  DbSession::Options opts;
  opts.row_limit = 3;
  auto db = DbSession::open(":memory:", opts);
  apply(db, {"CREATE TABLE n (v INTEGER)",
             "INSERT INTO n VALUES (1), (2), (3), (4), (5)"});
  auto r = db.execute_retrieval(stmt("SELECT v FROM n ORDER BY v"));
  CHECK(r.rows.size() == 3);
  CHECK(r.truncated);
}

TEST_CASE("retrieval timeout") {
  DbSession::Options opts;
  opts.statement_timeout = std::chrono::milliseconds(50);
  auto db = DbSession::open(":memory:", opts);
  // WITH is classified "other", so wrap it in a SELECT.
  auto r = db.execute_retrieval({"SELECT count(*) FROM (WITH RECURSIVE c(x) AS (SELECT 1 UNION ALL "
                            "SELECT x + 1 FROM c) SELECT x FROM c)",
                            StatementKind::kRetrieval});
  CHECK_FALSE(r.ok());
}

TEST_CASE("execute_updates error accounting") {
  auto db = DbSession::open(":memory:");
  std::vector<std::string> sqls = {"CREATE TABLE hotels (name TEXT, area TEXT)"};
  for (int i = 0; i < 18; ++i) {
    sqls.push_back("INSERT INTO hotels VALUES ('h" + std::to_string(i) + "', 'east')");
  }
  sqls.insert(sqls.begin() + 5, "INSERT INTO hotels (stars) VALUES (4)");  // no such column
  REQUIRE(sqls.size() == 20);
  const auto outcome = apply(db, sqls);
  CHECK(outcome.update_count() == 20);
  REQUIRE(outcome.failures.size() == 1);
  CHECK(outcome.failures[0].index == 5);
  CHECK(outcome.error_ratio() == doctest::Approx(0.05));
  CHECK(db.stats().update_statements == 20);
  CHECK(db.stats().failed_updates == 1);
  // Statements after the failure still ran.
  auto count = db.execute_retrieval(stmt("SELECT count(*) FROM hotels"));
  CHECK(count.rows.at(0).at(0).text == "18");
}

TEST_CASE("schema updates show in the snapshot") {
  auto db = DbSession::open(":memory:");
  apply(db, {"CREATE TABLE hotels (name TEXT)", "ALTER TABLE hotels ADD COLUMN price TEXT"});
  const auto snap = db.snapshot_schema();
  REQUIRE(snap.tables.size() == 1);
  CHECK(snap.tables[0].columns.size() == 2);
  CHECK(snap.tables[0].columns[1].name == "price");
  CHECK(snap.tables[0].columns[1].declared_type == "TEXT");
}

TEST_CASE("duplicate CREATE fails alone and leaves the session intact") {
  auto db = DbSession::open(":memory:");
  apply(db, {"CREATE TABLE hotels (name TEXT)"});
  const auto before = db.snapshot_schema();
  const auto outcome = apply(db, {"CREATE TABLE hotels (name TEXT, x TEXT)"});
  CHECK(outcome.failures.size() == 1);
  CHECK(db.snapshot_schema() == before);
  CHECK(apply(db, {"INSERT INTO hotels VALUES ('a')"}).failures.empty());
}

TEST_CASE("a failing statement never partially applies") {
  auto db = DbSession::open(":memory:");
  apply(db, {"CREATE TABLE u (k TEXT PRIMARY KEY)"});
  const auto outcome = apply(db, {"INSERT INTO u VALUES ('a'), ('b'), ('a')"});
  CHECK(outcome.failures.size() == 1);
  auto r = db.execute_retrieval(stmt("SELECT count(*) FROM u"));
  CHECK(r.rows.at(0).at(0).text == "0");
}

TEST_CASE("destructive and transaction statements are refused") {
  auto db = DbSession::open(":memory:");
  apply(db, {"CREATE TABLE t (a TEXT, b TEXT)"});
  CHECK_THROWS_AS(db.execute_updates(std::vector<SqlStatement>{stmt("DROP TABLE t")}),
                  std::invalid_argument);
  CHECK(apply(db, {"ALTER TABLE t DROP COLUMN b"}).failures.size() == 1);
  CHECK(db.snapshot_schema().tables.at(0).columns.size() == 2);
  CHECK(apply(db, {"INSERT INTO sqlite_stat1 VALUES ('t', NULL, '1')"}).failures.size() == 1);
}

TEST_CASE("snapshots are sorted and replay-deterministic") {
  const std::vector<std::string> script = {
      "CREATE TABLE zebra (b TEXT, a TEXT)", "CREATE TABLE apple (x INTEGER)",
      "INSERT INTO zebra VALUES ('2', '1')", "CREATE TABLE apple (dup TEXT)",
      "ALTER TABLE apple ADD COLUMN y REAL", "INSERT INTO apple VALUES (3, 1.5)",
      "INSERT INTO zebra VALUES (NULL, 'z')"};
  auto one = DbSession::open(":memory:");
  auto two = DbSession::open(":memory:");
  apply(one, script);
  apply(two, script);
  const auto snap = one.snapshot_with_values();
  CHECK(snap == two.snapshot_with_values());
  CHECK(snap.table_names() == std::vector<std::string>{"apple", "zebra"});
  CHECK(*snap.find_table("ZEBRA")->find_column("A")->values ==
        std::vector<std::string>{"1", "z"});
  CHECK(*snap.find_table("apple")->find_column("y")->values == std::vector<std::string>{"1.5"});
}

TEST_CASE("failed CREATE leaves the snapshot unchanged") {
  auto db = DbSession::open(":memory:");
  const auto before = db.snapshot_schema();
  apply(db, {"CREATE TABLE bad (a TEXT, a TEXT)"});
  CHECK(db.snapshot_schema() == before);
}

TEST_CASE("sample_column_values") {
  auto db = DbSession::open(":memory:");
  std::vector<std::string> sqls = {"CREATE TABLE t (two TEXT, many TEXT, none TEXT)",
                                   "INSERT INTO t (two) VALUES ('x'), ('y'), ('x')"};
  for (int i = 0; i < 100; ++i) {
    sqls.push_back("INSERT INTO t (many) VALUES ('v" + std::to_string(i) + "')");
  }
  apply(db, sqls);
  auto two = db.sample_column_values("t", "two", 5, 1);
  CHECK(two.values == std::vector<std::string>{"x", "y"});

  auto a = db.sample_column_values("t", "many", 5, 42);
  auto b = db.sample_column_values("t", "many", 5, 42);
  CHECK(a.values.size() == 5);
  CHECK(a.values == b.values);
  auto c = db.sample_column_values("t", "many", 5, 43);
  CHECK(c.values.size() == 5);
  CHECK(a.values != c.values);

  CHECK(db.sample_column_values("t", "none", 5, 1).values.empty());
  CHECK(db.sample_column_values("t", "nope", 5, 1).error.has_value());
  CHECK(db.sample_column_values("nope", "two", 5, 1).error.has_value());
}

TEST_CASE("batch transactions and progress marker") {
  testing::TempDir dir;
  const auto path = (dir / "b.db").string();
  {
    auto db = DbSession::open(path);
    db.begin_batch();
    apply(db, {"CREATE TABLE kept (a TEXT)"});
    db.set_completed_batches(1);
    db.commit_batch();
    db.begin_batch();
    apply(db, {"CREATE TABLE lost (a TEXT)"});
    db.set_completed_batches(2);
    db.rollback_batch();
  }
  auto db = DbSession::open(path);
  CHECK(db.table_names() == std::vector<std::string>{"kept"});
  CHECK(db.completed_batches() == 1);
}

TEST_CASE("audit log records statements and resumes after the last batch") {
  testing::TempDir dir;
  const auto log_path = dir / "audit.log";
  {
    auto log = AuditLog::create(log_path);
    auto db = DbSession::open(":memory:");
    db.attach_audit_log(&log);
    log.batch_begin(0, {"d1"});
    db.set_audit_context(0, "update");
    apply(db, {"CREATE TABLE t (a TEXT)", "INSERT INTO nope VALUES (1)"});
    db.execute_retrieval(stmt("SELECT a FROM t"));
    log.batch_end(0, "ok", 4);
    log.batch_begin(1, {"d2"});
    db.set_audit_context(1, "update");
    apply(db, {"INSERT INTO t VALUES ('x')"});
    db.attach_audit_log(nullptr);
  }
  const auto lines = read_file(log_path);
  CHECK(lines.find(R"x({"seq":1,"batch":0,"step":"update","kind":"schema_update","ok":true,"sql":"CREATE TABLE t (a TEXT)"})x") !=
        std::string::npos);

  ResumeState state;
  {
    auto log = AuditLog::resume(log_path, state);
  }
  CHECK(state.next_batch == 1);
  CHECK(state.next_seq == 4);
  CHECK(state.stats.update_statements == 2);
  CHECK(state.stats.failed_updates == 1);
  CHECK(state.stats.retrievals == 1);
  CHECK(state.chat_calls == 4);
  // The unfinished batch 1 is gone.
  CHECK(read_file(log_path).find("\"batch\":1") == std::string::npos);
}
