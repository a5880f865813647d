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

#include "ontosql/db_session.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <numeric>
#include <regex>
#include <set>
#include <stdexcept>

#include "ontosql/errors.hpp"
#include "ontosql/util.hpp"

namespace ontosql {

namespace {

enum class AuthMode { kInternal, kRetrieval, kUpdate };

bool is_schema_pragma(const char* name) {
  static const std::set<std::string> kAllowed = {
      "table_info",  "table_xinfo",      "table_list", "index_list",
      "index_info",  "index_xinfo",      "foreign_key_list"};
  return name != nullptr && kAllowed.contains(to_lower(name));
}

// Internal tables the model may not write directly. The schema tables are
// absent: CREATE and ALTER write to them on the statement's behalf, and
// SQLite itself refuses direct writes there.
bool protected_internal_table(const char* name) {
  if (name == nullptr || std::strncmp(name, "sqlite_", 7) != 0) return false;
  const std::string_view n(name);
  return n != "sqlite_master" && n != "sqlite_temp_master" && n != "sqlite_schema" &&
         n != "sqlite_temp_schema" && n != "sqlite_sequence";
}

std::string render_cell_repr(const Cell& cell) {
  switch (cell.type) {
    case CellType::kNull: return "None";
    case CellType::kInteger:
    case CellType::kReal: return cell.text;
    case CellType::kBlob: return cell.text;
    case CellType::kText: {
      std::string out = "'";
      for (char c : cell.text) {
        if (c == '\'' || c == '\\') out.push_back('\\');
        out.push_back(c);
      }
      out.push_back('\'');
      return out;
    }
  }
  return {};
}

Cell read_cell(sqlite3_stmt* stmt, int col) {
  switch (sqlite3_column_type(stmt, col)) {
    case SQLITE_INTEGER:
      return {CellType::kInteger, std::to_string(sqlite3_column_int64(stmt, col))};
    case SQLITE_FLOAT:
      return {CellType::kReal, format_number(sqlite3_column_double(stmt, col))};
    case SQLITE_TEXT: {
      const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt, col));
      return {CellType::kText, std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt, col)))};
    }
    case SQLITE_BLOB:
      return {CellType::kBlob,
              "<blob " + std::to_string(sqlite3_column_bytes(stmt, col)) + " bytes>"};
    default:
      return {CellType::kNull, {}};
  }
}

// True when only whitespace, semicolons and comments remain.
bool only_trailing_noise(const char* tail) {
  if (tail == nullptr) return true;
  std::string_view rest(tail);
  std::size_t i = 0;
  while (i < rest.size()) {
    const char c = rest[i];
    if (std::isspace(static_cast<unsigned char>(c)) || c == ';') {
      ++i;
    } else if (rest.compare(i, 2, "--") == 0) {
      auto nl = rest.find('\n', i);
      i = nl == std::string_view::npos ? rest.size() : nl;
    } else if (rest.compare(i, 2, "/*") == 0) {
      auto close = rest.find("*/", i + 2);
      i = close == std::string_view::npos ? rest.size() : close + 2;
    } else {
      return false;
    }
  }
  return true;
}

bool is_drop_column(std::string_view sql) {
  static const std::regex kDropColumn(R"(^\s*alter\s+table\s+\S+\s+drop\b)",
                                      std::regex::ECMAScript | std::regex::icase);
  return std::regex_search(sql.begin(), sql.end(), kDropColumn);
}

}  // namespace

struct DbSession::Handle {
  sqlite3* db = nullptr;
  AuthMode mode = AuthMode::kInternal;
  std::chrono::steady_clock::time_point deadline{};
  bool deadline_armed = false;

  ~Handle() {
    if (db != nullptr) sqlite3_close_v2(db);
  }

  static int authorize(void* user, int action, const char* arg1, const char* /*arg2*/,
                       const char* /*db_name*/, const char* /*trigger*/) {
    auto* self = static_cast<Handle*>(user);
    switch (self->mode) {
      case AuthMode::kInternal:
        return SQLITE_OK;
      case AuthMode::kRetrieval:
        switch (action) {
          case SQLITE_SELECT:
          case SQLITE_READ:
          case SQLITE_FUNCTION:
          case SQLITE_RECURSIVE:
            return SQLITE_OK;
          case SQLITE_PRAGMA:
            return is_schema_pragma(arg1) ? SQLITE_OK : SQLITE_DENY;
          default:
            return SQLITE_DENY;
        }
      case AuthMode::kUpdate:
        switch (action) {
          case SQLITE_DROP_INDEX:
          case SQLITE_DROP_TABLE:
          case SQLITE_DROP_TEMP_INDEX:
          case SQLITE_DROP_TEMP_TABLE:
          case SQLITE_DROP_TEMP_TRIGGER:
          case SQLITE_DROP_TEMP_VIEW:
          case SQLITE_DROP_TRIGGER:
          case SQLITE_DROP_VIEW:
          case SQLITE_DROP_VTABLE:
          case SQLITE_CREATE_VTABLE:
          case SQLITE_PRAGMA:
          case SQLITE_TRANSACTION:
          case SQLITE_SAVEPOINT:
          case SQLITE_ATTACH:
          case SQLITE_DETACH:
            return SQLITE_DENY;
          case SQLITE_INSERT:
          case SQLITE_UPDATE:
          case SQLITE_DELETE:
            return protected_internal_table(arg1) ? SQLITE_DENY : SQLITE_OK;
          default:
            return SQLITE_OK;
        }
    }
    return SQLITE_DENY;
  }

  static int progress(void* user) {
    auto* self = static_cast<Handle*>(user);
    if (!self->deadline_armed) return 0;
    return std::chrono::steady_clock::now() > self->deadline ? 1 : 0;
  }

  // Prepares and steps a single statement under the current mode.
  // Returns an error message on failure.
  std::optional<std::string> run(const std::string& sql, std::size_t row_limit,
                                 std::chrono::milliseconds timeout,
                                 std::vector<std::string>* columns,
                                 std::vector<std::vector<Cell>>* rows, bool* truncated,
                                 bool require_readonly) {
    sqlite3_stmt* stmt = nullptr;
    const char* tail = nullptr;
    int rc = sqlite3_prepare_v2(db, sql.c_str(), static_cast<int>(sql.size()), &stmt, &tail);
    if (rc != SQLITE_OK) {
      std::string msg = sqlite3_errmsg(db);
      sqlite3_finalize(stmt);
      return msg;
    }
    if (stmt == nullptr) return std::string("empty statement");
    std::unique_ptr<sqlite3_stmt, int (*)(sqlite3_stmt*)> guard(stmt, sqlite3_finalize);
    if (!only_trailing_noise(tail)) return std::string("multiple statements in one query");
    if (require_readonly && sqlite3_stmt_readonly(stmt) == 0) {
      return std::string("statement is not read-only");
    }
    if (columns != nullptr) {
      const int n = sqlite3_column_count(stmt);
      for (int c = 0; c < n; ++c) {
        const char* name = sqlite3_column_name(stmt, c);
        columns->emplace_back(name != nullptr ? name : "");
      }
    }
    deadline = std::chrono::steady_clock::now() + timeout;
    deadline_armed = timeout.count() > 0;
    std::optional<std::string> error;
    while (true) {
      rc = sqlite3_step(stmt);
      if (rc == SQLITE_ROW) {
        if (rows == nullptr) continue;
        if (rows->size() >= row_limit) {
          if (truncated != nullptr) *truncated = true;
          break;
        }
        const int n = sqlite3_column_count(stmt);
        std::vector<Cell> row;
        row.reserve(static_cast<std::size_t>(n));
        for (int c = 0; c < n; ++c) row.push_back(read_cell(stmt, c));
        rows->push_back(std::move(row));
        continue;
      }
      if (rc == SQLITE_DONE) break;
      error = rc == SQLITE_INTERRUPT ? std::string("statement timed out")
                                     : std::string(sqlite3_errmsg(db));
      break;
    }
    deadline_armed = false;
    return error;
  }
};

std::string QueryResult::render() const {
  if (error) return "Error: " + *error;
  if (rows.empty()) return "No Result";
  std::string out = "[";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (r > 0) out += ", ";
    out += "(";
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c > 0) out += ", ";
      out += render_cell_repr(rows[r][c]);
    }
    if (rows[r].size() == 1) out += ",";
    out += ")";
  }
  out += "]";
  if (truncated) out += " (truncated)";
  return out;
}

std::size_t UpdateOutcome::update_count() const {
  return static_cast<std::size_t>(
      std::count_if(statements.begin(), statements.end(),
                    [](const SqlStatement& s) { return s.is_update(); }));
}

double UpdateOutcome::error_ratio() const {
  return static_cast<double>(failures.size()) /
         static_cast<double>(std::max<std::size_t>(1, update_count()));
}

DbSession::DbSession(std::unique_ptr<Handle> handle, Options options)
    : handle_(std::move(handle)), options_(options) {}

DbSession::DbSession(DbSession&&) noexcept = default;
DbSession& DbSession::operator=(DbSession&&) noexcept = default;
DbSession::~DbSession() = default;

DbSession DbSession::open(const std::string& location, Options options) {
  auto handle = std::make_unique<Handle>();
  const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE;
  int rc = sqlite3_open_v2(location.c_str(), &handle->db, flags, nullptr);
  if (rc != SQLITE_OK) {
    std::string msg = handle->db != nullptr ? sqlite3_errmsg(handle->db) : "out of memory";
    throw IoError("cannot open database " + location + ": " + msg);
  }
  sqlite3_extended_result_codes(handle->db, 1);
  sqlite3_set_authorizer(handle->db, &Handle::authorize, handle.get());
  sqlite3_progress_handler(handle->db, 1000, &Handle::progress, handle.get());
  DbSession session(std::move(handle), options);
  // Forces the file to be read (or created) now so bad paths fail at open.
  try {
    session.query_internal("SELECT count(*) FROM sqlite_master");
  } catch (const std::runtime_error& e) {
    throw IoError("cannot open database " + location + ": " + e.what());
  }
  return session;
}

void DbSession::exec_internal(const std::string& sql) const {
  handle_->mode = AuthMode::kInternal;
  auto err = handle_->run(sql, 0, std::chrono::milliseconds(0), nullptr, nullptr, nullptr, false);
  if (err) throw IoError("internal statement failed (" + sql + "): " + *err);
}

std::vector<std::vector<Cell>> DbSession::query_internal(const std::string& sql) const {
  handle_->mode = AuthMode::kInternal;
  std::vector<std::vector<Cell>> rows;
  auto err = handle_->run(sql, SIZE_MAX, std::chrono::milliseconds(0), nullptr, &rows, nullptr,
                          false);
  if (err) throw IoError("internal query failed (" + sql + "): " + *err);
  return rows;
}

QueryResult DbSession::execute_retrieval(const SqlStatement& stmt) {
  QueryResult result;
  result.sql = stmt.text;
  if (stmt.kind != StatementKind::kRetrieval) {
    result.error = "not a retrieval statement";
  } else {
    handle_->mode = AuthMode::kRetrieval;
    result.error = handle_->run(stmt.text, options_.row_limit, options_.statement_timeout,
                                &result.columns, &result.rows, &result.truncated,
                                /*require_readonly=*/true);
    handle_->mode = AuthMode::kInternal;
  }
  ++stats_.retrievals;
  if (!result.ok()) {
    ++stats_.failed_retrievals;
    result.rows.clear();
  }
  if (audit_ != nullptr) {
    audit_->statement(audit_batch_, audit_step_, to_string(stmt.kind), stmt.text, result.ok(),
                      result.ok() ? std::optional<std::size_t>(result.rows.size()) : std::nullopt,
                      result.error.value_or(""));
  }
  return result;
}

UpdateOutcome DbSession::execute_updates(std::span<const SqlStatement> stmts) {
  for (const auto& s : stmts) {
    if (!s.is_update()) {
      throw std::invalid_argument("execute_updates: not an update statement: " + s.text);
    }
  }
  UpdateOutcome outcome;
  outcome.statements.assign(stmts.begin(), stmts.end());
  for (std::size_t i = 0; i < stmts.size(); ++i) {
    const auto& stmt = stmts[i];
    std::optional<std::string> error;
    if (is_drop_column(stmt.text)) {
      error = "dropping columns is not allowed";
    } else {
      exec_internal("SAVEPOINT ontosql_stmt");
      handle_->mode = AuthMode::kUpdate;
      error = handle_->run(stmt.text, 0, options_.statement_timeout, nullptr, nullptr, nullptr,
                           false);
      handle_->mode = AuthMode::kInternal;
      if (sqlite3_get_autocommit(handle_->db) != 0) {
        // The statement ended the enclosing transaction (e.g. INSERT OR
        // ROLLBACK); reopen the batch so later statements stay batched.
        if (in_batch_) exec_internal("BEGIN IMMEDIATE");
      } else {
        if (error) exec_internal("ROLLBACK TO ontosql_stmt");
        exec_internal("RELEASE ontosql_stmt");
      }
    }
    ++stats_.update_statements;
    if (error) {
      ++stats_.failed_updates;
      outcome.failures.push_back({i, *error});
    }
    if (audit_ != nullptr) {
      audit_->statement(audit_batch_, audit_step_, to_string(stmt.kind), stmt.text,
                        !error.has_value(), std::nullopt, error.value_or(""));
    }
  }
  return outcome;
}

std::vector<std::string> DbSession::table_names() const {
  std::vector<std::string> names;
  for (auto& row : query_internal(
           "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite\\_%' "
           "ESCAPE '\\' ORDER BY name")) {
    names.push_back(std::move(row[0].text));
  }
  return names;
}

std::vector<std::string> DbSession::distinct_values(std::string_view table,
                                                    std::string_view column) const {
  const std::string col = quote_identifier(column);
  const auto rows = query_internal("SELECT DISTINCT " + col + " FROM " + quote_identifier(table) +
                                   " WHERE " + col + " IS NOT NULL ORDER BY 1");
  std::vector<std::string> values;
  std::set<std::string> seen;
  for (const auto& row : rows) {
    const Cell& cell = row[0];
    if (cell.type == CellType::kBlob || cell.type == CellType::kNull) continue;
    if (seen.insert(cell.text).second) values.push_back(cell.text);
  }
  return values;
}

DbSnapshot DbSession::snapshot(bool with_values) const {
  DbSnapshot snap;
  for (const auto& name : table_names()) {
    TableInfo table;
    table.name = name;
    for (const auto& row : query_internal("PRAGMA table_info(" + quote_identifier(name) + ")")) {
      // cid, name, type, notnull, dflt_value, pk
      ColumnInfo column;
      column.name = row[1].text;
      column.declared_type = row[2].text;
      column.primary_key = row[5].text != "0";
      if (with_values) column.values = distinct_values(name, column.name);
      table.columns.push_back(std::move(column));
    }
    snap.tables.push_back(std::move(table));
  }
  return snap;
}

DbSnapshot DbSession::snapshot_schema() const { return snapshot(false); }

DbSnapshot DbSession::snapshot_with_values() const { return snapshot(true); }

SampleResult DbSession::sample_column_values(std::string_view table, std::string_view column,
                                             std::size_t k, std::uint64_t seed) const {
  SampleResult result;
  const auto snap = snapshot_schema();
  const TableInfo* t = snap.find_table(table);
  if (t == nullptr) {
    result.error = "no such table: " + std::string(table);
    return result;
  }
  if (t->find_column(column) == nullptr) {
    result.error = "no such column: " + std::string(table) + "." + std::string(column);
    return result;
  }
  auto values = distinct_values(t->name, t->find_column(column)->name);
  if (values.size() <= k) {
    result.values = std::move(values);
    return result;
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  // Mix the column identity into the seed so columns are sampled independently.
  const auto digest = sha256_hex(std::string(table) + "\x1f" + std::string(column));
  const std::uint64_t mixed = seed ^ std::stoull(digest.substr(0, 16), nullptr, 16);
  portable_shuffle(order, mixed);
  order.resize(k);
  std::sort(order.begin(), order.end());
  for (auto idx : order) result.values.push_back(values[idx]);
  return result;
}

void DbSession::begin_batch() {
  exec_internal("BEGIN IMMEDIATE");
  in_batch_ = true;
}

void DbSession::commit_batch() {
  in_batch_ = false;
  if (sqlite3_get_autocommit(handle_->db) == 0) exec_internal("COMMIT");
}

void DbSession::set_completed_batches(std::int64_t count) {
  exec_internal("PRAGMA user_version = " + std::to_string(count));
}

std::int64_t DbSession::completed_batches() const {
  const auto rows = query_internal("PRAGMA user_version");
  return rows.empty() ? 0 : std::stoll(rows[0].at(0).text);
}

void DbSession::rollback_batch() {
  in_batch_ = false;
  if (sqlite3_get_autocommit(handle_->db) == 0) exec_internal("ROLLBACK");
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

const ColumnInfo* TableInfo::find_column(std::string_view column) const {
  for (const auto& c : columns) {
    if (iequals(c.name, column)) return &c;
  }
  return nullptr;
}

const TableInfo* DbSnapshot::find_table(std::string_view table) const {
  for (const auto& t : tables) {
    if (iequals(t.name, table)) return &t;
  }
  return nullptr;
}

std::vector<std::string> DbSnapshot::table_names() const {
  std::vector<std::string> names;
  names.reserve(tables.size());
  for (const auto& t : tables) names.push_back(t.name);
  return names;
}

}  // namespace ontosql
