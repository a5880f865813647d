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

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ontosql/audit_log.hpp"
#include "ontosql/snapshot.hpp"
#include "ontosql/sql_statement.hpp"

struct sqlite3;

namespace ontosql {

enum class CellType { kNull, kInteger, kReal, kText, kBlob };

struct Cell {
  CellType type = CellType::kNull;
  std::string text;  // numbers in shortest decimal form; empty for NULL

  bool operator==(const Cell&) const = default;
};

struct QueryResult {
  std::string sql;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  bool truncated = false;  // row limit reached
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }

  /// Rendering spliced into prompts: "[('The Allenbell', 'east', 0)]",
  /// "No Result" when empty, "Error: ..." on failure.
  std::string render() const;
};

struct UpdateFailure {
  std::size_t index = 0;  // into UpdateOutcome::statements
  std::string message;

  bool operator==(const UpdateFailure&) const = default;
};

struct UpdateOutcome {
  std::vector<SqlStatement> statements;
  std::vector<UpdateFailure> failures;

  std::size_t update_count() const;
  /// |failures| / max(1, update statements)
  double error_ratio() const;
};

struct SampleResult {
  std::vector<std::string> values;
  std::optional<std::string> error;
};

/// Sandboxed SQLite session. Model-generated SQL runs under an authorizer:
/// retrievals must be read-only (schema PRAGMAs allowed), updates may not
/// DROP, ATTACH, change PRAGMAs or touch transactions. Each update runs in
/// its own savepoint so a failing statement leaves no partial effect.
class DbSession {
 public:
  struct Options {
    std::chrono::milliseconds statement_timeout{5000};
    std::size_t row_limit = 1000;
  };

  /// `location` is a file path or ":memory:". Throws IoError.
  static DbSession open(const std::string& location, Options options);
  static DbSession open(const std::string& location) { return open(location, Options{}); }

  DbSession(DbSession&&) noexcept;
  DbSession& operator=(DbSession&&) noexcept;
  ~DbSession();

  /// SQL errors are captured in the result, never thrown. Non-retrieval
  /// statements are refused with an error result.
  QueryResult execute_retrieval(const SqlStatement& stmt);

  /// Applies statements in order; failures are recorded and skipped.
  /// Throws std::invalid_argument if a statement is not an update kind.
  UpdateOutcome execute_updates(std::span<const SqlStatement> stmts);

  /// Tables sorted by name, columns in declaration order, no values.
  DbSnapshot snapshot_schema() const;

  /// As snapshot_schema, with every column's distinct non-null values.
  DbSnapshot snapshot_with_values() const;

  /// Up to k distinct non-null values; the choice depends only on the
  /// column contents and seed.
  SampleResult sample_column_values(std::string_view table, std::string_view column,
                                    std::size_t k, std::uint64_t seed) const;

  std::vector<std::string> table_names() const;

  // Batch transaction; statement savepoints nest inside it.
  void begin_batch();
  void commit_batch();
  void rollback_batch();

  // Count of completed batches, kept in the database header (user_version)
  // so it commits atomically with the batch's changes.
  void set_completed_batches(std::int64_t count);
  std::int64_t completed_batches() const;

  const SessionStats& stats() const { return stats_; }
  void restore_stats(const SessionStats& stats) { stats_ = stats; }

  /// Statements executed from now on are appended to `log`, tagged with the
  /// current batch and step. The log must outlive the session or be detached.
  void attach_audit_log(AuditLog* log) { audit_ = log; }
  void set_audit_context(std::int64_t batch, std::string step) {
    audit_batch_ = batch;
    audit_step_ = std::move(step);
  }

 private:
  struct Handle;
  DbSession(std::unique_ptr<Handle> handle, Options options);

  void exec_internal(const std::string& sql) const;
  std::vector<std::vector<Cell>> query_internal(const std::string& sql) const;
  std::vector<std::string> distinct_values(std::string_view table, std::string_view column) const;
  DbSnapshot snapshot(bool with_values) const;

  std::unique_ptr<Handle> handle_;
  Options options_;
  SessionStats stats_;
  bool in_batch_ = false;
  AuditLog* audit_ = nullptr;
  std::int64_t audit_batch_ = 0;
  std::string audit_step_;
};

}  // namespace ontosql
