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

#include <string>
#include <string_view>
#include <vector>

namespace ontosql {

enum class StatementKind { kRetrieval, kSchemaUpdate, kDataUpdate, kOther };

std::string_view to_string(StatementKind kind);

struct SqlStatement {
  std::string text;  // without the terminating semicolon
  StatementKind kind = StatementKind::kOther;

  bool is_update() const {
    return kind == StatementKind::kSchemaUpdate || kind == StatementKind::kDataUpdate;
  }
  bool operator==(const SqlStatement&) const = default;
};

/// Classifies by the first keyword after leading whitespace and comments:
/// SELECT/PRAGMA are retrievals, CREATE/ALTER schema updates,
/// INSERT/UPDATE/DELETE data updates, anything else (DROP, WITH, ...) other.
StatementKind classify_statement(std::string_view sql);

struct Extraction {
  std::vector<SqlStatement> statements;
  std::vector<std::string> diagnostics;
};

/// Pulls SQL statements out of free-form model output.
///
/// When the text contains fenced code blocks, only blocks tagged as SQL (or
/// untagged) are scanned; otherwise the whole reply is. Statement starts are
/// recognised by a leading keyword followed by a plausible continuation
/// ("UPDATE <table> SET", "INSERT INTO", ...), so prose like "update the
/// database" is skipped. A statement runs to the next semicolon outside
/// quotes and comments; outside fences it also stops at a blank line or an
/// inline-code backtick. Comments are dropped from the statement text.
Extraction extract_statements(std::string_view model_output);

/// Single-quoted string literals appearing in a statement, unescaped.
std::vector<std::string> string_literals(std::string_view sql);

/// Quotes an identifier for SQLite ("a""b").
std::string quote_identifier(std::string_view name);

/// Quotes a string literal for SQLite ('O''Brian').
std::string quote_literal(std::string_view text);

}  // namespace ontosql
