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

#include <optional>
#include <string>
#include <vector>

namespace ontosql {

struct ColumnInfo {
  std::string name;
  std::string declared_type;
  bool primary_key = false;
  // Distinct non-null cell values, rendered as text. Absent when the snapshot
  // was taken schema-only.
  std::optional<std::vector<std::string>> values;

  bool operator==(const ColumnInfo&) const = default;
};

struct TableInfo {
  std::string name;
  std::vector<ColumnInfo> columns;

  const ColumnInfo* find_column(std::string_view column) const;
  bool operator==(const TableInfo&) const = default;
};

// Tables sorted by name; columns in declaration order. Name lookups are ASCII
// case-insensitive, as in SQLite.
struct DbSnapshot {
  std::vector<TableInfo> tables;

  bool empty() const { return tables.empty(); }
  const TableInfo* find_table(std::string_view table) const;
  std::vector<std::string> table_names() const;

  bool operator==(const DbSnapshot&) const = default;
};

}  // namespace ontosql
