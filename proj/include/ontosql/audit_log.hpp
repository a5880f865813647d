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
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ontosql {

struct SessionStats {
  std::uint64_t update_statements = 0;
  std::uint64_t failed_updates = 0;
  std::uint64_t retrievals = 0;
  std::uint64_t failed_retrievals = 0;

  /// failed / max(1, updates)
  double error_ratio() const;
  bool operator==(const SessionStats&) const = default;
};

/// What an existing audit log says about a previous, possibly interrupted run.
struct ResumeState {
  std::int64_t next_batch = 0;
  std::uint64_t next_seq = 1;
  SessionStats stats;
  std::uint64_t chat_calls = 0;
  std::uint64_t failed_batches = 0;
  // Byte offset just past the last completed batch; anything after it belongs
  // to a batch whose transaction never committed.
  std::uintmax_t committed_bytes = 0;
};

/// Append-only JSON-lines record of every statement the sandbox executes,
/// plus batch begin/end markers. Contains no timestamps so scripted runs
/// produce byte-identical logs.
class AuditLog {
 public:
  /// Creates (or truncates) the log.
  static AuditLog create(const std::filesystem::path& path);

  /// Reopens for appending after dropping records of the unfinished batch.
  static AuditLog resume(const std::filesystem::path& path, ResumeState& state);

  static ResumeState scan(const std::filesystem::path& path);

  AuditLog(AuditLog&&) noexcept;
  AuditLog& operator=(AuditLog&&) noexcept;
  ~AuditLog();

  void batch_begin(std::int64_t batch, const std::vector<std::string>& dialogue_ids);
  void batch_end(std::int64_t batch, std::string_view status, std::uint64_t chat_calls);
  void statement(std::int64_t batch, std::string_view step, std::string_view kind,
                 std::string_view sql, bool ok, std::optional<std::size_t> rows,
                 std::string_view error);

  const std::filesystem::path& path() const { return path_; }

 private:
  AuditLog(std::filesystem::path path, std::ofstream out, std::uint64_t next_seq);
  void write_line(const std::string& line);

  std::filesystem::path path_;
  std::ofstream out_;
  std::uint64_t next_seq_ = 1;
  std::unique_ptr<std::mutex> mu_;
};

}  // namespace ontosql
