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

#include "ontosql/audit_log.hpp"

#include <algorithm>

#include "json.hpp"
#include "ontosql/errors.hpp"

namespace ontosql {

using nlohmann::ordered_json;

namespace {

std::string dump_line(const ordered_json& rec) {
  return rec.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace

double SessionStats::error_ratio() const {
  return static_cast<double>(failed_updates) /
         static_cast<double>(std::max<std::uint64_t>(1, update_statements));
}

AuditLog::AuditLog(std::filesystem::path path, std::ofstream out, std::uint64_t next_seq)
    : path_(std::move(path)),
      out_(std::move(out)),
      next_seq_(next_seq),
      mu_(std::make_unique<std::mutex>()) {}

AuditLog::AuditLog(AuditLog&&) noexcept = default;
AuditLog& AuditLog::operator=(AuditLog&&) noexcept = default;
AuditLog::~AuditLog() = default;

AuditLog AuditLog::create(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create audit log " + path.string());
  return AuditLog(path, std::move(out), 1);
}

ResumeState AuditLog::scan(const std::filesystem::path& path) {
  ResumeState state;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read audit log " + path.string());

  SessionStats pending;  // stats of the batch currently open
  std::uint64_t pending_seq = 1;
  std::uintmax_t offset = 0;
  std::string line;
  while (std::getline(in, line)) {
    offset += line.size() + 1;
    if (line.empty()) continue;
    ordered_json rec;
    try {
      rec = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      break;  // torn final write
    }
    if (rec.contains("event")) {
      const auto event = rec["event"].get<std::string>();
      if (event == "batch_begin") {
        pending = state.stats;
        pending_seq = state.next_seq;
      } else if (event == "batch_end") {
        state.stats = pending;
        state.next_seq = pending_seq;
        state.chat_calls += rec.value("chat_calls", std::uint64_t{0});
        if (rec.value("status", std::string{}) != "ok") ++state.failed_batches;
        state.next_batch = rec["batch"].get<std::int64_t>() + 1;
        state.committed_bytes = offset;
      }
      continue;
    }
    pending_seq = rec.value("seq", pending_seq) + 1;
    const bool ok = rec.value("ok", false);
    const auto kind = rec.value("kind", std::string{});
    if (kind == "retrieval") {
      ++pending.retrievals;
      if (!ok) ++pending.failed_retrievals;
    } else {
      ++pending.update_statements;
      if (!ok) ++pending.failed_updates;
    }
  }
  return state;
}

AuditLog AuditLog::resume(const std::filesystem::path& path, ResumeState& state) {
  state = scan(path);
  std::error_code ec;
  std::filesystem::resize_file(path, state.committed_bytes, ec);
  if (ec) throw IoError("cannot truncate audit log " + path.string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to audit log " + path.string());
  return AuditLog(path, std::move(out), state.next_seq);
}

void AuditLog::write_line(const std::string& line) {
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw IoError("audit log write failed: " + path_.string());
}

void AuditLog::batch_begin(std::int64_t batch, const std::vector<std::string>& dialogue_ids) {
  std::lock_guard lock(*mu_);
  ordered_json rec;
  rec["event"] = "batch_begin";
  rec["batch"] = batch;
  rec["dialogues"] = dialogue_ids;
  write_line(dump_line(rec));
}

void AuditLog::batch_end(std::int64_t batch, std::string_view status,
                         std::uint64_t chat_calls) {
  std::lock_guard lock(*mu_);
  ordered_json rec;
  rec["event"] = "batch_end";
  rec["batch"] = batch;
  rec["status"] = status;
  rec["chat_calls"] = chat_calls;
  write_line(dump_line(rec));
}

void AuditLog::statement(std::int64_t batch, std::string_view step, std::string_view kind,
                         std::string_view sql, bool ok, std::optional<std::size_t> rows,
                         std::string_view error) {
  std::lock_guard lock(*mu_);
  ordered_json rec;
  rec["seq"] = next_seq_++;
  rec["batch"] = batch;
  rec["step"] = step;
  rec["kind"] = kind;
  rec["ok"] = ok;
  if (rows) rec["rows"] = *rows;
  if (!ok) rec["error"] = error;
  rec["sql"] = sql;
  write_line(dump_line(rec));
}

}  // namespace ontosql
