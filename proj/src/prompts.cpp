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

#include <algorithm>

#include "ontosql/errors.hpp"
#include "ontosql/pipeline.hpp"
#include "ontosql/util.hpp"

namespace ontosql {

namespace {

constexpr std::string_view kDbPlaceholder = "{db_result_input}";
constexpr std::string_view kDialoguePlaceholder = "{dialogue}";
constexpr std::string_view kSuccessOpen = "[[success]]";
constexpr std::string_view kSuccessClose = "[[/success]]";

void replace_all(std::string& s, std::string_view from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string load_template(const std::filesystem::path& dir, const char* name) {
  const auto path = dir / name;
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError("missing prompt template " + path.string());
  }
  return read_file(path);
}

}  // namespace

PromptSet PromptSet::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("prompt directory not found: " + dir.string());
  }
  PromptSet set;
  set.inspect = load_template(dir, "1_inspect.txt");
  set.select = load_template(dir, "2_select.txt");
  set.dst = load_template(dir, "3_dst.txt");
  set.update = load_template(dir, "4_update.txt");
  if (std::filesystem::is_regular_file(dir / "0_direct.txt")) {
    set.direct = read_file(dir / "0_direct.txt");
  }
  return set;
}

std::string PromptSet::update_prompt(bool with_success) const {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto open = update.find(kSuccessOpen, pos);
    if (open == std::string::npos) {
      out.append(update, pos, std::string::npos);
      break;
    }
    out.append(update, pos, open - pos);
    const auto body = open + kSuccessOpen.size();
    auto close = update.find(kSuccessClose, body);
    if (close == std::string::npos) close = update.size();
    if (with_success) out.append(update, body, close - body);
    pos = std::min(update.size(), close + kSuccessClose.size());
  }
  return out;
}

std::string fill_template(const std::string& tmpl, const std::string& db_result_input,
                          const std::string& dialogue, bool append_dialogue) {
  std::string out = tmpl;
  const bool has_dialogue_slot = out.find(kDialoguePlaceholder) != std::string::npos;
  replace_all(out, kDbPlaceholder, db_result_input);
  replace_all(out, kDialoguePlaceholder, dialogue);
  if (!has_dialogue_slot && append_dialogue) {
    while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) out.pop_back();
    out += "\n\nDialogue(s):\n" + dialogue;
  }
  return out;
}

namespace {

// Byte offset of the code point that starts `keep` code points from the end.
std::size_t tail_offset(const std::string& text, std::size_t keep) {
  std::size_t seen = 0;
  for (std::size_t i = text.size(); i > 0; --i) {
    if ((static_cast<unsigned char>(text[i - 1]) & 0xC0) != 0x80) {
      if (++seen == keep) return i - 1;
    }
  }
  return 0;
}

std::size_t total_tokens(const std::vector<ChatMessage>& messages) {
  std::size_t n = 0;
  for (const auto& m : messages) n += estimate_tokens(m.text);
  return n;
}

}  // namespace

bool truncate_left(std::vector<ChatMessage>& messages, std::size_t budget) {
  bool changed = false;
  std::size_t total = total_tokens(messages);
  while (total > budget && !messages.empty()) {
    const std::size_t excess = total - budget;
    const std::size_t first = estimate_tokens(messages.front().text);
    if (messages.size() > 1 && first <= excess) {
      messages.erase(messages.begin());
      total -= first;
      changed = true;
      continue;
    }
    const std::size_t keep_tokens = first > excess ? first - excess : 0;
    auto& text = messages.front().text;
    text = keep_tokens == 0 ? std::string{} : text.substr(tail_offset(text, keep_tokens * 4));
    total = total_tokens(messages);
    changed = true;
  }
  return changed;
}

}  // namespace ontosql
