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

#include "ontosql/sql_statement.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "ontosql/util.hpp"

namespace ontosql {

std::string_view to_string(StatementKind kind) {
  switch (kind) {
    case StatementKind::kRetrieval: return "retrieval";
    case StatementKind::kSchemaUpdate: return "schema_update";
    case StatementKind::kDataUpdate: return "data_update";
    case StatementKind::kOther: return "other";
  }
  return "other";
}

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '$';
}

// Index just past a comment starting at i, or i when there is none.
std::size_t skip_comment(std::string_view s, std::size_t i) {
  if (s.compare(i, 2, "--") == 0) {
    auto nl = s.find('\n', i);
    return nl == std::string_view::npos ? s.size() : nl;
  }
  if (s.compare(i, 2, "/*") == 0) {
    auto close = s.find("*/", i + 2);
    return close == std::string_view::npos ? s.size() : close + 2;
  }
  return i;
}

std::string first_keyword(std::string_view sql) {
  std::size_t i = 0;
  while (i < sql.size()) {
    if (std::isspace(static_cast<unsigned char>(sql[i]))) {
      ++i;
      continue;
    }
    auto next = skip_comment(sql, i);
    if (next == i) break;
    i = next;
  }
  std::string word;
  while (i < sql.size() && std::isalpha(static_cast<unsigned char>(sql[i]))) {
    word.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(sql[i]))));
    ++i;
  }
  return word;
}

// Identifier, optionally schema-qualified, in any of SQLite's quoting styles.
const std::string kIdent =
    R"((?:[A-Za-z_][\w$]*|"[^"]+"|`[^`]+`|\[[^\]]+\])(?:\.(?:[A-Za-z_][\w$]*|"[^"]+"|`[^`]+`|\[[^\]]+\]))?)";

struct StartPattern {
  std::string_view keyword;  // lowercase
  std::regex pattern;
};

const std::vector<StartPattern>& start_patterns() {
  static const auto* patterns = [] {
    const auto flags = std::regex::ECMAScript | std::regex::icase;
    auto* p = new std::vector<StartPattern>{
        {"select", std::regex(R"(select\s+(distinct\s+|all\s+)?[^;\s][^;]*?\bfrom\b)", flags)},
        {"pragma", std::regex("pragma\\s+" + kIdent + R"(\s*(\(|=|;|$|\n))", flags)},
        {"create", std::regex(R"(create\s+(temp\s+|temporary\s+)?(unique\s+|virtual\s+)?)"
                              R"((table|index|view|trigger)\s+(if\s+not\s+exists\s+)?)" +
                                  kIdent + R"(\s*(\(|as\b|on\b|using\b|before\b|after\b|instead\b))",
                              flags)},
        {"alter", std::regex("alter\\s+table\\s+" + kIdent + R"(\s+(add|rename|drop)\b)", flags)},
        {"insert", std::regex(R"(insert\s+(or\s+\w+\s+)?into\s+)" + kIdent +
                                  R"(\s*(\(|values\b|select\b|default\b))",
                              flags)},
        {"update", std::regex(R"(update\s+(or\s+\w+\s+)?)" + kIdent + R"(\s+set\b)", flags)},
        {"delete", std::regex("delete\\s+from\\s+" + kIdent + R"(\s*(where\b|;|$|\n))", flags)},
        {"replace", std::regex("replace\\s+into\\s+" + kIdent, flags)},
        {"drop", std::regex(R"(drop\s+(table|index|view|trigger)\s+(if\s+exists\s+)?)" + kIdent,
                            flags)},
        {"truncate", std::regex("truncate\\s+(table\\s+)?" + kIdent, flags)},
        {"with", std::regex(R"(with\s+(recursive\s+)?)" + kIdent + R"(\s*(\([^)]*\))?\s+as\s*\()",
                            flags)},
    };
    return p;
  }();
  return *patterns;
}

bool is_select_keyword(std::string_view w) {
  static const std::vector<std::string_view> kWords = {
      "select", "distinct", "all", "as", "case", "when", "then", "else", "end", "and",
      "or", "not", "is", "null", "like", "glob", "in", "between", "cast", "collate", "escape"};
  return std::find(kWords.begin(), kWords.end(), w) != kWords.end();
}

// Prose between SELECT and FROM ("select the tables. SELECT name FROM t") is
// rejected by sentence punctuation. Outside code fences, two bare words in a
// row ("select one of the options from") also count as prose, which costs
// only the rare alias written without AS.
bool plausible_select_list(std::string_view window, bool fenced) {
  auto lower = to_lower(window);
  auto from = lower.find("from");
  std::string_view head(lower.data(), from == std::string::npos ? lower.size() : from);
  for (std::string_view bad : {". ", ".\n", "! ", "? ", ": ", "!\n", "?\n"}) {
    if (head.find(bad) != std::string_view::npos) return false;
  }
  if (fenced) return true;
  int run = 0;
  std::size_t i = 0;
  while (i < head.size()) {
    const char c = head[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < head.size() && (is_word_char(head[j]) || head[j] == '.')) ++j;
      if (is_select_keyword(head.substr(i, j - i))) {
        run = 0;
      } else if (++run >= 2) {
        return false;
      }
      i = j;
      continue;
    }
    if (c == '\'' || c == '"') {
      auto close = head.find(c, i + 1);
      i = close == std::string_view::npos ? head.size() : close + 1;
    } else {
      ++i;
    }
    run = 0;
  }
  return true;
}

constexpr std::size_t kWindow = 1024;

bool starts_statement(std::string_view s, std::size_t i, bool fenced) {
  if (i > 0 && is_word_char(s[i - 1])) return false;
  std::size_t end = i;
  while (end < s.size() && std::isalpha(static_cast<unsigned char>(s[end]))) ++end;
  if (end == i) return false;
  const std::string word = to_lower(s.substr(i, end - i));
  for (const auto& sp : start_patterns()) {
    if (sp.keyword != word) continue;
    std::string_view window = s.substr(i, kWindow);
    if (sp.keyword == "select") {
      // Bound the SELECT search by the statement terminator.
      auto semi = window.find(';');
      if (semi != std::string_view::npos) window = window.substr(0, semi);
      if (!plausible_select_list(window, fenced)) return false;
      // Inside a code fence a FROM-less SELECT ("SELECT 1") is still SQL.
      if (fenced) {
        return window.size() > 6 && std::isspace(static_cast<unsigned char>(window[6])) &&
               !trim(window.substr(6)).empty();
      }
    }
    std::match_results<std::string_view::const_iterator> m;
    return std::regex_search(window.begin(), window.end(), m, sp.pattern,
                             std::regex_constants::match_continuous);
  }
  return false;
}

std::size_t find_statement_start(std::string_view s, std::size_t pos, bool fenced) {
  std::size_t i = pos;
  while (i < s.size()) {
    auto next = skip_comment(s, i);
    if (next != i) {
      i = next;
      continue;
    }
    if (starts_statement(s, i, fenced)) return i;
    ++i;
  }
  return std::string_view::npos;
}

struct Scanned {
  std::string text;
  std::size_t end = 0;
  bool unterminated_literal = false;
};

Scanned scan_statement(std::string_view s, std::size_t start, bool fenced) {
  Scanned out;
  std::size_t i = start;
  char quote = 0;  // active quote terminator, 0 when outside
  while (i < s.size()) {
    const char c = s[i];
    if (quote != 0) {
      out.text.push_back(c);
      if (c == quote) {
        if (quote == '\'' && i + 1 < s.size() && s[i + 1] == '\'') {
          out.text.push_back('\'');
          i += 2;
          continue;
        }
        quote = 0;
      }
      ++i;
      continue;
    }
    auto after_comment = skip_comment(s, i);
    if (after_comment != i) {
      out.text.push_back(' ');
      i = after_comment;
      continue;
    }
    if (c == ';') {
      out.end = i + 1;
      out.text = trim(out.text);
      return out;
    }
    if (c == '`' && !fenced) {
      out.end = i + 1;
      out.text = trim(out.text);
      return out;
    }
    if (c == '\n' && !fenced) {
      std::size_t j = i + 1;
      while (j < s.size() && (s[j] == ' ' || s[j] == '\t' || s[j] == '\r')) ++j;
      if (j < s.size() && s[j] == '\n') {
        out.end = j + 1;
        out.text = trim(out.text);
        return out;
      }
    }
    if (c == '\'') quote = '\'';
    if (c == '"') quote = '"';
    if (c == '[') quote = ']';
    if (c == '`') quote = '`';
    out.text.push_back(c);
    ++i;
  }
  out.end = s.size();
  out.unterminated_literal = quote != 0;
  out.text = trim(out.text);
  return out;
}

void scan_region(std::string_view region, bool fenced, Extraction& result) {
  std::size_t pos = 0;
  while (pos < region.size()) {
    auto start = find_statement_start(region, pos, fenced);
    if (start == std::string_view::npos) break;
    auto scanned = scan_statement(region, start, fenced);
    if (scanned.unterminated_literal) {
      result.diagnostics.push_back("unterminated quoted literal in: " +
                                   scanned.text.substr(0, 80));
    }
    if (!scanned.text.empty()) {
      auto kind = classify_statement(scanned.text);
      result.statements.push_back({std::move(scanned.text), kind});
    }
    pos = std::max(scanned.end, start + 1);
  }
}

struct Fence {
  std::string tag;
  std::string_view body;
};

std::vector<Fence> find_fences(std::string_view text) {
  std::vector<Fence> fences;
  std::size_t pos = 0;
  bool open = false;
  std::string tag;
  std::size_t body_start = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    const std::size_t line_end = nl == std::string_view::npos ? text.size() : nl;
    std::string_view line = text.substr(pos, line_end - pos);
    std::size_t k = 0;
    while (k < line.size() && (line[k] == ' ' || line[k] == '\t')) ++k;
    if (line.compare(k, 3, "```") == 0) {
      if (!open) {
        open = true;
        tag = to_lower(trim(line.substr(k + 3)));
        body_start = line_end + 1;
      } else {
        open = false;
        const std::size_t body_end = pos;
        fences.push_back({tag, text.substr(std::min(body_start, text.size()),
                                           body_end > body_start ? body_end - body_start : 0)});
      }
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (open && body_start < text.size()) {
    fences.push_back({tag, text.substr(body_start)});
  }
  return fences;
}

}  // namespace

StatementKind classify_statement(std::string_view sql) {
  const std::string kw = first_keyword(sql);
  if (kw == "SELECT" || kw == "PRAGMA") return StatementKind::kRetrieval;
  if (kw == "CREATE" || kw == "ALTER") return StatementKind::kSchemaUpdate;
  if (kw == "INSERT" || kw == "UPDATE" || kw == "DELETE") return StatementKind::kDataUpdate;
  return StatementKind::kOther;
}

Extraction extract_statements(std::string_view model_output) {
  Extraction result;
  auto fences = find_fences(model_output);
  if (fences.empty()) {
    scan_region(model_output, /*fenced=*/false, result);
  } else {
    bool any_sql_block = false;
    for (const auto& fence : fences) {
      if (!fence.tag.empty() && fence.tag.find("sql") == std::string::npos) continue;
      any_sql_block = true;
      scan_region(fence.body, /*fenced=*/true, result);
    }
    if (!any_sql_block) result.diagnostics.push_back("no SQL code block in reply");
  }
  if (result.statements.empty() && !trim(model_output).empty()) {
    result.diagnostics.push_back("no SQL statements found");
  }
  return result;
}

std::vector<std::string> string_literals(std::string_view sql) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < sql.size()) {
    auto after = skip_comment(sql, i);
    if (after != i) {
      i = after;
      continue;
    }
    const char c = sql[i];
    if (c == '"' || c == '`' || c == '[') {
      const char close = c == '[' ? ']' : c;
      auto end = sql.find(close, i + 1);
      i = end == std::string_view::npos ? sql.size() : end + 1;
      continue;
    }
    if (c == '\'') {
      std::string lit;
      std::size_t j = i + 1;
      while (j < sql.size()) {
        if (sql[j] == '\'') {
          if (j + 1 < sql.size() && sql[j + 1] == '\'') {
            lit.push_back('\'');
            j += 2;
            continue;
          }
          break;
        }
        lit.push_back(sql[j++]);
      }
      out.push_back(std::move(lit));
      i = j + 1;
      continue;
    }
    ++i;
  }
  return out;
}

std::string quote_identifier(std::string_view name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string quote_literal(std::string_view text) {
  std::string out = "'";
  for (char c : text) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

}  // namespace ontosql
