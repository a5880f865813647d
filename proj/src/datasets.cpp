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

#include "ontosql/datasets.hpp"

#include <set>
#include <stdexcept>

#include "json.hpp"
#include "ontosql/errors.hpp"
#include "ontosql/util.hpp"

namespace ontosql {

namespace {

// Accepts a JSON array document or one JSON value per line.
std::vector<nlohmann::json> read_records(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const std::string head = trim(text.substr(0, 64));
  std::vector<nlohmann::json> records;
  try {
    if (!head.empty() && head.front() == '[') {
      auto doc = nlohmann::json::parse(text);
      for (auto& item : doc) records.push_back(std::move(item));
      return records;
    }
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
      auto nl = text.find('\n', pos);
      std::string line = trim(text.substr(pos, nl == std::string::npos ? std::string::npos
                                                                        : nl - pos));
      ++line_no;
      pos = nl == std::string::npos ? text.size() : nl + 1;
      if (line.empty()) continue;
      try {
        records.push_back(nlohmann::json::parse(line));
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return records;
}

DialogueRecord parse_dialogue(const nlohmann::json& item) {
  if (!item.is_object()) throw std::invalid_argument("record is not an object");
  DialogueRecord rec;
  if (!item.contains("id") || !item["id"].is_string()) {
    throw std::invalid_argument("missing string \"id\"");
  }
  rec.id = item["id"].get<std::string>();
  if (!item.contains("turns") || !item["turns"].is_array()) {
    throw std::invalid_argument("missing \"turns\" array");
  }
  for (const auto& t : item["turns"]) {
    if (!t.is_object() || !t.contains("speaker") || !t.contains("text") ||
        !t["speaker"].is_string() || !t["text"].is_string()) {
      throw std::invalid_argument("turn needs string \"speaker\" and \"text\"");
    }
    const auto speaker = to_lower(t["speaker"].get<std::string>());
    Turn turn;
    if (speaker == "user") {
      turn.speaker = Speaker::kUser;
    } else if (speaker == "system") {
      turn.speaker = Speaker::kSystem;
    } else {
      throw std::invalid_argument("unknown speaker \"" + speaker + "\"");
    }
    turn.text = t["text"].get<std::string>();
    rec.turns.push_back(std::move(turn));
  }
  if (auto err = validate_dialogue(rec)) throw std::invalid_argument(*err);
  return rec;
}

DialogueRecord parse_document(const nlohmann::json& item, std::size_t index) {
  if (!item.is_object()) throw std::invalid_argument("record is not an object");
  if (!item.contains("title") || !item["title"].is_string() ||
      trim(item["title"].get<std::string>()).empty()) {
    throw std::invalid_argument("missing non-empty \"title\"");
  }
  std::string abstract;
  if (item.contains("abstract") && !item["abstract"].is_null()) {
    if (!item["abstract"].is_string()) throw std::invalid_argument("\"abstract\" must be a string");
    abstract = item["abstract"].get<std::string>();
  }
  DialogueRecord rec;
  if (item.contains("id") && item["id"].is_string()) {
    rec.id = item["id"].get<std::string>();
  } else {
    rec.id = "doc-" + std::to_string(index);
  }
  rec.turns.push_back({Speaker::kUser, "title: " + item["title"].get<std::string>() +
                                           "\nabstract: " + abstract});
  return rec;
}

template <typename Parse>
Corpus load_corpus(const std::filesystem::path& path, LoadMode mode,
                   std::vector<std::string>* warnings, Parse parse) {
  Corpus corpus;
  corpus.name = path.stem().string();
  std::set<std::string> ids;
  const auto records = read_records(path);
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::string problem;
    try {
      auto rec = parse(records[i], i);
      if (!ids.insert(rec.id).second) {
        problem = "duplicate id \"" + rec.id + "\"";
      } else {
        corpus.items.push_back(std::move(rec));
        continue;
      }
    } catch (const std::invalid_argument& e) {
      problem = e.what();
    } catch (const nlohmann::json::exception& e) {
      problem = e.what();
    }
    const std::string msg = path.string() + ": item " + std::to_string(i) + ": " + problem;
    if (mode == LoadMode::kStrict) throw ParseError(msg);
    if (warnings != nullptr) warnings->push_back(msg);
  }
  return corpus;
}

}  // namespace

std::string DialogueRecord::render() const {
  std::string out;
  for (const auto& t : turns) {
    out += t.speaker == Speaker::kUser ? "User: " : "System: ";
    out += t.text;
    out += '\n';
  }
  return out;
}

std::optional<std::string> validate_dialogue(const DialogueRecord& record) {
  if (record.turns.empty()) return "dialogue has no turns";
  for (std::size_t i = 0; i < record.turns.size(); ++i) {
    const Speaker expected = i % 2 == 0 ? Speaker::kUser : Speaker::kSystem;
    if (record.turns[i].speaker != expected) {
      return "turn " + std::to_string(i) + " should be a " +
             (expected == Speaker::kUser ? "user" : "system") + " turn";
    }
  }
  return std::nullopt;
}

Corpus load_dialogues(const std::filesystem::path& path, LoadMode mode,
                      std::vector<std::string>* warnings) {
  return load_corpus(path, mode, warnings,
                     [](const nlohmann::json& item, std::size_t) { return parse_dialogue(item); });
}

Corpus load_documents(const std::filesystem::path& path, LoadMode mode,
                      std::vector<std::string>* warnings) {
  return load_corpus(path, mode, warnings, parse_document);
}

std::vector<Batch> batch(const Corpus& corpus, std::size_t size) {
  if (size == 0) throw std::invalid_argument("batch size must be >= 1");
  std::vector<Batch> out;
  const auto& items = corpus.items;
  for (std::size_t start = 0; start < items.size(); start += size) {
    out.emplace_back(items.data() + start, std::min(size, items.size() - start));
  }
  return out;
}

Corpus permute(const Corpus& corpus, std::uint64_t seed) {
  Corpus out = corpus;
  portable_shuffle(out.items, seed);
  return out;
}

OntologyGraph load_gold_ontology(const std::filesystem::path& path) {
  return deserialize(read_file(path));
}

}  // namespace ontosql
