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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ontosql/ontology.hpp"

namespace ontosql {

enum class Speaker { kUser, kSystem };

struct Turn {
  Speaker speaker = Speaker::kUser;
  std::string text;

  bool operator==(const Turn&) const = default;
};

struct DialogueRecord {
  std::string id;
  std::vector<Turn> turns;

  /// "User: ...\nSystem: ..." one line per turn.
  std::string render() const;

  bool operator==(const DialogueRecord&) const = default;
};

/// Non-empty, speakers alternate starting with the user. Returns the reason
/// when invalid.
std::optional<std::string> validate_dialogue(const DialogueRecord& record);

struct Corpus {
  std::string name;
  std::vector<DialogueRecord> items;
};

using Batch = std::span<const DialogueRecord>;

enum class LoadMode { kStrict, kLenient };

/// Generic dialogue schema, as a JSON array or JSON lines:
///   {"id": "...", "turns": [{"speaker": "user"|"system", "text": "..."}]}
/// Strict mode throws ParseError naming the item index; lenient mode skips the
/// item and appends a warning.
Corpus load_dialogues(const std::filesystem::path& path, LoadMode mode = LoadMode::kStrict,
                      std::vector<std::string>* warnings = nullptr);

/// Title/abstract records ({"id"?, "title", "abstract"?}) wrapped as
/// single-turn pseudo-dialogues "title: ...\nabstract: ...".
Corpus load_documents(const std::filesystem::path& path, LoadMode mode = LoadMode::kStrict,
                      std::vector<std::string>* warnings = nullptr);

/// Contiguous batches in corpus order; the last may be short. The spans
/// reference `corpus`.
std::vector<Batch> batch(const Corpus& corpus, std::size_t size);

/// Seeded uniform shuffle, identical across platforms for a given seed.
Corpus permute(const Corpus& corpus, std::uint64_t seed);

OntologyGraph load_gold_ontology(const std::filesystem::path& path);

}  // namespace ontosql
