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

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include "ontosql/snapshot.hpp"

namespace ontosql {

/// A normalized ontology node name: lowercased, trimmed, with internal
/// whitespace runs collapsed to one space. Underscores are preserved.
/// Never empty.
class Label {
 public:
  /// Throws std::invalid_argument if `raw` is empty after normalization.
  static Label normalize(std::string_view raw);
  static std::optional<Label> try_normalize(std::string_view raw);

  const std::string& text() const noexcept { return text_; }

  auto operator<=>(const Label&) const = default;

 private:
  explicit Label(std::string text) : text_(std::move(text)) {}
  std::string text_;
};

using LabelSet = std::set<Label>;
using SlotKey = std::pair<Label, Label>;  // (domain, slot)

/// Task-oriented dialogue ontology: domains own slots, slots own values;
/// user intents and system actions are flat sets. The mutators keep the
/// parent-exists invariant by inserting missing parents.
class OntologyGraph {
 public:
  void add_domain(const Label& domain);
  void add_slot(const Label& domain, const Label& slot);
  void add_value(const Label& domain, const Label& slot, const Label& value);
  void add_user_intent(const Label& intent);
  void add_system_action(const Label& action);

  /// Removes a domain together with its slots and values.
  void remove_domain(const Label& domain);

  const LabelSet& domains() const noexcept { return domains_; }
  const std::map<Label, LabelSet>& slots() const noexcept { return slots_; }
  const std::map<SlotKey, LabelSet>& values() const noexcept { return values_; }
  const LabelSet& user_intents() const noexcept { return user_intents_; }
  const LabelSet& system_actions() const noexcept { return system_actions_; }

  const LabelSet& slots_of(const Label& domain) const;
  const LabelSet& values_of(const Label& domain, const Label& slot) const;

  bool empty() const noexcept;
  std::size_t node_count() const noexcept;

  bool operator==(const OntologyGraph&) const = default;

 private:
  LabelSet domains_;
  std::map<Label, LabelSet> slots_;
  std::map<SlotKey, LabelSet> values_;
  LabelSet user_intents_;
  LabelSet system_actions_;
};

enum class ReservedKind { kNone, kUserIntents, kSystemActions };

/// Intent tables are those whose normalized name contains "intent"; action
/// tables contain "action". Intent wins when both occur.
ReservedKind classify_table(std::string_view table_name);

/// Tables become domains, columns slots, distinct cells values. Reserved
/// intent/action tables feed the flat sets instead (their INTEGER PRIMARY KEY
/// row ids are skipped). Columns without sampled values contribute slots only.
OntologyGraph extract_ontology(const DbSnapshot& snapshot);

/// Componentwise union.
OntologyGraph merge(const OntologyGraph& a, const OntologyGraph& b);

/// Canonical JSON document with keys "domains", "slots", "values",
/// "user_intents", "system_actions"; labels sorted, so equal graphs give
/// identical bytes.
std::string serialize(const OntologyGraph& graph);

/// Throws ParseError on malformed or structurally invalid documents. Labels
/// are normalized on the way in.
OntologyGraph deserialize(std::string_view document);

}  // namespace ontosql
