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

#include "ontosql/ontology.hpp"

#include <cctype>
#include <stdexcept>

#include "json.hpp"
#include "ontosql/errors.hpp"

namespace ontosql {

namespace {

const LabelSet kEmptySet;

bool is_ascii_space(unsigned char c) { return std::isspace(c) != 0; }

}  // namespace

std::optional<Label> Label::try_normalize(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (is_ascii_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  if (out.empty()) return std::nullopt;
  return Label(std::move(out));
}

Label Label::normalize(std::string_view raw) {
  auto label = try_normalize(raw);
  if (!label) throw std::invalid_argument("label is empty after normalization");
  return *std::move(label);
}

void OntologyGraph::add_domain(const Label& domain) { domains_.insert(domain); }

void OntologyGraph::add_slot(const Label& domain, const Label& slot) {
  domains_.insert(domain);
  slots_[domain].insert(slot);
}

void OntologyGraph::add_value(const Label& domain, const Label& slot, const Label& value) {
  add_slot(domain, slot);
  values_[{domain, slot}].insert(value);
}

void OntologyGraph::add_user_intent(const Label& intent) { user_intents_.insert(intent); }

void OntologyGraph::add_system_action(const Label& action) { system_actions_.insert(action); }

void OntologyGraph::remove_domain(const Label& domain) {
  domains_.erase(domain);
  slots_.erase(domain);
  for (auto it = values_.begin(); it != values_.end();) {
    if (it->first.first == domain) {
      it = values_.erase(it);
    } else {
      ++it;
    }
  }
}

const LabelSet& OntologyGraph::slots_of(const Label& domain) const {
  auto it = slots_.find(domain);
  return it == slots_.end() ? kEmptySet : it->second;
}

const LabelSet& OntologyGraph::values_of(const Label& domain, const Label& slot) const {
  auto it = values_.find({domain, slot});
  return it == values_.end() ? kEmptySet : it->second;
}

bool OntologyGraph::empty() const noexcept {
  return domains_.empty() && user_intents_.empty() && system_actions_.empty();
}

std::size_t OntologyGraph::node_count() const noexcept {
  std::size_t n = domains_.size() + user_intents_.size() + system_actions_.size();
  for (const auto& [_, s] : slots_) n += s.size();
  for (const auto& [_, v] : values_) n += v.size();
  return n;
}

ReservedKind classify_table(std::string_view table_name) {
  auto label = Label::try_normalize(table_name);
  if (!label) return ReservedKind::kNone;
  const std::string& name = label->text();
  if (name.find("intent") != std::string::npos) return ReservedKind::kUserIntents;
  if (name.find("action") != std::string::npos) return ReservedKind::kSystemActions;
  return ReservedKind::kNone;
}

namespace {

bool is_rowid_alias(const ColumnInfo& column) {
  return column.primary_key && Label::try_normalize(column.declared_type) ==
                                   Label::try_normalize("integer");
}

}  // namespace

OntologyGraph extract_ontology(const DbSnapshot& snapshot) {
  OntologyGraph graph;
  for (const auto& table : snapshot.tables) {
    auto domain = Label::try_normalize(table.name);
    if (!domain) continue;
    const ReservedKind kind = classify_table(table.name);
    if (kind != ReservedKind::kNone) {
      for (const auto& column : table.columns) {
        if (!column.values || is_rowid_alias(column)) continue;
        for (const auto& raw : *column.values) {
          auto value = Label::try_normalize(raw);
          if (!value) continue;
          if (kind == ReservedKind::kUserIntents) {
            graph.add_user_intent(*value);
          } else {
            graph.add_system_action(*value);
          }
        }
      }
      continue;
    }
    graph.add_domain(*domain);
    for (const auto& column : table.columns) {
      auto slot = Label::try_normalize(column.name);
      if (!slot) continue;
      graph.add_slot(*domain, *slot);
      if (!column.values) continue;
      for (const auto& raw : *column.values) {
        if (auto value = Label::try_normalize(raw)) graph.add_value(*domain, *slot, *value);
      }
    }
  }
  return graph;
}

OntologyGraph merge(const OntologyGraph& a, const OntologyGraph& b) {
  OntologyGraph out = a;
  for (const auto& d : b.domains()) out.add_domain(d);
  for (const auto& [d, slots] : b.slots()) {
    for (const auto& s : slots) out.add_slot(d, s);
  }
  for (const auto& [key, values] : b.values()) {
    for (const auto& v : values) out.add_value(key.first, key.second, v);
  }
  for (const auto& i : b.user_intents()) out.add_user_intent(i);
  for (const auto& x : b.system_actions()) out.add_system_action(x);
  return out;
}

namespace {

using nlohmann::ordered_json;

ordered_json to_array(const LabelSet& labels) {
  auto arr = ordered_json::array();
  for (const auto& l : labels) arr.push_back(l.text());
  return arr;
}

LabelSet parse_labels(const nlohmann::json& node, const std::string& where) {
  if (!node.is_array()) throw ParseError(where + ": expected an array of strings");
  LabelSet out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const auto& item = node[i];
    if (!item.is_string()) {
      throw ParseError(where + "[" + std::to_string(i) + "]: expected a string");
    }
    auto label = Label::try_normalize(item.get<std::string>());
    if (!label) throw ParseError(where + "[" + std::to_string(i) + "]: empty label");
    out.insert(*std::move(label));
  }
  return out;
}

Label parse_key(const std::string& key, const std::string& where) {
  auto label = Label::try_normalize(key);
  if (!label) throw ParseError(where + ": empty key");
  return *std::move(label);
}

}  // namespace

std::string serialize(const OntologyGraph& graph) {
  ordered_json doc = ordered_json::object();
  doc["domains"] = to_array(graph.domains());
  auto slots = ordered_json::object();
  for (const auto& [d, s] : graph.slots()) slots[d.text()] = to_array(s);
  doc["slots"] = std::move(slots);
  auto values = ordered_json::object();
  for (const auto& [key, v] : graph.values()) {
    values[key.first.text()][key.second.text()] = to_array(v);
  }
  doc["values"] = std::move(values);
  doc["user_intents"] = to_array(graph.user_intents());
  doc["system_actions"] = to_array(graph.system_actions());
  return doc.dump(2) + "\n";
}

OntologyGraph deserialize(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("ontology document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("ontology document: top level must be an object");

  static const std::set<std::string> kKeys = {"domains", "slots", "values", "user_intents",
                                              "system_actions"};
  for (const auto& [key, _] : doc.items()) {
    if (!kKeys.contains(key)) throw ParseError("ontology document: unknown key \"" + key + "\"");
  }

  OntologyGraph graph;
  if (doc.contains("domains")) {
    for (const auto& d : parse_labels(doc["domains"], "domains")) graph.add_domain(d);
  }
  if (doc.contains("slots")) {
    const auto& slots = doc["slots"];
    if (!slots.is_object()) throw ParseError("slots: expected an object");
    for (const auto& [key, node] : slots.items()) {
      const std::string where = "slots." + key;
      Label domain = parse_key(key, where);
      if (!graph.domains().contains(domain)) {
        throw ParseError(where + ": domain not listed in \"domains\"");
      }
      for (const auto& s : parse_labels(node, where)) graph.add_slot(domain, s);
    }
  }
  if (doc.contains("values")) {
    const auto& values = doc["values"];
    if (!values.is_object()) throw ParseError("values: expected an object");
    for (const auto& [dkey, per_slot] : values.items()) {
      Label domain = parse_key(dkey, "values." + dkey);
      if (!per_slot.is_object()) throw ParseError("values." + dkey + ": expected an object");
      for (const auto& [skey, node] : per_slot.items()) {
        const std::string where = "values." + dkey + "." + skey;
        Label slot = parse_key(skey, where);
        if (!graph.slots_of(domain).contains(slot)) {
          throw ParseError(where + ": slot not listed under \"slots\"");
        }
        for (const auto& v : parse_labels(node, where)) graph.add_value(domain, slot, v);
      }
    }
  }
  if (doc.contains("user_intents")) {
    for (const auto& i : parse_labels(doc["user_intents"], "user_intents")) {
      graph.add_user_intent(i);
    }
  }
  if (doc.contains("system_actions")) {
    for (const auto& a : parse_labels(doc["system_actions"], "system_actions")) {
      graph.add_system_action(a);
    }
  }
  return graph;
}

}  // namespace ontosql
