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

#include "ontosql/evaluation.hpp"

#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <set>

#include "json.hpp"
#include "ontosql/errors.hpp"

namespace ontosql {

std::string_view to_string(MatchMode mode) {
  switch (mode) {
    case MatchMode::kLiteral:
      return "literal";
    case MatchMode::kFuzzy:
      return "fuzzy";
    case MatchMode::kContinuous:
      return "continuous";
  }
  return "literal";
}

MatchMode parse_match_mode(std::string_view text) {
  for (auto m : kAllMatchModes) {
    if (to_string(m) == text) return m;
  }
  throw ConfigError("unknown match mode \"" + std::string(text) +
                    "\" (expected literal, fuzzy or continuous)");
}

std::string_view to_string(Category category) {
  switch (category) {
    case Category::kDomains:
      return "domains";
    case Category::kSlots:
      return "slots";
    case Category::kValues:
      return "values";
    case Category::kUserIntents:
      return "user_intents";
    case Category::kSystemActions:
      return "system_actions";
  }
  return "domains";
}

Prf prf(std::size_t tp, std::size_t fp, std::size_t fn) { return prf(tp, fp, tp, fn); }

Prf prf(std::size_t tp, std::size_t fp, std::size_t matched_gold, std::size_t fn) {
  Prf r;
  if (tp + fp > 0) r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (matched_gold + fn > 0) {
    r.recall = static_cast<double>(matched_gold) / static_cast<double>(matched_gold + fn);
  }
  if (r.precision + r.recall > 0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

MatchOutcome match_literal(const LabelSet& pred, const LabelSet& gold) {
  MatchOutcome out;
  for (const auto& p : pred) {
    if (gold.contains(p)) {
      ++out.tp;
      out.mapping.emplace_back(p, p);
    } else {
      ++out.fp;
    }
  }
  for (const auto& g : gold) {
    if (!pred.contains(g)) ++out.fn;
  }
  out.matched_gold = out.tp;
  return out;
}

namespace {

// Gold labels with no prediction strictly above the threshold.
std::size_t unmatched_gold(const LabelSet& pred, const LabelSet& gold, const SimilarityFn& sim,
                           double threshold) {
  std::size_t fn = 0;
  for (const auto& g : gold) {
    bool hit = false;
    for (const auto& p : pred) {
      if (sim(p, g) > threshold) {
        hit = true;
        break;
      }
    }
    if (!hit) ++fn;
  }
  return fn;
}

}  // namespace

MatchOutcome match_fuzzy(const LabelSet& pred, const LabelSet& gold, const SimilarityFn& sim,
                         double threshold) {
  MatchOutcome out;
  for (const auto& p : pred) {
    const Label* best = nullptr;
    double best_sim = threshold;
    // Strict > keeps the first (smallest) gold among equals.
    for (const auto& g : gold) {
      const double s = sim(p, g);
      if (s > best_sim) {
        best_sim = s;
        best = &g;
      }
    }
    if (best != nullptr) {
      ++out.tp;
      out.mapping.emplace_back(p, *best);
    } else {
      ++out.fp;
    }
  }
  out.fn = unmatched_gold(pred, gold, sim, threshold);
  out.matched_gold = gold.size() - out.fn;
  return out;
}

MatchOutcome match_continuous(const LabelSet& pred, const LabelSet& gold, const SimilarityFn& sim,
                              double threshold) {
  struct Claim {
    const Label* gold;
    double similarity;
  };
  std::map<Label, Claim> claimed;
  std::size_t fn = 0;
  for (const auto& g : gold) {
    const Label* best = nullptr;
    double best_sim = 0.0;
    for (const auto& p : pred) {
      const double s = sim(p, g);
      if (best == nullptr || s > best_sim) {
        best = &p;
        best_sim = s;
      }
    }
    if (best == nullptr || !(best_sim > threshold)) {
      ++fn;
      continue;
    }
    auto it = claimed.find(*best);
    if (it == claimed.end()) {
      claimed.emplace(*best, Claim{&g, best_sim});
    } else if (best_sim > it->second.similarity) {
      it->second = Claim{&g, best_sim};
    }
  }
  MatchOutcome out;
  out.fn = fn;
  out.tp = claimed.size();
  out.fp = pred.size() - claimed.size();
  out.matched_gold = gold.size() - fn;
  for (const auto& [p, claim] : claimed) out.mapping.emplace_back(p, *claim.gold);
  return out;
}

MatchOutcome match(MatchMode mode, const LabelSet& pred, const LabelSet& gold,
                   const SimilarityFn& sim, double threshold) {
  switch (mode) {
    case MatchMode::kLiteral:
      return match_literal(pred, gold);
    case MatchMode::kFuzzy:
      return match_fuzzy(pred, gold, sim, threshold);
    case MatchMode::kContinuous:
      return match_continuous(pred, gold, sim, threshold);
  }
  return match_literal(pred, gold);
}

SimilarityFn embedding_similarity(EmbeddingProvider& embedder, const OntologyGraph& a,
                                  const OntologyGraph& b) {
  std::set<std::string> texts;
  for (const auto* g : {&a, &b}) {
    for (const auto& d : g->domains()) texts.insert(d.text());
    for (const auto& [d, slots] : g->slots()) {
      for (const auto& s : slots) texts.insert(s.text());
    }
    for (const auto& [key, values] : g->values()) {
      for (const auto& v : values) texts.insert(v.text());
    }
    for (const auto& i : g->user_intents()) texts.insert(i.text());
    for (const auto& x : g->system_actions()) texts.insert(x.text());
  }
  auto table = std::make_shared<std::map<std::string, EmbeddingVector>>();
  if (!texts.empty()) {
    const std::vector<std::string> list(texts.begin(), texts.end());
    auto vectors = embedder.embed(list);
    if (vectors.size() != list.size()) {
      throw ProviderError("embedding provider returned " + std::to_string(vectors.size()) +
                          " vectors for " + std::to_string(list.size()) + " texts");
    }
    for (std::size_t i = 0; i < list.size(); ++i) table->emplace(list[i], std::move(vectors[i]));
  }
  auto lookup = [table, &embedder](const std::string& text) -> const EmbeddingVector& {
    auto it = table->find(text);
    if (it == table->end()) {
      const std::vector<std::string> one{text};
      it = table->emplace(text, embedder.embed(one).at(0)).first;
    }
    return it->second;
  };
  return [lookup](const Label& p, const Label& g) {
    return cosine_similarity(lookup(p.text()), lookup(g.text()));
  };
}

namespace {

void add(CategoryScore& score, const MatchOutcome& m) {
  score.tp += m.tp;
  score.fp += m.fp;
  score.fn += m.fn;
  score.matched_gold += m.matched_gold;
}

std::size_t count_values_below(const OntologyGraph& g, const Label& domain, const Label& slot) {
  return g.values_of(domain, slot).size();
}

}  // namespace

ModeReport evaluate(const OntologyGraph& predicted, const OntologyGraph& gold, MatchMode mode,
                    const SimilarityFn& sim, const EvalOptions& options) {
  if (mode != MatchMode::kLiteral && !sim) {
    throw std::invalid_argument("fuzzy and continuous matching need a similarity function");
  }
  const double t = options.threshold;
  ModeReport report;
  report.mode = mode;
  auto& domains = report.categories[static_cast<std::size_t>(Category::kDomains)];
  auto& slots = report.categories[static_cast<std::size_t>(Category::kSlots)];
  auto& values = report.categories[static_cast<std::size_t>(Category::kValues)];

  const auto dm = match(mode, predicted.domains(), gold.domains(), sim, t);
  add(domains, dm);

  std::set<Label> matched_gold_domains;
  for (const auto& [pd, gd] : dm.mapping) {
    matched_gold_domains.insert(gd);
    const auto sm = match(mode, predicted.slots_of(pd), gold.slots_of(gd), sim, t);
    add(slots, sm);
    std::set<Label> matched_gold_slots;
    for (const auto& [ps, gs] : sm.mapping) {
      matched_gold_slots.insert(gs);
      add(values, match(mode, predicted.values_of(pd, ps), gold.values_of(gd, gs), sim, t));
    }
    if (options.count_unmatched_gold_children) {
      for (const auto& gs : gold.slots_of(gd)) {
        if (!matched_gold_slots.contains(gs)) values.fn += count_values_below(gold, gd, gs);
      }
    }
  }
  if (options.count_unmatched_gold_children) {
    for (const auto& gd : gold.domains()) {
      if (matched_gold_domains.contains(gd)) continue;
      for (const auto& gs : gold.slots_of(gd)) {
        ++slots.fn;
        values.fn += count_values_below(gold, gd, gs);
      }
    }
  }

  add(report.categories[static_cast<std::size_t>(Category::kUserIntents)],
      match(mode, predicted.user_intents(), gold.user_intents(), sim, t));
  add(report.categories[static_cast<std::size_t>(Category::kSystemActions)],
      match(mode, predicted.system_actions(), gold.system_actions(), sim, t));

  std::size_t tp = 0, fp = 0, fn = 0, matched_gold = 0;
  for (auto& c : report.categories) {
    c.scores = prf(c.tp, c.fp, c.matched_gold, c.fn);
    report.macro.precision += c.scores.precision / kCategoryCount;
    report.macro.recall += c.scores.recall / kCategoryCount;
    report.macro.f1 += c.scores.f1 / kCategoryCount;
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
    matched_gold += c.matched_gold;
  }
  report.micro = prf(tp, fp, matched_gold, fn);
  return report;
}

EvalReport evaluate_modes(const OntologyGraph& predicted, const OntologyGraph& gold,
                          const std::vector<MatchMode>& modes, EmbeddingProvider* embedder,
                          const EvalOptions& options) {
  EvalReport report;
  report.threshold = options.threshold;
  report.count_unmatched_gold_children = options.count_unmatched_gold_children;
  SimilarityFn sim;
  for (auto mode : modes) {
    if (mode != MatchMode::kLiteral && !sim) {
      if (embedder == nullptr) {
        throw ConfigError(std::string(to_string(mode)) + " matching needs an embedding provider");
      }
      sim = embedding_similarity(*embedder, predicted, gold);
    }
    report.modes.push_back(evaluate(predicted, gold, mode, sim, options));
  }
  return report;
}

namespace {

nlohmann::ordered_json prf_json(const Prf& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

std::string pct(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%6.1f", v * 100.0);
  return buf;
}

}  // namespace

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["threshold"] = threshold;
  j["count_unmatched_gold_children"] = count_unmatched_gold_children;
  auto modes_json = nlohmann::ordered_json::object();
  for (const auto& m : modes) {
    nlohmann::ordered_json mj;
    for (std::size_t i = 0; i < kCategoryCount; ++i) {
      const auto& c = m.categories[i];
      auto cj = prf_json(c.scores);
      cj["tp"] = c.tp;
      cj["fp"] = c.fp;
      cj["fn"] = c.fn;
      cj["matched_gold"] = c.matched_gold;
      mj[std::string(to_string(static_cast<Category>(i)))] = std::move(cj);
    }
    mj["macro"] = prf_json(m.macro);
    mj["micro"] = prf_json(m.micro);
    modes_json[std::string(to_string(m.mode))] = std::move(mj);
  }
  j["modes"] = std::move(modes_json);
  return j.dump(2) + "\n";
}

std::string EvalReport::to_text() const {
  auto row_label = [](std::string_view name) {
    std::string s(name);
    s.resize(16, ' ');
    return s;
  };
  std::string out = row_label("");
  std::string sub = row_label("");
  for (const auto& m : modes) {
    std::string head(to_string(m.mode));
    head.resize(20, ' ');
    out += " | " + head;
    sub += " |      P      R     F1";
  }
  out += "\n" + sub + "\n";
  auto line = [&](std::string_view name, auto get) {
    std::string l = row_label(name);
    for (const auto& m : modes) {
      const Prf& p = get(m);
      l += " | " + pct(p.precision) + " " + pct(p.recall) + " " + pct(p.f1);
    }
    return l + "\n";
  };
  for (std::size_t i = 0; i < kCategoryCount; ++i) {
    out += line(to_string(static_cast<Category>(i)),
                [i](const ModeReport& m) -> const Prf& { return m.categories[i].scores; });
  }
  out += line("macro", [](const ModeReport& m) -> const Prf& { return m.macro; });
  out += line("micro", [](const ModeReport& m) -> const Prf& { return m.micro; });
  return out;
}

}  // namespace ontosql
