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

#include "ontosql/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "json.hpp"
#include "ontosql/errors.hpp"
#include "ontosql/util.hpp"

namespace ontosql {

namespace {

namespace pt = boost::property_tree;

bool parse_bool(const std::string& key, const std::string& raw) {
  const auto v = to_lower(trim(raw));
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ConfigError(key + ": expected a boolean, got \"" + raw + "\"");
}

template <typename T>
T parse_number(const std::string& key, const std::string& raw) {
  const auto v = trim(raw);
  T out{};
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key + ": expected a number, got \"" + raw + "\"");
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& raw) {
  std::filesystem::path p(trim(raw));
  return p.is_absolute() || p.empty() ? p : base / p;
}

void apply_run(AppConfig& cfg, const std::string& key, const std::string& value,
               const std::filesystem::path& base) {
  auto& r = cfg.run;
  const std::string k = "run." + key;
  if (key == "variant") {
    r.variant = parse_variant(trim(value));
  } else if (key == "dst") {
    r.use_dst = parse_bool(k, value);
  } else if (key == "similarity") {
    r.use_similarity = parse_bool(k, value);
  } else if (key == "examples") {
    r.use_value_examples = parse_bool(k, value);
  } else if (key == "success") {
    r.use_success = parse_bool(k, value);
  } else if (key == "batch_size") {
    r.batch_size = parse_number<std::size_t>(k, value);
  } else if (key == "prompt_budget") {
    r.prompt_budget = parse_number<std::size_t>(k, value);
  } else if (key == "seed") {
    r.seed = parse_number<std::uint64_t>(k, value);
  } else if (key == "shuffle") {
    r.shuffle = parse_bool(k, value);
  } else if (key == "prompts") {
    r.prompt_set = resolve(base, value);
  } else if (key == "similarity_threshold") {
    r.similarity_threshold = parse_number<double>(k, value);
  } else if (key == "similarity_max_results") {
    r.similarity_max_results = parse_number<std::size_t>(k, value);
  } else if (key == "value_examples_k") {
    r.value_examples_k = parse_number<std::size_t>(k, value);
  } else if (key == "temperature") {
    r.temperature = parse_number<double>(k, value);
  } else if (key == "max_output_tokens") {
    r.max_output_tokens = parse_number<int>(k, value);
  } else {
    throw ConfigError("unknown key " + k);
  }
  cfg.explicit_run_keys.insert(key);
}

void apply_chat(ChatSettings& c, const std::string& key, const std::string& value,
                const std::filesystem::path& base) {
  const std::string k = "chat." + key;
  if (key == "provider") {
    c.provider = to_lower(trim(value));
  } else if (key == "script") {
    c.script = resolve(base, value);
  } else if (key == "base_url") {
    c.base_url = trim(value);
  } else if (key == "model") {
    c.model = trim(value);
  } else if (key == "api_key_env") {
    c.api_key_env = trim(value);
  } else if (key == "timeout_seconds") {
    c.timeout_seconds = parse_number<int>(k, value);
  } else if (key == "max_attempts") {
    c.retry.max_attempts = parse_number<int>(k, value);
  } else if (key == "initial_delay_ms") {
    c.retry.initial_delay = std::chrono::milliseconds(parse_number<long>(k, value));
  } else if (key == "max_delay_ms") {
    c.retry.max_delay = std::chrono::milliseconds(parse_number<long>(k, value));
  } else {
    throw ConfigError("unknown key " + k);
  }
}

void apply_embedding(EmbeddingSettings& e, const std::string& key, const std::string& value,
                     const std::filesystem::path& base) {
  const std::string k = "embedding." + key;
  if (key == "provider") {
    e.provider = to_lower(trim(value));
  } else if (key == "dimension") {
    e.dimension = parse_number<std::size_t>(k, value);
  } else if (key == "table") {
    e.table = resolve(base, value);
  } else if (key == "base_url") {
    e.base_url = trim(value);
  } else if (key == "model") {
    e.model = trim(value);
  } else if (key == "api_key_env") {
    e.api_key_env = trim(value);
  } else if (key == "timeout_seconds") {
    e.timeout_seconds = parse_number<int>(k, value);
  } else if (key == "batch_size") {
    e.batch_size = parse_number<std::size_t>(k, value);
  } else {
    throw ConfigError("unknown key " + k);
  }
}

void apply_eval(EvalOptions& o, const std::string& key, const std::string& value) {
  const std::string k = "eval." + key;
  if (key == "threshold") {
    o.threshold = parse_number<double>(k, value);
  } else if (key == "count_unmatched_gold_children") {
    o.count_unmatched_gold_children = parse_bool(k, value);
  } else {
    throw ConfigError("unknown key " + k);
  }
}

std::string api_key(const std::string& env) {
  if (env.empty()) return {};
  const char* v = std::getenv(env.c_str());
  return v == nullptr ? std::string{} : std::string(v);
}

}  // namespace

void AppConfig::finalize() {
  if (run.variant == Variant::kDirectUpdate) {
    if (!explicit_run_keys.contains("dst")) run.use_dst = false;
    if (!explicit_run_keys.contains("similarity")) run.use_similarity = false;
    if (!explicit_run_keys.contains("examples")) run.use_value_examples = false;
    if (!explicit_run_keys.contains("success")) run.use_success = false;
  }
  run.validate();
  if (!(eval.threshold > 0.0 && eval.threshold < 1.0)) {
    throw ConfigError("eval.threshold must be in (0, 1)");
  }
  if (chat.provider != "scripted" && chat.provider != "http") {
    throw ConfigError("chat.provider must be scripted or http");
  }
  if (embedding.provider != "none" && embedding.provider != "hashing" &&
      embedding.provider != "scripted" && embedding.provider != "http") {
    throw ConfigError("embedding.provider must be none, hashing, scripted or http");
  }
  if (run.use_similarity && embedding.provider == "none") {
    throw ConfigError("run.similarity needs an embedding provider");
  }
}

AppConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  AppConfig cfg;
  cfg.run.prompt_set = base_dir / "prompts";
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config: key \"" + section + "\" outside any section");
    }
    for (const auto& [key, node] : body) {
      const std::string value = node.data();
      if (section == "run") {
        apply_run(cfg, key, value, base_dir);
      } else if (section == "chat") {
        apply_chat(cfg.chat, key, value, base_dir);
      } else if (section == "embedding") {
        apply_embedding(cfg.embedding, key, value, base_dir);
      } else if (section == "eval") {
        apply_eval(cfg.eval, key, value);
      } else {
        throw ConfigError("unknown config section [" + section + "]");
      }
    }
  }
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, path.parent_path().empty() ? "." : path.parent_path());
}

std::unique_ptr<ChatProvider> make_chat_provider(const ChatSettings& settings) {
  if (settings.provider == "scripted") {
    if (settings.script.empty()) throw ConfigError("chat.script is required for scripted chat");
    try {
      return ScriptedChatProvider::from_file(settings.script);
    } catch (const IoError& e) {
      throw ConfigError(e.what());
    }
  }
  if (settings.provider == "http") {
    if (settings.base_url.empty() || settings.model.empty()) {
      throw ConfigError("chat.base_url and chat.model are required for http chat");
    }
    HttpEndpoint ep{settings.base_url, settings.model, api_key(settings.api_key_env),
                    std::chrono::seconds(settings.timeout_seconds)};
    auto inner = std::make_shared<HttpChatProvider>(std::move(ep));
    return std::make_unique<RetryingChatProvider>(std::move(inner), settings.retry);
  }
  throw ConfigError("unknown chat provider \"" + settings.provider + "\"");
}

std::shared_ptr<EmbeddingProvider> make_embedding_provider(const EmbeddingSettings& settings) {
  std::shared_ptr<EmbeddingProvider> inner;
  if (settings.provider == "none") return nullptr;
  if (settings.provider == "hashing") {
    inner = std::make_shared<HashingEmbedder>(settings.dimension);
  } else if (settings.provider == "scripted") {
    if (settings.table.empty()) {
      throw ConfigError("embedding.table is required for scripted embeddings");
    }
    try {
      inner = ScriptedEmbeddingProvider::from_file(settings.table);
    } catch (const IoError& e) {
      throw ConfigError(e.what());
    }
  } else if (settings.provider == "http") {
    if (settings.base_url.empty() || settings.model.empty()) {
      throw ConfigError("embedding.base_url and embedding.model are required for http");
    }
    HttpEndpoint ep{settings.base_url, settings.model, api_key(settings.api_key_env),
                    std::chrono::seconds(settings.timeout_seconds)};
    inner = std::make_shared<RetryingEmbeddingProvider>(
        std::make_shared<HttpEmbeddingProvider>(std::move(ep)), RetryPolicy{});
  } else {
    throw ConfigError("unknown embedding provider \"" + settings.provider + "\"");
  }
  return std::make_shared<CachingEmbedder>(std::move(inner), settings.batch_size);
}

std::string config_json(const AppConfig& config) {
  const auto& r = config.run;
  nlohmann::ordered_json j;
  j["run"] = {{"variant", to_string(r.variant)},
              {"dst", r.use_dst},
              {"similarity", r.use_similarity},
              {"examples", r.use_value_examples},
              {"success", r.use_success},
              {"batch_size", r.batch_size},
              {"prompt_budget", r.prompt_budget},
              {"seed", r.seed},
              {"shuffle", r.shuffle},
              {"prompts", r.prompt_set.generic_string()},
              {"similarity_threshold", r.similarity_threshold},
              {"similarity_max_results", r.similarity_max_results},
              {"value_examples_k", r.value_examples_k},
              {"temperature", r.temperature},
              {"max_output_tokens", r.max_output_tokens}};
  j["chat"] = {{"provider", config.chat.provider},
               {"script", config.chat.script.generic_string()},
               {"base_url", config.chat.base_url},
               {"model", config.chat.model},
               {"max_attempts", config.chat.retry.max_attempts}};
  j["embedding"] = {{"provider", config.embedding.provider},
                    {"dimension", config.embedding.dimension},
                    {"table", config.embedding.table.generic_string()},
                    {"base_url", config.embedding.base_url},
                    {"model", config.embedding.model}};
  j["eval"] = {{"threshold", config.eval.threshold},
               {"count_unmatched_gold_children", config.eval.count_unmatched_gold_children}};
  return j.dump(2);
}

}  // namespace ontosql
