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

#include "ontosql/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "ontosql/aggregation.hpp"
#include "ontosql/audit_log.hpp"
#include "ontosql/config.hpp"
#include "ontosql/datasets.hpp"
#include "ontosql/db_session.hpp"
#include "ontosql/errors.hpp"
#include "ontosql/evaluation.hpp"
#include "ontosql/pipeline.hpp"
#include "ontosql/util.hpp"

namespace ontosql {

namespace fs = std::filesystem;

namespace {

constexpr const char* kDbFile = "ontology.db";
constexpr const char* kAuditFile = "audit.log";
constexpr const char* kOntologyFile = "ontology.json";
constexpr const char* kStatsFile = "run_stats.json";
constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kTracesFile = "traces.jsonl";
constexpr const char* kScriptFile = "chat_script.json";

struct BuildArgs {
  std::string config;
  std::string corpus;
  std::string out;
  bool resume = false;
  bool force = false;
  bool documents = false;
  bool lenient = false;
  bool record = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> batch_size;
  std::optional<std::string> variant;
  std::optional<bool> dst, sim, examples, success;
  std::optional<std::size_t> max_batches;
};

struct EvalArgs {
  std::string pred;
  std::string gold;
  std::string mode = "all";
  std::optional<double> threshold;
  bool count_gold_children = false;
  std::string config;
  std::string out;
  bool json = false;
};

struct StatsArgs {
  std::string run;
};

struct ClusterArgs {
  std::string ontology;
  std::string out;
  std::string config;
  std::size_t k_min = 5;
  std::size_t k_max = 20;
  std::uint64_t seed = 0;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

AppConfig load_or_default(const std::string& path) {
  if (path.empty()) {
    AppConfig cfg;
    cfg.run.prompt_set = "prompts";
    return cfg;
  }
  return load_config(path);
}

void set_flag(AppConfig& cfg, const char* key, bool& field, const std::optional<bool>& v) {
  if (!v) return;
  field = *v;
  cfg.explicit_run_keys.insert(key);
}

std::string describe_ratio(const SessionStats& s) {
  return format_percent(s.error_ratio()) + " (" + std::to_string(s.failed_updates) + " of " +
         std::to_string(s.update_statements) + " update statements failed)";
}

int cmd_build(const BuildArgs& a, std::ostream& out, std::ostream& err) {
  if (a.resume && a.force) throw ConfigError("--resume and --force are mutually exclusive");
  AppConfig cfg = load_or_default(a.config);
  if (a.variant) {
    cfg.run.variant = parse_variant(*a.variant);
    cfg.explicit_run_keys.insert("variant");
  }
  if (a.seed) cfg.run.seed = *a.seed;
  if (a.batch_size) cfg.run.batch_size = *a.batch_size;
  set_flag(cfg, "dst", cfg.run.use_dst, a.dst);
  set_flag(cfg, "similarity", cfg.run.use_similarity, a.sim);
  set_flag(cfg, "examples", cfg.run.use_value_examples, a.examples);
  set_flag(cfg, "success", cfg.run.use_success, a.success);
  cfg.finalize();

  std::vector<std::string> warnings;
  const auto mode = a.lenient ? LoadMode::kLenient : LoadMode::kStrict;
  const Corpus corpus =
      a.documents ? load_documents(a.corpus, mode, &warnings) : load_dialogues(a.corpus, mode, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  auto prompts = PromptSet::load(cfg.run.prompt_set);

  std::shared_ptr<ChatProvider> chat = make_chat_provider(cfg.chat);
  std::shared_ptr<RecordingChatProvider> recorder;
  if (a.record) {
    recorder = std::make_shared<RecordingChatProvider>(chat);
    chat = recorder;
  }
  auto embedder = make_embedding_provider(cfg.embedding);

  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  const fs::path db_path = dir / kDbFile;
  const fs::path audit_path = dir / kAuditFile;
  const fs::path manifest_path = dir / kManifestFile;
  const fs::path traces_path = dir / kTracesFile;

  const std::string corpus_hash = sha256_hex(read_file(a.corpus));
  const auto config_doc = nlohmann::ordered_json::parse(config_json(cfg));

  if (a.resume) {
    if (!fs::exists(manifest_path) || !fs::exists(db_path) || !fs::exists(audit_path)) {
      throw IoError("nothing to resume in " + dir.string());
    }
    nlohmann::json manifest;
    try {
      manifest = nlohmann::json::parse(read_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
      throw IoError("unreadable manifest " + manifest_path.string() + ": " + e.what());
    }
    if (manifest.value("/corpus/sha256"_json_pointer, std::string{}) != corpus_hash) {
      throw ConfigError("--resume with a different corpus than the original run");
    }
    if (manifest.value("config", nlohmann::json{}) != nlohmann::json::parse(config_json(cfg))) {
      throw ConfigError("--resume with a configuration that differs from the original run");
    }
  } else {
    const bool occupied = fs::exists(db_path) || fs::exists(audit_path);
    if (occupied && !a.force) {
      throw ConfigError(dir.string() + " already holds a run; use --resume or --force");
    }
    for (const char* f : {kDbFile, kAuditFile, kOntologyFile, kStatsFile, kManifestFile,
                          kTracesFile, kScriptFile}) {
      fs::remove(dir / f, ec);
    }
    nlohmann::ordered_json manifest;
    manifest["config"] = config_doc;
    manifest["corpus"] = {{"name", corpus.name},
                          {"path", a.corpus},
                          {"sha256", corpus_hash},
                          {"items", corpus.items.size()},
                          {"kind", a.documents ? "documents" : "dialogues"}};
    manifest["providers"] = {{"chat", chat->id()},
                             {"embedding", embedder ? embedder->id() : "none"}};
    manifest["seed"] = cfg.run.seed;
    manifest["outputs"] = {{"database", kDbFile},       {"audit_log", kAuditFile},
                           {"ontology", kOntologyFile}, {"run_stats", kStatsFile},
                           {"traces", kTracesFile}};
    manifest["created_at"] = utc_now();
    write_file(manifest_path, manifest.dump(2) + "\n");
  }

  auto session = DbSession::open(db_path.string());
  RunOptions options;
  std::optional<AuditLog> audit;
  if (a.resume) {
    ResumeState state;
    audit.emplace(AuditLog::resume(audit_path, state));
    if (session.completed_batches() != state.next_batch) {
      throw IoError("database records " + std::to_string(session.completed_batches()) +
                    " completed batches but the audit log records " +
                    std::to_string(state.next_batch) + "; cannot resume safely");
    }
    session.restore_stats(state.stats);
    options.start_batch = state.next_batch;
    options.prior_chat_calls = state.chat_calls;
    options.prior_failed_batches = state.failed_batches;
    err << "resuming at batch " << state.next_batch << "\n";
  } else {
    audit.emplace(AuditLog::create(audit_path));
  }
  options.max_batches = a.max_batches;

  std::ofstream traces(traces_path, std::ios::binary | std::ios::app);
  if (!traces) throw IoError("cannot open " + traces_path.string());
  options.on_trace = [&](const StepTrace& t) {
    traces << t.to_json() << "\n";
    traces.flush();
    if (t.failed) err << "batch " << t.batch_index << " failed: " << t.error << "\n";
  };

  Pipeline pipeline(session, *chat, embedder.get(), std::move(prompts), cfg.run, &*audit);
  const auto result = pipeline.run_dataset(corpus, options);

  write_file(dir / kOntologyFile, serialize(result.ontology));
  write_file(dir / kStatsFile, result.stats.to_json());
  if (recorder) write_file(dir / kScriptFile, recorder->to_script_json());

  out << "batches: " << result.stats.batches_processed << "/" << result.stats.batches_total
      << " (" << result.stats.batches_failed << " failed)\n";
  out << "tables: " << result.stats.table_count << "\n";
  out << "sql error ratio: " << describe_ratio(result.stats.sql) << "\n";
  out << "ontology: " << (dir / kOntologyFile).string() << "\n";
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  AppConfig cfg = load_or_default(a.config);
  EvalOptions options = cfg.eval;
  if (a.threshold) options.threshold = *a.threshold;
  if (a.count_gold_children) options.count_unmatched_gold_children = true;
  if (!(options.threshold > 0.0 && options.threshold < 1.0)) {
    throw ConfigError("--threshold must be in (0, 1)");
  }
  std::vector<MatchMode> modes;
  if (a.mode == "all") {
    modes.assign(kAllMatchModes.begin(), kAllMatchModes.end());
  } else {
    modes.push_back(parse_match_mode(a.mode));
  }

  const auto pred = load_gold_ontology(a.pred);
  const auto gold = load_gold_ontology(a.gold);

  std::shared_ptr<EmbeddingProvider> embedder;
  const bool needs_embeddings =
      std::any_of(modes.begin(), modes.end(), [](MatchMode m) { return m != MatchMode::kLiteral; });
  if (needs_embeddings) {
    if (a.config.empty()) {
      err << "note: no --config given; fuzzy and continuous scores use the offline hashing "
             "embedder\n";
    }
    embedder = make_embedding_provider(cfg.embedding);
    if (!embedder) throw ConfigError("fuzzy and continuous matching need an embedding provider");
  }
  const auto report = evaluate_modes(pred, gold, modes, embedder.get(), options);
  if (a.json) {
    out << report.to_json();
  } else {
    out << report.to_text();
  }
  if (!a.out.empty()) {
    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec) throw IoError("cannot create " + a.out + ": " + ec.message());
    write_file(fs::path(a.out) / "eval_report.json", report.to_json());
    write_file(fs::path(a.out) / "eval_report.txt", report.to_text());
  }
  return kExitOk;
}

int cmd_stats(const StatsArgs& a, std::ostream& out, std::ostream&) {
  const fs::path dir(a.run);
  if (!fs::is_directory(dir)) throw IoError("run directory not found: " + dir.string());
  RunStats stats;
  if (fs::exists(dir / kStatsFile)) {
    try {
      stats = RunStats::from_json(read_file(dir / kStatsFile));
    } catch (const ParseError& e) {
      throw IoError(std::string("corrupt ") + kStatsFile + ": " + e.what());
    }
  } else if (fs::exists(dir / kDbFile)) {
    // Interrupted run: recount from what is on disk.
    auto session = DbSession::open((dir / kDbFile).string());
    stats.table_count = session.table_names().size();
    if (fs::exists(dir / kAuditFile)) {
      const auto state = AuditLog::scan(dir / kAuditFile);
      stats.sql = state.stats;
      stats.batches_processed = static_cast<std::size_t>(state.next_batch);
      stats.chat_calls = state.chat_calls;
      stats.batches_failed = state.failed_batches;
    }
  } else {
    throw IoError("no run found in " + dir.string());
  }
  out << "tables: " << stats.table_count << "\n";
  out << "sql error ratio: " << describe_ratio(stats.sql) << "\n";
  out << "batches processed: " << stats.batches_processed << " (" << stats.batches_failed
      << " failed)\n";
  out << "chat calls: " << stats.chat_calls << "\n";
  return kExitOk;
}

int cmd_cluster(const ClusterArgs& a, std::ostream& out, std::ostream& err) {
  AppConfig cfg = load_or_default(a.config);
  const auto graph = load_gold_ontology(a.ontology);
  auto embedder = make_embedding_provider(cfg.embedding);
  if (!embedder) throw ConfigError("clustering needs an embedding provider");
  std::vector<std::string> names;
  for (const auto& d : graph.domains()) names.push_back(d.text());
  const auto result = select_k_and_cluster(names, *embedder, a.k_min, a.k_max, a.seed);
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";

  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw IoError("cannot create " + a.out + ": " + ec.message());
  write_file(fs::path(a.out) / "reduced_ontology.json", serialize(reduce_ontology(graph, result)));
  write_file(fs::path(a.out) / "cluster_report.json", result.to_json());

  out << "k: " << result.k << "\n";
  out << "silhouette: " << format_number(result.silhouette) << "\n";
  out << "representatives:";
  for (const auto& r : result.representatives) out << " " << r;
  out << "\n";
  return kExitOk;
}

template <typename F>
int guarded(F&& f, std::ostream& err) {
  try {
    return f();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ProviderError& e) {
    err << "provider error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const TransientProviderError& e) {
    err << "provider error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Build task-oriented dialogue ontologies with an LLM over SQLite", "ontosql"};
  app.require_subcommand(1);

  BuildArgs b;
  auto* build = app.add_subcommand("build", "Run the pipeline over a corpus");
  build->add_option("--config", b.config, "Config file (INI sections run/chat/embedding/eval)")
      ->required();
  build->add_option("--corpus", b.corpus, "Dialogue or document file")->required();
  build->add_option("--out", b.out, "Run directory")->required();
  build->add_flag("--resume", b.resume, "Continue an interrupted run in --out");
  build->add_flag("--force", b.force, "Replace an existing run in --out");
  build->add_flag("--documents", b.documents, "Corpus holds title/abstract records");
  build->add_flag("--lenient", b.lenient, "Skip malformed corpus records with a warning");
  build->add_flag("--record", b.record, "Save every chat exchange as a replay script");
  build->add_option("--seed", b.seed);
  build->add_option("--batch-size", b.batch_size);
  build->add_option("--variant", b.variant, "direct_update or query_update");
  build->add_flag("--dst,!--no-dst", b.dst, "Dialogue state tracking step");
  build->add_flag("--sim,!--no-sim", b.sim, "Similarity matching of queried literals");
  build->add_flag("--examples,!--no-examples", b.examples, "Column value examples");
  build->add_flag("--success,!--no-success", b.success, "Success clause in the update prompt");
  build->add_option("--max-batches", b.max_batches, "Stop after this many batches");

  EvalArgs e;
  auto* eval = app.add_subcommand("eval", "Score a predicted ontology against a gold one");
  eval->add_option("--pred", e.pred)->required();
  eval->add_option("--gold", e.gold)->required();
  eval->add_option("--mode", e.mode, "literal, fuzzy, continuous or all")
      ->check(CLI::IsMember({"literal", "fuzzy", "continuous", "all"}));
  eval->add_option("--threshold", e.threshold, "Similarity threshold (default 0.436)");
  eval->add_flag("--count-gold-children", e.count_gold_children,
                 "Children of unmatched gold parents count as false negatives");
  eval->add_option("--config", e.config, "Config file for the embedding provider");
  eval->add_option("--out", e.out, "Directory for eval_report.json/.txt");
  eval->add_flag("--json", e.json, "Print the JSON report instead of the table");

  StatsArgs s;
  auto* stats = app.add_subcommand("stats", "Table count and SQL error ratio of a run");
  stats->add_option("--run,run", s.run, "Run directory")->required();

  ClusterArgs c;
  auto* cluster = app.add_subcommand("cluster", "Reduce domains by k-means over their names");
  cluster->add_option("--ontology", c.ontology)->required();
  cluster->add_option("--out", c.out)->required();
  cluster->add_option("--config", c.config, "Config file for the embedding provider");
  cluster->add_option("--k-min", c.k_min)->capture_default_str();
  cluster->add_option("--k-max", c.k_max)->capture_default_str();
  cluster->add_option("--seed", c.seed)->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "usage error: " << ex.what() << "\n";
    return kExitUsage;
  }

  if (*build) return guarded([&] { return cmd_build(b, out, err); }, err);
  if (*eval) return guarded([&] { return cmd_eval(e, out, err); }, err);
  if (*stats) return guarded([&] { return cmd_stats(s, out, err); }, err);
  if (*cluster) return guarded([&] { return cmd_cluster(c, out, err); }, err);
  return kExitUsage;
}

}  // namespace ontosql
