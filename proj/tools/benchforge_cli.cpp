// Command-line entry point: pipeline runs, evaluation and reports.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "benchforge/backends.hpp"
#include "benchforge/core.hpp"
#include "benchforge/dataset.hpp"
#include "benchforge/eval.hpp"
#include "benchforge/journal.hpp"
#include "benchforge/pipeline.hpp"
#include "benchforge/reporting.hpp"
#include "benchforge/text.hpp"

namespace fs = std::filesystem;
using namespace benchforge;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kError = 1;           // runtime failure: IO, schema, backend configuration
constexpr int kUsage = 2;           // bad flags or invalid configuration
constexpr int kBackendFailures = 3;  // run finished but some units hit backend hard-failures
constexpr int kIncomplete = 4;      // run stopped with pending units

constexpr const char* kFooter = R"(Exit codes: 0 success; 1 runtime error; 2 usage or configuration error;
3 run finished with backend hard-failures; 4 run incomplete (units pending).

Configuration (--config, JSON; flags override file values):
  source_lang, target_lang          e.g. "eng_Latn", "vie_Latn"
  sem_threshold, judge_threshold    inclusive gates, defaults 0.8
  judge_weights                     criterion -> weight, must sum to 1
  temperature, max_new_tokens       translation sampling, defaults 0.0 and 4096
  batch_size, max_in_flight, run_dir, splits, bypass_source_filter,
  translate_unvalidated_splits, detect_attempts, judge_attempts, seed
  backends.kind                     "openai" or "mock"
  backends.chat_url, backends.embed_url, backends.*_model, backends.mock.*
Environment: BENCHFORGE_API_KEY, BENCHFORGE_CHAT_URL, BENCHFORGE_EMBED_URL.

Dataset layout (manifest.json next to the split files):
  manifest.json   {"dataset_id","task","language","license","splits"}
  Retrieval       corpus.jsonl {"_id","title","text"}, queries.jsonl {"_id","text"},
                  qrels/<split>.tsv "query-id<TAB>corpus-id<TAB>score" with header
  Classification  <split>.jsonl {"id","text","label"}
  Clustering      <split>.jsonl {"id","sentences":[...],"labels":[...]}
  PairClassification <split>.jsonl {"id","sentence1","sentence2","label"}
  Reranking       <split>.jsonl {"id","query","positive":[...],"negative":[...]}
  STS             <split>.jsonl {"id","sentence1","sentence2","score"}
Precomputed embeddings: one {"id": ..., "vector": [...]} (or {"text": ...}) per line.
Calibration pairs: <pairs_dir>/<category>.jsonl with {"source": ..., "target": ...} per line.)";

struct ConfigFlags {
  std::string config_path;
  std::optional<std::string> run_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> sem_threshold;
  std::optional<double> judge_threshold;
  std::optional<int> batch_size;
  std::optional<int> max_in_flight;
  std::vector<std::string> splits;
  bool mock = false;
  bool bypass_filter = false;

  void add_to(CLI::App* cmd, bool pipeline_flags) {
    cmd->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "Seed for every random choice (default 42)");
    cmd->add_flag("--mock", mock, "Use the deterministic offline backends");
    cmd->add_option("--max-in-flight", max_in_flight, "Concurrent requests per backend");
    if (!pipeline_flags) return;
    cmd->add_option("--run-dir", run_dir, "Run directory (journal, summary, output)");
    cmd->add_option("--sem-threshold", sem_threshold, "Semantic-similarity gate");
    cmd->add_option("--judge-threshold", judge_threshold, "Judge score gate");
    cmd->add_option("--batch-size", batch_size, "Units per journal batch");
    cmd->add_option("--split", splits, "Split to validate (repeatable)");
    cmd->add_flag("--bypass-source-filter", bypass_filter, "Skip Stage 1 for monolingual corpora");
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    apply(cfg);
    return cfg;
  }

  void apply(PipelineConfig& cfg) const {
    if (run_dir) cfg.run_dir = *run_dir;
    if (seed) {
      cfg.seed = *seed;
      cfg.backends.mock.seed = *seed;
    }
    if (sem_threshold) cfg.sem_threshold = *sem_threshold;
    if (judge_threshold) cfg.judge_threshold = *judge_threshold;
    if (batch_size) cfg.batch_size = *batch_size;
    if (max_in_flight) cfg.max_in_flight = *max_in_flight;
    if (!splits.empty()) cfg.splits = splits;
    if (mock) cfg.backends.kind = BackendKind::Mock;
    if (bypass_filter) cfg.bypass_source_filter = true;
  }
};

void log_line(const std::string& msg) { std::cerr << "benchforge: " << msg << "\n"; }

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_summary(const RunSummary& s) {
  std::cout << summary_to_json(s).dump(2) << "\n";
}

int run_exit_code(const RunSummary& s) {
  if (!s.completed) return kIncomplete;
  return s.backend_failures > 0 ? kBackendFailures : kOk;
}

// ---------------------------------------------------------------------------

int cmd_detect(const std::string& file, const ConfigFlags& flags) {
  const auto cfg = flags.resolve();
  const auto backends = make_backends(cfg);
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file);
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto t = text::trim(line);
    if (t.empty()) continue;
    const auto det = detect_language(*backends.detector, cfg.backends.detector_model, text::nfc(t), cfg.detect_attempts);
    std::cout << n << "\t" << det.label.code() << "\n";
  }
  return kOk;
}

int cmd_pipeline(const std::string& manifest, const ConfigFlags& flags, bool dry, bool translate_only,
                 std::optional<std::size_t> stop_after) {
  const auto cfg = flags.resolve();
  if (dry) {
    const auto r = dry_run(manifest, cfg);
    ordered_json j;
    j["dataset_id"] = r.dataset_id;
    j["task"] = to_string(r.task);
    j["units"] = r.units;
    j["extra_units"] = r.extra_units;
    j["records"] = r.record_counts;
    j["config_fingerprint"] = config_fingerprint(cfg);
    j["seed"] = cfg.seed;
    std::cout << j.dump(2) << "\n";
    return kOk;
  }
  const auto backends = make_backends(cfg);
  PipelineOptions opts;
  opts.run_validation = !translate_only;
  opts.max_new_events = stop_after;
  opts.log = log_line;
  const auto s = run_pipeline(manifest, cfg, backends, opts);
  print_summary(s);
  if (translate_only) {
    // Stage 3 is still pending by design; only backend failures count here.
    return s.backend_failures > 0 ? kBackendFailures : kOk;
  }
  return run_exit_code(s);
}

int cmd_validate(const std::string& run_dir, const ConfigFlags& flags) {
  auto cfg = load_config((fs::path(run_dir) / "config.json").string());
  flags.apply(cfg);
  cfg.run_dir = run_dir;
  const auto manifest = run_manifest(run_dir);
  const auto backends = make_backends(cfg);
  PipelineOptions opts;
  opts.run_translation = false;
  opts.log = log_line;
  const auto s = run_pipeline(manifest, cfg, backends, opts);
  print_summary(s);
  return run_exit_code(s);
}

int cmd_calibrate(const std::string& pairs_dir, const ConfigFlags& flags, const std::string& csv_path,
                  const std::string& json_path, const std::string& positive) {
  const auto cfg = flags.resolve();
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sets;
  for (const auto& entry : fs::directory_iterator(pairs_dir)) {
    if (entry.path().extension() != ".jsonl") continue;
    auto& pairs = sets[entry.path().stem().string()];
    std::ifstream in(entry.path());
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
      if (text::trim(line).empty()) continue;
      try {
        const auto j = json::parse(line);
        pairs.emplace_back(text::nfc(j.at("source").get<std::string>()), text::nfc(j.at("target").get<std::string>()));
      } catch (const std::exception& e) {
        throw std::runtime_error(entry.path().string() + ":" + std::to_string(n) + ": " + e.what());
      }
    }
  }
  if (sets.empty()) throw std::runtime_error("no <category>.jsonl files in " + pairs_dir);
  const auto embedder = make_embedding_backend(cfg.backends, cfg.max_in_flight, cfg.seed);
  CalibrationOptions copts;
  copts.positive = positive;
  const auto r = calibrate_threshold(sets, *embedder, copts);
  if (!csv_path.empty()) write_output(csv_path, distributions_csv(r.distributions));
  if (!json_path.empty()) {
    ordered_json j;
    j["suggested_threshold"] = r.suggested_threshold;
    j["positive_low"] = r.positive_low;
    j["negative_high"] = r.negative_high;
    j["overlap"] = r.overlap;
    j["warnings"] = r.warnings;
    j["seed"] = cfg.seed;
    write_output(json_path, j.dump(2) + "\n");
  }
  std::cout << render_calibration(r);
  return kOk;
}

int cmd_evaluate(const std::vector<std::string>& manifests, const std::string& card_path,
                 const std::string& embeddings, const ConfigFlags& flags, const std::string& output,
                 const std::string& split) {
  const auto cfg = flags.resolve();
  const auto card = load_model_card(card_path);
  std::unique_ptr<Encoder> encoder;
  if (!embeddings.empty()) {
    encoder = std::make_unique<PrecomputedEncoder>(PrecomputedEncoder::load(embeddings));
  } else {
    encoder = std::make_unique<BackendEncoder>(make_embedding_backend(cfg.backends, cfg.max_in_flight, cfg.seed), card);
  }
  EvalOptions opts;
  opts.seed = cfg.seed;
  opts.split = split;
  std::vector<TaskResult> results;
  for (const auto& m : manifests) {
    const auto ds = load_dataset(m);
    auto r = evaluate(*encoder, ds, opts);
    for (const auto& w : r.warnings) log_line(r.dataset_id + ": " + w);
    std::printf("%-32s %-20s %-12s %8.2f\n", r.dataset_id.c_str(), std::string(to_string(r.task)).c_str(),
                std::string(main_metric_name(r.task)).c_str(), r.main_metric * 100.0);
    results.push_back(std::move(r));
  }
  auto j = results_to_json(card, results);
  j["seed"] = cfg.seed;
  if (!output.empty()) write_output(output, j.dump(2) + "\n");
  return kOk;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& json_path) {
  std::vector<DatasetCounts> counts;
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& dir : run_dirs) {
    const auto s = load_summary(dir);
    if (!s.completed) {
      log_line(dir + " is incomplete; left out of the kept-ratio table");
    } else if (s.records_before == 0) {
      log_line(dir + " has no records in its validated splits; left out");
    } else {
      counts.push_back({s.dataset_id, s.task, s.records_before, s.records_after});
    }
    const auto st = replay_journal(fs::path(dir) / "journal.jsonl");
    for (auto& p : kept_translation_pairs(st)) pairs.push_back(std::move(p));
  }
  const auto kept = kept_ratio_report(counts);
  std::cout << render_kept_ratio(kept) << "\n";
  ordered_json j;
  j["kept_ratio"] = kept_ratio_to_json(kept);
  if (pairs.size() >= 2) {
    const auto wl = word_length_stats(pairs);
    std::cout << render_word_length(wl);
    j["word_length"] = {{"pairs", wl.pairs},
                        {"pearson_r", wl.pearson_r ? json(*wl.pearson_r) : json(nullptr)},
                        {"mean_source", wl.mean_source},
                        {"mean_target", wl.mean_target},
                        {"bin_width", wl.source.bin_width},
                        {"max_len", wl.source.max_len},
                        {"source_histogram", wl.source.counts},
                        {"target_histogram", wl.target.counts}};
  } else {
    std::cout << "Word-length statistics need at least two kept translations.\n";
  }
  if (!json_path.empty()) write_output(json_path, j.dump(2) + "\n");
  return kOk;
}

int cmd_benchtable(const std::vector<std::string>& files, const std::string& json_path) {
  std::vector<BenchmarkRow> rows;
  for (const auto& f : files) rows.push_back(load_benchmark_row(f));
  std::cout << render_benchmark_table(rows);
  if (!json_path.empty()) write_output(json_path, benchmark_to_json(rows).dump(2) + "\n");
  return kOk;
}

int cmd_cost(std::int64_t tokens, double rate, int gpus, double watts, double duplex, bool as_json) {
  const auto c = estimate_cost(tokens, rate, gpus, watts, duplex);
  if (as_json) {
    std::cout << cost_to_json(c).dump(2) << "\n";
  } else {
    std::cout << render_cost(c);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"benchforge: translate embedding benchmarks through gated LLM stages and evaluate models on them"};
  app.footer(kFooter);
  app.require_subcommand(1);
  app.set_version_flag("--version", "benchforge 0.1.0");

  ConfigFlags flags;
  std::string file, manifest, run_dir, pairs_dir, card, embeddings, output, csv, json_out, split = "test";
  std::string positive = "vi_label";
  std::vector<std::string> manifests, run_dirs, results_files;
  bool dry = false, as_json = false;
  std::optional<std::size_t> stop_after;
  std::int64_t tokens = 0;
  double rate = 0, watts = 0, duplex = 2.0;
  int gpus = 0;

  auto* detect = app.add_subcommand("detect", "Detect the language of every line of a text file");
  detect->add_option("file", file, "UTF-8 text file")->required()->check(CLI::ExistingFile);
  flags.add_to(detect, false);

  auto* translate = app.add_subcommand("translate", "Run Stages 1 and 2 (filter, translate) on a dataset");
  translate->add_option("manifest", manifest, "Dataset manifest.json")->required()->check(CLI::ExistingFile);
  translate->add_flag("--dry-run", dry, "Validate config and count units without contacting any backend");
  flags.add_to(translate, true);

  auto* validate = app.add_subcommand("validate", "Run Stage 3 over an existing run directory");
  validate->add_option("run_dir", run_dir, "Run directory created by translate or run")
      ->required()
      ->check(CLI::ExistingDirectory);
  flags.add_to(validate, false);

  auto* run = app.add_subcommand("run", "Run the full pipeline; re-running resumes from the journal");
  run->add_option("manifest", manifest, "Dataset manifest.json")->required()->check(CLI::ExistingFile);
  run->add_flag("--dry-run", dry, "Validate config and count units without contacting any backend");
  run->add_option("--stop-after-events", stop_after, "Stop after appending this many journal events")
      ->group("");  // testing aid
  flags.add_to(run, true);

  auto* calibrate = app.add_subcommand("calibrate", "Bin similarity scores per category and suggest a threshold");
  calibrate->add_option("pairs_dir", pairs_dir, "Directory of <category>.jsonl pair files")
      ->required()
      ->check(CLI::ExistingDirectory);
  calibrate->add_option("--csv", csv, "Write bin_start,bin_end,category,percentage rows here ('-' for stdout)");
  calibrate->add_option("--json", json_out, "Write the suggestion as JSON");
  calibrate->add_option("--positive", positive, "Positive category name")->capture_default_str();
  flags.add_to(calibrate, false);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate an embedding model on datasets");
  evaluate_cmd->add_option("manifests", manifests, "Dataset manifest files")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--model-card", card, "Model card JSON")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--embeddings", embeddings, "Precomputed embeddings (JSON lines)")->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--output,-o", output, "Write results JSON here");
  evaluate_cmd->add_option("--split", split, "Evaluated split")->capture_default_str();
  flags.add_to(evaluate_cmd, false);

  auto* report = app.add_subcommand("report", "Kept-ratio and word-length reports over finished runs");
  report->add_option("run_dirs", run_dirs, "Run directories")->required()->check(CLI::ExistingDirectory);
  report->add_option("--json", json_out, "Write the report as JSON");

  auto* benchtable = app.add_subcommand("benchtable", "Aggregate results files into the per-task table");
  benchtable->add_option("results", results_files, "Results files from evaluate, or task-average files")
      ->required()
      ->check(CLI::ExistingFile);
  benchtable->add_option("--json", json_out, "Write the table as JSON");

  auto* cost = app.add_subcommand("estimate-cost", "Time and energy estimate from token counts");
  cost->add_option("--tokens", tokens, "Total tokens")->required()->check(CLI::NonNegativeNumber);
  cost->add_option("--rate", rate, "Throughput in tokens per second")->required()->check(CLI::PositiveNumber);
  cost->add_option("--gpus", gpus, "Number of GPUs")->required()->check(CLI::NonNegativeNumber);
  cost->add_option("--watts", watts, "Power draw per GPU in watts")->required()->check(CLI::NonNegativeNumber);
  cost->add_option("--duplex", duplex, "Multiplier covering input and output tokens")->capture_default_str();
  cost->add_flag("--json", as_json, "Print JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*detect) return cmd_detect(file, flags);
    if (*translate) return cmd_pipeline(manifest, flags, dry, true, std::nullopt);
    if (*validate) return cmd_validate(run_dir, flags);
    if (*run) return cmd_pipeline(manifest, flags, dry, false, stop_after);
    if (*calibrate) return cmd_calibrate(pairs_dir, flags, csv, json_out, positive);
    if (*evaluate_cmd) return cmd_evaluate(manifests, card, embeddings, flags, output, split);
    if (*report) return cmd_report(run_dirs, json_out);
    if (*benchtable) return cmd_benchtable(results_files, json_out);
    if (*cost) return cmd_cost(tokens, rate, gpus, watts, duplex, as_json);
  } catch (const ConfigError& e) {
    std::cerr << "benchforge: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "benchforge: " << e.what() << "\n";
    return kError;
  }
  return kUsage;
}
