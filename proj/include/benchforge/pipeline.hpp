#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "benchforge/backends.hpp"
#include "benchforge/core.hpp"
#include "benchforge/dataset.hpp"
#include "benchforge/judge.hpp"

namespace benchforge {

// ---------------------------------------------------------------------------
// Language detection

struct DetectionResult {
  LangLabel label = LangLabel::undetermined();
  bool parsed = false;  // false when every attempt was unparseable or failed
  int attempts = 0;
  std::string error;  // last backend error, if any
  std::string raw;    // last reply
  TokenUsage usage;
};

std::string build_detection_prompt(std::string_view text);
/// Label on the last `LANG:` line of the reply, if it is a valid code.
std::optional<LangLabel> parse_detection_reply(std::string_view reply);
/// Asks the detector up to `attempts` times; falls back to und_Zzzz.
/// Throws std::invalid_argument on empty text.
DetectionResult detect_language(ChatBackend& detector, const std::string& model, std::string_view text,
                                int attempts = 3);

// ---------------------------------------------------------------------------
// Stages

struct FilterResult {
  std::vector<SequenceUnit> kept;
  std::vector<SequenceUnit> rejected;
  std::vector<DetectionResult> detections;  // aligned with the input; empty when bypassed
};

/// Stage 1: keeps units whose detected language is cfg.source_lang.
FilterResult stage1_filter(std::span<const SequenceUnit> units, const PipelineConfig& cfg, ChatBackend& detector);

std::string build_translation_prompt(std::string_view text, const LangLabel& source, const LangLabel& target);

struct TranslationOutcome {
  SequenceUnit unit;
  std::optional<TranslationRecord> record;  // absent when the unit failed
  int attempts = 0;
  std::string error;
  TokenUsage usage;
};

/// Stage 2: one outcome per unit, in input order. Backend failures mark the
/// unit failed; they never abort the batch.
std::vector<TranslationOutcome> stage2_translate(std::span<const SequenceUnit> units, const PipelineConfig& cfg,
                                                 ChatBackend& translator);

struct ValidationOutcome {
  ValidationVerdict verdict;
  std::optional<std::string> detected_lang;
  std::optional<JudgeScorecard> scorecard;
  std::string judge_raw;
  int judge_calls = 0;
  TokenUsage usage;
};

/// Criteria in judge order: the default five first, then any others by name.
std::vector<std::string> judge_criteria(const PipelineConfig& cfg);

/// Stage 3 for one record: language check, then the similarity gate, then
/// the judge; a failed check skips the rest.
ValidationOutcome validate_translation(const TranslationRecord& rec, const PipelineConfig& cfg,
                                       ChatBackend& detector, EmbeddingBackend& embedder, ChatBackend& judge);

std::vector<ValidationOutcome> stage3_validate(std::span<const TranslationRecord> records, const PipelineConfig& cfg,
                                               ChatBackend& detector, EmbeddingBackend& embedder,
                                               ChatBackend& judge);

/// sha256 of a prompt template.
std::string prompt_fingerprint(std::string_view tpl);
/// Version name -> fingerprint for the three templates.
std::map<std::string, std::string> prompt_fingerprints();

// ---------------------------------------------------------------------------
// Runs

struct RunSummary {
  std::string dataset_id;
  TaskType task = TaskType::Classification;
  std::size_t units_total = 0;  // units of the validated splits
  std::size_t units_kept = 0;
  std::map<FailureStage, std::size_t> failures;
  std::size_t units_pending = 0;
  std::size_t extra_units_translated = 0;  // units of unvalidated splits
  std::size_t records_before = 0;
  std::size_t records_after = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> collections;  // before, after
  double kept_ratio = 0.0;                                                 // records_after / records_before
  TokenUsage detection_tokens;
  TokenUsage translation_tokens;
  TokenUsage validation_tokens;
  std::size_t backend_failures = 0;
  bool completed = false;
  std::string config_fingerprint;
  std::uint64_t seed = 0;

  TokenUsage total_tokens() const;
  bool operator==(const RunSummary&) const = default;
};

nlohmann::ordered_json summary_to_json(const RunSummary& s);
RunSummary summary_from_json(const nlohmann::json& j);
RunSummary load_summary(const std::filesystem::path& run_dir);

struct PipelineOptions {
  bool run_translation = true;  // Stages 1 and 2
  bool run_validation = true;   // Stage 3
  /// Stop once this many events have been appended in this invocation.
  /// Used to simulate interruptions.
  std::optional<std::size_t> max_new_events;
  std::function<void(const std::string&)> log;
};

struct DryRunReport {
  std::string dataset_id;
  TaskType task = TaskType::Classification;
  std::size_t units = 0;
  std::size_t extra_units = 0;
  std::map<std::string, std::size_t> record_counts;
};

/// Validates the config, loads the dataset and counts units. No backend is touched.
DryRunReport dry_run(const std::filesystem::path& manifest, const PipelineConfig& cfg);

/// load -> decompose -> stage 1 -> stage 2 -> stage 3 -> recompose -> write.
/// Resumes from cfg.run_dir's journal when present. Throws ConfigError on
/// an invalid config and JournalError on a fingerprint mismatch.
RunSummary run_pipeline(const std::filesystem::path& manifest, const PipelineConfig& cfg, const BackendSet& backends,
                        const PipelineOptions& opts = {});

/// Manifest path recorded in a run directory.
std::filesystem::path run_manifest(const std::filesystem::path& run_dir);

}  // namespace benchforge
