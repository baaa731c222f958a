#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace benchforge {

enum class TaskType {
  Retrieval,
  Classification,
  PairClassification,
  Clustering,
  Reranking,
  STS,
};

inline constexpr TaskType kAllTasks[] = {
    TaskType::Retrieval,  TaskType::Classification, TaskType::PairClassification,
    TaskType::Clustering, TaskType::Reranking,      TaskType::STS,
};

std::string_view to_string(TaskType task);
/// Accepts the canonical names ("Retrieval", "PairClassification", ...) case-insensitively.
std::optional<TaskType> parse_task_type(std::string_view name);

/// Script-qualified language code, e.g. "vie_Latn": three lowercase letters,
/// an underscore, then a capitalised four-letter script tag.
class LangLabel {
 public:
  static std::optional<LangLabel> parse(std::string_view code);
  /// Throws std::invalid_argument on malformed codes.
  explicit LangLabel(std::string_view code);
  static LangLabel undetermined() { return LangLabel("und_Zzzz"); }

  const std::string& code() const { return code_; }
  bool operator==(const LangLabel&) const = default;

 private:
  struct Unchecked {};
  LangLabel(std::string code, Unchecked) : code_(std::move(code)) {}
  std::string code_;
};

bool is_valid_lang_code(std::string_view code);

/// Locates one text field inside a record: a field name plus an index when
/// the field holds a list.
struct FieldPath {
  std::string field;
  std::optional<std::size_t> index;

  std::string to_string() const;
  auto operator<=>(const FieldPath&) const = default;
};

struct TokenUsage {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;

  std::int64_t total() const { return input_tokens + output_tokens; }
  TokenUsage& operator+=(const TokenUsage& other) {
    input_tokens += other.input_tokens;
    output_tokens += other.output_tokens;
    return *this;
  }
  bool operator==(const TokenUsage&) const = default;
};

struct SequenceUnit {
  std::string unit_id;
  std::string dataset_id;
  std::string record_id;
  FieldPath field_path;
  std::string source_text;
  std::size_t char_len = 0;  // code points

  bool operator==(const SequenceUnit&) const = default;
};

struct TranslationRecord {
  SequenceUnit unit;
  std::string translated_text;
  std::string backend_model;
  std::string prompt_fingerprint;
  TokenUsage token_usage;
};

enum class CheckStatus { Pass, Fail, Skipped };

/// Where a unit left the pipeline. SourceFilter and Translation happen before
/// the three validation checks run, so those verdicts carry three skipped checks.
enum class FailureStage { SourceFilter, Translation, Language, Semantic, Judge };

std::string_view to_string(CheckStatus status);
std::optional<CheckStatus> parse_check_status(std::string_view name);
std::string_view to_string(FailureStage stage);
std::optional<FailureStage> parse_failure_stage(std::string_view name);

struct ValidationVerdict {
  std::string unit_id;
  CheckStatus lang_check = CheckStatus::Skipped;
  std::optional<double> sem_score;
  CheckStatus sem_check = CheckStatus::Skipped;
  std::optional<double> judge_score;
  CheckStatus judge_check = CheckStatus::Skipped;
  bool kept = false;
  std::optional<FailureStage> failure_stage;
  std::string reason;

  /// Builds a verdict from the three check outcomes, deriving `kept` and
  /// `failure_stage`. Throws std::invalid_argument when the statuses break
  /// the lang -> sem -> judge short-circuit order.
  static ValidationVerdict from_checks(std::string unit_id, CheckStatus lang,
                                       std::optional<double> sem_score, CheckStatus sem,
                                       std::optional<double> judge_score, CheckStatus judge,
                                       std::string reason = {});
  /// Verdict for a unit that never reached validation.
  static ValidationVerdict rejected_before_validation(std::string unit_id, FailureStage stage,
                                                      std::string reason);

  bool is_consistent() const;
  bool operator==(const ValidationVerdict&) const = default;
};

inline constexpr std::string_view kDefaultCriteria[] = {"grammar", "ner", "special", "fluency",
                                                        "meaning"};

enum class BackendKind { OpenAI, Mock };

/// Settings for the deterministic offline backends.
struct MockSettings {
  std::string translate_mode = "marker";  // identity | marker | table | corrupt
  std::map<std::string, std::string> translation_table;
  std::map<std::string, std::string> detector_table;  // text -> lang code
  std::map<std::string, int> judge_scores;             // criterion -> score; default all 5
  std::map<std::string, std::map<std::string, int>> judge_source_scores;  // source text -> criterion scores
  std::map<std::string, double> forced_cosines;        // source text -> cosine with its mock translation
  std::size_t embedding_dim = 32;
  std::uint64_t seed = 42;

  bool operator==(const MockSettings&) const = default;
};

struct BackendSettings {
  BackendKind kind = BackendKind::OpenAI;
  std::string chat_url;   // falls back to BENCHFORGE_CHAT_URL
  std::string embed_url;  // falls back to BENCHFORGE_EMBED_URL
  std::string detector_model = "Qwen/Qwen2.5-3B-Instruct";
  std::string translator_model = "CohereForAI/aya-23-35B";
  std::string judge_model = "aisingapore/Llama-SEA-LION-v3-70B-IT";
  std::string embedding_model = "Alibaba-NLP/gte-Qwen2-7B-instruct";
  int max_attempts = 5;
  double retry_base_seconds = 1.0;
  double retry_factor = 2.0;
  double timeout_seconds = 120.0;
  MockSettings mock;

  bool operator==(const BackendSettings&) const = default;
};

struct PipelineConfig {
  LangLabel source_lang{"eng_Latn"};
  LangLabel target_lang{"vie_Latn"};
  double sem_threshold = 0.8;
  double judge_threshold = 0.8;
  std::map<std::string, double> judge_weights = {
      {"grammar", 0.2}, {"ner", 0.2}, {"special", 0.2}, {"fluency", 0.2}, {"meaning", 0.2}};
  double temperature = 0.0;
  int max_new_tokens = 4096;
  int batch_size = 32;
  int max_in_flight = 8;
  std::string run_dir = "runs/default";

  std::vector<std::string> splits = {"test"};
  bool bypass_source_filter = false;
  bool translate_unvalidated_splits = false;
  int detect_attempts = 3;
  int judge_attempts = 3;
  std::uint64_t seed = 42;
  BackendSettings backends;

  bool operator==(const PipelineConfig&) const = default;
};

struct ConfigViolation {
  std::string field;
  std::string rule;
  std::string message;
};

/// Reports every broken invariant; never throws.
std::vector<ConfigViolation> validate_config(const PipelineConfig& cfg);

std::string config_to_json(const PipelineConfig& cfg);
/// Missing keys keep their defaults. Throws ConfigError on type errors or unknown enums.
PipelineConfig config_from_json(std::string_view text);
PipelineConfig load_config(const std::string& path);
void save_config(const PipelineConfig& cfg, const std::string& path);

/// Hash over the settings that change pipeline results. Run directory,
/// batching and concurrency are excluded.
std::string config_fingerprint(const PipelineConfig& cfg);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Content hash of the triple. Throws std::invalid_argument on empty components.
std::string unit_id_for(std::string_view dataset_id, std::string_view record_id,
                        const FieldPath& field_path);

}  // namespace benchforge
