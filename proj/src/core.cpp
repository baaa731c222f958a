#include "benchforge/core.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "benchforge/text.hpp"

namespace benchforge {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::pair<TaskType, std::string_view> kTaskNames[] = {
    {TaskType::Retrieval, "Retrieval"},
    {TaskType::Classification, "Classification"},
    {TaskType::PairClassification, "PairClassification"},
    {TaskType::Clustering, "Clustering"},
    {TaskType::Reranking, "Reranking"},
    {TaskType::STS, "STS"},
};

constexpr std::pair<FailureStage, std::string_view> kStageNames[] = {
    {FailureStage::SourceFilter, "source_filter"},
    {FailureStage::Translation, "translation"},
    {FailureStage::Language, "language"},
    {FailureStage::Semantic, "semantic"},
    {FailureStage::Judge, "judge"},
};

bool is_lower(char c) { return c >= 'a' && c <= 'z'; }

}  // namespace

std::string_view to_string(TaskType task) {
  for (const auto& [t, name] : kTaskNames) {
    if (t == task) return name;
  }
  return "?";
}

std::optional<TaskType> parse_task_type(std::string_view name) {
  const auto lowered = text::to_lower_ascii(name);
  for (const auto& [t, n] : kTaskNames) {
    if (text::to_lower_ascii(n) == lowered) return t;
  }
  return std::nullopt;
}

bool is_valid_lang_code(std::string_view code) {
  if (code.size() != 8 || code[3] != '_') return false;
  for (int i = 0; i < 3; ++i) {
    if (!is_lower(code[i])) return false;
  }
  if (!(code[4] >= 'A' && code[4] <= 'Z')) return false;
  for (int i = 5; i < 8; ++i) {
    if (!is_lower(code[i])) return false;
  }
  return true;
}

std::optional<LangLabel> LangLabel::parse(std::string_view code) {
  if (!is_valid_lang_code(code)) return std::nullopt;
  return LangLabel(std::string(code), Unchecked{});
}

LangLabel::LangLabel(std::string_view code) : code_(code) {
  if (!is_valid_lang_code(code)) {
    throw std::invalid_argument("malformed language label '" + std::string(code) +
                                "' (expected e.g. vie_Latn)");
  }
}

std::string FieldPath::to_string() const {
  if (!index) return field;
  return field + "[" + std::to_string(*index) + "]";
}

std::string_view to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass:
      return "pass";
    case CheckStatus::Fail:
      return "fail";
    case CheckStatus::Skipped:
      return "skipped";
  }
  return "?";
}

std::optional<CheckStatus> parse_check_status(std::string_view name) {
  if (name == "pass") return CheckStatus::Pass;
  if (name == "fail") return CheckStatus::Fail;
  if (name == "skipped") return CheckStatus::Skipped;
  return std::nullopt;
}

std::string_view to_string(FailureStage stage) {
  for (const auto& [s, name] : kStageNames) {
    if (s == stage) return name;
  }
  return "?";
}

std::optional<FailureStage> parse_failure_stage(std::string_view name) {
  for (const auto& [s, n] : kStageNames) {
    if (n == name) return s;
  }
  return std::nullopt;
}

ValidationVerdict ValidationVerdict::from_checks(std::string unit_id, CheckStatus lang,
                                                 std::optional<double> sem_score, CheckStatus sem,
                                                 std::optional<double> judge_score,
                                                 CheckStatus judge, std::string reason) {
  ValidationVerdict v;
  v.unit_id = std::move(unit_id);
  v.lang_check = lang;
  v.sem_score = sem_score;
  v.sem_check = sem;
  v.judge_score = judge_score;
  v.judge_check = judge;
  v.reason = std::move(reason);
  v.kept = lang == CheckStatus::Pass && sem == CheckStatus::Pass && judge == CheckStatus::Pass;
  if (lang == CheckStatus::Fail) {
    v.failure_stage = FailureStage::Language;
  } else if (sem == CheckStatus::Fail) {
    v.failure_stage = FailureStage::Semantic;
  } else if (judge == CheckStatus::Fail) {
    v.failure_stage = FailureStage::Judge;
  }
  if (!v.is_consistent()) {
    throw std::invalid_argument("check statuses violate lang -> sem -> judge ordering for unit " +
                                v.unit_id);
  }
  return v;
}

ValidationVerdict ValidationVerdict::rejected_before_validation(std::string unit_id,
                                                                FailureStage stage,
                                                                std::string reason) {
  if (stage != FailureStage::SourceFilter && stage != FailureStage::Translation) {
    throw std::invalid_argument("rejected_before_validation needs a pre-validation stage");
  }
  ValidationVerdict v;
  v.unit_id = std::move(unit_id);
  v.failure_stage = stage;
  v.reason = std::move(reason);
  return v;
}

bool ValidationVerdict::is_consistent() const {
  const CheckStatus checks[] = {lang_check, sem_check, judge_check};
  const bool pre_validation = failure_stage == FailureStage::SourceFilter ||
                              failure_stage == FailureStage::Translation;
  if (pre_validation) {
    for (auto c : checks) {
      if (c != CheckStatus::Skipped) return false;
    }
    return !kept;
  }
  bool earlier_failed = false;
  std::optional<FailureStage> first_fail;
  constexpr FailureStage stages[] = {FailureStage::Language, FailureStage::Semantic,
                                     FailureStage::Judge};
  for (int i = 0; i < 3; ++i) {
    if ((checks[i] == CheckStatus::Skipped) != earlier_failed) return false;
    if (checks[i] == CheckStatus::Fail) {
      earlier_failed = true;
      if (!first_fail) first_fail = stages[i];
    }
  }
  const bool all_pass = !earlier_failed;
  return kept == all_pass && failure_stage == first_fail;
}

// ---------------------------------------------------------------------------
// Config validation and serialization

std::vector<ConfigViolation> validate_config(const PipelineConfig& cfg) {
  std::vector<ConfigViolation> out;
  auto add = [&out](std::string field, std::string rule, std::string message) {
    out.push_back({std::move(field), std::move(rule), std::move(message)});
  };

  if (cfg.judge_weights.empty()) {
    add("judge_weights", "non-empty", "at least one judge criterion is required");
  } else {
    double sum = 0.0;
    for (const auto& [name, w] : cfg.judge_weights) {
      if (!std::isfinite(w) || w < 0.0) {
        add("judge_weights." + name, "non-negative", "weight must be finite and >= 0");
      }
      sum += w;
    }
    if (!(std::fabs(sum - 1.0) <= 1e-9)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "weights must sum to 1 within 1e-9, got " << sum;
      add("judge_weights", "weight-sum", msg.str());
    }
  }
  if (!(cfg.sem_threshold >= 0.0 && cfg.sem_threshold <= 1.0)) {
    add("sem_threshold", "range", "sem_threshold must lie in [0, 1]");
  }
  if (!std::isfinite(cfg.judge_threshold)) {
    add("judge_threshold", "finite", "judge_threshold must be a finite number");
  }
  if (!(cfg.temperature >= 0.0) || !std::isfinite(cfg.temperature)) {
    add("temperature", "non-negative", "temperature must be >= 0");
  }
  if (cfg.max_new_tokens < 1) add("max_new_tokens", "positive", "max_new_tokens must be >= 1");
  if (cfg.batch_size < 1) add("batch_size", "positive", "batch_size must be >= 1");
  if (cfg.max_in_flight < 1) add("max_in_flight", "positive", "max_in_flight must be >= 1");
  if (cfg.run_dir.empty()) add("run_dir", "non-empty", "run_dir must be set");
  if (cfg.splits.empty()) add("splits", "non-empty", "at least one split must be processed");
  if (cfg.detect_attempts < 1) add("detect_attempts", "positive", "detect_attempts must be >= 1");
  if (cfg.judge_attempts < 1) add("judge_attempts", "positive", "judge_attempts must be >= 1");

  const auto& b = cfg.backends;
  if (b.max_attempts < 1) add("backends.max_attempts", "positive", "max_attempts must be >= 1");
  if (!(b.retry_base_seconds >= 0.0)) {
    add("backends.retry_base_seconds", "non-negative", "retry base must be >= 0");
  }
  if (!(b.retry_factor >= 1.0)) add("backends.retry_factor", "min-1", "retry factor must be >= 1");
  if (!(b.timeout_seconds > 0.0)) add("backends.timeout_seconds", "positive", "timeout must be > 0");
  const auto& m = b.mock;
  if (m.translate_mode != "identity" && m.translate_mode != "marker" &&
      m.translate_mode != "table" && m.translate_mode != "corrupt") {
    add("backends.mock.translate_mode", "enum", "expected identity|marker|table|corrupt");
  }
  if (m.embedding_dim < 1) add("backends.mock.embedding_dim", "positive", "embedding_dim must be >= 1");
  for (const auto& [text, code] : m.detector_table) {
    if (!is_valid_lang_code(code)) {
      add("backends.mock.detector_table", "lang-code", "malformed language label '" + code + "'");
    }
  }
  for (const auto& [name, score] : m.judge_scores) {
    if (score < 1 || score > 5) {
      add("backends.mock.judge_scores." + name, "range", "mock judge scores must lie in [1, 5]");
    }
  }
  for (const auto& [text, scores] : m.judge_source_scores) {
    for (const auto& [name, score] : scores) {
      if (score < 1 || score > 5) {
        add("backends.mock.judge_source_scores", "range", "mock judge scores must lie in [1, 5]");
      }
    }
  }
  for (const auto& [text, cos] : m.forced_cosines) {
    if (!(cos >= -1.0 && cos <= 1.0)) {
      add("backends.mock.forced_cosines", "range", "forced cosines must lie in [-1, 1]");
    }
  }
  return out;
}

namespace {

ordered_json to_ordered(const PipelineConfig& cfg) {
  ordered_json weights = ordered_json::object();
  for (const auto& [k, v] : cfg.judge_weights) weights[k] = v;

  ordered_json mock;
  mock["translate_mode"] = cfg.backends.mock.translate_mode;
  mock["translation_table"] = ordered_json::object();
  for (const auto& [k, v] : cfg.backends.mock.translation_table) mock["translation_table"][k] = v;
  mock["detector_table"] = ordered_json::object();
  for (const auto& [k, v] : cfg.backends.mock.detector_table) mock["detector_table"][k] = v;
  mock["judge_scores"] = ordered_json::object();
  for (const auto& [k, v] : cfg.backends.mock.judge_scores) mock["judge_scores"][k] = v;
  mock["judge_source_scores"] = ordered_json::object();
  for (const auto& [k, v] : cfg.backends.mock.judge_source_scores) {
    mock["judge_source_scores"][k] = ordered_json::object();
    for (const auto& [name, s] : v) mock["judge_source_scores"][k][name] = s;
  }
  mock["forced_cosines"] = ordered_json::object();
  for (const auto& [k, v] : cfg.backends.mock.forced_cosines) mock["forced_cosines"][k] = v;
  mock["embedding_dim"] = cfg.backends.mock.embedding_dim;
  mock["seed"] = cfg.backends.mock.seed;

  const auto& b = cfg.backends;
  ordered_json backends;
  backends["kind"] = b.kind == BackendKind::Mock ? "mock" : "openai";
  backends["chat_url"] = b.chat_url;
  backends["embed_url"] = b.embed_url;
  backends["detector_model"] = b.detector_model;
  backends["translator_model"] = b.translator_model;
  backends["judge_model"] = b.judge_model;
  backends["embedding_model"] = b.embedding_model;
  backends["max_attempts"] = b.max_attempts;
  backends["retry_base_seconds"] = b.retry_base_seconds;
  backends["retry_factor"] = b.retry_factor;
  backends["timeout_seconds"] = b.timeout_seconds;
  backends["mock"] = std::move(mock);

  ordered_json j;
  j["source_lang"] = cfg.source_lang.code();
  j["target_lang"] = cfg.target_lang.code();
  j["sem_threshold"] = cfg.sem_threshold;
  j["judge_threshold"] = cfg.judge_threshold;
  j["judge_weights"] = std::move(weights);
  j["temperature"] = cfg.temperature;
  j["max_new_tokens"] = cfg.max_new_tokens;
  j["batch_size"] = cfg.batch_size;
  j["max_in_flight"] = cfg.max_in_flight;
  j["run_dir"] = cfg.run_dir;
  j["splits"] = cfg.splits;
  j["bypass_source_filter"] = cfg.bypass_source_filter;
  j["translate_unvalidated_splits"] = cfg.translate_unvalidated_splits;
  j["detect_attempts"] = cfg.detect_attempts;
  j["judge_attempts"] = cfg.judge_attempts;
  j["seed"] = cfg.seed;
  j["backends"] = std::move(backends);
  return j;
}

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& out, const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config field '" + path + key + "': " + e.what());
  }
}

LangLabel read_lang(const nlohmann::json& j, const char* key, const LangLabel& fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_string()) throw ConfigError(std::string("config field '") + key + "' must be a string");
  auto label = LangLabel::parse(it->get<std::string>());
  if (!label) {
    throw ConfigError(std::string("config field '") + key + "': malformed language label '" +
                      it->get<std::string>() + "'");
  }
  return *label;
}

}  // namespace

std::string config_to_json(const PipelineConfig& cfg) { return to_ordered(cfg).dump(2) + "\n"; }

PipelineConfig config_from_json(std::string_view input) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(input);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");

  PipelineConfig cfg;
  cfg.source_lang = read_lang(j, "source_lang", cfg.source_lang);
  cfg.target_lang = read_lang(j, "target_lang", cfg.target_lang);
  read_field(j, "sem_threshold", cfg.sem_threshold, "");
  read_field(j, "judge_threshold", cfg.judge_threshold, "");
  read_field(j, "judge_weights", cfg.judge_weights, "");
  read_field(j, "temperature", cfg.temperature, "");
  read_field(j, "max_new_tokens", cfg.max_new_tokens, "");
  read_field(j, "batch_size", cfg.batch_size, "");
  read_field(j, "max_in_flight", cfg.max_in_flight, "");
  read_field(j, "run_dir", cfg.run_dir, "");
  read_field(j, "splits", cfg.splits, "");
  read_field(j, "bypass_source_filter", cfg.bypass_source_filter, "");
  read_field(j, "translate_unvalidated_splits", cfg.translate_unvalidated_splits, "");
  read_field(j, "detect_attempts", cfg.detect_attempts, "");
  read_field(j, "judge_attempts", cfg.judge_attempts, "");
  read_field(j, "seed", cfg.seed, "");

  if (const auto bit = j.find("backends"); bit != j.end()) {
    const auto& bj = *bit;
    if (!bj.is_object()) throw ConfigError("config field 'backends' must be an object");
    auto& b = cfg.backends;
    if (const auto kit = bj.find("kind"); kit != bj.end()) {
      const auto kind = kit->is_string() ? kit->get<std::string>() : std::string();
      if (kind == "mock") {
        b.kind = BackendKind::Mock;
      } else if (kind == "openai") {
        b.kind = BackendKind::OpenAI;
      } else {
        throw ConfigError("config field 'backends.kind' must be \"openai\" or \"mock\"");
      }
    }
    read_field(bj, "chat_url", b.chat_url, "backends.");
    read_field(bj, "embed_url", b.embed_url, "backends.");
    read_field(bj, "detector_model", b.detector_model, "backends.");
    read_field(bj, "translator_model", b.translator_model, "backends.");
    read_field(bj, "judge_model", b.judge_model, "backends.");
    read_field(bj, "embedding_model", b.embedding_model, "backends.");
    read_field(bj, "max_attempts", b.max_attempts, "backends.");
    read_field(bj, "retry_base_seconds", b.retry_base_seconds, "backends.");
    read_field(bj, "retry_factor", b.retry_factor, "backends.");
    read_field(bj, "timeout_seconds", b.timeout_seconds, "backends.");
    if (const auto mit = bj.find("mock"); mit != bj.end()) {
      auto& m = b.mock;
      read_field(*mit, "translate_mode", m.translate_mode, "backends.mock.");
      read_field(*mit, "translation_table", m.translation_table, "backends.mock.");
      read_field(*mit, "detector_table", m.detector_table, "backends.mock.");
      read_field(*mit, "judge_scores", m.judge_scores, "backends.mock.");
      read_field(*mit, "judge_source_scores", m.judge_source_scores, "backends.mock.");
      read_field(*mit, "forced_cosines", m.forced_cosines, "backends.mock.");
      read_field(*mit, "embedding_dim", m.embedding_dim, "backends.mock.");
      read_field(*mit, "seed", m.seed, "backends.mock.");
    }
  }
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return config_from_json(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void save_config(const PipelineConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write config file " + path);
  out << config_to_json(cfg);
  if (!out) throw ConfigError("failed writing config file " + path);
}

std::string config_fingerprint(const PipelineConfig& cfg) {
  auto j = to_ordered(cfg);
  j.erase("run_dir");
  j.erase("batch_size");
  j.erase("max_in_flight");
  j["backends"].erase("timeout_seconds");
  return text::sha256_hex(j.dump());
}

std::string unit_id_for(std::string_view dataset_id, std::string_view record_id,
                        const FieldPath& field_path) {
  if (dataset_id.empty() || record_id.empty() || field_path.field.empty()) {
    throw std::invalid_argument("unit_id_for: dataset_id, record_id and field must be non-empty");
  }
  // Length-prefixed so that no two distinct triples share a pre-image.
  std::string key;
  for (std::string_view part : {dataset_id, record_id, std::string_view(field_path.field)}) {
    key += std::to_string(part.size());
    key += ':';
    key += part;
  }
  key += field_path.index ? "#" + std::to_string(*field_path.index) : std::string("#-");
  return text::sha256_hex(key).substr(0, 32);
}

}  // namespace benchforge
