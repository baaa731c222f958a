#include <doctest.h>

#include "benchforge/core.hpp"

using namespace benchforge;

namespace {

bool has_rule(const std::vector<ConfigViolation>& v, const std::string& field, const std::string& rule) {
  for (const auto& x : v) {
    if (x.field == field && x.rule == rule) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("default configuration is valid and uses greedy translation") {
  const PipelineConfig cfg;
  CHECK(validate_config(cfg).empty());
  CHECK(cfg.temperature == 0.0);
  CHECK(cfg.sem_threshold == 0.8);
  CHECK(cfg.source_lang.code() == "eng_Latn");
  CHECK(cfg.target_lang.code() == "vie_Latn");
}

TEST_CASE("weights that do not sum to one are reported") {
  PipelineConfig cfg;
  cfg.judge_weights = {{"grammar", 0.4}, {"ner", 0.2}, {"special", 0.2}, {"fluency", 0.2}, {"meaning", 0.2}};
  const auto v = validate_config(cfg);
  REQUIRE_FALSE(v.empty());
  CHECK(has_rule(v, "judge_weights", "weight-sum"));
}

TEST_CASE("similarity threshold outside [0,1] is reported") {
  PipelineConfig cfg;
  cfg.sem_threshold = 1.3;
  const auto v = validate_config(cfg);
  REQUIRE(v.size() == 1);
  CHECK(has_rule(v, "sem_threshold", "range"));
}

TEST_CASE("every violation is listed, not just the first") {
  PipelineConfig cfg;
  cfg.sem_threshold = -0.1;
  cfg.batch_size = 0;
  cfg.max_in_flight = 0;
  cfg.splits.clear();
  const auto v = validate_config(cfg);
  CHECK(v.size() == 4);
  CHECK(has_rule(v, "sem_threshold", "range"));
  CHECK(has_rule(v, "batch_size", "positive"));
  CHECK(has_rule(v, "max_in_flight", "positive"));
  CHECK(has_rule(v, "splits", "non-empty"));
}

TEST_CASE("config JSON round trip") {
  PipelineConfig cfg;
  cfg.sem_threshold = 0.75;
  cfg.splits = {"dev", "test"};
  cfg.backends.kind = BackendKind::Mock;
  cfg.backends.mock.translation_table = {{"Hello", "Xin chào"}};
  cfg.backends.mock.forced_cosines = {{"Hello", 0.79}};
  cfg.backends.mock.judge_source_scores["Hello"] = {{"grammar", 2}};
  cfg.seed = 7;
  CHECK(config_from_json(config_to_json(cfg)) == cfg);
}

TEST_CASE("mock score overrides are range-checked") {
  PipelineConfig cfg;
  cfg.backends.mock.forced_cosines = {{"a", 1.5}};
  cfg.backends.mock.judge_source_scores["b"] = {{"ner", 6}};
  const auto v = validate_config(cfg);
  CHECK(has_rule(v, "backends.mock.forced_cosines", "range"));
  CHECK(has_rule(v, "backends.mock.judge_source_scores", "range"));
}

TEST_CASE("config fingerprint ignores throughput knobs but not thresholds") {
  PipelineConfig a, b;
  b.batch_size = 3;
  b.max_in_flight = 1;
  b.run_dir = "elsewhere";
  CHECK(config_fingerprint(a) == config_fingerprint(b));
  b.sem_threshold = 0.81;
  CHECK(config_fingerprint(a) != config_fingerprint(b));
}

TEST_CASE("malformed config JSON raises ConfigError") {
  CHECK_THROWS_AS(config_from_json("{\"sem_threshold\": \"high\"}"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{not json"), ConfigError);
}

TEST_CASE("unit ids are deterministic and distinguish every component") {
  const auto a = unit_id_for("scifact-vn", "q1", FieldPath{"query", std::nullopt});
  CHECK(a == unit_id_for("scifact-vn", "q1", FieldPath{"query", std::nullopt}));
  CHECK(a != unit_id_for("scifact-vn", "q2", FieldPath{"query", std::nullopt}));
  CHECK(unit_id_for("d", "r", FieldPath{"positive", 2}) != unit_id_for("d", "r", FieldPath{"positive", 1}));
  // Concatenation ambiguity: ("ab","c") vs ("a","bc").
  CHECK(unit_id_for("ab", "c", FieldPath{"f", std::nullopt}) != unit_id_for("a", "bc", FieldPath{"f", std::nullopt}));
  CHECK_THROWS_AS(unit_id_for("", "r", FieldPath{"f", std::nullopt}), std::invalid_argument);
}

TEST_CASE("language labels follow the three-letter code and script form") {
  CHECK(LangLabel::parse("vie_Latn").has_value());
  CHECK_FALSE(LangLabel::parse("vi").has_value());
  CHECK_FALSE(LangLabel::parse("VIE_Latn").has_value());
  CHECK_THROWS_AS(LangLabel("english"), std::invalid_argument);
  CHECK(LangLabel::undetermined().code() == "und_Zzzz");
}

TEST_CASE("verdicts follow the short-circuit order") {
  const auto kept = ValidationVerdict::from_checks("u", CheckStatus::Pass, 0.9, CheckStatus::Pass, 0.84,
                                                   CheckStatus::Pass);
  CHECK(kept.kept);
  CHECK_FALSE(kept.failure_stage.has_value());

  const auto sem = ValidationVerdict::from_checks("u", CheckStatus::Pass, 0.79, CheckStatus::Fail, std::nullopt,
                                                  CheckStatus::Skipped, "below_threshold");
  CHECK_FALSE(sem.kept);
  CHECK(sem.failure_stage == FailureStage::Semantic);
  CHECK(sem.is_consistent());

  // A check after a failure must be skipped.
  CHECK_THROWS_AS(ValidationVerdict::from_checks("u", CheckStatus::Fail, 0.9, CheckStatus::Pass, std::nullopt,
                                                 CheckStatus::Skipped),
                  std::invalid_argument);
  // A check after a pass must not be skipped.
  CHECK_THROWS_AS(ValidationVerdict::from_checks("u", CheckStatus::Pass, std::nullopt, CheckStatus::Skipped,
                                                 std::nullopt, CheckStatus::Skipped),
                  std::invalid_argument);

  const auto pre = ValidationVerdict::rejected_before_validation("u", FailureStage::SourceFilter, "fra_Latn");
  CHECK_FALSE(pre.kept);
  CHECK(pre.lang_check == CheckStatus::Skipped);
  CHECK(pre.is_consistent());
}

TEST_CASE("token usage adds up") {
  TokenUsage a{3, 4};
  a += TokenUsage{1, 2};
  CHECK(a.total() == 10);
}
