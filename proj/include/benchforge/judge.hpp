#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace benchforge {

struct JudgeScorecard {
  std::map<std::string, int> scores;  // criterion -> 1..5
  std::string explanation;
  std::string raw_response;
};

struct JudgeDecision {
  double combined = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

class JudgeParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// grammar, ner, special, fluency, meaning.
std::vector<std::string> default_criteria();

struct JudgePromptOptions {
  std::vector<std::string> criteria = default_criteria();
  std::string source_language = "English";
  std::string target_language = "Vietnamese";
};

/// Chain-of-thought judge prompt: per-criterion rubrics, reasoning before
/// scoring, and a closing one-line JSON scorecard.
std::string build_judge_prompt(std::string_view source_text, std::string_view translated_text,
                               const JudgePromptOptions& opts = {});

/// Takes the last JSON object in `llm_output` whose keys are exactly the
/// criteria. Throws JudgeParseError when there is none or a score is not an
/// integer in [1, 5].
JudgeScorecard parse_scorecard(std::string_view llm_output,
                               std::span<const std::string> criteria = {});

/// One-line JSON rendering of the scores, in criteria order.
std::string render_scorecard(const std::map<std::string, int>& scores,
                             std::span<const std::string> criteria = {});

/// Weighted score: sum_i(weight_i * score_i) / |S|. Throws
/// std::invalid_argument when weight keys differ from the scored criteria.
double combine_score(const JudgeScorecard& card, const std::map<std::string, double>& weights);

/// Inclusive: passes when combined >= threshold (within 1e-12).
JudgeDecision decide(double combined, double threshold);

/// Slack used by every inclusive threshold comparison, so that scores that
/// equal the threshold up to floating-point rounding pass.
inline constexpr double kThresholdSlack = 1e-12;
inline bool meets_threshold(double value, double threshold) {
  return value >= threshold - kThresholdSlack;
}

}  // namespace benchforge
