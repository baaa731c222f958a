#include "benchforge/judge.hpp"

#include <cmath>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>

#include "benchforge/prompts.hpp"
#include "benchforge/text.hpp"

namespace benchforge {

namespace {

struct Rubric {
  std::string_view name;
  std::string_view description;
  std::string_view levels;
};

constexpr Rubric kRubrics[] = {
    {"grammar", "Correct morphology, syntax, spelling and punctuation in the target language.",
     "5 no errors; 4 one or two minor slips; 3 noticeable errors that do not block understanding; "
     "2 frequent errors that hinder reading; 1 largely ungrammatical."},
    {"ner", "Named entities (people, organisations, places, titles, products) are kept or rendered in their accepted form.",
     "5 every entity correct; 4 one minor deviation; 3 some entities altered; 2 many entities lost or "
     "mistranslated; 1 entities mostly wrong or missing."},
    {"special", "Numbers, dates, links, code snippets, formulas and symbols are carried over exactly.",
     "5 all intact; 4 one trivial formatting change; 3 some items changed; 2 several items wrong or "
     "dropped; 1 most items corrupted."},
    {"fluency", "The text reads naturally to a native speaker.",
     "5 native-like; 4 mostly natural with small awkwardness; 3 understandable but stilted; 2 hard "
     "to read; 1 incomprehensible."},
    {"meaning", "The translation conveys the full content of the source with no additions or omissions.",
     "5 fully preserved; 4 a nuance lost; 3 part of the content lost or distorted; 2 most content "
     "lost; 1 unrelated to the source."},
};

std::vector<std::string> resolve_criteria(std::span<const std::string> criteria) {
  if (!criteria.empty()) return {criteria.begin(), criteria.end()};
  return default_criteria();
}

// End index (exclusive) of the JSON object starting at `start`, honouring strings.
std::optional<std::size_t> match_brace(std::string_view s, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<std::string> default_criteria() {
  std::vector<std::string> out;
  for (const auto& r : kRubrics) out.emplace_back(r.name);
  return out;
}

std::string build_judge_prompt(std::string_view source_text, std::string_view translated_text,
                               const JudgePromptOptions& opts) {
  std::string criteria_block;
  nlohmann::ordered_json shape = nlohmann::ordered_json::object();
  for (const auto& name : opts.criteria) {
    const Rubric* rubric = nullptr;
    for (const auto& r : kRubrics) {
      if (r.name == name) rubric = &r;
    }
    if (!criteria_block.empty()) criteria_block += "\n";
    if (rubric) {
      criteria_block += std::string(rubric->name) + " - " + std::string(rubric->description) +
                        "\n  Levels: " + std::string(rubric->levels) + "\n";
    } else {
      criteria_block += name + " - Quality of the translation with respect to this aspect." +
                        "\n  Levels: 5 excellent; 4 good; 3 acceptable; 2 poor; 1 unacceptable.\n";
    }
    shape[name] = "<1-5>";
  }
  // The shape line shows placeholders without quotes around them.
  std::string score_format = shape.dump();
  for (std::string::size_type pos; (pos = score_format.find("\"<1-5>\"")) != std::string::npos;) {
    score_format.replace(pos, 7, "<1-5>");
  }
  return text::render_template(prompts::judge_template(),
                               {{"source_language", opts.source_language},
                                {"target_language", opts.target_language},
                                {"criteria", criteria_block},
                                {"score_format", score_format},
                                {"source_text", std::string(source_text)},
                                {"translated_text", std::string(translated_text)}});
}

JudgeScorecard parse_scorecard(std::string_view output, std::span<const std::string> criteria_in) {
  const auto criteria = resolve_criteria(criteria_in);
  const std::set<std::string> wanted(criteria.begin(), criteria.end());

  std::optional<std::pair<std::size_t, nlohmann::json>> found;
  for (std::size_t pos = output.find('{'); pos != std::string_view::npos; pos = output.find('{', pos + 1)) {
    const auto end = match_brace(output, pos);
    if (!end) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(output.substr(pos, *end - pos));
    } catch (const nlohmann::json::parse_error&) {
      continue;
    }
    if (!obj.is_object() || obj.size() != wanted.size()) continue;
    bool keys_match = true;
    for (const auto& [k, _] : obj.items()) keys_match = keys_match && wanted.contains(k);
    if (keys_match) found = std::make_pair(pos, std::move(obj));
  }
  if (!found) throw JudgeParseError("no scorecard JSON object with the expected criteria found");

  JudgeScorecard card;
  for (const auto& name : criteria) {
    const auto& v = found->second[name];
    if (!v.is_number_integer()) throw JudgeParseError("score for '" + name + "' is not an integer");
    const auto score = v.get<long long>();
    if (score < 1 || score > 5) {
      throw JudgeParseError("score for '" + name + "' is " + std::to_string(score) + ", outside [1, 5]");
    }
    card.scores[name] = static_cast<int>(score);
  }
  card.explanation = std::string(text::trim(output.substr(0, found->first)));
  card.raw_response = std::string(output);
  return card;
}

std::string render_scorecard(const std::map<std::string, int>& scores, std::span<const std::string> criteria_in) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& name : resolve_criteria(criteria_in)) {
    const auto it = scores.find(name);
    if (it == scores.end()) throw std::invalid_argument("render_scorecard: missing score for '" + name + "'");
    j[name] = it->second;
  }
  return j.dump();
}

double combine_score(const JudgeScorecard& card, const std::map<std::string, double>& weights) {
  if (card.scores.empty()) throw std::invalid_argument("combine_score: empty scorecard");
  if (weights.size() != card.scores.size()) {
    throw std::invalid_argument("combine_score: weights and scorecard name different criteria");
  }
  double total = 0.0;
  for (const auto& [name, score] : card.scores) {
    const auto it = weights.find(name);
    if (it == weights.end()) {
      throw std::invalid_argument("combine_score: no weight for criterion '" + name + "'");
    }
    total += it->second * static_cast<double>(score);
  }
  return total / static_cast<double>(card.scores.size());
}

JudgeDecision decide(double combined, double threshold) {
  return {combined, threshold, meets_threshold(combined, threshold)};
}

}  // namespace benchforge
