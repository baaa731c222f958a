#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "benchforge/backends.hpp"
#include "benchforge/core.hpp"

namespace benchforge {

// ---------------------------------------------------------------------------
// Kept ratio

struct DatasetCounts {
  std::string dataset_id;
  TaskType task = TaskType::Classification;
  std::size_t records_before = 0;
  std::size_t records_after = 0;
};

struct KeptRatioRow {
  std::string dataset_id;
  TaskType task = TaskType::Classification;
  std::size_t records_before = 0;
  std::size_t records_after = 0;
  double kept_pct = 0.0;
};

struct KeptRatioReport {
  std::vector<KeptRatioRow> rows;
  std::map<TaskType, double> task_means;  // unweighted mean of kept_pct per task
  std::map<TaskType, std::size_t> task_counts;
};

/// Throws std::invalid_argument unless before > 0 and after <= before.
KeptRatioReport kept_ratio_report(std::span<const DatasetCounts> counts);
std::string render_kept_ratio(const KeptRatioReport& report);
nlohmann::ordered_json kept_ratio_to_json(const KeptRatioReport& report);

// ---------------------------------------------------------------------------
// Word lengths

/// Whitespace-delimited tokens after NFC normalisation.
std::size_t word_count(std::string_view text);

struct WordLengthOptions {
  std::size_t max_len = 512;
  std::size_t bin_width = 8;
};

struct Histogram {
  std::size_t bin_width = 8;
  std::size_t max_len = 512;
  std::vector<std::size_t> counts;  // bins [i*w, (i+1)*w); the last entry counts lengths >= max_len
  std::size_t total() const;
};

Histogram make_histogram(std::span<const std::size_t> lengths, const WordLengthOptions& opts = {});

struct WordLengthStats {
  Histogram source;
  Histogram target;
  std::optional<double> pearson_r;  // absent when either side has constant counts
  std::size_t pairs = 0;
  double mean_source = 0.0;
  double mean_target = 0.0;
};

/// Throws std::invalid_argument for fewer than two pairs.
WordLengthStats word_length_stats(std::span<const std::pair<std::string, std::string>> pairs,
                                  const WordLengthOptions& opts = {});
std::string render_word_length(const WordLengthStats& stats);

// ---------------------------------------------------------------------------
// Similarity-threshold calibration

inline constexpr std::size_t kScoreBins = 10;

/// Bin of a cosine score over [0, 1] in steps of 0.1; the last bin includes
/// 1.0 and negative scores count in the first bin.
std::size_t score_bin(double score);

enum class CategoryKind { Positive, Negative, Ignored };

struct ScoreDistribution {
  std::string category;
  CategoryKind kind = CategoryKind::Negative;
  std::vector<double> scores;
  std::array<std::size_t, kScoreBins> counts{};
  std::array<double, kScoreBins> percentages{};
};

ScoreDistribution make_distribution(std::string category, CategoryKind kind, std::vector<double> scores);

/// Linear-interpolation percentile, q in [0, 1]. Throws on an empty input.
double percentile(std::vector<double> values, double q);

struct CalibrationOptions {
  std::string positive = "vi_label";
  std::vector<std::string> ignored = {"syn_eng"};  // reported but not used for the suggestion
};

struct CalibrationResult {
  std::vector<ScoreDistribution> distributions;
  double positive_low = 0.0;   // 10th percentile of the positive category
  double negative_high = 0.0;  // highest 90th percentile among negative categories
  double suggested_threshold = 0.0;
  bool overlap = false;
  std::vector<std::string> warnings;
};

/// Works on precomputed scores. Throws std::invalid_argument on an empty
/// category, a missing positive category or no negative category.
CalibrationResult calibrate_scores(const std::map<std::string, std::vector<double>>& scores,
                                   const CalibrationOptions& opts = {});

/// Embeds each pair and calibrates on the cosine scores.
CalibrationResult calibrate_threshold(
    const std::map<std::string, std::vector<std::pair<std::string, std::string>>>& pair_sets,
    EmbeddingBackend& embedder, const CalibrationOptions& opts = {});

/// CSV rows "bin_start,bin_end,category,percentage".
std::string distributions_csv(std::span<const ScoreDistribution> distributions);
std::string render_calibration(const CalibrationResult& result);

// ---------------------------------------------------------------------------
// Cost

struct CostEstimate {
  std::int64_t total_tokens = 0;
  double rate_tokens_per_sec = 0.0;
  double duplex_factor = 2.0;
  double single_pass_seconds = 0.0;
  double seconds = 0.0;
  double hours = 0.0;
  double days = 0.0;
  int gpus = 0;
  double watts_per_gpu = 0.0;
  double energy_kwh = 0.0;
};

/// seconds = duplex * tokens / rate; energy = seconds * gpus * watts / 3.6e6.
/// Throws std::invalid_argument unless rate > 0 and the other inputs are non-negative.
CostEstimate estimate_cost(std::int64_t total_tokens, double rate_tokens_per_sec, int gpus, double watts_per_gpu,
                           double duplex_factor = 2.0);
nlohmann::ordered_json cost_to_json(const CostEstimate& c);
std::string render_cost(const CostEstimate& c);

}  // namespace benchforge
