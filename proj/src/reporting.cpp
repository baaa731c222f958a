#include "benchforge/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <stdexcept>

#include "benchforge/metrics.hpp"
#include "benchforge/text.hpp"

namespace benchforge {

using nlohmann::ordered_json;

namespace {

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string pad_right(std::string s, std::size_t width) {
  const auto n = text::code_point_count(s);
  if (n < width) s.append(width - n, ' ');
  return s;
}

std::string pad_left(std::string s, std::size_t width) {
  const auto n = text::code_point_count(s);
  if (n < width) s.insert(0, width - n, ' ');
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Kept ratio

KeptRatioReport kept_ratio_report(std::span<const DatasetCounts> counts) {
  KeptRatioReport report;
  std::map<TaskType, double> sums;
  for (const auto& c : counts) {
    if (c.records_before == 0) throw std::invalid_argument(c.dataset_id + ": records_before must be positive");
    if (c.records_after > c.records_before) {
      throw std::invalid_argument(c.dataset_id + ": records_after exceeds records_before");
    }
    KeptRatioRow row{c.dataset_id, c.task, c.records_before, c.records_after,
                     100.0 * static_cast<double>(c.records_after) / static_cast<double>(c.records_before)};
    sums[c.task] += row.kept_pct;
    ++report.task_counts[c.task];
    report.rows.push_back(std::move(row));
  }
  for (const auto& [task, sum] : sums) {
    report.task_means[task] = sum / static_cast<double>(report.task_counts[task]);
  }
  return report;
}

std::string render_kept_ratio(const KeptRatioReport& report) {
  std::size_t w = 7;
  for (const auto& r : report.rows) w = std::max(w, text::code_point_count(r.dataset_id));
  std::string out = pad_right("Dataset", w) + "  " + pad_right("Task", 18) + "  " + pad_left("Before", 8) + "  " +
                    pad_left("After", 8) + "  " + pad_left("Kept %", 7) + "\n";
  for (const auto& r : report.rows) {
    out += pad_right(r.dataset_id, w) + "  " + pad_right(std::string(to_string(r.task)), 18) + "  " +
           pad_left(std::to_string(r.records_before), 8) + "  " + pad_left(std::to_string(r.records_after), 8) +
           "  " + pad_left(format("%.2f", r.kept_pct), 7) + "\n";
  }
  out += "\nMean kept ratio per task:\n";
  for (const auto task : kAllTasks) {
    const auto it = report.task_means.find(task);
    if (it == report.task_means.end()) continue;
    const auto n = report.task_counts.at(task);
    out += "  " + std::string(to_string(task)) + " (" + std::to_string(n) + (n == 1 ? " dataset" : " datasets") +
           "): " + format("%.2f", it->second) + "%\n";
  }
  return out;
}

ordered_json kept_ratio_to_json(const KeptRatioReport& report) {
  ordered_json j;
  j["rows"] = ordered_json::array();
  for (const auto& r : report.rows) {
    j["rows"].push_back({{"dataset_id", r.dataset_id},
                         {"task", to_string(r.task)},
                         {"records_before", r.records_before},
                         {"records_after", r.records_after},
                         {"kept_pct", r.kept_pct}});
  }
  j["task_means"] = ordered_json::object();
  for (const auto task : kAllTasks) {
    if (const auto it = report.task_means.find(task); it != report.task_means.end()) {
      j["task_means"][std::string(to_string(task))] = {{"datasets", report.task_counts.at(task)},
                                                       {"mean_kept_pct", it->second}};
    }
  }
  return j;
}

// ---------------------------------------------------------------------------
// Word lengths

std::size_t word_count(std::string_view s) { return text::split_whitespace(text::nfc(s)).size(); }

std::size_t Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

Histogram make_histogram(std::span<const std::size_t> lengths, const WordLengthOptions& opts) {
  if (opts.bin_width == 0 || opts.max_len == 0) throw std::invalid_argument("histogram: bin width and range must be positive");
  Histogram h;
  h.bin_width = opts.bin_width;
  h.max_len = opts.max_len;
  const std::size_t bins = (opts.max_len + opts.bin_width - 1) / opts.bin_width;
  h.counts.assign(bins + 1, 0);
  for (const auto len : lengths) ++h.counts[len >= opts.max_len ? bins : len / opts.bin_width];
  return h;
}

WordLengthStats word_length_stats(std::span<const std::pair<std::string, std::string>> pairs,
                                  const WordLengthOptions& opts) {
  if (pairs.size() < 2) throw std::invalid_argument("word_length_stats: need at least two pairs");
  std::vector<std::size_t> src, tgt;
  std::vector<double> xs, ys;
  for (const auto& [a, b] : pairs) {
    src.push_back(word_count(a));
    tgt.push_back(word_count(b));
    xs.push_back(static_cast<double>(src.back()));
    ys.push_back(static_cast<double>(tgt.back()));
  }
  WordLengthStats st;
  st.source = make_histogram(src, opts);
  st.target = make_histogram(tgt, opts);
  st.pearson_r = metrics::pearson(xs, ys);
  st.pairs = pairs.size();
  st.mean_source = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  st.mean_target = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  return st;
}

std::string render_word_length(const WordLengthStats& st) {
  std::string out = "Word-length pairs: " + std::to_string(st.pairs) + "\n";
  out += "Mean words: source " + format("%.2f", st.mean_source) + ", target " + format("%.2f", st.mean_target) + "\n";
  out += "Pearson r: " + (st.pearson_r ? format("%.4f", *st.pearson_r) : std::string("undefined (constant lengths)")) +
         "\n";
  out += pad_left("Words", 10) + "  " + pad_left("Source", 8) + "  " + pad_left("Target", 8) + "\n";
  const auto bins = st.source.counts.size() - 1;
  for (std::size_t i = 0; i <= bins; ++i) {
    if (st.source.counts[i] == 0 && st.target.counts[i] == 0) continue;
    const auto label = i == bins ? ">=" + std::to_string(st.source.max_len)
                                 : std::to_string(i * st.source.bin_width) + "-" +
                                       std::to_string((i + 1) * st.source.bin_width - 1);
    out += pad_left(label, 10) + "  " + pad_left(std::to_string(st.source.counts[i]), 8) + "  " +
           pad_left(std::to_string(st.target.counts[i]), 8) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Calibration

std::size_t score_bin(double score) {
  for (std::size_t i = kScoreBins - 1; i > 0; --i) {
    if (score >= static_cast<double>(i) / 10.0) return i;
  }
  return 0;
}

ScoreDistribution make_distribution(std::string category, CategoryKind kind, std::vector<double> scores) {
  if (scores.empty()) throw std::invalid_argument("category '" + category + "' is empty");
  ScoreDistribution d;
  d.category = std::move(category);
  d.kind = kind;
  d.scores = std::move(scores);
  for (const double s : d.scores) ++d.counts[score_bin(s)];
  for (std::size_t i = 0; i < kScoreBins; ++i) {
    d.percentages[i] = 100.0 * static_cast<double>(d.counts[i]) / static_cast<double>(d.scores.size());
  }
  return d;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty set");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("percentile: q outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

CalibrationResult calibrate_scores(const std::map<std::string, std::vector<double>>& scores,
                                   const CalibrationOptions& opts) {
  if (scores.size() < 2) throw std::invalid_argument("calibration needs at least two categories");
  if (!scores.contains(opts.positive)) {
    throw std::invalid_argument("calibration needs the positive category '" + opts.positive + "'");
  }
  const std::set<std::string> ignored(opts.ignored.begin(), opts.ignored.end());
  CalibrationResult r;
  std::optional<double> neg_high;
  for (const auto& [name, values] : scores) {
    const auto kind = name == opts.positive   ? CategoryKind::Positive
                      : ignored.contains(name) ? CategoryKind::Ignored
                                               : CategoryKind::Negative;
    r.distributions.push_back(make_distribution(name, kind, values));
    if (kind == CategoryKind::Positive) r.positive_low = percentile(values, 0.1);
    if (kind == CategoryKind::Negative) {
      const double p90 = percentile(values, 0.9);
      neg_high = neg_high ? std::max(*neg_high, p90) : p90;
    }
  }
  if (!neg_high) throw std::invalid_argument("calibration needs at least one negative category");
  r.negative_high = *neg_high;
  r.suggested_threshold = (r.positive_low + r.negative_high) / 2.0;
  r.overlap = r.positive_low <= r.negative_high;
  if (r.overlap) {
    r.warnings.push_back("score regions overlap: positive 10th percentile " + format("%.4f", r.positive_low) +
                         " <= negative 90th percentile " + format("%.4f", r.negative_high));
  }
  return r;
}

CalibrationResult calibrate_threshold(
    const std::map<std::string, std::vector<std::pair<std::string, std::string>>>& pair_sets,
    EmbeddingBackend& embedder, const CalibrationOptions& opts) {
  std::map<std::string, std::vector<double>> scores;
  for (const auto& [name, pairs] : pair_sets) {
    if (pairs.empty()) throw std::invalid_argument("category '" + name + "' is empty");
    std::vector<std::string> texts;
    for (const auto& [a, b] : pairs) {
      texts.push_back(a);
      texts.push_back(b);
    }
    const auto vecs = embedder.embed(texts);
    if (vecs.size() != texts.size()) throw std::runtime_error("embedder returned the wrong number of vectors");
    auto& out = scores[name];
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      out.push_back(metrics::cosine_similarity(vecs[2 * i].values, vecs[2 * i + 1].values));
    }
  }
  return calibrate_scores(scores, opts);
}

std::string distributions_csv(std::span<const ScoreDistribution> distributions) {
  std::string out = "bin_start,bin_end,category,percentage\n";
  for (const auto& d : distributions) {
    for (std::size_t i = 0; i < kScoreBins; ++i) {
      out += format("%.1f", static_cast<double>(i) / 10.0) + "," + format("%.1f", static_cast<double>(i + 1) / 10.0) +
             "," + d.category + "," + format("%.10g", d.percentages[i]) + "\n";
    }
  }
  return out;
}

std::string render_calibration(const CalibrationResult& r) {
  std::string out = pad_right("Category", 12);
  for (std::size_t i = 0; i < kScoreBins; ++i) out += "  " + pad_left(format("%.1f", static_cast<double>(i) / 10.0), 6);
  out += "\n";
  for (const auto& d : r.distributions) {
    out += pad_right(d.category, 12);
    for (const double p : d.percentages) out += "  " + pad_left(format("%.1f", p), 6);
    out += "\n";
  }
  out += "positive 10th percentile: " + format("%.4f", r.positive_low) + "\n";
  out += "negative 90th percentile: " + format("%.4f", r.negative_high) + "\n";
  out += "suggested threshold: " + format("%.4f", r.suggested_threshold) + "\n";
  for (const auto& w : r.warnings) out += "warning: " + w + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Cost

CostEstimate estimate_cost(std::int64_t total_tokens, double rate, int gpus, double watts, double duplex) {
  if (!(rate > 0.0)) throw std::invalid_argument("estimate_cost: rate must be positive");
  if (total_tokens < 0 || gpus < 0 || watts < 0.0 || duplex < 0.0) {
    throw std::invalid_argument("estimate_cost: tokens, gpus, watts and duplex factor must be non-negative");
  }
  CostEstimate c;
  c.total_tokens = total_tokens;
  c.rate_tokens_per_sec = rate;
  c.duplex_factor = duplex;
  c.gpus = gpus;
  c.watts_per_gpu = watts;
  c.single_pass_seconds = static_cast<double>(total_tokens) / rate;
  c.seconds = duplex * c.single_pass_seconds;
  c.hours = c.seconds / 3600.0;
  c.days = c.hours / 24.0;
  c.energy_kwh = c.seconds * static_cast<double>(gpus) * watts / 3.6e6;
  return c;
}

ordered_json cost_to_json(const CostEstimate& c) {
  ordered_json j;
  j["total_tokens"] = c.total_tokens;
  j["rate_tokens_per_sec"] = c.rate_tokens_per_sec;
  j["duplex_factor"] = c.duplex_factor;
  j["single_pass_seconds"] = c.single_pass_seconds;
  j["seconds"] = c.seconds;
  j["hours"] = c.hours;
  j["days"] = c.days;
  j["gpus"] = c.gpus;
  j["watts_per_gpu"] = c.watts_per_gpu;
  j["energy_kwh"] = c.energy_kwh;
  return j;
}

std::string render_cost(const CostEstimate& c) {
  std::string out;
  out += "tokens:            " + std::to_string(c.total_tokens) + " at " + format("%.2f", c.rate_tokens_per_sec) +
         " tokens/s\n";
  out += "single pass:       " + format("%.2f", c.single_pass_seconds) + " s\n";
  out += "total (x" + format("%g", c.duplex_factor) + "):" + std::string(c.duplex_factor < 10 ? 9 : 8, ' ') +
         format("%.2f", c.seconds) + " s = " + format("%.2f", c.hours) + " h = " + format("%.2f", c.days) + " days\n";
  out += "energy:            " + format("%.2f", c.energy_kwh) + " kWh (" + std::to_string(c.gpus) + " GPUs x " +
         format("%g", c.watts_per_gpu) + " W)\n";
  return out;
}

}  // namespace benchforge
