#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace benchforge::metrics {

/// u.v / (|u| |v|). Throws std::invalid_argument on a dimension mismatch or a zero vector.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// Scales to unit length. Throws std::invalid_argument on a zero or non-finite vector.
std::vector<double> l2_normalized(std::span<const double> v);

/// Indices ordered by descending score; equal scores keep index order.
std::vector<std::size_t> rank_by_score(std::span<const double> scores);

// Ranking metrics for one query. `relevance[i]` is the graded judgment of
// item i (<= 0 means not relevant); `scores[i]` its similarity.

/// Gains 2^rel - 1 with a log2(rank + 1) discount, normalised by the ideal ordering.
double ndcg_at_k(std::span<const double> scores, std::span<const int> relevance, std::size_t k);
/// Ranked average precision over the full ranking; 0 when nothing is relevant.
double average_precision_ranked(std::span<const double> scores, std::span<const int> relevance);
double recall_at_k(std::span<const double> scores, std::span<const int> relevance, std::size_t k);
double reciprocal_rank_at_k(std::span<const double> scores, std::span<const int> relevance, std::size_t k);

/// Threshold-based average precision: sum over distinct score thresholds of
/// (R_n - R_{n-1}) * P_n, with tied scores sharing one threshold.
/// Throws std::invalid_argument when no label is positive.
double average_precision(std::span<const double> scores, std::span<const int> labels);

struct ThresholdMetrics {
  double best_f1 = 0.0;
  double best_f1_threshold = 0.0;
  double best_accuracy = 0.0;
  double best_accuracy_threshold = 0.0;
};
/// Best F1 and best accuracy over all "score >= t" classifiers.
ThresholdMetrics best_threshold_metrics(std::span<const double> scores, std::span<const int> labels);

/// Pearson correlation; nullopt when either side has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);
/// Ranks with ties sharing their average rank (1-based).
std::vector<double> average_ranks(std::span<const double> x);
/// Spearman correlation with average-rank ties; nullopt when undefined.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

struct VMeasure {
  double homogeneity = 1.0;
  double completeness = 1.0;
  double v_measure = 1.0;
};
/// Entropy-based clustering agreement (beta = 1). Labels are arbitrary integers.
VMeasure v_measure(std::span<const int> labels_true, std::span<const int> labels_pred);

struct KMeansOptions {
  std::size_t k = 2;
  int max_iter = 300;
  int restarts = 10;
  std::uint64_t seed = 42;
};

struct KMeansResult {
  std::vector<int> labels;
  std::vector<std::vector<double>> centers;
  double inertia = 0.0;
  int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding; keeps the restart with the
/// lowest inertia.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, const KMeansOptions& opts);

struct LogRegOptions {
  int max_iter = 100;
  double l2 = 1.0;
};

/// Multinomial logistic regression fitted by full-batch gradient descent
/// from zero weights. Objective: mean cross-entropy + l2 / (2n) * |W|^2,
/// bias unregularised.
class LogisticRegression {
 public:
  void fit(const std::vector<std::vector<double>>& x, std::span<const int> y, int n_classes,
           const LogRegOptions& opts = {});
  std::vector<int> predict(const std::vector<std::vector<double>>& x) const;
  int n_classes() const { return n_classes_; }

 private:
  int n_classes_ = 0;
  std::size_t dim_ = 0;
  std::vector<std::vector<double>> weights_;  // [class][dim + 1], last entry is the bias
};

double accuracy(std::span<const int> truth, std::span<const int> predicted);
/// Unweighted mean of per-class F1 over classes 0..n_classes-1.
double macro_f1(std::span<const int> truth, std::span<const int> predicted, int n_classes);

}  // namespace benchforge::metrics
