#include "benchforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace benchforge::metrics {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": length mismatch");
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

double entropy_of(const std::map<int, std::size_t>& counts, double n) {
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  require_same_size(u.size(), v.size(), "cosine_similarity");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw std::invalid_argument("cosine_similarity: zero vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

std::vector<double> l2_normalized(std::span<const double> v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n == 0.0 || !std::isfinite(n)) throw std::invalid_argument("l2_normalized: zero or non-finite vector");
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

std::vector<std::size_t> rank_by_score(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

double ndcg_at_k(std::span<const double> scores, std::span<const int> relevance, std::size_t k) {
  require_same_size(scores.size(), relevance.size(), "ndcg_at_k");
  auto gain = [](int rel) { return rel > 0 ? std::exp2(static_cast<double>(rel)) - 1.0 : 0.0; };
  const auto order = rank_by_score(scores);
  double dcg = 0.0;
  for (std::size_t i = 0; i < order.size() && i < k; ++i) {
    dcg += gain(relevance[order[i]]) / std::log2(static_cast<double>(i) + 2.0);
  }
  std::vector<int> ideal(relevance.begin(), relevance.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t i = 0; i < ideal.size() && i < k; ++i) {
    idcg += gain(ideal[i]) / std::log2(static_cast<double>(i) + 2.0);
  }
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

double average_precision_ranked(std::span<const double> scores, std::span<const int> relevance) {
  require_same_size(scores.size(), relevance.size(), "average_precision_ranked");
  const auto total = std::count_if(relevance.begin(), relevance.end(), [](int r) { return r > 0; });
  if (total == 0) return 0.0;
  const auto order = rank_by_score(scores);
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (relevance[order[i]] > 0) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(total);
}

double recall_at_k(std::span<const double> scores, std::span<const int> relevance, std::size_t k) {
  require_same_size(scores.size(), relevance.size(), "recall_at_k");
  const auto total = std::count_if(relevance.begin(), relevance.end(), [](int r) { return r > 0; });
  if (total == 0) return 0.0;
  const auto order = rank_by_score(scores);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < order.size() && i < k; ++i) hits += relevance[order[i]] > 0 ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(total);
}

double reciprocal_rank_at_k(std::span<const double> scores, std::span<const int> relevance, std::size_t k) {
  require_same_size(scores.size(), relevance.size(), "reciprocal_rank_at_k");
  const auto order = rank_by_score(scores);
  for (std::size_t i = 0; i < order.size() && i < k; ++i) {
    if (relevance[order[i]] > 0) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  require_same_size(scores.size(), labels.size(), "average_precision");
  const auto positives = std::count_if(labels.begin(), labels.end(), [](int l) { return l > 0; });
  if (positives == 0) throw std::invalid_argument("average_precision: no positive labels");
  const auto order = rank_by_score(scores);
  double ap = 0.0, prev_recall = 0.0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    // Consume the whole group of tied scores before taking a point.
    while (i < order.size() && scores[order[i]] == threshold) {
      tp += labels[order[i]] > 0 ? 1 : 0;
      ++seen;
      ++i;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

ThresholdMetrics best_threshold_metrics(std::span<const double> scores, std::span<const int> labels) {
  require_same_size(scores.size(), labels.size(), "best_threshold_metrics");
  if (scores.empty()) throw std::invalid_argument("best_threshold_metrics: no scores");
  const auto positives = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int l) { return l > 0; }));
  const std::size_t n = scores.size();
  const auto order = rank_by_score(scores);

  ThresholdMetrics best;
  // Threshold above every score: everything predicted negative.
  best.best_accuracy = static_cast<double>(n - positives) / static_cast<double>(n);
  best.best_accuracy_threshold = scores[order.front()] + 1.0;
  best.best_f1_threshold = best.best_accuracy_threshold;

  std::size_t tp = 0, predicted = 0;
  for (std::size_t i = 0; i < n;) {
    const double threshold = scores[order[i]];
    while (i < n && scores[order[i]] == threshold) {
      tp += labels[order[i]] > 0 ? 1 : 0;
      ++predicted;
      ++i;
    }
    const std::size_t fp = predicted - tp;
    const std::size_t tn = (n - positives) - fp;
    const double acc = static_cast<double>(tp + tn) / static_cast<double>(n);
    if (acc > best.best_accuracy) {
      best.best_accuracy = acc;
      best.best_accuracy_threshold = threshold;
    }
    if (tp > 0) {
      const double precision = static_cast<double>(tp) / static_cast<double>(predicted);
      const double recall = static_cast<double>(tp) / static_cast<double>(positives);
      const double f1 = 2.0 * precision * recall / (precision + recall);
      if (f1 > best.best_f1) {
        best.best_f1 = f1;
        best.best_f1_threshold = threshold;
      }
    }
  }
  return best;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  require_same_size(x.size(), y.size(), "pearson");
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && x[idx[j]] == x[idx[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) ranks[idx[t]] = avg;
    i = j;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  require_same_size(x.size(), y.size(), "spearman");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

VMeasure v_measure(std::span<const int> labels_true, std::span<const int> labels_pred) {
  require_same_size(labels_true.size(), labels_pred.size(), "v_measure");
  if (labels_true.empty()) throw std::invalid_argument("v_measure: no labels");
  const double n = static_cast<double>(labels_true.size());
  std::map<int, std::size_t> classes, clusters;
  std::map<std::pair<int, int>, std::size_t> joint;
  for (std::size_t i = 0; i < labels_true.size(); ++i) {
    ++classes[labels_true[i]];
    ++clusters[labels_pred[i]];
    ++joint[{labels_true[i], labels_pred[i]}];
  }
  const double h_c = entropy_of(classes, n);
  const double h_k = entropy_of(clusters, n);
  double h_c_given_k = 0.0, h_k_given_c = 0.0;
  for (const auto& [key, c] : joint) {
    const double nck = static_cast<double>(c);
    h_c_given_k -= nck / n * std::log(nck / static_cast<double>(clusters[key.second]));
    h_k_given_c -= nck / n * std::log(nck / static_cast<double>(classes[key.first]));
  }
  VMeasure out;
  out.homogeneity = h_c == 0.0 ? 1.0 : 1.0 - h_c_given_k / h_c;
  out.completeness = h_k == 0.0 ? 1.0 : 1.0 - h_k_given_c / h_k;
  const double denom = out.homogeneity + out.completeness;
  out.v_measure = denom == 0.0 ? 0.0 : 2.0 * out.homogeneity * out.completeness / denom;
  out.homogeneity = std::clamp(out.homogeneity, 0.0, 1.0);
  out.completeness = std::clamp(out.completeness, 0.0, 1.0);
  out.v_measure = std::clamp(out.v_measure, 0.0, 1.0);
  return out;
}

namespace {

std::vector<std::vector<double>> kmeanspp_init(const std::vector<std::vector<double>>& points, std::size_t k,
                                               std::mt19937_64& rng) {
  std::vector<std::vector<double>> centers;
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  centers.push_back(points[pick(rng)]);
  std::vector<double> d2(points.size(), std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], centers.back()));
      total += d2[i];
    }
    std::size_t chosen = 0;
    if (total == 0.0) {
      chosen = pick(rng);
    } else {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      chosen = points.size() - 1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        target -= d2[i];
        if (target < 0.0) {
          chosen = i;
          break;
        }
      }
    }
    centers.push_back(points[chosen]);
  }
  return centers;
}

KMeansResult lloyd(const std::vector<std::vector<double>>& points, std::vector<std::vector<double>> centers,
                   int max_iter) {
  const std::size_t k = centers.size();
  const std::size_t dim = points.front().size();
  KMeansResult r;
  r.labels.assign(points.size(), -1);
  for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      int best = 0;
      double best_d = squared_distance(points[i], centers[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = squared_distance(points[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (r.labels[i] != best) {
        r.labels[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto c = static_cast<std::size_t>(r.labels[i]);
      ++counts[c];
      for (std::size_t d = 0; d < dim; ++d) sums[c][d] += points[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // an empty cluster keeps its previous center
      for (std::size_t d = 0; d < dim; ++d) centers[c][d] = sums[c][d] / static_cast<double>(counts[c]);
    }
  }
  r.inertia = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    r.inertia += squared_distance(points[i], centers[static_cast<std::size_t>(r.labels[i])]);
  }
  r.centers = std::move(centers);
  return r;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, const KMeansOptions& opts) {
  if (opts.k == 0) throw std::invalid_argument("kmeans: k must be positive");
  if (points.size() < opts.k) throw std::invalid_argument("kmeans: fewer points than clusters");
  const std::size_t dim = points.front().size();
  for (const auto& p : points) require_same_size(p.size(), dim, "kmeans");
  if (opts.restarts < 1 || opts.max_iter < 1) throw std::invalid_argument("kmeans: restarts and max_iter must be positive");

  std::mt19937_64 rng(opts.seed);
  std::optional<KMeansResult> best;
  for (int attempt = 0; attempt < opts.restarts; ++attempt) {
    auto result = lloyd(points, kmeanspp_init(points, opts.k, rng), opts.max_iter);
    if (!best || result.inertia < best->inertia) best = std::move(result);
  }
  return std::move(*best);
}

void LogisticRegression::fit(const std::vector<std::vector<double>>& x, std::span<const int> y, int n_classes,
                             const LogRegOptions& opts) {
  require_same_size(x.size(), y.size(), "LogisticRegression::fit");
  if (x.empty()) throw std::invalid_argument("LogisticRegression::fit: no training data");
  if (n_classes < 2) throw std::invalid_argument("LogisticRegression::fit: need at least two classes");
  for (int label : y) {
    if (label < 0 || label >= n_classes) throw std::invalid_argument("LogisticRegression::fit: label out of range");
  }
  dim_ = x.front().size();
  for (const auto& row : x) require_same_size(row.size(), dim_, "LogisticRegression::fit");
  n_classes_ = n_classes;
  const std::size_t c_count = static_cast<std::size_t>(n_classes);
  const double n = static_cast<double>(x.size());
  weights_.assign(c_count, std::vector<double>(dim_ + 1, 0.0));

  // Step 1/L where L bounds the Hessian of the objective.
  double max_sq = 0.0;
  for (const auto& row : x) {
    double s = 1.0;
    for (double v : row) s += v * v;
    max_sq = std::max(max_sq, s);
  }
  const double lr = 1.0 / (0.5 * max_sq + opts.l2 / n);

  std::vector<double> logits(c_count), prob(c_count);
  std::vector<std::vector<double>> grad(c_count, std::vector<double>(dim_ + 1));
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    for (auto& g : grad) std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      double max_logit = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < c_count; ++c) {
        double z = weights_[c][dim_];
        for (std::size_t d = 0; d < dim_; ++d) z += weights_[c][d] * x[i][d];
        logits[c] = z;
        max_logit = std::max(max_logit, z);
      }
      double denom = 0.0;
      for (std::size_t c = 0; c < c_count; ++c) {
        prob[c] = std::exp(logits[c] - max_logit);
        denom += prob[c];
      }
      for (std::size_t c = 0; c < c_count; ++c) {
        const double err = prob[c] / denom - (static_cast<int>(c) == y[i] ? 1.0 : 0.0);
        for (std::size_t d = 0; d < dim_; ++d) grad[c][d] += err * x[i][d];
        grad[c][dim_] += err;
      }
    }
    for (std::size_t c = 0; c < c_count; ++c) {
      for (std::size_t d = 0; d <= dim_; ++d) {
        double g = grad[c][d] / n;
        if (d < dim_) g += opts.l2 / n * weights_[c][d];
        weights_[c][d] -= lr * g;
      }
    }
  }
}

std::vector<int> LogisticRegression::predict(const std::vector<std::vector<double>>& x) const {
  if (n_classes_ == 0) throw std::logic_error("LogisticRegression::predict before fit");
  std::vector<int> out;
  out.reserve(x.size());
  for (const auto& row : x) {
    require_same_size(row.size(), dim_, "LogisticRegression::predict");
    int best = 0;
    double best_z = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < weights_.size(); ++c) {
      double z = weights_[c][dim_];
      for (std::size_t d = 0; d < dim_; ++d) z += weights_[c][d] * row[d];
      if (z > best_z) {
        best_z = z;
        best = static_cast<int>(c);
      }
    }
    out.push_back(best);
  }
  return out;
}

double accuracy(std::span<const int> truth, std::span<const int> predicted) {
  require_same_size(truth.size(), predicted.size(), "accuracy");
  if (truth.empty()) throw std::invalid_argument("accuracy: no labels");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double macro_f1(std::span<const int> truth, std::span<const int> predicted, int n_classes) {
  require_same_size(truth.size(), predicted.size(), "macro_f1");
  if (n_classes < 1) throw std::invalid_argument("macro_f1: no classes");
  double total = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (predicted[i] == c && truth[i] == c) ++tp;
      else if (predicted[i] == c) ++fp;
      else if (truth[i] == c) ++fn;
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    total += denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
  }
  return total / static_cast<double>(n_classes);
}

}  // namespace benchforge::metrics
