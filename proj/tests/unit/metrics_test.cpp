#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "benchforge/metrics.hpp"
#include "oracles.hpp"

using namespace benchforge;
namespace m = benchforge::metrics;

namespace {

std::vector<double> tied_scores(std::mt19937_64& rng, std::size_t n) {
  // Few distinct values so that ties are common.
  std::uniform_int_distribution<int> d(0, 4);
  std::vector<double> s(n);
  for (auto& v : s) v = d(rng) / 4.0;
  return s;
}

}  // namespace

TEST_CASE("cosine similarity") {
  const std::vector<double> a{1, 0}, b{0, 1};
  CHECK(m::cosine_similarity(a, a) == doctest::Approx(1.0));
  CHECK(m::cosine_similarity(a, b) == doctest::Approx(0.0));
  const std::vector<double> u{1, 2, 3}, v{4, 5, 6};
  // 32 / (sqrt(14) * sqrt(77))
  const double expected = 32.0 / (std::sqrt(14.0) * std::sqrt(77.0));
  CHECK(std::abs(m::cosine_similarity(u, v) - expected) < 1e-12);
  CHECK(std::abs(expected - 0.974631846) < 1e-9);
  const std::vector<double> z{0, 0};
  CHECK_THROWS_AS(m::cosine_similarity(a, z), std::invalid_argument);
  const std::vector<double> c{1, 2, 3};
  CHECK_THROWS_AS(m::cosine_similarity(a, c), std::invalid_argument);
}

TEST_CASE("nDCG@10 on small rankings") {
  // Ranked relevances [1, 0, 1]: DCG 1 + 0.5, ideal 1 + 1/log2(3).
  const std::vector<double> s{0.9, 0.8, 0.7};
  const std::vector<int> r{1, 0, 1};
  const double expected = 1.5 / (1.0 + 1.0 / std::log2(3.0));
  CHECK(std::abs(m::ndcg_at_k(s, r, 10) - expected) < 1e-12);
  CHECK(std::abs(expected - 0.91972) < 1e-5);
  CHECK(std::abs(m::ndcg_at_k(s, r, 10) - oracle::ndcg_at_k(s, r, 10)) < 1e-12);

  const std::vector<int> top{1, 1, 0};
  CHECK(m::ndcg_at_k(s, top, 10) == doctest::Approx(1.0));

  const std::vector<double> two{0.9, 0.1};
  const std::vector<int> second{0, 1};
  CHECK(std::abs(m::ndcg_at_k(two, second, 10) - 1.0 / std::log2(3.0)) < 1e-12);
}

TEST_CASE("ranked AP for reranking") {
  const std::vector<double> s{0.9, 0.8, 0.7};
  CHECK(m::average_precision_ranked(s, std::vector<int>{1, 1, 0}) == doctest::Approx(1.0));
  CHECK(m::average_precision_ranked(s, std::vector<int>{0, 1, 0}) == doctest::Approx(0.5));
  const double two = m::average_precision_ranked(s, std::vector<int>{1, 0, 1});
  CHECK(std::abs(two - (1.0 + 2.0 / 3.0) / 2.0) < 1e-12);
}

TEST_CASE("threshold AP for pair classification") {
  CHECK(m::average_precision(std::vector<double>{0.2, 0.9}, std::vector<int>{1, 0}) == doctest::Approx(0.5));
  CHECK(m::average_precision(std::vector<double>{0.9, 0.8, 0.1}, std::vector<int>{1, 1, 0}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(m::average_precision(std::vector<double>{0.2, 0.9}, std::vector<int>{0, 0}), std::invalid_argument);
}

TEST_CASE("metric implementations agree with the brute-force oracles") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng() % 8;
    const auto s = tied_scores(rng, n);
    std::vector<int> rel(n), bin(n);
    for (std::size_t i = 0; i < n; ++i) {
      rel[i] = static_cast<int>(rng() % 4);
      bin[i] = static_cast<int>(rng() % 2);
    }
    CHECK(std::abs(m::ndcg_at_k(s, rel, 10) - oracle::ndcg_at_k(s, rel, 10)) < 1e-9);
    CHECK(std::abs(m::ndcg_at_k(s, rel, 3) - oracle::ndcg_at_k(s, rel, 3)) < 1e-9);
    CHECK(std::abs(m::average_precision_ranked(s, bin) - oracle::ranked_ap(s, bin)) < 1e-9);
    if (std::count(bin.begin(), bin.end(), 1) > 0) {
      CHECK(std::abs(m::average_precision(s, bin) - oracle::threshold_ap(s, bin)) < 1e-9);
    }
  }
}

TEST_CASE("ranks average ties") {
  const auto r = m::average_ranks(std::vector<double>{10, 20, 20, 30, 5});
  CHECK(r == std::vector<double>{2, 3.5, 3.5, 5, 1});
  CHECK(r == oracle::mid_ranks({10, 20, 20, 30, 5}));
}

TEST_CASE("Spearman and Pearson") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  CHECK(*m::spearman(x, std::vector<double>{2, 4, 6, 8, 100}) == doctest::Approx(1.0));
  CHECK(*m::spearman(x, std::vector<double>{5, 4, 3, 2, 1}) == doctest::Approx(-1.0));
  const std::vector<double> y{0.1, 0.4, 0.4, 0.3, 0.9};  // one tie
  CHECK(std::abs(*m::spearman(x, y) - *oracle::spearman(x, y)) < 1e-12);
  CHECK(std::abs(*m::pearson(x, y) - *oracle::pearson(x, y)) < 1e-12);
  CHECK_FALSE(m::pearson(x, std::vector<double>{1, 1, 1, 1, 1}).has_value());
}

TEST_CASE("V-measure edge cases") {
  const auto perfect = m::v_measure(std::vector<int>{0, 0, 1, 1}, std::vector<int>{7, 7, 3, 3});
  CHECK(perfect.v_measure == doctest::Approx(1.0));
  const auto lumped = m::v_measure(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 0, 0, 0});
  CHECK(lumped.homogeneity == doctest::Approx(0.0));
  CHECK(lumped.v_measure == doctest::Approx(0.0));
}

TEST_CASE("V-measure on a six-point toy matches direct entropy arithmetic") {
  const std::vector<int> truth{0, 0, 0, 1, 1, 1};
  const std::vector<int> pred{0, 0, 1, 1, 1, 1};
  // H(C) = ln 2. H(C|K): cluster 0 pure (2 pts); cluster 1 has 1 of class 0, 3 of class 1.
  const double hc = std::log(2.0);
  const double hck = -(1.0 / 6) * std::log(1.0 / 4) - (3.0 / 6) * std::log(3.0 / 4);
  // H(K) with sizes 2 and 4; H(K|C): class 0 splits 2/1, class 1 is pure.
  const double hk = -(2.0 / 6) * std::log(2.0 / 6) - (4.0 / 6) * std::log(4.0 / 6);
  const double hkc = -(2.0 / 6) * std::log(2.0 / 3) - (1.0 / 6) * std::log(1.0 / 3);
  const double h = 1 - hck / hc, c = 1 - hkc / hk;
  const auto v = m::v_measure(truth, pred);
  CHECK(std::abs(v.homogeneity - h) < 1e-12);
  CHECK(std::abs(v.completeness - c) < 1e-12);
  CHECK(std::abs(v.v_measure - 2 * h * c / (h + c)) < 1e-12);
  CHECK(std::abs(v.v_measure - oracle::v_measure(truth, pred).v_measure) < 1e-12);
}

TEST_CASE("k-means recovers separated clusters and is seed-deterministic") {
  std::vector<std::vector<double>> pts;
  std::vector<int> truth;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 10; ++i) {
      pts.push_back({c * 5.0 + noise(rng), (c % 2) * 5.0 + noise(rng)});
      truth.push_back(c);
    }
  }
  m::KMeansOptions opts;
  opts.k = 3;
  const auto a = m::kmeans(pts, opts);
  const auto b = m::kmeans(pts, opts);
  CHECK(a.labels == b.labels);
  CHECK(m::v_measure(truth, a.labels).v_measure == doctest::Approx(1.0));
}

TEST_CASE("logistic regression separates a separable set") {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 20; ++i) {
    x.push_back({1.0, 0.1 * (i % 5)});
    y.push_back(0);
    x.push_back({-1.0, 0.1 * (i % 5)});
    y.push_back(1);
  }
  m::LogisticRegression clf;
  clf.fit(x, y, 2);
  const auto pred = clf.predict(x);
  CHECK(m::accuracy(y, pred) == doctest::Approx(1.0));
  std::vector<int> flipped = y;
  for (auto& v : flipped) v = 1 - v;
  CHECK(m::accuracy(flipped, pred) == doctest::Approx(0.0));
  CHECK(m::macro_f1(y, pred, 2) == doctest::Approx(1.0));
}
