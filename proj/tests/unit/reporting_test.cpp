#include <doctest.h>

#include <cmath>
#include <numeric>

#include "benchforge/reporting.hpp"
#include "oracles.hpp"

using namespace benchforge;

TEST_CASE("kept ratio per dataset and per task") {
  const std::vector<DatasetCounts> counts{{"a", TaskType::STS, 100, 66},
                                          {"b", TaskType::STS, 50, 50},
                                          {"c", TaskType::Retrieval, 10, 5}};
  const auto r = kept_ratio_report(counts);
  CHECK(r.rows[0].kept_pct == doctest::Approx(66.0));
  CHECK(r.rows[1].kept_pct == doctest::Approx(100.0));
  CHECK(r.task_means.at(TaskType::STS) == doctest::Approx(83.0));
  CHECK(r.task_counts.at(TaskType::STS) == 2);
  CHECK(render_kept_ratio(r).find("66.00") != std::string::npos);

  const std::vector<DatasetCounts> bad{{"x", TaskType::STS, 0, 0}};
  CHECK_THROWS_AS(kept_ratio_report(bad), std::invalid_argument);
  const std::vector<DatasetCounts> grown{{"x", TaskType::STS, 5, 6}};
  CHECK_THROWS_AS(kept_ratio_report(grown), std::invalid_argument);
}

TEST_CASE("word counts use whitespace tokens") {
  CHECK(word_count("Xin  chào\tthế giới") == 4);
  CHECK(word_count("") == 0);
}

TEST_CASE("word-length correlation") {
  const std::vector<std::pair<std::string, std::string>> same{{"a b c", "a b c"}, {"a", "a"}, {"a b", "a b"}};
  CHECK(*word_length_stats(same).pearson_r == doctest::Approx(1.0));

  const std::vector<std::pair<std::string, std::string>> reordered{{"one two three", "three two one"},
                                                                   {"x", "x"},
                                                                   {"p q", "q p"}};
  CHECK(*word_length_stats(reordered).pearson_r == doctest::Approx(1.0));

  const auto words = [](int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += (i ? " w" : "w");
    return s;
  };
  const std::vector<std::pair<int, int>> lens{{1, 10}, {10, 1}, {2, 9}, {9, 2}};
  std::vector<std::pair<std::string, std::string>> anti;
  std::vector<double> xs, ys;
  for (auto [a, b] : lens) {
    anti.emplace_back(words(a), words(b));
    xs.push_back(a);
    ys.push_back(b);
  }
  const auto r = word_length_stats(anti).pearson_r;
  REQUIRE(r.has_value());
  CHECK(*r < 0);
  CHECK(std::abs(*r - *oracle::pearson(xs, ys)) < 1e-12);

  const std::vector<std::pair<std::string, std::string>> flat{{"a b", "c"}, {"d e", "f g h"}};
  CHECK_FALSE(word_length_stats(flat).pearson_r.has_value());
  CHECK_THROWS_AS(word_length_stats(std::vector<std::pair<std::string, std::string>>{{"a", "b"}}),
                  std::invalid_argument);
}

TEST_CASE("histograms put long sequences in the overflow bin") {
  const std::vector<std::size_t> lens{0, 7, 8, 600};
  const auto h = make_histogram(lens, {512, 8});
  CHECK(h.counts.front() == 2);
  CHECK(h.counts[1] == 1);
  CHECK(h.counts.back() == 1);
  CHECK(h.total() == 4);
}

TEST_CASE("score bins of width 0.1") {
  CHECK(score_bin(0.0) == 0);
  CHECK(score_bin(0.0999) == 0);
  CHECK(score_bin(0.1) == 1);
  CHECK(score_bin(0.8) == 8);
  CHECK(score_bin(0.7999999) == 7);
  CHECK(score_bin(1.0) == 9);
  CHECK(score_bin(-0.4) == 0);
}

TEST_CASE("distributions sum to one hundred percent") {
  const auto d = make_distribution("x", CategoryKind::Negative, {0.05, 0.15, 0.15, 0.95, 1.0, 0.33, 0.71});
  const double total = std::accumulate(d.percentages.begin(), d.percentages.end(), 0.0);
  CHECK(std::abs(total - 100.0) < 1e-9);
  CHECK(d.counts[1] == 2);
  CHECK(d.counts[9] == 2);
  CHECK_THROWS(make_distribution("e", CategoryKind::Negative, {}));
}

TEST_CASE("separated calibration suggests a threshold in the gap") {
  std::map<std::string, std::vector<double>> s;
  s["vi_label"] = {0.91, 0.93, 0.95, 0.97, 0.99};
  s["syn_eng"] = {0.85, 0.9};
  s["contra_vie"] = {0.1, 0.2, 0.25, 0.3};
  s["unrelated_vie"] = {0.0, 0.05, 0.12};
  const auto r = calibrate_scores(s);
  CHECK(r.suggested_threshold > 0.3);
  CHECK(r.suggested_threshold < 0.91);
  CHECK_FALSE(r.overlap);
  CHECK(r.warnings.empty());
  CHECK(r.distributions.size() == 4);
}

TEST_CASE("overlapping calibration is flagged") {
  std::map<std::string, std::vector<double>> s;
  s["vi_label"] = {0.5, 0.6, 0.7, 0.9};
  s["contra_vie"] = {0.6, 0.7, 0.8, 0.85};
  const auto r = calibrate_scores(s);
  CHECK(r.overlap);
  CHECK_FALSE(r.warnings.empty());
  s["empty"] = {};
  CHECK_THROWS_AS(calibrate_scores(s), std::invalid_argument);
}

TEST_CASE("cost estimate") {
  const auto c = estimate_cost(4'620'730'232, 3800, 4, 700);
  CHECK(std::abs(c.single_pass_seconds - 1'215'981.64) < 0.01);
  CHECK(std::abs(c.seconds - 2'431'963.28) < 0.01);
  CHECK(std::abs(c.hours - 675.54) < 0.01);
  CHECK(std::abs(c.days - 28.14) < 0.01);

  const auto zero = estimate_cost(0, 3800, 4, 700);
  CHECK(zero.seconds == 0.0);
  CHECK(zero.energy_kwh == 0.0);

  // 3.6e6 s on one 1000 W GPU is 1000 kWh; duplex 1 keeps the seconds as is.
  const auto unit = estimate_cost(3'600'000, 1.0, 1, 1000, 1.0);
  CHECK(unit.energy_kwh == doctest::Approx(1000.0));
  CHECK_THROWS_AS(estimate_cost(10, 0.0, 1, 1), std::invalid_argument);
}
