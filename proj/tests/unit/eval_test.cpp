#include <doctest.h>

#include <cmath>

#include "benchforge/eval.hpp"
#include "fixtures.hpp"

using namespace benchforge;

namespace {

ModelCard card(const std::string& name = "toy", bool instruct = false) {
  ModelCard c;
  c.name = name;
  c.params = 560'000'000;
  c.dim = 2;
  c.instruct_tuned = instruct;
  return c;
}

TaskDataset make(TaskType task, DatasetBody body, std::vector<std::string> splits = {"test"}) {
  TaskDataset ds;
  ds.manifest = {"toy", task, "vie_Latn", "", std::move(splits)};
  ds.body = std::move(body);
  return ds;
}

// Unit vector at angle `deg` degrees.
std::vector<double> at(double deg) {
  const double r = deg * M_PI / 180.0;
  return {std::cos(r), std::sin(r)};
}

// Records the texts it is asked to embed.
class RecordingBackend final : public EmbeddingBackend {
 public:
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
    std::vector<EmbeddingVector> out;
    for (const auto& t : texts) {
      seen.push_back(t);
      out.push_back({{1.0, static_cast<double>(t.size())}, "rec"});
    }
    return out;
  }
  std::vector<std::string> seen;
};

}  // namespace

TEST_CASE("main metric names per task") {
  CHECK(main_metric_name(TaskType::Retrieval) == "ndcg_at_10");
  CHECK(main_metric_name(TaskType::Classification) == "accuracy");
  CHECK(main_metric_name(TaskType::PairClassification) == "ap");
  CHECK(main_metric_name(TaskType::Clustering) == "v_measure");
  CHECK(main_metric_name(TaskType::Reranking) == "map");
  CHECK(main_metric_name(TaskType::STS) == "spearman");
}

TEST_CASE("retrieval nDCG on a two-document ranking") {
  RetrievalData data;
  data.corpus = {{"d1", "", "first doc"}, {"d2", "", "second doc"}};
  data.queries = {{"q1", "query"}, {"q2", "unjudged query"}};
  data.qrels["test"] = {{"q1", "d2", 1}};
  PrecomputedEncoder enc;
  enc.add_text("query", at(0));
  enc.add_text("first doc", at(10));   // ranked first but irrelevant
  enc.add_text("second doc", at(40));  // relevant at rank 2
  const auto r = evaluate(enc, make(TaskType::Retrieval, data));
  CHECK(std::abs(r.main_metric - 1.0 / std::log2(3.0)) < 1e-12);
  CHECK(r.metrics.at("mrr_at_10") == doctest::Approx(0.5));
  CHECK(r.metrics.at("queries") == 1);
}

TEST_CASE("retrieval query without relevant documents is excluded with a warning") {
  RetrievalData data;
  data.corpus = {{"d1", "", "doc"}};
  data.queries = {{"q1", "a"}, {"q2", "b"}};
  data.qrels["test"] = {{"q1", "d1", 1}, {"q2", "d1", 0}};
  PrecomputedEncoder enc;
  for (const char* t : {"doc", "a", "b"}) enc.add_text(t, at(0));
  const auto r = evaluate(enc, make(TaskType::Retrieval, data));
  CHECK(r.main_metric == doctest::Approx(1.0));
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("q2") != std::string::npos);
}

TEST_CASE("classification: separable, flipped and constant embeddings") {
  SplitMap<ClassificationRecord> m;
  for (int i = 0; i < 8; ++i) {
    const int label = i % 2;
    m["train"].push_back({"t" + std::to_string(i), "train " + std::to_string(i), label});
    m["test"].push_back({"s" + std::to_string(i), "test " + std::to_string(i), label});
  }
  PrecomputedEncoder sep, constant;
  for (const auto& split : {"train", "test"}) {
    for (const auto& r : m[split]) {
      sep.add_text(r.text, r.label.get<int>() == 0 ? at(5) : at(175));
      constant.add_text(r.text, at(30));
    }
  }
  CHECK(evaluate(sep, make(TaskType::Classification, m, {"train", "test"})).main_metric == doctest::Approx(1.0));

  auto flipped = m;
  for (auto& r : flipped["test"]) r.label = 1 - r.label.get<int>();
  CHECK(evaluate(sep, make(TaskType::Classification, flipped, {"train", "test"})).main_metric == doctest::Approx(0.0));

  const auto a = evaluate(constant, make(TaskType::Classification, m, {"train", "test"}));
  const auto b = evaluate(constant, make(TaskType::Classification, m, {"train", "test"}));
  CHECK(a.main_metric == doctest::Approx(0.5));
  CHECK(a == b);

  auto unseen = m;
  unseen["test"][0].label = 7;
  CHECK_THROWS_AS(evaluate(sep, make(TaskType::Classification, unseen, {"train", "test"})), EvalError);
}

TEST_CASE("pair classification AP") {
  SplitMap<PairRecord> m;
  m["test"] = {{"p1", "a", "b", 1}, {"p2", "c", "d", 0}};
  PrecomputedEncoder enc;
  enc.add_text("a", at(0));
  enc.add_text("b", at(78.46));  // cos ~ 0.2
  enc.add_text("c", at(0));
  enc.add_text("d", at(25.84));  // cos ~ 0.9
  CHECK(evaluate(enc, make(TaskType::PairClassification, m)).main_metric == doctest::Approx(0.5));

  m["test"][1].label = 1;
  CHECK_THROWS_AS(evaluate(enc, make(TaskType::PairClassification, m)), EvalError);
}

TEST_CASE("clustering V-measure") {
  SplitMap<ClusteringRecord> m;
  m["test"] = {{"c1", {"a1", "a2", "a3", "b1", "b2", "b3"}, {"x", "x", "x", "y", "y", "y"}}};
  PrecomputedEncoder separated, identical;
  for (const char* t : {"a1", "a2", "a3"}) separated.add_text(t, at(0));
  for (const char* t : {"b1", "b2", "b3"}) separated.add_text(t, at(90));
  for (const char* t : {"a1", "a2", "a3", "b1", "b2", "b3"}) identical.add_text(t, at(45));
  CHECK(evaluate(separated, make(TaskType::Clustering, m)).main_metric == doctest::Approx(1.0));
  CHECK(evaluate(identical, make(TaskType::Clustering, m)).main_metric == doctest::Approx(0.0));
}

TEST_CASE("reranking MAP") {
  SplitMap<RerankingRecord> m;
  m["test"] = {{"r1", "q", {"pos"}, {"n1", "n2"}}};
  PrecomputedEncoder enc;
  enc.add_text("q", at(0));
  enc.add_text("n1", at(10));
  enc.add_text("pos", at(20));
  enc.add_text("n2", at(30));
  CHECK(evaluate(enc, make(TaskType::Reranking, m)).main_metric == doctest::Approx(0.5));

  m["test"] = {{"r1", "q", {"pos", "n2"}, {"n1"}}};  // positives at ranks 2 and 3
  CHECK(evaluate(enc, make(TaskType::Reranking, m)).main_metric == doctest::Approx((0.5 + 2.0 / 3.0) / 2.0));
}

TEST_CASE("STS Spearman") {
  SplitMap<StsRecord> m;
  PrecomputedEncoder enc;
  for (int i = 0; i < 5; ++i) {
    const auto a = "a" + std::to_string(i), b = "b" + std::to_string(i);
    m["test"].push_back({"s" + std::to_string(i), a, b, static_cast<double>(i)});
    enc.add_text(a, at(0));
    enc.add_text(b, at(80 - 15 * i));
  }
  CHECK(evaluate(enc, make(TaskType::STS, m)).main_metric == doctest::Approx(1.0));
  auto reversed = m;
  for (auto& r : reversed["test"]) r.score = 5.0 - r.score;
  CHECK(evaluate(enc, make(TaskType::STS, reversed)).main_metric == doctest::Approx(-1.0));
  m["test"].resize(1);
  CHECK_THROWS_AS(evaluate(enc, make(TaskType::STS, m)), EvalError);
}

TEST_CASE("instruct-tuned models get the instruction on queries only") {
  auto c = card("inst", true);
  c.task_instructions[TaskType::Reranking] = "Rank passages for the question";
  auto backend = std::make_shared<RecordingBackend>();
  BackendEncoder enc(backend, c);
  SplitMap<RerankingRecord> m;
  m["test"] = {{"r1", "question", {"pos"}, {"neg"}}};
  evaluate(enc, make(TaskType::Reranking, m));
  CHECK(std::find(backend->seen.begin(), backend->seen.end(),
                  "Instruct: Rank passages for the question\nQuery: question") != backend->seen.end());
  CHECK(std::find(backend->seen.begin(), backend->seen.end(), "pos") != backend->seen.end());
  CHECK(instruction_prefix(card("plain"), TaskType::Reranking).empty());
}

TEST_CASE("aggregation reproduces printed averages") {
  const std::map<TaskType, double> e5 = {{TaskType::Retrieval, 40.88}, {TaskType::Classification, 73.39},
                                         {TaskType::PairClassification, 84.47}, {TaskType::Clustering, 52.96},
                                         {TaskType::Reranking, 73.28}, {TaskType::STS, 82.94}};
  const std::map<TaskType, double> qwen = {{TaskType::Retrieval, 46.05}, {TaskType::Classification, 70.76},
                                           {TaskType::PairClassification, 72.09}, {TaskType::Clustering, 53.15},
                                           {TaskType::Reranking, 74.28}, {TaskType::STS, 78.73}};
  CHECK(std::abs(aggregate_task_averages(e5, card()).overall - 67.99) < 0.005);
  CHECK(std::abs(aggregate_task_averages(qwen, card()).overall - 65.84) < 0.005);
  const std::map<TaskType, double> single = {{TaskType::STS, 12.5}};
  CHECK(aggregate_task_averages(single, card()).overall == 12.5);
}

TEST_CASE("aggregation from task results averages per task first") {
  std::vector<TaskResult> results;
  results.push_back({TaskType::STS, "a", 0.5, {}, {}});
  results.push_back({TaskType::STS, "b", 0.7, {}, {}});
  results.push_back({TaskType::Retrieval, "c", 0.3, {}, {}});
  const auto row = aggregate(results, card());
  CHECK(row.task_averages.at(TaskType::STS) == doctest::Approx(60.0));
  CHECK(row.dataset_counts.at(TaskType::STS) == 2);
  CHECK(row.overall == doctest::Approx(45.0));
}

TEST_CASE("benchmark table marks instruct models and prints two decimals") {
  const std::map<TaskType, double> avgs = {{TaskType::Retrieval, 40.88}, {TaskType::Classification, 73.39},
                                           {TaskType::PairClassification, 84.47}, {TaskType::Clustering, 52.96},
                                           {TaskType::Reranking, 73.28}, {TaskType::STS, 82.94}};
  const std::vector<BenchmarkRow> rows{aggregate_task_averages(avgs, card("m-e5-large-instruct", true))};
  const auto table = render_benchmark_table(rows);
  CHECK(table.find("m-e5-large-instruct*") != std::string::npos);
  CHECK(table.find("67.99") != std::string::npos);
  CHECK(table.find("560M") != std::string::npos);
}

TEST_CASE("parameter counts render compactly") {
  CHECK(format_params(7'000'000'000) == "7B");
  CHECK(format_params(1'500'000'000) == "1.5B");
  CHECK(format_params(33'400'000) == "33.4M");
  CHECK(format_params(560'000'000) == "560M");
}

TEST_CASE("model cards round trip and validate") {
  auto c = card("x", true);
  c.pos_encoding = PosEncoding::RoPE;
  c.task_instructions[TaskType::STS] = "Find similar sentences";
  CHECK(model_card_from_json(nlohmann::json::parse(model_card_to_json(c).dump())) == c);
  CHECK_THROWS_AS(model_card_from_json(nlohmann::json{{"name", "x"}, {"dim", 0}}), std::invalid_argument);
}

TEST_CASE("results files round trip") {
  std::vector<TaskResult> results{{TaskType::STS, "sts-vn", 0.81, {{"spearman", 0.81}, {"pearson", 0.8}}, {}}};
  const auto j = results_to_json(card(), results);
  const auto back = results_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.model == card());
  CHECK(back.results == results);
}
