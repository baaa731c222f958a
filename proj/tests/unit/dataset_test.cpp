#include <doctest.h>

#include <fstream>

#include "benchforge/dataset.hpp"
#include "fixtures.hpp"

using namespace benchforge;
namespace fs = std::filesystem;

namespace {

void write(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << content;
}

fs::path retrieval_fixture(const fs::path& dir) {
  write(dir / "manifest.json",
        R"({"dataset_id":"scifact-vn","task":"Retrieval","language":"eng_Latn","license":"cc-by-4.0","splits":["test"]})");
  write(dir / "corpus.jsonl",
        "{\"_id\":\"d1\",\"title\":\"Cells\",\"text\":\"Cells divide.\"}\n"
        "{\"_id\":\"d2\",\"title\":\"Stars\",\"text\":\"Stars burn.\"}\n"
        "{\"_id\":\"d3\",\"title\":\"Rivers\",\"text\":\"Rivers flow.\"}\n");
  write(dir / "queries.jsonl", "{\"_id\":\"q1\",\"text\":\"Do cells divide?\"}\n{\"_id\":\"q2\",\"text\":\"Why do stars burn?\"}\n");
  write(dir / "qrels" / "test.tsv", "query-id\tcorpus-id\tscore\nq1\td1\t1\nq2\td2\t1\nq2\td3\t1\n");
  return dir / "manifest.json";
}

std::map<std::string, ValidationVerdict> verdicts_for(const std::vector<SequenceUnit>& units,
                                                      const std::set<std::string>& failing) {
  std::map<std::string, ValidationVerdict> out;
  for (const auto& u : units) {
    if (failing.contains(u.unit_id)) {
      out[u.unit_id] = ValidationVerdict::from_checks(u.unit_id, CheckStatus::Pass, 0.5, CheckStatus::Fail,
                                                      std::nullopt, CheckStatus::Skipped, "below_threshold");
    } else {
      out[u.unit_id] = ValidationVerdict::from_checks(u.unit_id, CheckStatus::Pass, 0.9, CheckStatus::Pass, 0.9,
                                                      CheckStatus::Pass);
    }
  }
  return out;
}

std::map<std::string, std::string> marked(const std::vector<SequenceUnit>& units) {
  std::map<std::string, std::string> out;
  for (const auto& u : units) out[u.unit_id] = "VI:" + u.source_text;
  return out;
}

}  // namespace

TEST_CASE("retrieval fixture loads") {
  const auto dir = fixtures::scratch_dir("ret");
  const auto ds = load_dataset(retrieval_fixture(dir));
  CHECK(ds.task() == TaskType::Retrieval);
  const auto& data = std::get<RetrievalData>(ds.body);
  CHECK(data.corpus.size() == 3);
  CHECK(data.queries.size() == 2);
  CHECK(data.qrels.at("test").size() == 3);
  CHECK(ds.record_counts().at("corpus") == 3);
  CHECK(ds.total_records() == 5);
}

TEST_CASE("schema errors name the file, line and field") {
  const auto dir = fixtures::scratch_dir("sts");
  write(dir / "manifest.json", R"({"dataset_id":"sts","task":"STS","language":"eng_Latn","license":"","splits":["test"]})");
  write(dir / "test.jsonl",
        "{\"id\":\"a\",\"sentence1\":\"x\",\"sentence2\":\"y\",\"score\":3.0}\n"
        "{\"id\":\"b\",\"sentence1\":\"x\",\"sentence2\":\"y\",\"score\":7.2}\n");
  try {
    load_dataset(dir / "manifest.json");
    FAIL("expected DatasetError");
  } catch (const DatasetError& e) {
    REQUIRE(e.issues().size() == 1);
    CHECK(e.issues()[0].line == 2);
    CHECK(e.issues()[0].field == "score");
  }
}

TEST_CASE("dangling qrels and unknown tasks are rejected") {
  const auto dir = fixtures::scratch_dir("dangling");
  retrieval_fixture(dir);
  write(dir / "qrels" / "test.tsv", "query-id\tcorpus-id\tscore\nq1\td9\t1\n");
  CHECK_THROWS_AS(load_dataset(dir / "manifest.json"), DatasetError);

  const auto bad = fixtures::scratch_dir("task");
  write(bad / "manifest.json", R"({"dataset_id":"x","task":"Summarization","language":"eng_Latn","splits":["test"]})");
  CHECK_THROWS_AS(load_dataset(bad / "manifest.json"), DatasetError);
}

TEST_CASE("decomposition counts one unit per translatable field") {
  const auto dir = fixtures::scratch_dir("dec");
  const auto ds = load_dataset(retrieval_fixture(dir));
  // Two query texts plus title and text for each of three documents.
  CHECK(decompose(ds, {"test"}).size() == 2 + 3 * 2);

  TaskDataset rr;
  rr.manifest = {"rr", TaskType::Reranking, "eng_Latn", "", {"test"}};
  rr.body = SplitMap<RerankingRecord>{{"test", {{"r1", "q", {"p1", "p2"}, {"n1", "n2", "n3"}}}}};
  CHECK(decompose(rr, {"test"}).size() == 6);

  TaskDataset sts;
  sts.manifest = {"sts", TaskType::STS, "eng_Latn", "", {"test"}};
  sts.body = SplitMap<StsRecord>{{"test", {{"s1", "a", "b", 2.5}}}};
  const auto units = decompose(sts, {"test"});
  REQUIRE(units.size() == 2);
  CHECK(units[0].field_path.field == "sentence1");
  CHECK(units[0].record_id == "test/s1");
  CHECK(decompose(sts, {"dev"}).empty());
}

TEST_CASE("keeping every unit only replaces texts") {
  for (TaskType task : kAllTasks) {
    const auto ds = fixtures::random_dataset(task, 6, 3);
    const auto units = decompose(ds, {"test"});
    const auto r = recompose(ds, marked(units), verdicts_for(units, {}), {"test"});
    CHECK(r.drops.empty());
    CHECK(r.dataset.record_counts() == ds.record_counts());
    // Translating back by stripping the marker gives the input again.
    const auto again = decompose(r.dataset, {"test"});
    REQUIRE(again.size() == units.size());
    for (std::size_t i = 0; i < units.size(); ++i) CHECK(again[i].source_text == "VI:" + units[i].source_text);
  }
}

TEST_CASE("a failed document that was a query's only judgment orphans the query") {
  const auto dir = fixtures::scratch_dir("orphan");
  const auto ds = load_dataset(retrieval_fixture(dir));
  const auto units = decompose(ds, {"test"});
  std::set<std::string> failing;
  for (const auto& u : units) {
    if (u.record_id == "corpus/d1" && u.field_path.field == "text") failing.insert(u.unit_id);
  }
  const auto r = recompose(ds, marked(units), verdicts_for(units, failing), {"test"});
  const auto& data = std::get<RetrievalData>(r.dataset.body);
  CHECK(data.corpus.size() == 2);
  CHECK(data.queries.size() == 1);
  REQUIRE(r.drops.size() == 2);
  CHECK(r.drops[1].collection == "queries");
  CHECK(r.drops[1].record_id == "q1");
  CHECK(r.drops[1].reason == DropReason::OrphanedReference);
}

TEST_CASE("reranking drop policy") {
  TaskDataset rr;
  rr.manifest = {"rr", TaskType::Reranking, "eng_Latn", "", {"test"}};
  rr.body = SplitMap<RerankingRecord>{{"test",
                                       {{"a", "query a", {"pa"}, {"na1", "na2"}},
                                        {"b", "query b", {"pb1", "pb2"}, {"nb"}},
                                        {"c", "query c", {"pc"}, {"nc"}}}}};
  const auto units = decompose(rr, {"test"});
  std::set<std::string> failing;
  for (const auto& u : units) {
    if (u.record_id == "test/a" && u.field_path.field == "query") failing.insert(u.unit_id);
    if (u.record_id == "test/b" && u.field_path.field == "positive" && u.field_path.index == 0) failing.insert(u.unit_id);
    if (u.record_id == "test/c" && u.field_path.field == "positive") failing.insert(u.unit_id);
  }
  const auto r = recompose(rr, marked(units), verdicts_for(units, failing), {"test"});
  const auto& kept = std::get<SplitMap<RerankingRecord>>(r.dataset.body).at("test");
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].id == "b");
  CHECK(kept[0].positive == std::vector<std::string>{"VI:pb2"});
  REQUIRE(r.drops.size() == 2);
  CHECK(r.drops[0].reason == DropReason::UnitFailed);
  CHECK(r.drops[1].reason == DropReason::EmptyAfterFilter);
}

TEST_CASE("missing verdicts are an error") {
  const auto ds = fixtures::random_dataset(TaskType::STS, 3, 1);
  const auto units = decompose(ds, {"test"});
  auto v = verdicts_for(units, {});
  v.erase(v.begin());
  CHECK_THROWS_AS(recompose(ds, marked(units), v, {"test"}), std::invalid_argument);
}

TEST_CASE("write then load is the identity for every task") {
  for (TaskType task : kAllTasks) {
    const auto ds = fixtures::random_dataset(task, 5, 17);
    const auto dir = fixtures::scratch_dir("rt");
    const auto manifest = write_dataset(ds, dir);
    CHECK(load_dataset(manifest) == ds);
  }
}

TEST_CASE("empty splits are written and listed") {
  TaskDataset ds;
  ds.manifest = {"empty", TaskType::Classification, "vie_Latn", "", {"test"}};
  ds.body = SplitMap<ClassificationRecord>{{"test", {}}};
  const auto dir = fixtures::scratch_dir("empty");
  const auto manifest = write_dataset(ds, dir);
  CHECK(fs::exists(dir / "test.jsonl"));
  CHECK(fs::file_size(dir / "test.jsonl") == 0);
  CHECK(load_dataset(manifest) == ds);
}
