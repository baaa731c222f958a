#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "benchforge/core.hpp"

namespace benchforge {

// Task-shaped records. Labels are kept as raw JSON values so that integer
// and string labels round-trip unchanged.

struct CorpusDoc {
  std::string id;
  std::string title;
  std::string text;
  bool operator==(const CorpusDoc&) const = default;
};

struct Query {
  std::string id;
  std::string text;
  bool operator==(const Query&) const = default;
};

struct Qrel {
  std::string query_id;
  std::string corpus_id;
  int score = 0;
  bool operator==(const Qrel&) const = default;
};

struct RetrievalData {
  std::vector<CorpusDoc> corpus;
  std::vector<Query> queries;
  std::map<std::string, std::vector<Qrel>> qrels;  // split -> judgments
  bool operator==(const RetrievalData&) const = default;
};

struct ClassificationRecord {
  std::string id;
  std::string text;
  nlohmann::json label;
  bool operator==(const ClassificationRecord&) const = default;
};

struct ClusteringRecord {
  std::string id;
  std::vector<std::string> sentences;
  std::vector<nlohmann::json> labels;
  bool operator==(const ClusteringRecord&) const = default;
};

struct PairRecord {
  std::string id;
  std::string sentence1;
  std::string sentence2;
  int label = 0;
  bool operator==(const PairRecord&) const = default;
};

struct RerankingRecord {
  std::string id;
  std::string query;
  std::vector<std::string> positive;
  std::vector<std::string> negative;
  bool operator==(const RerankingRecord&) const = default;
};

struct StsRecord {
  std::string id;
  std::string sentence1;
  std::string sentence2;
  double score = 0.0;
  bool operator==(const StsRecord&) const = default;
};

template <class Record>
using SplitMap = std::map<std::string, std::vector<Record>>;

using DatasetBody = std::variant<RetrievalData, SplitMap<ClassificationRecord>,
                                 SplitMap<ClusteringRecord>, SplitMap<PairRecord>,
                                 SplitMap<RerankingRecord>, SplitMap<StsRecord>>;

struct DatasetManifest {
  std::string dataset_id;
  TaskType task = TaskType::Classification;
  std::string language = "eng_Latn";
  std::string license;
  std::vector<std::string> splits;
  bool operator==(const DatasetManifest&) const = default;
};

struct TaskDataset {
  DatasetManifest manifest;
  DatasetBody body;

  TaskType task() const { return manifest.task; }
  bool operator==(const TaskDataset&) const = default;

  /// Record collections used for kept/dropped bookkeeping. Retrieval exposes
  /// "corpus" and "queries"; the other tasks expose their splits.
  std::map<std::string, std::size_t> record_counts() const;
  std::size_t total_records() const;
};

/// Creates an empty body of the right alternative for a task.
DatasetBody empty_body(TaskType task);

struct DatasetIssue {
  std::string file;
  std::size_t line = 0;  // 1-based; 0 when not tied to a line
  std::string field;
  std::string message;
  std::string to_string() const;
};

class DatasetError : public std::runtime_error {
 public:
  explicit DatasetError(std::vector<DatasetIssue> issues);
  const std::vector<DatasetIssue>& issues() const { return issues_; }

 private:
  std::vector<DatasetIssue> issues_;
};

/// Checks the per-task invariants (referential integrity, label and score
/// ranges, non-empty reranking positives, unique ids).
std::vector<DatasetIssue> check_dataset(const TaskDataset& ds);

TaskDataset load_dataset(const std::filesystem::path& manifest_path);
/// Writes the split files plus `manifest.json` into `out_dir`; returns the manifest path.
std::filesystem::path write_dataset(const TaskDataset& ds, const std::filesystem::path& out_dir);

/// Record id of a unit: "<split>/<id>" for split-based tasks, "queries/<id>"
/// and "corpus/<id>" for retrieval.
std::vector<SequenceUnit> decompose(const TaskDataset& ds,
                                    const std::set<std::string>& splits_filter);

enum class DropReason { UnitFailed, OrphanedReference, EmptyAfterFilter };
std::string_view to_string(DropReason reason);

struct DropEntry {
  std::string collection;  // split, or corpus/queries for retrieval
  std::string record_id;
  DropReason reason = DropReason::UnitFailed;
  std::string stage;
  bool operator==(const DropEntry&) const = default;
};

using DropLog = std::vector<DropEntry>;

struct RecomposeResult {
  TaskDataset dataset;
  DropLog drops;
};

/// Applies translations and the per-task drop policy. Units of processed
/// splits need a verdict; units elsewhere keep their text unless a
/// translation is supplied. Throws std::invalid_argument on a missing verdict.
RecomposeResult recompose(const TaskDataset& ds, const std::map<std::string, std::string>& translations,
                          const std::map<std::string, ValidationVerdict>& verdicts,
                          const std::set<std::string>& processed_splits);

}  // namespace benchforge
