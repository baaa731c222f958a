#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "benchforge/backends.hpp"
#include "benchforge/core.hpp"
#include "benchforge/dataset.hpp"

namespace benchforge {

enum class PosEncoding { APE, RoPE };
std::string_view to_string(PosEncoding p);
std::optional<PosEncoding> parse_pos_encoding(std::string_view name);

struct ModelCard {
  std::string name;
  std::int64_t params = 0;
  int dim = 0;
  PosEncoding pos_encoding = PosEncoding::APE;
  bool instruct_tuned = false;
  std::map<TaskType, std::string> task_instructions;  // used only when instruct_tuned

  bool operator==(const ModelCard&) const = default;
};

/// Throws std::invalid_argument when dim < 1 or params < 0.
void validate_model_card(const ModelCard& card);
nlohmann::ordered_json model_card_to_json(const ModelCard& card);
ModelCard model_card_from_json(const nlohmann::json& j);
ModelCard load_model_card(const std::filesystem::path& path);

/// "7B", "560M", "33.4M" style rendering of a parameter count.
std::string format_params(std::int64_t params);

/// Text placed before instruct-tuned queries, e.g. "Instruct: ...\nQuery: ".
/// Empty for other models or tasks without an instruction.
std::string instruction_prefix(const ModelCard& card, TaskType task);

struct TaskResult {
  TaskType task = TaskType::Classification;
  std::string dataset_id;
  double main_metric = 0.0;  // fraction; reported x100
  std::map<std::string, double> metrics;
  std::vector<std::string> warnings;

  bool operator==(const TaskResult&) const = default;
};

/// nDCG@10, accuracy, AP, V-measure, MAP, Spearman.
std::string_view main_metric_name(TaskType task);

struct EvalOptions {
  std::string split = "test";
  std::string train_split = "train";
  std::size_t ndcg_k = 10;
  std::size_t recall_k = 100;
  std::size_t mrr_k = 10;
  int logreg_max_iter = 100;
  double logreg_l2 = 1.0;
  int kmeans_max_iter = 300;
  int kmeans_restarts = 10;
  std::uint64_t seed = 42;
};

/// One text to embed. `key` is "<dataset>/<record id>/<field path>" and lets
/// precomputed vectors be matched by id.
struct TextItem {
  std::string key;
  std::string text;
  bool is_query = false;
};

class Encoder {
 public:
  virtual ~Encoder() = default;
  /// One vector per item, in order.
  virtual std::vector<std::vector<double>> encode(std::span<const TextItem> items, TaskType task) = 0;
};

/// Embeds through a backend; instruct-tuned cards get the task instruction
/// prepended to query items.
class BackendEncoder final : public Encoder {
 public:
  BackendEncoder(std::shared_ptr<EmbeddingBackend> backend, ModelCard card, std::size_t batch_size = 64);
  std::vector<std::vector<double>> encode(std::span<const TextItem> items, TaskType task) override;

 private:
  std::shared_ptr<EmbeddingBackend> backend_;
  ModelCard card_;
  std::size_t batch_size_;
};

/// Vectors from a line-delimited file of {"id": ..., "vector": [...]}
/// (or {"text": ..., "vector": [...]}). Items are looked up by key, then by text.
class PrecomputedEncoder final : public Encoder {
 public:
  static PrecomputedEncoder load(const std::filesystem::path& path);
  void add(std::string id, std::vector<double> v);
  void add_text(std::string text, std::vector<double> v);
  std::vector<std::vector<double>> encode(std::span<const TextItem> items, TaskType task) override;
  std::size_t size() const { return by_id_.size() + by_text_.size(); }

 private:
  std::map<std::string, std::vector<double>> by_id_;
  std::map<std::string, std::vector<double>> by_text_;
  std::size_t dim_ = 0;
};

/// Applies a positive factor to every vector of another encoder.
class ScaledEncoder final : public Encoder {
 public:
  ScaledEncoder(Encoder& inner, double factor) : inner_(inner), factor_(factor) {}
  std::vector<std::vector<double>> encode(std::span<const TextItem> items, TaskType task) override;

 private:
  Encoder& inner_;
  double factor_;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

TaskResult evaluate_retrieval(Encoder& enc, const TaskDataset& ds, const EvalOptions& opts = {});
TaskResult evaluate_classification(Encoder& enc, const TaskDataset& ds, const EvalOptions& opts = {});
TaskResult evaluate_pair_classification(Encoder& enc, const TaskDataset& ds, const EvalOptions& opts = {});
TaskResult evaluate_clustering(Encoder& enc, const TaskDataset& ds, const EvalOptions& opts = {});
TaskResult evaluate_reranking(Encoder& enc, const TaskDataset& ds, const EvalOptions& opts = {});
TaskResult evaluate_sts(Encoder& enc, const TaskDataset& ds, const EvalOptions& opts = {});
/// Dispatches on the dataset's task.
TaskResult evaluate(Encoder& enc, const TaskDataset& ds, const EvalOptions& opts = {});

struct BenchmarkRow {
  ModelCard model;
  std::map<TaskType, double> task_averages;  // percentages, full precision
  std::map<TaskType, std::size_t> dataset_counts;
  double overall = 0.0;  // unweighted mean of the task averages present

  bool operator==(const BenchmarkRow&) const = default;
};

/// Per-task mean of main metrics (x100) and their unweighted mean.
BenchmarkRow aggregate(std::span<const TaskResult> results, const ModelCard& model);
/// Same aggregation from per-task averages already expressed in percent.
BenchmarkRow aggregate_task_averages(const std::map<TaskType, double>& task_averages, const ModelCard& model);

/// Aligned text table: Model, Size, Dim, Type, six task columns, Avg.
/// Instruct-tuned models are marked with '*'.
std::string render_benchmark_table(std::span<const BenchmarkRow> rows);

struct ResultsFile {
  ModelCard model;
  std::vector<TaskResult> results;
};

nlohmann::ordered_json results_to_json(const ModelCard& model, std::span<const TaskResult> results);
ResultsFile results_from_json(const nlohmann::json& j);
ResultsFile load_results(const std::filesystem::path& path);
nlohmann::ordered_json benchmark_to_json(std::span<const BenchmarkRow> rows);

/// A table row from either a results file or a file holding a model card
/// and "task_averages" in percent.
BenchmarkRow load_benchmark_row(const std::filesystem::path& path);

}  // namespace benchforge
