#include "benchforge/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "benchforge/metrics.hpp"
#include "benchforge/text.hpp"

namespace benchforge {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(PosEncoding p) { return p == PosEncoding::APE ? "APE" : "RoPE"; }

std::optional<PosEncoding> parse_pos_encoding(std::string_view name) {
  const auto lower = text::to_lower_ascii(name);
  if (lower == "ape") return PosEncoding::APE;
  if (lower == "rope") return PosEncoding::RoPE;
  return std::nullopt;
}

void validate_model_card(const ModelCard& card) {
  if (card.name.empty()) throw std::invalid_argument("model card: name is empty");
  if (card.dim < 1) throw std::invalid_argument("model card: dim must be >= 1");
  if (card.params < 0) throw std::invalid_argument("model card: params must be >= 0");
}

ordered_json model_card_to_json(const ModelCard& card) {
  ordered_json j;
  j["name"] = card.name;
  j["params"] = card.params;
  j["dim"] = card.dim;
  j["pos_encoding"] = to_string(card.pos_encoding);
  j["instruct_tuned"] = card.instruct_tuned;
  j["task_instructions"] = ordered_json::object();
  for (const auto& [task, instr] : card.task_instructions) j["task_instructions"][std::string(to_string(task))] = instr;
  return j;
}

ModelCard model_card_from_json(const json& j) {
  ModelCard card;
  try {
    card.name = j.at("name").get<std::string>();
    card.params = j.value("params", std::int64_t{0});
    card.dim = j.at("dim").get<int>();
    const auto pos = parse_pos_encoding(j.value("pos_encoding", std::string("APE")));
    if (!pos) throw std::invalid_argument("model card: pos_encoding must be APE or RoPE");
    card.pos_encoding = *pos;
    card.instruct_tuned = j.value("instruct_tuned", false);
    const auto instructions = j.value("task_instructions", json::object());
    for (const auto& [name, instr] : instructions.items()) {
      const auto task = parse_task_type(name);
      if (!task) throw std::invalid_argument("model card: unknown task '" + name + "' in task_instructions");
      card.task_instructions[*task] = instr.get<std::string>();
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model card: ") + e.what());
  }
  validate_model_card(card);
  return card;
}

ModelCard load_model_card(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read model card " + path.string());
  try {
    return model_card_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string format_params(std::int64_t params) {
  const auto render = [](double v, const char* unit) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    std::string s = buf;
    if (s.ends_with(".0")) s.resize(s.size() - 2);
    return s + unit;
  };
  const auto p = static_cast<double>(params);
  if (p >= 1e9) return render(p / 1e9, "B");
  if (p >= 1e6) return render(p / 1e6, "M");
  if (p >= 1e3) return render(p / 1e3, "K");
  return std::to_string(params);
}

std::string instruction_prefix(const ModelCard& card, TaskType task) {
  if (!card.instruct_tuned) return {};
  const auto it = card.task_instructions.find(task);
  if (it == card.task_instructions.end() || it->second.empty()) return {};
  return "Instruct: " + it->second + "\nQuery: ";
}

std::string_view main_metric_name(TaskType task) {
  switch (task) {
    case TaskType::Retrieval:
      return "ndcg_at_10";
    case TaskType::Classification:
      return "accuracy";
    case TaskType::PairClassification:
      return "ap";
    case TaskType::Clustering:
      return "v_measure";
    case TaskType::Reranking:
      return "map";
    case TaskType::STS:
      return "spearman";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Encoders

BackendEncoder::BackendEncoder(std::shared_ptr<EmbeddingBackend> backend, ModelCard card, std::size_t batch_size)
    : backend_(std::move(backend)), card_(std::move(card)), batch_size_(std::max<std::size_t>(1, batch_size)) {}

std::vector<std::vector<double>> BackendEncoder::encode(std::span<const TextItem> items, TaskType task) {
  const auto prefix = instruction_prefix(card_, task);
  std::vector<std::vector<double>> out;
  out.reserve(items.size());
  for (std::size_t start = 0; start < items.size(); start += batch_size_) {
    const auto end = std::min(items.size(), start + batch_size_);
    std::vector<std::string> texts;
    for (std::size_t i = start; i < end; ++i) {
      texts.push_back(items[i].is_query ? prefix + items[i].text : items[i].text);
    }
    for (auto& v : backend_->embed(texts)) out.push_back(std::move(v.values));
  }
  return out;
}

PrecomputedEncoder PrecomputedEncoder::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read embeddings file " + path.string());
  PrecomputedEncoder enc;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (text::trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      auto v = j.at("vector").get<std::vector<double>>();
      if (j.contains("id")) {
        const auto& id = j.at("id");
        enc.add(id.is_string() ? id.get<std::string>() : id.dump(), std::move(v));
      } else {
        enc.add_text(text::nfc(j.at("text").get<std::string>()), std::move(v));
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return enc;
}

void PrecomputedEncoder::add(std::string id, std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("empty vector for '" + id + "'");
  if (dim_ != 0 && v.size() != dim_) throw std::invalid_argument("vector for '" + id + "' has a different dimension");
  dim_ = v.size();
  by_id_[std::move(id)] = std::move(v);
}

void PrecomputedEncoder::add_text(std::string text, std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("empty vector");
  if (dim_ != 0 && v.size() != dim_) throw std::invalid_argument("vector has a different dimension");
  dim_ = v.size();
  by_text_[std::move(text)] = std::move(v);
}

std::vector<std::vector<double>> PrecomputedEncoder::encode(std::span<const TextItem> items, TaskType) {
  std::vector<std::vector<double>> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    if (const auto it = by_id_.find(item.key); it != by_id_.end()) {
      out.push_back(it->second);
    } else if (const auto jt = by_text_.find(item.text); jt != by_text_.end()) {
      out.push_back(jt->second);
    } else {
      throw EvalError("no precomputed vector for '" + item.key + "'");
    }
  }
  return out;
}

std::vector<std::vector<double>> ScaledEncoder::encode(std::span<const TextItem> items, TaskType task) {
  auto out = inner_.encode(items, task);
  for (auto& v : out) {
    for (double& x : v) x *= factor_;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

std::string item_key(const TaskDataset& ds, const std::string& record_id, const FieldPath& path) {
  return ds.manifest.dataset_id + "/" + record_id + "/" + path.to_string();
}

// Encodes and L2-normalises, so every downstream metric only sees directions.
std::vector<std::vector<double>> encode_unit(Encoder& enc, std::span<const TextItem> items, TaskType task) {
  if (items.empty()) return {};
  auto raw = enc.encode(items, task);
  if (raw.size() != items.size()) throw EvalError("encoder returned the wrong number of vectors");
  std::vector<std::vector<double>> out;
  out.reserve(raw.size());
  const std::size_t dim = raw.front().size();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].size() != dim) throw EvalError("encoder returned vectors of different dimensions");
    try {
      out.push_back(metrics::l2_normalized(raw[i]));
    } catch (const std::invalid_argument&) {
      throw EvalError("zero or non-finite embedding for '" + items[i].key + "'");
    }
  }
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return std::clamp(s, -1.0, 1.0);
}

template <class Record>
const std::vector<Record>& split_records(const TaskDataset& ds, const std::string& split) {
  const auto* body = std::get_if<SplitMap<Record>>(&ds.body);
  if (!body) throw EvalError(ds.manifest.dataset_id + ": dataset body does not match its task");
  const auto it = body->find(split);
  if (it == body->end()) throw EvalError(ds.manifest.dataset_id + ": no '" + split + "' split");
  return it->second;
}

void require_task(const TaskDataset& ds, TaskType task) {
  if (ds.task() != task) {
    throw EvalError(ds.manifest.dataset_id + " is a " + std::string(to_string(ds.task())) + " dataset, not " +
                    std::string(to_string(task)));
  }
}

TaskResult make_result(const TaskDataset& ds) {
  TaskResult r;
  r.task = ds.task();
  r.dataset_id = ds.manifest.dataset_id;
  return r;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

TaskResult evaluate_retrieval(Encoder& enc, const TaskDataset& ds, const EvalOptions& opts) {
  require_task(ds, TaskType::Retrieval);
  const auto& data = std::get<RetrievalData>(ds.body);
  const auto qit = data.qrels.find(opts.split);
  if (qit == data.qrels.end()) throw EvalError(ds.manifest.dataset_id + ": no qrels for split '" + opts.split + "'");
  auto result = make_result(ds);

  std::map<std::string, std::map<std::string, int>> judged;
  for (const auto& q : qit->second) judged[q.query_id][q.corpus_id] = q.score;

  std::vector<const Query*> queries;
  for (const auto& q : data.queries) {
    const auto it = judged.find(q.id);
    if (it == judged.end()) continue;
    const bool any_relevant =
        std::any_of(it->second.begin(), it->second.end(), [](const auto& kv) { return kv.second > 0; });
    if (!any_relevant) {
      result.warnings.push_back("query " + q.id + " has no relevant documents; excluded");
      continue;
    }
    queries.push_back(&q);
  }
  if (queries.empty()) throw EvalError(ds.manifest.dataset_id + ": no query with relevant documents");

  std::vector<TextItem> q_items, d_items;
  for (const auto* q : queries) {
    q_items.push_back({item_key(ds, "queries/" + q->id, {"text", std::nullopt}), q->text, true});
  }
  for (const auto& d : data.corpus) {
    const auto body = d.title.empty() ? d.text : (d.text.empty() ? d.title : d.title + " " + d.text);
    d_items.push_back({item_key(ds, "corpus/" + d.id, {"doc", std::nullopt}), body, false});
  }
  const auto qv = encode_unit(enc, q_items, TaskType::Retrieval);
  const auto dv = encode_unit(enc, d_items, TaskType::Retrieval);

  std::vector<double> ndcg, map, recall, ndcg1, ndcg3, ndcg5, mrr;
  std::vector<double> scores(dv.size());
  std::vector<int> rel(dv.size());
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const auto& j = judged.at(queries[qi]->id);
    for (std::size_t di = 0; di < dv.size(); ++di) {
      scores[di] = dot(qv[qi], dv[di]);
      const auto it = j.find(data.corpus[di].id);
      rel[di] = it == j.end() ? 0 : it->second;
    }
    ndcg.push_back(metrics::ndcg_at_k(scores, rel, opts.ndcg_k));
    map.push_back(metrics::average_precision_ranked(scores, rel));
    recall.push_back(metrics::recall_at_k(scores, rel, opts.recall_k));
    ndcg1.push_back(metrics::ndcg_at_k(scores, rel, 1));
    ndcg3.push_back(metrics::ndcg_at_k(scores, rel, 3));
    ndcg5.push_back(metrics::ndcg_at_k(scores, rel, 5));
    mrr.push_back(metrics::reciprocal_rank_at_k(scores, rel, opts.mrr_k));
  }
  result.main_metric = mean(ndcg);
  result.metrics = {{"ndcg_at_" + std::to_string(opts.ndcg_k), result.main_metric},
                    {"map", mean(map)},
                    {"recall_at_" + std::to_string(opts.recall_k), mean(recall)},
                    {"ndcg_at_1", mean(ndcg1)},
                    {"ndcg_at_3", mean(ndcg3)},
                    {"ndcg_at_5", mean(ndcg5)},
                    {"mrr_at_" + std::to_string(opts.mrr_k), mean(mrr)},
                    {"queries", static_cast<double>(queries.size())}};
  return result;
}

TaskResult evaluate_classification(Encoder& enc, const TaskDataset& ds, const EvalOptions& opts) {
  require_task(ds, TaskType::Classification);
  const auto& train = split_records<ClassificationRecord>(ds, opts.train_split);
  const auto& test = split_records<ClassificationRecord>(ds, opts.split);
  if (train.empty() || test.empty()) throw EvalError(ds.manifest.dataset_id + ": empty train or test split");
  auto result = make_result(ds);

  std::map<std::string, int> classes;
  for (const auto& r : train) classes.emplace(r.label.dump(), 0);
  int next = 0;
  for (auto& [_, idx] : classes) idx = next++;
  if (classes.size() < 2) throw EvalError(ds.manifest.dataset_id + ": train split has a single class");

  const auto items_of = [&](const std::vector<ClassificationRecord>& recs, const std::string& split) {
    std::vector<TextItem> items;
    for (const auto& r : recs) items.push_back({item_key(ds, split + "/" + r.id, {"text", std::nullopt}), r.text, true});
    return items;
  };
  std::vector<int> y_train, y_test;
  for (const auto& r : train) y_train.push_back(classes.at(r.label.dump()));
  for (const auto& r : test) {
    const auto it = classes.find(r.label.dump());
    if (it == classes.end()) {
      throw EvalError(ds.manifest.dataset_id + ": test label " + r.label.dump() + " does not occur in the train split");
    }
    y_test.push_back(it->second);
  }
  const auto x_train = encode_unit(enc, items_of(train, opts.train_split), TaskType::Classification);
  const auto x_test = encode_unit(enc, items_of(test, opts.split), TaskType::Classification);

  metrics::LogisticRegression model;
  model.fit(x_train, y_train, static_cast<int>(classes.size()), {opts.logreg_max_iter, opts.logreg_l2});
  const auto predicted = model.predict(x_test);
  result.main_metric = metrics::accuracy(y_test, predicted);
  result.metrics = {{"accuracy", result.main_metric},
                    {"f1_macro", metrics::macro_f1(y_test, predicted, static_cast<int>(classes.size()))}};
  return result;
}

TaskResult evaluate_pair_classification(Encoder& enc, const TaskDataset& ds, const EvalOptions& opts) {
  require_task(ds, TaskType::PairClassification);
  const auto& recs = split_records<PairRecord>(ds, opts.split);
  auto result = make_result(ds);
  std::vector<TextItem> a, b;
  std::vector<int> labels;
  for (const auto& r : recs) {
    const auto rid = opts.split + "/" + r.id;
    a.push_back({item_key(ds, rid, {"sentence1", std::nullopt}), r.sentence1, true});
    b.push_back({item_key(ds, rid, {"sentence2", std::nullopt}), r.sentence2, true});
    labels.push_back(r.label);
  }
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) {
    throw EvalError(ds.manifest.dataset_id + ": gold labels have a single class; average precision is undefined");
  }
  const auto va = encode_unit(enc, a, TaskType::PairClassification);
  const auto vb = encode_unit(enc, b, TaskType::PairClassification);
  std::vector<double> sims;
  for (std::size_t i = 0; i < va.size(); ++i) sims.push_back(dot(va[i], vb[i]));
  result.main_metric = metrics::average_precision(sims, labels);
  const auto t = metrics::best_threshold_metrics(sims, labels);
  result.metrics = {{"ap", result.main_metric},
                    {"f1", t.best_f1},
                    {"f1_threshold", t.best_f1_threshold},
                    {"accuracy", t.best_accuracy},
                    {"accuracy_threshold", t.best_accuracy_threshold}};
  return result;
}

TaskResult evaluate_clustering(Encoder& enc, const TaskDataset& ds, const EvalOptions& opts) {
  require_task(ds, TaskType::Clustering);
  const auto& recs = split_records<ClusteringRecord>(ds, opts.split);
  auto result = make_result(ds);
  std::vector<double> scores;
  for (const auto& r : recs) {
    std::map<std::string, int> classes;
    std::vector<int> gold;
    for (const auto& l : r.labels) {
      const auto [it, _] = classes.emplace(l.dump(), static_cast<int>(classes.size()));
      gold.push_back(it->second);
    }
    const std::size_t k = classes.size();
    if (r.sentences.size() < k || r.sentences.empty()) {
      result.warnings.push_back("record " + r.id + " has fewer sentences than clusters; skipped");
      continue;
    }
    std::vector<TextItem> items;
    for (std::size_t i = 0; i < r.sentences.size(); ++i) {
      items.push_back({item_key(ds, opts.split + "/" + r.id, {"sentences", i}), r.sentences[i], true});
    }
    const auto vecs = encode_unit(enc, items, TaskType::Clustering);
    metrics::KMeansOptions kopts;
    kopts.k = k;
    kopts.max_iter = opts.kmeans_max_iter;
    kopts.restarts = opts.kmeans_restarts;
    kopts.seed = opts.seed;
    const auto clusters = metrics::kmeans(vecs, kopts);
    scores.push_back(metrics::v_measure(gold, clusters.labels).v_measure);
  }
  if (scores.empty()) throw EvalError(ds.manifest.dataset_id + ": no record could be clustered");
  result.main_metric = mean(scores);
  result.metrics = {{"v_measure", result.main_metric}, {"records", static_cast<double>(scores.size())}};
  return result;
}

TaskResult evaluate_reranking(Encoder& enc, const TaskDataset& ds, const EvalOptions& opts) {
  require_task(ds, TaskType::Reranking);
  const auto& recs = split_records<RerankingRecord>(ds, opts.split);
  auto result = make_result(ds);
  std::vector<double> aps, mrrs;
  for (const auto& r : recs) {
    if (r.positive.empty() || r.negative.empty()) {
      result.warnings.push_back("record " + r.id + " lacks positives or negatives; skipped");
      continue;
    }
    const auto rid = opts.split + "/" + r.id;
    std::vector<TextItem> items{{item_key(ds, rid, {"query", std::nullopt}), r.query, true}};
    std::vector<int> rel;
    for (std::size_t i = 0; i < r.positive.size(); ++i) {
      items.push_back({item_key(ds, rid, {"positive", i}), r.positive[i], false});
      rel.push_back(1);
    }
    for (std::size_t i = 0; i < r.negative.size(); ++i) {
      items.push_back({item_key(ds, rid, {"negative", i}), r.negative[i], false});
      rel.push_back(0);
    }
    const auto vecs = encode_unit(enc, items, TaskType::Reranking);
    std::vector<double> scores;
    for (std::size_t i = 1; i < vecs.size(); ++i) scores.push_back(dot(vecs[0], vecs[i]));
    aps.push_back(metrics::average_precision_ranked(scores, rel));
    mrrs.push_back(metrics::reciprocal_rank_at_k(scores, rel, opts.mrr_k));
  }
  if (aps.empty()) throw EvalError(ds.manifest.dataset_id + ": no rerankable record");
  result.main_metric = mean(aps);
  result.metrics = {{"map", result.main_metric}, {"mrr_at_" + std::to_string(opts.mrr_k), mean(mrrs)}};
  return result;
}

TaskResult evaluate_sts(Encoder& enc, const TaskDataset& ds, const EvalOptions& opts) {
  require_task(ds, TaskType::STS);
  const auto& recs = split_records<StsRecord>(ds, opts.split);
  if (recs.size() < 2) throw EvalError(ds.manifest.dataset_id + ": STS needs at least two pairs");
  auto result = make_result(ds);
  std::vector<TextItem> a, b;
  std::vector<double> gold;
  for (const auto& r : recs) {
    const auto rid = opts.split + "/" + r.id;
    a.push_back({item_key(ds, rid, {"sentence1", std::nullopt}), r.sentence1, true});
    b.push_back({item_key(ds, rid, {"sentence2", std::nullopt}), r.sentence2, true});
    gold.push_back(r.score);
  }
  const auto va = encode_unit(enc, a, TaskType::STS);
  const auto vb = encode_unit(enc, b, TaskType::STS);
  std::vector<double> sims;
  for (std::size_t i = 0; i < va.size(); ++i) sims.push_back(dot(va[i], vb[i]));
  const auto rho = metrics::spearman(sims, gold);
  if (!rho) throw EvalError(ds.manifest.dataset_id + ": Spearman correlation undefined (constant scores)");
  result.main_metric = *rho;
  result.metrics = {{"spearman", *rho}};
  if (const auto r = metrics::pearson(sims, gold)) result.metrics["pearson"] = *r;
  return result;
}

TaskResult evaluate(Encoder& enc, const TaskDataset& ds, const EvalOptions& opts) {
  switch (ds.task()) {
    case TaskType::Retrieval:
      return evaluate_retrieval(enc, ds, opts);
    case TaskType::Classification:
      return evaluate_classification(enc, ds, opts);
    case TaskType::PairClassification:
      return evaluate_pair_classification(enc, ds, opts);
    case TaskType::Clustering:
      return evaluate_clustering(enc, ds, opts);
    case TaskType::Reranking:
      return evaluate_reranking(enc, ds, opts);
    case TaskType::STS:
      return evaluate_sts(enc, ds, opts);
  }
  throw EvalError("unknown task");
}

// ---------------------------------------------------------------------------
// Aggregation and reporting

BenchmarkRow aggregate_task_averages(const std::map<TaskType, double>& task_averages, const ModelCard& model) {
  BenchmarkRow row;
  row.model = model;
  row.task_averages = task_averages;
  double sum = 0.0;
  // Fixed task order keeps the reduction independent of input order.
  for (const auto task : kAllTasks) {
    if (const auto it = task_averages.find(task); it != task_averages.end()) sum += it->second;
  }
  row.overall = task_averages.empty() ? 0.0 : sum / static_cast<double>(task_averages.size());
  return row;
}

BenchmarkRow aggregate(std::span<const TaskResult> results, const ModelCard& model) {
  std::map<TaskType, std::vector<std::pair<std::string, double>>> per_task;
  for (const auto& r : results) per_task[r.task].emplace_back(r.dataset_id, r.main_metric * 100.0);
  std::map<TaskType, double> averages;
  std::map<TaskType, std::size_t> counts;
  for (auto& [task, values] : per_task) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (const auto& [_, v] : values) sum += v;
    averages[task] = sum / static_cast<double>(values.size());
    counts[task] = values.size();
  }
  auto row = aggregate_task_averages(averages, model);
  row.dataset_counts = std::move(counts);
  return row;
}

namespace {

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string render_benchmark_table(std::span<const BenchmarkRow> rows) {
  std::vector<std::string> header{"Model", "Size", "Dim", "Type"};
  for (const auto task : kAllTasks) header.emplace_back(to_string(task));
  header.emplace_back("Avg");

  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    std::vector<std::string> line{r.model.name + (r.model.instruct_tuned ? "*" : ""), format_params(r.model.params),
                                  std::to_string(r.model.dim), std::string(to_string(r.model.pos_encoding))};
    for (const auto task : kAllTasks) {
      const auto it = r.task_averages.find(task);
      line.push_back(it == r.task_averages.end() ? "-" : fixed2(it->second));
    }
    line.push_back(fixed2(r.overall));
    cells.push_back(std::move(line));
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = text::code_point_count(header[c]);
    for (const auto& line : cells) width[c] = std::max(width[c], text::code_point_count(line[c]));
  }
  const auto emit = [&](const std::vector<std::string>& line) {
    std::string out;
    for (std::size_t c = 0; c < line.size(); ++c) {
      const auto pad = std::string(width[c] - text::code_point_count(line[c]), ' ');
      if (c > 0) out += "  ";
      out += c == 0 ? line[c] + pad : pad + line[c];
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string table = emit(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  table += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  for (const auto& line : cells) table += emit(line);
  return table;
}

ordered_json results_to_json(const ModelCard& model, std::span<const TaskResult> results) {
  ordered_json j;
  j["model"] = model_card_to_json(model);
  j["results"] = ordered_json::array();
  for (const auto& r : results) {
    ordered_json e;
    e["task"] = to_string(r.task);
    e["dataset_id"] = r.dataset_id;
    e["main_metric_name"] = main_metric_name(r.task);
    e["main_metric"] = r.main_metric;
    e["metrics"] = ordered_json::object();
    for (const auto& [k, v] : r.metrics) e["metrics"][k] = v;
    e["warnings"] = r.warnings;
    j["results"].push_back(std::move(e));
  }
  return j;
}

ResultsFile results_from_json(const json& j) {
  ResultsFile f;
  f.model = model_card_from_json(j.at("model"));
  for (const auto& e : j.at("results")) {
    TaskResult r;
    const auto task = parse_task_type(e.at("task").get<std::string>());
    if (!task) throw std::invalid_argument("results: unknown task '" + e.at("task").get<std::string>() + "'");
    r.task = *task;
    r.dataset_id = e.at("dataset_id").get<std::string>();
    r.main_metric = e.at("main_metric").get<double>();
    const auto metrics = e.value("metrics", json::object());
    for (const auto& [k, v] : metrics.items()) r.metrics[k] = v.get<double>();
    r.warnings = e.value("warnings", std::vector<std::string>{});
    f.results.push_back(std::move(r));
  }
  return f;
}

ResultsFile load_results(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read results file " + path.string());
  try {
    return results_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

ordered_json benchmark_to_json(std::span<const BenchmarkRow> rows) {
  ordered_json out = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json j;
    j["model"] = model_card_to_json(r.model);
    j["task_averages"] = ordered_json::object();
    for (const auto task : kAllTasks) {
      if (const auto it = r.task_averages.find(task); it != r.task_averages.end()) {
        j["task_averages"][std::string(to_string(task))] = it->second;
      }
    }
    j["dataset_counts"] = ordered_json::object();
    for (const auto& [task, n] : r.dataset_counts) j["dataset_counts"][std::string(to_string(task))] = n;
    j["avg"] = r.overall;
    out.push_back(std::move(j));
  }
  return out;
}

BenchmarkRow load_benchmark_row(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    const auto j = json::parse(in);
    if (j.contains("task_averages") && !j.contains("results")) {
      std::map<TaskType, double> averages;
      for (const auto& [name, v] : j.at("task_averages").items()) {
        const auto task = parse_task_type(name);
        if (!task) throw std::invalid_argument("unknown task '" + name + "'");
        averages[*task] = v.get<double>();
      }
      return aggregate_task_averages(averages, model_card_from_json(j.at("model")));
    }
    const auto file = results_from_json(j);
    return aggregate(file.results, file.model);
  } catch (const json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

}  // namespace benchforge
