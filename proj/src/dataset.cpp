#include "benchforge/dataset.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "benchforge/text.hpp"

namespace benchforge {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <class> inline constexpr bool kAlwaysFalse = false;

template <class Record>
constexpr TaskType task_of() {
  if constexpr (std::is_same_v<Record, ClassificationRecord>) return TaskType::Classification;
  else if constexpr (std::is_same_v<Record, ClusteringRecord>) return TaskType::Clustering;
  else if constexpr (std::is_same_v<Record, PairRecord>) return TaskType::PairClassification;
  else if constexpr (std::is_same_v<Record, RerankingRecord>) return TaskType::Reranking;
  else if constexpr (std::is_same_v<Record, StsRecord>) return TaskType::STS;
  else static_assert(kAlwaysFalse<Record>);
}

std::string split_record_id(const std::string& split, const std::string& id) {
  return split + "/" + id;
}

// Visits every non-empty translatable text field of one record, in schema order.
using FieldVisitor = std::function<void(const FieldPath&, const std::string&)>;

void visit_fields(const ClassificationRecord& r, const FieldVisitor& f) {
  if (!r.text.empty()) f({"text", std::nullopt}, r.text);
}
void visit_fields(const ClusteringRecord& r, const FieldVisitor& f) {
  for (std::size_t i = 0; i < r.sentences.size(); ++i) {
    if (!r.sentences[i].empty()) f({"sentences", i}, r.sentences[i]);
  }
}
void visit_fields(const PairRecord& r, const FieldVisitor& f) {
  if (!r.sentence1.empty()) f({"sentence1", std::nullopt}, r.sentence1);
  if (!r.sentence2.empty()) f({"sentence2", std::nullopt}, r.sentence2);
}
void visit_fields(const StsRecord& r, const FieldVisitor& f) {
  if (!r.sentence1.empty()) f({"sentence1", std::nullopt}, r.sentence1);
  if (!r.sentence2.empty()) f({"sentence2", std::nullopt}, r.sentence2);
}
void visit_fields(const RerankingRecord& r, const FieldVisitor& f) {
  if (!r.query.empty()) f({"query", std::nullopt}, r.query);
  for (std::size_t i = 0; i < r.positive.size(); ++i) {
    if (!r.positive[i].empty()) f({"positive", i}, r.positive[i]);
  }
  for (std::size_t i = 0; i < r.negative.size(); ++i) {
    if (!r.negative[i].empty()) f({"negative", i}, r.negative[i]);
  }
}

std::set<std::string> processed_query_ids(const RetrievalData& data,
                                          const std::set<std::string>& splits) {
  std::set<std::string> ids;
  for (const auto& [split, qrels] : data.qrels) {
    if (!splits.contains(split)) continue;
    for (const auto& q : qrels) ids.insert(q.query_id);
  }
  return ids;
}

bool corpus_processed(const RetrievalData& data, const std::set<std::string>& splits) {
  for (const auto& [split, qrels] : data.qrels) {
    if (splits.contains(split)) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Loading

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError({{path.string(), 0, "", "cannot open file"}});
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

class Loader {
 public:
  explicit Loader(std::vector<DatasetIssue>& issues) : issues_(issues) {}

  void issue(const std::string& file, std::size_t line, std::string field, std::string message) {
    issues_.push_back({file, line, std::move(field), std::move(message)});
  }

  // Calls `fn(obj, line_no)` for every non-blank JSON line.
  void for_each_json_line(const fs::path& path, const std::function<void(const json&, std::size_t)>& fn) {
    if (!fs::exists(path)) {
      issue(path.string(), 0, "", "missing split file");
      return;
    }
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (text::trim(line).empty()) continue;
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::parse_error& e) {
        issue(path.string(), line_no, "", std::string("malformed JSON: ") + e.what());
        continue;
      }
      if (!obj.is_object()) {
        issue(path.string(), line_no, "", "row must be a JSON object");
        continue;
      }
      fn(obj, line_no);
    }
  }

  std::optional<std::string> id_field(const json& obj, const char* key, const fs::path& file,
                                      std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
      issue(file.string(), line, key, "missing field");
      return std::nullopt;
    }
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    issue(file.string(), line, key, "id must be a string or integer");
    return std::nullopt;
  }

  std::optional<std::string> text_field(const json& obj, const char* key, const fs::path& file,
                                        std::size_t line, bool required = true) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) issue(file.string(), line, key, "missing field");
      return required ? std::nullopt : std::optional<std::string>(std::string());
    }
    if (!it->is_string()) {
      issue(file.string(), line, key, "must be a string");
      return std::nullopt;
    }
    try {
      return text::nfc(it->get_ref<const std::string&>());
    } catch (const std::exception& e) {
      issue(file.string(), line, key, e.what());
      return std::nullopt;
    }
  }

  std::optional<std::vector<std::string>> text_list(const json& obj, const char* key,
                                                    const fs::path& file, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_array()) {
      issue(file.string(), line, key, it == obj.end() ? "missing field" : "must be a list of strings");
      return std::nullopt;
    }
    std::vector<std::string> out;
    for (const auto& v : *it) {
      if (!v.is_string()) {
        issue(file.string(), line, key, "must be a list of strings");
        return std::nullopt;
      }
      out.push_back(text::nfc(v.get_ref<const std::string&>()));
    }
    return out;
  }

 private:
  std::vector<DatasetIssue>& issues_;
};

template <class Record>
std::optional<Record> parse_record(Loader& L, const json& obj, const fs::path& file, std::size_t line);

template <>
std::optional<ClassificationRecord> parse_record(Loader& L, const json& obj, const fs::path& file,
                                                 std::size_t line) {
  auto id = L.id_field(obj, "id", file, line);
  auto txt = L.text_field(obj, "text", file, line);
  const auto lit = obj.find("label");
  if (lit == obj.end() || !(lit->is_string() || lit->is_number() || lit->is_boolean())) {
    L.issue(file.string(), line, "label", lit == obj.end() ? "missing field" : "label must be a scalar");
    return std::nullopt;
  }
  if (!id || !txt) return std::nullopt;
  return ClassificationRecord{*id, *txt, *lit};
}

template <>
std::optional<ClusteringRecord> parse_record(Loader& L, const json& obj, const fs::path& file,
                                             std::size_t line) {
  auto id = L.id_field(obj, "id", file, line);
  auto sentences = L.text_list(obj, "sentences", file, line);
  const auto lit = obj.find("labels");
  if (lit == obj.end() || !lit->is_array()) {
    L.issue(file.string(), line, "labels", lit == obj.end() ? "missing field" : "must be a list");
    return std::nullopt;
  }
  if (!id || !sentences) return std::nullopt;
  if (lit->size() != sentences->size()) {
    L.issue(file.string(), line, "labels", "labels and sentences differ in length");
    return std::nullopt;
  }
  std::vector<json> labels(lit->begin(), lit->end());
  return ClusteringRecord{*id, std::move(*sentences), std::move(labels)};
}

template <>
std::optional<PairRecord> parse_record(Loader& L, const json& obj, const fs::path& file,
                                       std::size_t line) {
  auto id = L.id_field(obj, "id", file, line);
  auto s1 = L.text_field(obj, "sentence1", file, line);
  auto s2 = L.text_field(obj, "sentence2", file, line);
  const auto lit = obj.find("label");
  if (lit == obj.end() || !lit->is_number_integer() ||
      (lit->get<long long>() != 0 && lit->get<long long>() != 1)) {
    L.issue(file.string(), line, "label", "label must be 0 or 1");
    return std::nullopt;
  }
  if (!id || !s1 || !s2) return std::nullopt;
  return PairRecord{*id, *s1, *s2, lit->get<int>()};
}

template <>
std::optional<RerankingRecord> parse_record(Loader& L, const json& obj, const fs::path& file,
                                            std::size_t line) {
  auto id = L.id_field(obj, "id", file, line);
  auto query = L.text_field(obj, "query", file, line);
  auto pos = L.text_list(obj, "positive", file, line);
  auto neg = L.text_list(obj, "negative", file, line);
  if (!id || !query || !pos || !neg) return std::nullopt;
  if (query->empty()) {
    L.issue(file.string(), line, "query", "query must be non-empty");
    return std::nullopt;
  }
  if (pos->empty()) {
    L.issue(file.string(), line, "positive", "positive list must be non-empty");
    return std::nullopt;
  }
  return RerankingRecord{*id, *query, std::move(*pos), std::move(*neg)};
}

template <>
std::optional<StsRecord> parse_record(Loader& L, const json& obj, const fs::path& file,
                                      std::size_t line) {
  auto id = L.id_field(obj, "id", file, line);
  auto s1 = L.text_field(obj, "sentence1", file, line);
  auto s2 = L.text_field(obj, "sentence2", file, line);
  const auto sit = obj.find("score");
  if (sit == obj.end() || !sit->is_number()) {
    L.issue(file.string(), line, "score", "score must be a number in [0, 5]");
    return std::nullopt;
  }
  const double score = sit->get<double>();
  if (!(score >= 0.0 && score <= 5.0)) {
    std::ostringstream msg;
    msg << "score " << score << " outside [0, 5]";
    L.issue(file.string(), line, "score", msg.str());
    return std::nullopt;
  }
  if (!id || !s1 || !s2) return std::nullopt;
  return StsRecord{*id, *s1, *s2, score};
}

template <class Record>
SplitMap<Record> load_splits(Loader& L, const fs::path& dir, const std::vector<std::string>& splits) {
  SplitMap<Record> out;
  for (const auto& split : splits) {
    auto& rows = out[split];
    const auto file = dir / (split + ".jsonl");
    L.for_each_json_line(file, [&](const json& obj, std::size_t line) {
      if (auto rec = parse_record<Record>(L, obj, file, line)) rows.push_back(std::move(*rec));
    });
  }
  return out;
}

RetrievalData load_retrieval(Loader& L, const fs::path& dir, const std::vector<std::string>& splits) {
  RetrievalData data;
  const auto corpus_file = dir / "corpus.jsonl";
  L.for_each_json_line(corpus_file, [&](const json& obj, std::size_t line) {
    auto id = L.id_field(obj, "_id", corpus_file, line);
    auto title = L.text_field(obj, "title", corpus_file, line, false);
    auto txt = L.text_field(obj, "text", corpus_file, line);
    if (id && title && txt) data.corpus.push_back({*id, *title, *txt});
  });
  const auto queries_file = dir / "queries.jsonl";
  L.for_each_json_line(queries_file, [&](const json& obj, std::size_t line) {
    auto id = L.id_field(obj, "_id", queries_file, line);
    auto txt = L.text_field(obj, "text", queries_file, line);
    if (id && txt) data.queries.push_back({*id, *txt});
  });
  for (const auto& split : splits) {
    auto& rows = data.qrels[split];
    const auto file = dir / "qrels" / (split + ".tsv");
    if (!fs::exists(file)) {
      L.issue(file.string(), 0, "", "missing qrels file");
      continue;
    }
    std::istringstream in(read_file(file));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line_no == 1) {
        if (line != "query-id\tcorpus-id\tscore") {
          L.issue(file.string(), 1, "", "expected header 'query-id<TAB>corpus-id<TAB>score'");
        }
        continue;
      }
      if (text::trim(line).empty()) continue;
      std::vector<std::string> cols;
      std::size_t start = 0;
      for (;;) {
        const auto tab = line.find('\t', start);
        cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
      }
      if (cols.size() != 3) {
        L.issue(file.string(), line_no, "", "expected 3 tab-separated columns");
        continue;
      }
      int score = 0;
      try {
        std::size_t used = 0;
        score = std::stoi(cols[2], &used);
        if (used != cols[2].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        L.issue(file.string(), line_no, "score", "score must be an integer");
        continue;
      }
      rows.push_back({cols[0], cols[1], score});
    }
  }
  return data;
}

// ---------------------------------------------------------------------------
// Writing

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError({{path.string(), 0, "", "cannot open file for writing"}});
  out << content;
  if (!out) throw DatasetError({{path.string(), 0, "", "write failed"}});
}

std::string dump_line(const ordered_json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::strict) + "\n";
}

ordered_json to_row(const ClassificationRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["text"] = r.text;
  j["label"] = r.label;
  return j;
}
ordered_json to_row(const ClusteringRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["sentences"] = r.sentences;
  j["labels"] = ordered_json::array();
  for (const auto& l : r.labels) j["labels"].emplace_back(l);
  return j;
}
ordered_json to_row(const PairRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["sentence1"] = r.sentence1;
  j["sentence2"] = r.sentence2;
  j["label"] = r.label;
  return j;
}
ordered_json to_row(const RerankingRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["query"] = r.query;
  j["positive"] = r.positive;
  j["negative"] = r.negative;
  return j;
}
ordered_json to_row(const StsRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["sentence1"] = r.sentence1;
  j["sentence2"] = r.sentence2;
  j["score"] = r.score;
  return j;
}

// ---------------------------------------------------------------------------
// Recompose helpers

struct FieldResolver {
  const std::string& dataset_id;
  const std::map<std::string, std::string>& translations;
  const std::map<std::string, ValidationVerdict>& verdicts;

  struct Outcome {
    bool failed = false;
    std::string text;
    std::string stage;
  };

  Outcome operator()(const std::string& record_id, const FieldPath& path, const std::string& original,
                     bool processed) const {
    if (original.empty()) return {false, original, {}};
    const auto uid = unit_id_for(dataset_id, record_id, path);
    const auto tr = translations.find(uid);
    if (!processed) return {false, tr != translations.end() ? tr->second : original, {}};
    const auto v = verdicts.find(uid);
    if (v == verdicts.end()) {
      throw std::invalid_argument("recompose: no verdict for unit " + uid + " (" + record_id + " " +
                                  path.to_string() + ")");
    }
    if (!v->second.kept) {
      return {true, {}, v->second.failure_stage ? std::string(to_string(*v->second.failure_stage)) : ""};
    }
    if (tr == translations.end()) {
      throw std::invalid_argument("recompose: kept unit " + uid + " has no translation");
    }
    return {false, tr->second, {}};
  }
};

template <class Record>
std::optional<Record> recompose_record(const Record& r, const std::string& record_id,
                                       const FieldResolver& resolve, bool processed,
                                       DropEntry& drop) {
  drop.record_id = r.id;
  if constexpr (std::is_same_v<Record, ClassificationRecord>) {
    auto o = resolve(record_id, {"text", std::nullopt}, r.text, processed);
    if (o.failed) {
      drop.reason = DropReason::UnitFailed;
      drop.stage = o.stage;
      return std::nullopt;
    }
    Record out = r;
    out.text = o.text;
    return out;
  } else if constexpr (std::is_same_v<Record, PairRecord> || std::is_same_v<Record, StsRecord>) {
    auto a = resolve(record_id, {"sentence1", std::nullopt}, r.sentence1, processed);
    auto b = resolve(record_id, {"sentence2", std::nullopt}, r.sentence2, processed);
    if (a.failed || b.failed) {
      drop.reason = DropReason::UnitFailed;
      drop.stage = a.failed ? a.stage : b.stage;
      return std::nullopt;
    }
    Record out = r;
    out.sentence1 = a.text;
    out.sentence2 = b.text;
    return out;
  } else if constexpr (std::is_same_v<Record, ClusteringRecord>) {
    Record out;
    out.id = r.id;
    std::string stage;
    for (std::size_t i = 0; i < r.sentences.size(); ++i) {
      auto o = resolve(record_id, {"sentences", i}, r.sentences[i], processed);
      if (o.failed) {
        if (stage.empty()) stage = o.stage;
        continue;
      }
      out.sentences.push_back(o.text);
      out.labels.push_back(r.labels[i]);
    }
    if (out.sentences.empty()) {
      drop.reason = DropReason::EmptyAfterFilter;
      drop.stage = stage;
      return std::nullopt;
    }
    return out;
  } else if constexpr (std::is_same_v<Record, RerankingRecord>) {
    auto q = resolve(record_id, {"query", std::nullopt}, r.query, processed);
    if (q.failed) {
      drop.reason = DropReason::UnitFailed;
      drop.stage = q.stage;
      return std::nullopt;
    }
    Record out;
    out.id = r.id;
    out.query = q.text;
    std::string stage;
    for (std::size_t i = 0; i < r.positive.size(); ++i) {
      auto o = resolve(record_id, {"positive", i}, r.positive[i], processed);
      if (o.failed) {
        if (stage.empty()) stage = o.stage;
      } else {
        out.positive.push_back(o.text);
      }
    }
    for (std::size_t i = 0; i < r.negative.size(); ++i) {
      auto o = resolve(record_id, {"negative", i}, r.negative[i], processed);
      if (!o.failed) out.negative.push_back(o.text);
    }
    if (out.positive.empty()) {
      drop.reason = DropReason::EmptyAfterFilter;
      drop.stage = stage;
      return std::nullopt;
    }
    return out;
  } else {
    static_assert(kAlwaysFalse<Record>);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::string DatasetIssue::to_string() const {
  std::ostringstream out;
  out << file;
  if (line > 0) out << ":" << line;
  if (!field.empty()) out << " [" << field << "]";
  out << ": " << message;
  return out.str();
}

namespace {
std::string join_issues(const std::vector<DatasetIssue>& issues) {
  std::string msg = issues.size() == 1 ? "dataset error: " : "dataset errors:";
  if (issues.size() == 1) return msg + issues.front().to_string();
  for (const auto& i : issues) msg += "\n  " + i.to_string();
  return msg;
}
}  // namespace

DatasetError::DatasetError(std::vector<DatasetIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

std::string_view to_string(DropReason reason) {
  switch (reason) {
    case DropReason::UnitFailed:
      return "unit_failed";
    case DropReason::OrphanedReference:
      return "orphaned_reference";
    case DropReason::EmptyAfterFilter:
      return "empty_after_filter";
  }
  return "?";
}

DatasetBody empty_body(TaskType task) {
  switch (task) {
    case TaskType::Retrieval:
      return RetrievalData{};
    case TaskType::Classification:
      return SplitMap<ClassificationRecord>{};
    case TaskType::Clustering:
      return SplitMap<ClusteringRecord>{};
    case TaskType::PairClassification:
      return SplitMap<PairRecord>{};
    case TaskType::Reranking:
      return SplitMap<RerankingRecord>{};
    case TaskType::STS:
      return SplitMap<StsRecord>{};
  }
  throw std::invalid_argument("unknown task type");
}

std::map<std::string, std::size_t> TaskDataset::record_counts() const {
  std::map<std::string, std::size_t> counts;
  std::visit(
      [&](const auto& body) {
        using Body = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<Body, RetrievalData>) {
          counts["corpus"] = body.corpus.size();
          counts["queries"] = body.queries.size();
        } else {
          for (const auto& [split, rows] : body) counts[split] = rows.size();
        }
      },
      body);
  return counts;
}

std::size_t TaskDataset::total_records() const {
  std::size_t n = 0;
  for (const auto& [_, c] : record_counts()) n += c;
  return n;
}

std::vector<DatasetIssue> check_dataset(const TaskDataset& ds) {
  std::vector<DatasetIssue> issues;
  const auto& id = ds.manifest.dataset_id;
  auto add = [&](std::string field, std::string message) {
    issues.push_back({id, 0, std::move(field), std::move(message)});
  };
  if (id.empty()) add("dataset_id", "dataset_id must be non-empty");

  const bool task_matches = std::visit(
      [&](const auto& body) {
        using Body = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<Body, RetrievalData>) {
          return ds.manifest.task == TaskType::Retrieval;
        } else {
          return ds.manifest.task == task_of<typename Body::mapped_type::value_type>();
        }
      },
      ds.body);
  if (!task_matches) {
    add("task", "manifest task does not match the record shape");
    return issues;
  }

  std::visit(
      [&](const auto& body) {
        using Body = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<Body, RetrievalData>) {
          std::set<std::string> docs, queries;
          for (const auto& d : body.corpus) {
            if (!docs.insert(d.id).second) add("_id", "duplicate corpus id '" + d.id + "'");
            if (d.text.empty() && d.title.empty()) add("text", "corpus doc '" + d.id + "' is empty");
          }
          for (const auto& q : body.queries) {
            if (!queries.insert(q.id).second) add("_id", "duplicate query id '" + q.id + "'");
          }
          for (const auto& [split, rows] : body.qrels) {
            for (const auto& r : rows) {
              if (!queries.contains(r.query_id)) {
                add("qrels/" + split, "qrel references missing query id '" + r.query_id + "'");
              }
              if (!docs.contains(r.corpus_id)) {
                add("qrels/" + split, "qrel references missing corpus id '" + r.corpus_id + "'");
              }
            }
          }
        } else {
          for (const auto& [split, rows] : body) {
            std::set<std::string> ids;
            for (const auto& r : rows) {
              if (!ids.insert(r.id).second) add(split + ".id", "duplicate id '" + r.id + "'");
              using Record = std::decay_t<decltype(r)>;
              if constexpr (std::is_same_v<Record, StsRecord>) {
                if (!(r.score >= 0.0 && r.score <= 5.0)) add(split + ".score", "score outside [0, 5]");
              } else if constexpr (std::is_same_v<Record, PairRecord>) {
                if (r.label != 0 && r.label != 1) add(split + ".label", "label must be 0 or 1");
              } else if constexpr (std::is_same_v<Record, RerankingRecord>) {
                if (r.query.empty()) add(split + ".query", "record '" + r.id + "' has empty query");
                if (r.positive.empty()) {
                  add(split + ".positive", "record '" + r.id + "' has empty positive list");
                }
              } else if constexpr (std::is_same_v<Record, ClusteringRecord>) {
                if (r.labels.size() != r.sentences.size()) {
                  add(split + ".labels", "record '" + r.id + "' labels/sentences length mismatch");
                }
              }
            }
          }
        }
      },
      ds.body);
  return issues;
}

TaskDataset load_dataset(const fs::path& manifest_path) {
  const auto dir = manifest_path.parent_path();
  json m;
  try {
    m = json::parse(read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw DatasetError({{manifest_path.string(), 0, "", std::string("malformed manifest: ") + e.what()}});
  }
  std::vector<DatasetIssue> issues;
  Loader L(issues);
  const auto mfile = manifest_path.string();
  if (!m.is_object()) throw DatasetError({{mfile, 0, "", "manifest must be a JSON object"}});

  TaskDataset ds;
  auto& man = ds.manifest;
  if (auto v = L.id_field(m, "dataset_id", manifest_path, 0)) man.dataset_id = *v;
  const auto tit = m.find("task");
  const auto task = (tit != m.end() && tit->is_string()) ? parse_task_type(tit->get<std::string>())
                                                         : std::nullopt;
  if (!task) {
    throw DatasetError({{mfile, 0, "task",
                         "unknown task '" + (tit != m.end() ? tit->dump() : std::string("<missing>")) +
                             "'; expected one of Retrieval, Classification, PairClassification, "
                             "Clustering, Reranking, STS"}});
  }
  man.task = *task;
  if (const auto it = m.find("language"); it != m.end() && it->is_string()) {
    man.language = it->get<std::string>();
  }
  if (!is_valid_lang_code(man.language)) {
    L.issue(mfile, 0, "language", "malformed language label '" + man.language + "'");
  }
  if (const auto it = m.find("license"); it != m.end() && it->is_string()) {
    man.license = it->get<std::string>();
  }
  const auto sit = m.find("splits");
  if (sit == m.end() || !sit->is_array()) {
    throw DatasetError({{mfile, 0, "splits", "manifest must list splits"}});
  }
  for (const auto& s : *sit) {
    if (!s.is_string() || s.get<std::string>().empty() ||
        s.get<std::string>().find('/') != std::string::npos) {
      throw DatasetError({{mfile, 0, "splits", "split names must be non-empty strings without '/'"}});
    }
    man.splits.push_back(s.get<std::string>());
  }

  switch (man.task) {
    case TaskType::Retrieval:
      ds.body = load_retrieval(L, dir, man.splits);
      break;
    case TaskType::Classification:
      ds.body = load_splits<ClassificationRecord>(L, dir, man.splits);
      break;
    case TaskType::Clustering:
      ds.body = load_splits<ClusteringRecord>(L, dir, man.splits);
      break;
    case TaskType::PairClassification:
      ds.body = load_splits<PairRecord>(L, dir, man.splits);
      break;
    case TaskType::Reranking:
      ds.body = load_splits<RerankingRecord>(L, dir, man.splits);
      break;
    case TaskType::STS:
      ds.body = load_splits<StsRecord>(L, dir, man.splits);
      break;
  }
  if (issues.empty()) {
    for (auto& i : check_dataset(ds)) {
      i.file = mfile;
      issues.push_back(std::move(i));
    }
  }
  if (!issues.empty()) throw DatasetError(std::move(issues));
  return ds;
}

fs::path write_dataset(const TaskDataset& ds, const fs::path& out_dir) {
  if (auto issues = check_dataset(ds); !issues.empty()) throw DatasetError(std::move(issues));
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DatasetError({{out_dir.string(), 0, "", "cannot create directory: " + ec.message()}});

  std::visit(
      [&](const auto& body) {
        using Body = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<Body, RetrievalData>) {
          std::string corpus, queries;
          for (const auto& d : body.corpus) {
            ordered_json j;
            j["_id"] = d.id;
            j["title"] = d.title;
            j["text"] = d.text;
            corpus += dump_line(j);
          }
          for (const auto& q : body.queries) {
            ordered_json j;
            j["_id"] = q.id;
            j["text"] = q.text;
            queries += dump_line(j);
          }
          write_text(out_dir / "corpus.jsonl", corpus);
          write_text(out_dir / "queries.jsonl", queries);
          fs::create_directories(out_dir / "qrels", ec);
          if (ec) throw DatasetError({{(out_dir / "qrels").string(), 0, "", ec.message()}});
          for (const auto& split : ds.manifest.splits) {
            std::string tsv = "query-id\tcorpus-id\tscore\n";
            if (const auto it = body.qrels.find(split); it != body.qrels.end()) {
              for (const auto& q : it->second) {
                tsv += q.query_id + "\t" + q.corpus_id + "\t" + std::to_string(q.score) + "\n";
              }
            }
            write_text(out_dir / "qrels" / (split + ".tsv"), tsv);
          }
        } else {
          for (const auto& split : ds.manifest.splits) {
            std::string content;
            if (const auto it = body.find(split); it != body.end()) {
              for (const auto& r : it->second) content += dump_line(to_row(r));
            }
            write_text(out_dir / (split + ".jsonl"), content);
          }
        }
      },
      ds.body);

  ordered_json m;
  m["dataset_id"] = ds.manifest.dataset_id;
  m["task"] = std::string(to_string(ds.manifest.task));
  m["language"] = ds.manifest.language;
  m["license"] = ds.manifest.license;
  m["splits"] = ds.manifest.splits;
  const auto manifest = out_dir / "manifest.json";
  write_text(manifest, m.dump(2) + "\n");
  return manifest;
}

std::vector<SequenceUnit> decompose(const TaskDataset& ds, const std::set<std::string>& splits_filter) {
  std::vector<SequenceUnit> units;
  const auto& dataset_id = ds.manifest.dataset_id;
  auto emit = [&](const std::string& record_id, const FieldPath& path, const std::string& source) {
    units.push_back(SequenceUnit{unit_id_for(dataset_id, record_id, path), dataset_id, record_id, path,
                                 source, text::code_point_count(source)});
  };
  std::visit(
      [&](const auto& body) {
        using Body = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<Body, RetrievalData>) {
          const auto wanted = processed_query_ids(body, splits_filter);
          for (const auto& q : body.queries) {
            if (wanted.contains(q.id) && !q.text.empty()) emit("queries/" + q.id, {"text", std::nullopt}, q.text);
          }
          if (!corpus_processed(body, splits_filter)) return;
          for (const auto& d : body.corpus) {
            const auto rid = "corpus/" + d.id;
            if (!d.title.empty()) emit(rid, {"title", std::nullopt}, d.title);
            if (!d.text.empty()) emit(rid, {"text", std::nullopt}, d.text);
          }
        } else {
          for (const auto& [split, rows] : body) {
            if (!splits_filter.contains(split)) continue;
            for (const auto& r : rows) {
              const auto rid = split_record_id(split, r.id);
              visit_fields(r, [&](const FieldPath& p, const std::string& t) { emit(rid, p, t); });
            }
          }
        }
      },
      ds.body);
  return units;
}

RecomposeResult recompose(const TaskDataset& ds, const std::map<std::string, std::string>& translations,
                          const std::map<std::string, ValidationVerdict>& verdicts,
                          const std::set<std::string>& processed_splits) {
  RecomposeResult result;
  result.dataset.manifest = ds.manifest;
  const FieldResolver resolve{ds.manifest.dataset_id, translations, verdicts};

  std::visit(
      [&](const auto& body) {
        using Body = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<Body, RetrievalData>) {
          RetrievalData out;
          const auto wanted = processed_query_ids(body, processed_splits);
          const bool corpus_done = corpus_processed(body, processed_splits);

          std::set<std::string> kept_docs;
          for (const auto& d : body.corpus) {
            const auto rid = "corpus/" + d.id;
            auto t = resolve(rid, {"title", std::nullopt}, d.title, corpus_done);
            auto x = resolve(rid, {"text", std::nullopt}, d.text, corpus_done);
            if (t.failed || x.failed) {
              result.drops.push_back({"corpus", d.id, DropReason::UnitFailed, t.failed ? t.stage : x.stage});
              continue;
            }
            kept_docs.insert(d.id);
            out.corpus.push_back({d.id, t.text, x.text});
          }

          std::set<std::string> failed_queries;
          std::map<std::string, std::string> failed_stage;
          std::vector<Query> candidates;
          for (const auto& q : body.queries) {
            auto o = resolve("queries/" + q.id, {"text", std::nullopt}, q.text, wanted.contains(q.id));
            if (o.failed) {
              failed_queries.insert(q.id);
              failed_stage[q.id] = o.stage;
            }
            candidates.push_back({q.id, o.text});
          }

          std::set<std::string> had_qrels, has_qrels;
          for (const auto& [split, rows] : body.qrels) {
            auto& kept_rows = out.qrels[split];
            for (const auto& r : rows) {
              had_qrels.insert(r.query_id);
              if (!kept_docs.contains(r.corpus_id) || failed_queries.contains(r.query_id)) continue;
              kept_rows.push_back(r);
              has_qrels.insert(r.query_id);
            }
          }
          for (auto& q : candidates) {
            if (failed_queries.contains(q.id)) {
              result.drops.push_back({"queries", q.id, DropReason::UnitFailed, failed_stage[q.id]});
            } else if (had_qrels.contains(q.id) && !has_qrels.contains(q.id)) {
              result.drops.push_back({"queries", q.id, DropReason::OrphanedReference, "recompose"});
            } else {
              out.queries.push_back(std::move(q));
            }
          }
          result.dataset.body = std::move(out);
        } else {
          Body out;
          for (const auto& [split, rows] : body) {
            auto& kept = out[split];
            const bool processed = processed_splits.contains(split);
            for (const auto& r : rows) {
              DropEntry drop{split, r.id, DropReason::UnitFailed, {}};
              if (auto rec = recompose_record(r, split_record_id(split, r.id), resolve, processed, drop)) {
                kept.push_back(std::move(*rec));
              } else {
                result.drops.push_back(std::move(drop));
              }
            }
          }
          result.dataset.body = std::move(out);
        }
      },
      ds.body);
  return result;
}

}  // namespace benchforge
