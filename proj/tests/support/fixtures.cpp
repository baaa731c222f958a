#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace fs = std::filesystem;
using namespace benchforge;

namespace fixtures {

namespace {

constexpr const char* kWords[] = {
    "river", "market", "engine", "garden", "signal", "teacher", "window", "planet", "coffee", "bridge",
    "library", "winter", "doctor", "silver", "forest", "harbor", "camera", "ticket", "castle", "rocket",
    "orange", "pencil", "valley", "farmer", "island", "museum", "dragon", "kitchen", "thunder", "mirror",
    "quickly", "slowly", "bright", "quiet", "ancient", "modern", "broken", "golden", "hidden", "simple",
    "builds", "carries", "finds", "watches", "opens", "paints", "follows", "answers", "covers", "moves"};

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

fs::path scratch_dir(const std::string& name) {
  static std::atomic<int> counter{0};
  const auto dir = fs::temp_directory_path() /
                   ("benchforge-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string sentence(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words) {
  const auto n = pick(rng, min_words, max_words);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += kWords[pick(rng, 0, std::size(kWords) - 1)];
  }
  out[0] = static_cast<char>(out[0] - 'a' + 'A');
  return out + ".";
}

TaskDataset random_dataset(TaskType task, std::size_t records, std::uint64_t seed, const std::string& dataset_id) {
  std::mt19937_64 rng(seed);
  TaskDataset ds;
  ds.manifest.dataset_id = dataset_id.empty() ? "rand-" + std::string(to_string(task)) : dataset_id;
  ds.manifest.task = task;
  ds.manifest.language = "eng_Latn";
  ds.manifest.license = "cc-by-4.0";
  ds.manifest.splits = {"test"};
  const auto id = [](std::size_t i) { return "r" + std::to_string(i); };
  switch (task) {
    case TaskType::Retrieval: {
      RetrievalData data;
      const std::size_t docs = std::max<std::size_t>(records, 2);
      const std::size_t queries = std::max<std::size_t>(records / 2, 1);
      for (std::size_t i = 0; i < docs; ++i) {
        data.corpus.push_back({"d" + std::to_string(i), pick(rng, 0, 1) ? sentence(rng, 2, 4) : "", sentence(rng)});
      }
      for (std::size_t i = 0; i < queries; ++i) {
        const auto qid = "q" + std::to_string(i);
        data.queries.push_back({qid, sentence(rng, 3, 6)});
        const auto n = pick(rng, 1, std::min<std::size_t>(3, docs));
        std::vector<std::size_t> chosen;
        while (chosen.size() < n) {
          const auto d = pick(rng, 0, docs - 1);
          if (std::find(chosen.begin(), chosen.end(), d) == chosen.end()) chosen.push_back(d);
        }
        for (auto d : chosen) data.qrels["test"].push_back({qid, "d" + std::to_string(d), static_cast<int>(pick(rng, 1, 2))});
      }
      ds.body = std::move(data);
      break;
    }
    case TaskType::Classification: {
      SplitMap<ClassificationRecord> m;
      ds.manifest.splits = {"train", "test"};
      for (const char* split : {"train", "test"}) {
        for (std::size_t i = 0; i < records; ++i) {
          m[split].push_back({id(i), sentence(rng), nlohmann::json(static_cast<int>(i % 3))});
        }
      }
      ds.body = std::move(m);
      break;
    }
    case TaskType::Clustering: {
      SplitMap<ClusteringRecord> m;
      for (std::size_t i = 0; i < records; ++i) {
        ClusteringRecord r{id(i), {}, {}};
        const auto n = pick(rng, 4, 8);
        for (std::size_t s = 0; s < n; ++s) {
          r.sentences.push_back(sentence(rng));
          r.labels.emplace_back(kWords[s % 3]);
        }
        m["test"].push_back(std::move(r));
      }
      ds.body = std::move(m);
      break;
    }
    case TaskType::PairClassification: {
      SplitMap<PairRecord> m;
      for (std::size_t i = 0; i < records; ++i) {
        m["test"].push_back({id(i), sentence(rng), sentence(rng), static_cast<int>(i % 2)});
      }
      ds.body = std::move(m);
      break;
    }
    case TaskType::Reranking: {
      SplitMap<RerankingRecord> m;
      for (std::size_t i = 0; i < records; ++i) {
        RerankingRecord r{id(i), sentence(rng, 3, 6), {}, {}};
        for (std::size_t k = pick(rng, 1, 3); k > 0; --k) r.positive.push_back(sentence(rng));
        for (std::size_t k = pick(rng, 1, 4); k > 0; --k) r.negative.push_back(sentence(rng));
        m["test"].push_back(std::move(r));
      }
      ds.body = std::move(m);
      break;
    }
    case TaskType::STS: {
      SplitMap<StsRecord> m;
      for (std::size_t i = 0; i < records; ++i) {
        m["test"].push_back({id(i), sentence(rng), sentence(rng), static_cast<double>(pick(rng, 0, 10)) / 2.0});
      }
      ds.body = std::move(m);
      break;
    }
  }
  return ds;
}

MixedFixture write_mixed_fixture(const fs::path& dir) {
  MixedFixture fx;
  auto& cfg = fx.config;
  cfg.backends.kind = BackendKind::Mock;
  cfg.backends.mock.translate_mode = "table";
  cfg.batch_size = 4;
  cfg.max_in_flight = 4;
  cfg.splits = {"test"};

  std::uint64_t seed = 1000;
  std::size_t n = 0;
  for (TaskType task : kAllTasks) {
    // Ten records per task; retrieval counts its queries and documents.
    const std::size_t size = task == TaskType::Retrieval ? 7 : task == TaskType::Classification ? 5 : 10;
    auto ds = random_dataset(task, size, seed++, "mixed-" + std::string(to_string(task)));
    auto& mock = cfg.backends.mock;
    if (task == TaskType::Retrieval) {
      // A non-English document, and a query whose translation is detected as English.
      auto& data = std::get<RetrievalData>(ds.body);
      data.queries.resize(3);
      std::erase_if(data.qrels["test"], [](const Qrel& q) { return q.query_id > "q2"; });
      data.corpus[1].text = "Привет, это совсем не английский текст.";
      mock.translation_table[data.queries[0].text] = "The weather is nice today.";
      mock.detector_table["The weather is nice today."] = "eng_Latn";
    } else if (task == TaskType::Classification) {
      auto& m = std::get<SplitMap<ClassificationRecord>>(ds.body);
      m["test"][2].text = "Это предложение написано по-русски.";
      mock.translation_table[m["test"][4].text] = "Chúng tôi đã đi chợ vào buổi sáng.";
      mock.forced_cosines[m["test"][4].text] = 0.3;
    } else if (task == TaskType::PairClassification) {
      auto& m = std::get<SplitMap<PairRecord>>(ds.body);
      mock.forced_cosines[m["test"][1].sentence1] = 0.8;  // exactly at the gate
    } else if (task == TaskType::Clustering) {
      auto& m = std::get<SplitMap<ClusteringRecord>>(ds.body);
      for (const auto& c : {"grammar", "ner", "special", "fluency", "meaning"}) {
        mock.judge_source_scores[m["test"][2].sentences[0]][c] = 3;
      }
    } else if (task == TaskType::Reranking) {
      auto& m = std::get<SplitMap<RerankingRecord>>(ds.body);
      mock.forced_cosines[m["test"][0].positive[0]] = 0.79;
    } else if (task == TaskType::STS) {
      auto& m = std::get<SplitMap<StsRecord>>(ds.body);
      mock.translation_table[m["test"][3].sentence2] = "Điện thoại của tôi hết pin rồi.";
      for (const auto& c : {"grammar", "ner", "special", "fluency", "meaning"}) {
        mock.judge_source_scores[m["test"][3].sentence2][c] = 2;
      }
    }
    fx.manifests.push_back(write_dataset(ds, dir / ds.manifest.dataset_id));
    n += ds.total_records();
  }
  if (n != 60) throw std::logic_error("mixed fixture should hold 60 records, got " + std::to_string(n));
  return fx;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::pair<std::string, std::string>> read_tree(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), dir).generic_string(), read_file(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fixtures
