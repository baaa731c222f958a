// Python bindings for the main operations. Structured results cross the
// boundary as JSON text; the package wrapper decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "benchforge/backends.hpp"
#include "benchforge/core.hpp"
#include "benchforge/dataset.hpp"
#include "benchforge/eval.hpp"
#include "benchforge/judge.hpp"
#include "benchforge/metrics.hpp"
#include "benchforge/pipeline.hpp"
#include "benchforge/reporting.hpp"

namespace py = pybind11;
using namespace benchforge;

namespace {

TaskType task_from(const std::string& name) {
  const auto t = parse_task_type(name);
  if (!t) throw std::invalid_argument("unknown task '" + name + "'");
  return *t;
}

std::string run_json(const std::string& manifest, const std::string& config_json, bool run_translation,
                     bool run_validation) {
  const auto cfg = config_from_json(config_json);
  const auto backends = make_backends(cfg);
  PipelineOptions opts;
  opts.run_translation = run_translation;
  opts.run_validation = run_validation;
  RunSummary s;
  {
    py::gil_scoped_release release;
    s = run_pipeline(manifest, cfg, backends, opts);
  }
  return summary_to_json(s).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "benchforge native core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DatasetError>(m, "DatasetError", PyExc_ValueError);
  py::register_exception<JudgeParseError>(m, "JudgeParseError", PyExc_ValueError);
  py::register_exception<EvalError>(m, "EvalError", PyExc_RuntimeError);

  // Judge
  m.def("default_criteria", &default_criteria);
  m.def(
      "combine_score",
      [](const std::map<std::string, int>& scores, const std::map<std::string, double>& weights) {
        JudgeScorecard card;
        card.scores = scores;
        return combine_score(card, weights.empty() ? PipelineConfig{}.judge_weights : weights);
      },
      py::arg("scores"), py::arg("weights") = std::map<std::string, double>{});
  m.def(
      "parse_scorecard",
      [](const std::string& text, std::vector<std::string> criteria) {
        if (criteria.empty()) criteria = default_criteria();
        return parse_scorecard(text, criteria).scores;
      },
      py::arg("text"), py::arg("criteria") = std::vector<std::string>{});
  m.def("meets_threshold", &meets_threshold, py::arg("value"), py::arg("threshold"));

  // Metrics
  m.def("cosine_similarity", [](const std::vector<double>& u, const std::vector<double>& v) {
    return metrics::cosine_similarity(u, v);
  });
  m.def(
      "ndcg_at_k",
      [](const std::vector<double>& scores, const std::vector<int>& rel, std::size_t k) {
        return metrics::ndcg_at_k(scores, rel, k);
      },
      py::arg("scores"), py::arg("relevance"), py::arg("k") = 10);
  m.def("average_precision", [](const std::vector<double>& scores, const std::vector<int>& labels) {
    return metrics::average_precision(scores, labels);
  });
  m.def("average_precision_ranked", [](const std::vector<double>& scores, const std::vector<int>& rel) {
    return metrics::average_precision_ranked(scores, rel);
  });
  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) { return metrics::pearson(x, y); });
  m.def("spearman", [](const std::vector<double>& x, const std::vector<double>& y) { return metrics::spearman(x, y); });
  m.def("v_measure", [](const std::vector<int>& truth, const std::vector<int>& pred) {
    const auto v = metrics::v_measure(truth, pred);
    return py::make_tuple(v.homogeneity, v.completeness, v.v_measure);
  });

  // Config and datasets
  m.def("default_config", [] { return config_to_json(PipelineConfig{}); });
  m.def("validate_config", [](const std::string& config_json) {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto& v : validate_config(config_from_json(config_json))) out.emplace_back(v.field, v.rule, v.message);
    return out;
  });
  m.def("config_fingerprint", [](const std::string& config_json) {
    return config_fingerprint(config_from_json(config_json));
  });
  m.def("check_dataset", [](const std::filesystem::path& manifest) {
    std::vector<std::string> out;
    try {
      load_dataset(manifest);
    } catch (const DatasetError& e) {
      for (const auto& issue : e.issues()) out.push_back(issue.to_string());
    }
    return out;
  });
  m.def("dry_run", [](const std::filesystem::path& manifest, const std::string& config_json) {
    const auto r = dry_run(manifest, config_from_json(config_json));
    nlohmann::ordered_json j;
    j["dataset_id"] = r.dataset_id;
    j["task"] = to_string(r.task);
    j["units"] = r.units;
    j["extra_units"] = r.extra_units;
    j["records"] = r.record_counts;
    return j.dump();
  });

  // Pipeline
  m.def("run_pipeline", &run_json, py::arg("manifest"), py::arg("config_json"), py::arg("run_translation") = true,
        py::arg("run_validation") = true);
  m.def("load_summary", [](const std::filesystem::path& run_dir) { return summary_to_json(load_summary(run_dir)).dump(); });

  // Evaluation
  m.def(
      "evaluate",
      [](const std::filesystem::path& manifest, const std::filesystem::path& embeddings, std::uint64_t seed) {
        auto enc = PrecomputedEncoder::load(embeddings);
        EvalOptions opts;
        opts.seed = seed;
        const auto r = evaluate(enc, load_dataset(manifest), opts);
        nlohmann::ordered_json j;
        j["task"] = to_string(r.task);
        j["dataset_id"] = r.dataset_id;
        j["main_metric"] = r.main_metric;
        j["metrics"] = r.metrics;
        j["warnings"] = r.warnings;
        return j.dump();
      },
      py::arg("manifest"), py::arg("embeddings"), py::arg("seed") = 42);
  m.def("benchmark_average", [](const std::map<std::string, double>& task_averages) {
    std::map<TaskType, double> avgs;
    for (const auto& [k, v] : task_averages) avgs[task_from(k)] = v;
    ModelCard card;
    card.name = "model";
    card.dim = 1;
    return aggregate_task_averages(avgs, card).overall;
  });

  // Reporting
  m.def("kept_ratio_means", [](const std::vector<std::tuple<std::string, std::string, std::size_t, std::size_t>>& rows) {
    std::vector<DatasetCounts> counts;
    for (const auto& [id, task, before, after] : rows) counts.push_back({id, task_from(task), before, after});
    std::map<std::string, double> out;
    for (const auto& [t, mean] : kept_ratio_report(counts).task_means) out[std::string(to_string(t))] = mean;
    return out;
  });
  m.def(
      "estimate_cost",
      [](std::int64_t tokens, double rate, int gpus, double watts, double duplex) {
        return cost_to_json(estimate_cost(tokens, rate, gpus, watts, duplex)).dump();
      },
      py::arg("tokens"), py::arg("rate"), py::arg("gpus"), py::arg("watts"), py::arg("duplex") = 2.0);
  m.def("score_bin", &score_bin);
}
