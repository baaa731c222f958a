#include "benchforge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "benchforge/journal.hpp"
#include "benchforge/metrics.hpp"
#include "benchforge/prompts.hpp"
#include "benchforge/text.hpp"

namespace benchforge {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Runs fn(i) for i in [0, n) on up to `workers` threads. Results land by
// index, so the output never depends on scheduling.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, int workers, F&& fn) {
  std::vector<std::optional<T>> slots(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t count = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (count <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

ChatRequest single_prompt(const std::string& model, std::string prompt, double temperature, int max_tokens) {
  ChatRequest req;
  req.model = model;
  req.messages.push_back({"user", std::move(prompt)});
  req.temperature = temperature;
  req.max_tokens = max_tokens;
  return req;
}

std::string error_reason(const std::exception& e) { return std::string("backend_error: ") + e.what(); }

}  // namespace

// ---------------------------------------------------------------------------
// Detection

std::string build_detection_prompt(std::string_view text) {
  return text::render_template(prompts::detect_language_template(), {{"text", std::string(text)}});
}

std::optional<LangLabel> parse_detection_reply(std::string_view reply) {
  std::optional<std::string_view> last;
  std::size_t pos = 0;
  while (pos <= reply.size()) {
    auto nl = reply.find('\n', pos);
    if (nl == std::string_view::npos) nl = reply.size();
    const auto line = text::trim(reply.substr(pos, nl - pos));
    if (line.starts_with("LANG:")) last = line.substr(5);
    pos = nl + 1;
  }
  if (!last) return std::nullopt;
  auto code = text::trim(*last);
  // Tolerate light decoration such as backticks or a closing period.
  while (!code.empty() && (code.front() == '`' || code.front() == '*')) code.remove_prefix(1);
  while (!code.empty() && (code.back() == '`' || code.back() == '*' || code.back() == '.')) code.remove_suffix(1);
  return LangLabel::parse(code);
}

DetectionResult detect_language(ChatBackend& detector, const std::string& model, std::string_view text,
                                int attempts) {
  if (text.empty()) throw std::invalid_argument("detect_language: empty text");
  DetectionResult out;
  const auto req = single_prompt(model, build_detection_prompt(text), 0.0, 4096);
  for (int i = 0; i < std::max(1, attempts); ++i) {
    ++out.attempts;
    try {
      const auto resp = detector.chat(req);
      out.usage += resp.usage;
      out.raw = resp.text;
      out.error.clear();
      if (auto label = parse_detection_reply(resp.text)) {
        out.label = *label;
        out.parsed = true;
        return out;
      }
    } catch (const BackendError& e) {
      out.error = e.what();
      if (e.kind() == BackendError::Kind::Configuration) break;
    }
  }
  out.label = LangLabel::undetermined();
  return out;
}

// ---------------------------------------------------------------------------
// Stages

FilterResult stage1_filter(std::span<const SequenceUnit> units, const PipelineConfig& cfg, ChatBackend& detector) {
  FilterResult out;
  if (cfg.bypass_source_filter) {
    out.kept.assign(units.begin(), units.end());
    return out;
  }
  out.detections = parallel_map<DetectionResult>(units.size(), cfg.max_in_flight, [&](std::size_t i) {
    return detect_language(detector, cfg.backends.detector_model, units[i].source_text, cfg.detect_attempts);
  });
  for (std::size_t i = 0; i < units.size(); ++i) {
    (out.detections[i].label == cfg.source_lang ? out.kept : out.rejected).push_back(units[i]);
  }
  return out;
}

std::string build_translation_prompt(std::string_view text, const LangLabel& source, const LangLabel& target) {
  return text::render_template(prompts::translate_template(),
                               {{"source_language", prompts::language_name(source.code())},
                                {"source_lang", source.code()},
                                {"target_language", prompts::language_name(target.code())},
                                {"target_lang", target.code()},
                                {"source_text", std::string(text)}});
}

std::vector<TranslationOutcome> stage2_translate(std::span<const SequenceUnit> units, const PipelineConfig& cfg,
                                                 ChatBackend& translator) {
  const auto fingerprint = prompt_fingerprint(prompts::translate_template());
  return parallel_map<TranslationOutcome>(units.size(), cfg.max_in_flight, [&](std::size_t i) {
    TranslationOutcome out;
    out.unit = units[i];
    const auto req = single_prompt(cfg.backends.translator_model,
                                   build_translation_prompt(units[i].source_text, cfg.source_lang, cfg.target_lang),
                                   cfg.temperature, cfg.max_new_tokens);
    try {
      const auto resp = translator.chat(req);
      out.attempts = resp.attempts;
      out.usage = resp.usage;
      const auto translated = text::trim(resp.text);
      if (translated.empty()) {
        out.error = "empty translation";
        return out;
      }
      out.record = TranslationRecord{units[i], text::nfc(translated), cfg.backends.translator_model, fingerprint,
                                     resp.usage};
    } catch (const BackendError& e) {
      out.attempts = e.attempts();
      out.error = e.what();
    } catch (const std::runtime_error& e) {  // invalid UTF-8 in the reply
      out.error = e.what();
    }
    return out;
  });
}

std::vector<std::string> judge_criteria(const PipelineConfig& cfg) {
  std::vector<std::string> out;
  for (const auto name : kDefaultCriteria) {
    if (cfg.judge_weights.contains(std::string(name))) out.emplace_back(name);
  }
  for (const auto& [name, _] : cfg.judge_weights) {
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
  }
  return out;
}

ValidationOutcome validate_translation(const TranslationRecord& rec, const PipelineConfig& cfg,
                                       ChatBackend& detector, EmbeddingBackend& embedder, ChatBackend& judge) {
  ValidationOutcome out;
  const auto& unit_id = rec.unit.unit_id;
  const auto finish = [&](CheckStatus lang, std::optional<double> sem_score, CheckStatus sem,
                          std::optional<double> judge_score, CheckStatus judge_status, std::string reason) {
    out.verdict = ValidationVerdict::from_checks(unit_id, lang, sem_score, sem, judge_score, judge_status,
                                                 std::move(reason));
    return out;
  };

  // 1. Language check.
  const auto det = detect_language(detector, cfg.backends.detector_model, rec.translated_text, cfg.detect_attempts);
  out.usage += det.usage;
  out.detected_lang = det.label.code();
  if (!(det.label == cfg.target_lang)) {
    auto reason = !det.parsed && !det.error.empty() ? "backend_error: " + det.error
                                                    : "lang_mismatch: detected " + det.label.code();
    return finish(CheckStatus::Fail, std::nullopt, CheckStatus::Skipped, std::nullopt, CheckStatus::Skipped,
                  std::move(reason));
  }

  // 2. Semantic-similarity gate.
  double cosine = 0.0;
  try {
    const std::vector<std::string> texts{rec.unit.source_text, rec.translated_text};
    const auto vecs = embedder.embed(texts);
    if (vecs.size() != 2) throw BackendError(BackendError::Kind::InvalidResponse, "embedder returned wrong count");
    cosine = metrics::cosine_similarity(vecs[0].values, vecs[1].values);
  } catch (const BackendError& e) {
    return finish(CheckStatus::Pass, std::nullopt, CheckStatus::Fail, std::nullopt, CheckStatus::Skipped,
                  error_reason(e));
  } catch (const std::invalid_argument& e) {
    return finish(CheckStatus::Pass, std::nullopt, CheckStatus::Fail, std::nullopt, CheckStatus::Skipped,
                  error_reason(e));
  }
  if (!meets_threshold(cosine, cfg.sem_threshold)) {
    return finish(CheckStatus::Pass, cosine, CheckStatus::Fail, std::nullopt, CheckStatus::Skipped,
                  "below_threshold");
  }

  // 3. Judge.
  const auto criteria = judge_criteria(cfg);
  JudgePromptOptions popts;
  popts.criteria = criteria;
  popts.source_language = prompts::language_name(cfg.source_lang.code());
  popts.target_language = prompts::language_name(cfg.target_lang.code());
  const auto req = single_prompt(cfg.backends.judge_model,
                                 build_judge_prompt(rec.unit.source_text, rec.translated_text, popts),
                                 cfg.temperature, cfg.max_new_tokens);
  for (int attempt = 0; attempt < std::max(1, cfg.judge_attempts); ++attempt) {
    ++out.judge_calls;
    try {
      const auto resp = judge.chat(req);
      out.usage += resp.usage;
      out.judge_raw = resp.text;
      auto card = parse_scorecard(resp.text, criteria);
      const auto decision = decide(combine_score(card, cfg.judge_weights), cfg.judge_threshold);
      out.scorecard = std::move(card);
      return finish(CheckStatus::Pass, cosine, CheckStatus::Pass, decision.combined,
                    decision.passed ? CheckStatus::Pass : CheckStatus::Fail,
                    decision.passed ? "" : "judge_below_threshold");
    } catch (const JudgeParseError&) {
      continue;
    } catch (const BackendError& e) {
      return finish(CheckStatus::Pass, cosine, CheckStatus::Pass, std::nullopt, CheckStatus::Fail, error_reason(e));
    }
  }
  return finish(CheckStatus::Pass, cosine, CheckStatus::Pass, std::nullopt, CheckStatus::Fail,
                "unparseable_judgment");
}

std::vector<ValidationOutcome> stage3_validate(std::span<const TranslationRecord> records, const PipelineConfig& cfg,
                                               ChatBackend& detector, EmbeddingBackend& embedder,
                                               ChatBackend& judge) {
  return parallel_map<ValidationOutcome>(records.size(), cfg.max_in_flight, [&](std::size_t i) {
    return validate_translation(records[i], cfg, detector, embedder, judge);
  });
}

std::string prompt_fingerprint(std::string_view tpl) { return text::sha256_hex(tpl); }

std::map<std::string, std::string> prompt_fingerprints() {
  return {
      {std::string(prompts::detect_language_version()), prompt_fingerprint(prompts::detect_language_template())},
      {std::string(prompts::translate_version()), prompt_fingerprint(prompts::translate_template())},
      {std::string(prompts::judge_version()), prompt_fingerprint(prompts::judge_template())},
  };
}

// ---------------------------------------------------------------------------
// Summary serialization

TokenUsage RunSummary::total_tokens() const {
  TokenUsage t = detection_tokens;
  t += translation_tokens;
  t += validation_tokens;
  return t;
}

namespace {

ordered_json usage_json(const TokenUsage& u) {
  return {{"input_tokens", u.input_tokens}, {"output_tokens", u.output_tokens}};
}

TokenUsage usage_from(const json& j) {
  return {j.at("input_tokens").get<std::int64_t>(), j.at("output_tokens").get<std::int64_t>()};
}

constexpr FailureStage kStages[] = {FailureStage::SourceFilter, FailureStage::Translation, FailureStage::Language,
                                    FailureStage::Semantic, FailureStage::Judge};

}  // namespace

ordered_json summary_to_json(const RunSummary& s) {
  ordered_json j;
  j["dataset_id"] = s.dataset_id;
  j["task"] = to_string(s.task);
  j["completed"] = s.completed;
  j["units_total"] = s.units_total;
  j["units_kept"] = s.units_kept;
  j["units_pending"] = s.units_pending;
  j["failures"] = ordered_json::object();
  for (const auto stage : kStages) {
    const auto it = s.failures.find(stage);
    j["failures"][std::string(to_string(stage))] = it == s.failures.end() ? 0 : it->second;
  }
  j["extra_units_translated"] = s.extra_units_translated;
  j["records_before"] = s.records_before;
  j["records_after"] = s.records_after;
  j["kept_ratio"] = s.kept_ratio;
  j["collections"] = ordered_json::object();
  for (const auto& [name, counts] : s.collections) {
    j["collections"][name] = {{"before", counts.first}, {"after", counts.second}};
  }
  j["tokens"] = {{"detection", usage_json(s.detection_tokens)},
                 {"translation", usage_json(s.translation_tokens)},
                 {"validation", usage_json(s.validation_tokens)},
                 {"total", usage_json(s.total_tokens())}};
  j["backend_failures"] = s.backend_failures;
  j["config_fingerprint"] = s.config_fingerprint;
  j["seed"] = s.seed;
  return j;
}

RunSummary summary_from_json(const json& j) {
  RunSummary s;
  s.dataset_id = j.at("dataset_id").get<std::string>();
  const auto task = parse_task_type(j.at("task").get<std::string>());
  if (!task) throw std::runtime_error("summary has an unknown task");
  s.task = *task;
  s.completed = j.at("completed").get<bool>();
  s.units_total = j.at("units_total").get<std::size_t>();
  s.units_kept = j.at("units_kept").get<std::size_t>();
  s.units_pending = j.at("units_pending").get<std::size_t>();
  for (const auto& [name, count] : j.at("failures").items()) {
    const auto stage = parse_failure_stage(name);
    if (!stage) throw std::runtime_error("summary has an unknown failure stage '" + name + "'");
    if (count.get<std::size_t>() > 0) s.failures[*stage] = count.get<std::size_t>();
  }
  s.extra_units_translated = j.at("extra_units_translated").get<std::size_t>();
  s.records_before = j.at("records_before").get<std::size_t>();
  s.records_after = j.at("records_after").get<std::size_t>();
  s.kept_ratio = j.at("kept_ratio").get<double>();
  for (const auto& [name, c] : j.at("collections").items()) {
    s.collections[name] = {c.at("before").get<std::size_t>(), c.at("after").get<std::size_t>()};
  }
  const auto& t = j.at("tokens");
  s.detection_tokens = usage_from(t.at("detection"));
  s.translation_tokens = usage_from(t.at("translation"));
  s.validation_tokens = usage_from(t.at("validation"));
  s.backend_failures = j.at("backend_failures").get<std::size_t>();
  s.config_fingerprint = j.at("config_fingerprint").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

RunSummary load_summary(const fs::path& run_dir) {
  const auto path = run_dir / "summary.json";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return summary_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Runs

namespace {

void require_valid(const PipelineConfig& cfg) {
  const auto violations = validate_config(cfg);
  if (violations.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& v : violations) msg += "\n  " + v.field + " (" + v.rule + "): " + v.message;
  throw ConfigError(msg);
}

struct UnitPlan {
  TaskDataset ds;
  std::vector<SequenceUnit> processed;
  std::vector<SequenceUnit> extra;
  std::set<std::string> splits;
};

UnitPlan plan_units(const fs::path& manifest, const PipelineConfig& cfg) {
  UnitPlan plan;
  plan.ds = load_dataset(manifest);
  plan.splits = {cfg.splits.begin(), cfg.splits.end()};
  for (const auto& s : plan.splits) {
    const auto& listed = plan.ds.manifest.splits;
    if (std::find(listed.begin(), listed.end(), s) == listed.end()) {
      throw ConfigError("split '" + s + "' is not listed in " + manifest.string());
    }
  }
  plan.processed = decompose(plan.ds, plan.splits);
  if (cfg.translate_unvalidated_splits) {
    std::set<std::string> seen;
    for (const auto& u : plan.processed) seen.insert(u.unit_id);
    const std::set<std::string> all(plan.ds.manifest.splits.begin(), plan.ds.manifest.splits.end());
    for (auto& u : decompose(plan.ds, all)) {
      if (!seen.contains(u.unit_id)) plan.extra.push_back(std::move(u));
    }
  }
  return plan;
}

std::set<std::string> processed_collections(const TaskDataset& ds, const std::set<std::string>& splits) {
  if (ds.task() == TaskType::Retrieval) return {"corpus", "queries"};
  return splits;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

}  // namespace

DryRunReport dry_run(const fs::path& manifest, const PipelineConfig& cfg) {
  require_valid(cfg);
  const auto plan = plan_units(manifest, cfg);
  DryRunReport r;
  r.dataset_id = plan.ds.manifest.dataset_id;
  r.task = plan.ds.task();
  r.units = plan.processed.size();
  r.extra_units = plan.extra.size();
  r.record_counts = plan.ds.record_counts();
  return r;
}

fs::path run_manifest(const fs::path& run_dir) {
  const auto path = run_dir / "run.json";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string() + "; is this a run directory?");
  return json::parse(in).at("manifest").get<std::string>();
}

RunSummary run_pipeline(const fs::path& manifest, const PipelineConfig& cfg, const BackendSet& backends,
                        const PipelineOptions& opts) {
  require_valid(cfg);
  const auto log = [&](const std::string& msg) {
    if (opts.log) opts.log(msg);
  };
  auto plan = plan_units(manifest, cfg);
  const auto& ds = plan.ds;

  const fs::path run_dir = cfg.run_dir;
  fs::create_directories(run_dir);
  const JournalHeader header{ds.manifest.dataset_id, config_fingerprint(cfg), prompt_fingerprints(), cfg.seed};
  RunJournal journal(run_dir / "journal.jsonl", header);
  save_config(cfg, (run_dir / "config.json").string());
  {
    ordered_json run;
    run["manifest"] = fs::absolute(manifest).lexically_normal().string();
    run["dataset_id"] = ds.manifest.dataset_id;
    run["seed"] = cfg.seed;
    write_text_file(run_dir / "run.json", run.dump(2) + "\n");
  }

  const auto& st = journal.state();
  const bool bypass = cfg.bypass_source_filter;
  // Where a unit stands according to the journal.
  enum class Next { Detect, Translate, Validate, Done };
  const auto next_step = [&](const SequenceUnit& u, bool validated) {
    if (!bypass) {
      const auto d = st.detected.find(u.unit_id);
      if (d == st.detected.end()) return Next::Detect;
      if (!d->second.accepted) return Next::Done;
    }
    const auto t = st.translated.find(u.unit_id);
    if (t == st.translated.end()) return Next::Translate;
    if (!t->second.ok || !validated) return Next::Done;
    return st.verdicts.contains(u.unit_id) ? Next::Done : Next::Validate;
  };

  struct Work {
    const SequenceUnit* unit;
    bool validated;
  };
  std::vector<Work> all;
  for (const auto& u : plan.processed) all.push_back({&u, true});
  for (const auto& u : plan.extra) all.push_back({&u, false});

  std::size_t pending_at_start = 0;
  for (const auto& w : all) pending_at_start += next_step(*w.unit, w.validated) != Next::Done ? 1 : 0;
  if (journal.resumed()) {
    log("resumed: " + std::to_string(pending_at_start) + " pending units");
  } else {
    log("starting: " + std::to_string(all.size()) + " units from " + ds.manifest.dataset_id);
  }

  std::size_t appended = 0;
  bool interrupted = false;
  const auto budget_left = [&] { return !opts.max_new_events || appended < *opts.max_new_events; };
  const auto record = [&](const auto& event) {
    if (!budget_left()) {
      interrupted = true;
      return false;
    }
    journal.append(event);
    ++appended;
    return true;
  };
  const std::size_t batch = static_cast<std::size_t>(std::max(1, cfg.batch_size));

  // Stage-wise passes in unit order keep the journal independent of batching.
  const auto pass = [&](Next step, const auto& process) {
    std::vector<const SequenceUnit*> todo;
    for (const auto& w : all) {
      if (next_step(*w.unit, w.validated) == step) todo.push_back(w.unit);
    }
    for (std::size_t start = 0; start < todo.size() && !interrupted; start += batch) {
      const auto end = std::min(todo.size(), start + batch);
      std::vector<SequenceUnit> units;
      for (std::size_t i = start; i < end; ++i) units.push_back(*todo[i]);
      process(units);
    }
  };

  if (opts.run_translation && !interrupted) {
    if (!bypass) {
      pass(Next::Detect, [&](const std::vector<SequenceUnit>& units) {
        const auto result = stage1_filter(units, cfg, *backends.detector);
        for (std::size_t i = 0; i < units.size(); ++i) {
          const auto& d = result.detections[i];
          if (!record(DetectedEvent{units[i].unit_id, d.label.code(), d.label == cfg.source_lang, d.attempts,
                                    d.parsed, d.error, d.usage})) {
            return;
          }
        }
      });
      if (!interrupted) log("stage 1 done");
    }
    if (!interrupted) {
      pass(Next::Translate, [&](const std::vector<SequenceUnit>& units) {
        for (auto& o : stage2_translate(units, cfg, *backends.translator)) {
          TranslatedEvent e;
          e.unit_id = o.unit.unit_id;
          e.ok = o.record.has_value();
          e.source_text = o.unit.source_text;
          if (o.record) {
            e.text = o.record->translated_text;
            e.model = o.record->backend_model;
            e.prompt_fingerprint = o.record->prompt_fingerprint;
          }
          e.attempts = o.attempts;
          e.error = o.error;
          e.usage = o.usage;
          if (!record(e)) return;
        }
      });
      if (!interrupted) log("stage 2 done");
    }
  }
  if (opts.run_validation && !interrupted) {
    pass(Next::Validate, [&](const std::vector<SequenceUnit>& units) {
      std::vector<TranslationRecord> recs;
      for (const auto& u : units) {
        const auto& t = st.translated.at(u.unit_id);
        recs.push_back({u, t.text, t.model, t.prompt_fingerprint, t.usage});
      }
      for (auto& o : stage3_validate(recs, cfg, *backends.detector, *backends.embedder, *backends.judge)) {
        VerdictEvent e;
        e.verdict = o.verdict;
        e.detected_lang = o.detected_lang;
        if (o.scorecard) e.judge_scores = o.scorecard->scores;
        e.judge_raw = o.judge_raw;
        e.judge_calls = o.judge_calls;
        e.usage = o.usage;
        if (!record(e)) return;
      }
    });
    if (!interrupted) log("stage 3 done");
  }

  // Summary from the journal state.
  RunSummary s;
  s.dataset_id = ds.manifest.dataset_id;
  s.task = ds.task();
  s.units_total = plan.processed.size();
  s.config_fingerprint = header.config_fingerprint;
  s.seed = cfg.seed;

  std::map<std::string, std::string> translations;
  std::map<std::string, ValidationVerdict> verdicts;
  for (const auto& w : all) {
    const auto& id = w.unit->unit_id;
    if (const auto d = st.detected.find(id); d != st.detected.end()) {
      s.detection_tokens += d->second.usage;
      if (!d->second.error.empty()) ++s.backend_failures;
    }
    if (const auto t = st.translated.find(id); t != st.translated.end()) {
      s.translation_tokens += t->second.usage;
      if (t->second.ok) {
        translations[id] = t->second.text;
        if (!w.validated) ++s.extra_units_translated;
      } else {
        ++s.backend_failures;
      }
    }
    if (const auto v = st.verdicts.find(id); v != st.verdicts.end()) {
      s.validation_tokens += v->second.usage;
      if (v->second.verdict.reason.starts_with("backend_error")) ++s.backend_failures;
    }
    if (!w.validated) continue;

    if (next_step(*w.unit, true) != Next::Done) {
      ++s.units_pending;
      continue;
    }
    ValidationVerdict verdict;
    if (const auto d = st.detected.find(id); !bypass && !d->second.accepted) {
      verdict = ValidationVerdict::rejected_before_validation(id, FailureStage::SourceFilter,
                                                              "source language " + d->second.lang);
    } else if (const auto& t = st.translated.at(id); !t.ok) {
      verdict = ValidationVerdict::rejected_before_validation(id, FailureStage::Translation, t.error);
    } else {
      verdict = st.verdicts.at(id).verdict;
    }
    if (verdict.kept) {
      ++s.units_kept;
    } else {
      ++s.failures[*verdict.failure_stage];
    }
    verdicts.emplace(id, std::move(verdict));
  }

  const auto collections = processed_collections(ds, plan.splits);
  const auto before = ds.record_counts();
  for (const auto& [name, count] : before) {
    if (collections.contains(name)) {
      s.collections[name] = {count, 0};
      s.records_before += count;
    }
  }

  s.completed = !interrupted && s.units_pending == 0;
  if (s.completed) {
    auto result = recompose(ds, translations, verdicts, plan.splits);
    result.dataset.manifest.language = cfg.target_lang.code();
    for (const auto& [name, count] : result.dataset.record_counts()) {
      if (collections.contains(name)) {
        s.collections[name].second = count;
        s.records_after += count;
      }
    }
    s.kept_ratio = s.records_before > 0
                       ? static_cast<double>(s.records_after) / static_cast<double>(s.records_before)
                       : 0.0;
    const auto out_dir = run_dir / "output";
    fs::remove_all(out_dir);
    write_dataset(result.dataset, out_dir);
    std::string drops;
    for (const auto& d : result.drops) {
      ordered_json j;
      j["collection"] = d.collection;
      j["record_id"] = d.record_id;
      j["reason"] = to_string(d.reason);
      j["stage"] = d.stage;
      drops += j.dump() + "\n";
    }
    write_text_file(run_dir / "drops.jsonl", drops);
    log("done: kept " + std::to_string(s.records_after) + "/" + std::to_string(s.records_before) + " records");
  } else {
    log((interrupted ? "interrupted: " : "incomplete: ") + std::to_string(s.units_pending) + " units pending");
  }
  write_text_file(run_dir / "summary.json", summary_to_json(s).dump(2) + "\n");
  return s;
}

}  // namespace benchforge
