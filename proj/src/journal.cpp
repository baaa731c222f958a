#include "benchforge/journal.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

namespace benchforge {

namespace {

using ordered_json = nlohmann::ordered_json;
using nlohmann::json;

ordered_json usage_json(const TokenUsage& u) {
  return {{"input_tokens", u.input_tokens}, {"output_tokens", u.output_tokens}};
}

TokenUsage usage_from(const json& j) {
  TokenUsage u;
  if (j.is_object()) {
    u.input_tokens = j.value("input_tokens", std::int64_t{0});
    u.output_tokens = j.value("output_tokens", std::int64_t{0});
  }
  return u;
}

std::string header_line(const JournalHeader& h) {
  ordered_json j;
  j["event"] = "run";
  j["dataset_id"] = h.dataset_id;
  j["config_fingerprint"] = h.config_fingerprint;
  j["prompts"] = ordered_json::object();
  for (const auto& [k, v] : h.prompt_fingerprints) j["prompts"][k] = v;
  j["seed"] = h.seed;
  return j.dump();
}

JournalHeader header_from(const json& j) {
  JournalHeader h;
  h.dataset_id = j.at("dataset_id").get<std::string>();
  h.config_fingerprint = j.at("config_fingerprint").get<std::string>();
  for (const auto& [k, v] : j.at("prompts").items()) h.prompt_fingerprints[k] = v.get<std::string>();
  h.seed = j.value("seed", std::uint64_t{0});
  return h;
}

std::string event_line(const DetectedEvent& e) {
  ordered_json j;
  j["event"] = "detected";
  j["unit_id"] = e.unit_id;
  j["lang"] = e.lang;
  j["accepted"] = e.accepted;
  j["attempts"] = e.attempts;
  j["parsed"] = e.parsed;
  if (!e.error.empty()) j["error"] = e.error;
  j["usage"] = usage_json(e.usage);
  return j.dump();
}

std::string event_line(const TranslatedEvent& e) {
  ordered_json j;
  j["event"] = "translated";
  j["unit_id"] = e.unit_id;
  j["ok"] = e.ok;
  j["source_text"] = e.source_text;
  j["text"] = e.text;
  j["model"] = e.model;
  j["prompt_fingerprint"] = e.prompt_fingerprint;
  j["attempts"] = e.attempts;
  if (!e.error.empty()) j["error"] = e.error;
  j["usage"] = usage_json(e.usage);
  return j.dump();
}

std::string event_line(const VerdictEvent& e) {
  const auto& v = e.verdict;
  ordered_json j;
  j["event"] = "verdict";
  j["unit_id"] = v.unit_id;
  j["lang_check"] = to_string(v.lang_check);
  j["sem_score"] = v.sem_score ? ordered_json(*v.sem_score) : ordered_json(nullptr);
  j["sem_check"] = to_string(v.sem_check);
  j["judge_score"] = v.judge_score ? ordered_json(*v.judge_score) : ordered_json(nullptr);
  j["judge_check"] = to_string(v.judge_check);
  j["kept"] = v.kept;
  j["failure_stage"] = v.failure_stage ? ordered_json(to_string(*v.failure_stage)) : ordered_json(nullptr);
  j["reason"] = v.reason;
  j["detected_lang"] = e.detected_lang ? ordered_json(*e.detected_lang) : ordered_json(nullptr);
  j["judge_scores"] = ordered_json::object();
  for (const auto& [k, s] : e.judge_scores) j["judge_scores"][k] = s;
  j["judge_calls"] = e.judge_calls;
  j["judge_raw"] = e.judge_raw;
  j["usage"] = usage_json(e.usage);
  return j.dump();
}

CheckStatus check_from(const json& j, const char* key) {
  const auto s = parse_check_status(j.at(key).get<std::string>());
  if (!s) throw JournalError(std::string("bad value for ") + key);
  return *s;
}

std::optional<double> number_or_null(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

void apply_event(JournalState& st, const json& j) {
  const auto kind = j.at("event").get<std::string>();
  const auto unit = j.at("unit_id").get<std::string>();
  if (kind == "detected") {
    DetectedEvent e;
    e.unit_id = unit;
    e.lang = j.at("lang").get<std::string>();
    e.accepted = j.at("accepted").get<bool>();
    e.attempts = j.value("attempts", 0);
    e.parsed = j.value("parsed", false);
    e.error = j.value("error", std::string());
    e.usage = usage_from(j.value("usage", json::object()));
    st.detected[unit] = std::move(e);
  } else if (kind == "translated") {
    TranslatedEvent e;
    e.unit_id = unit;
    e.ok = j.at("ok").get<bool>();
    e.source_text = j.value("source_text", std::string());
    e.text = j.value("text", std::string());
    e.model = j.value("model", std::string());
    e.prompt_fingerprint = j.value("prompt_fingerprint", std::string());
    e.attempts = j.value("attempts", 0);
    e.error = j.value("error", std::string());
    e.usage = usage_from(j.value("usage", json::object()));
    st.translated[unit] = std::move(e);
  } else if (kind == "verdict") {
    if (st.verdicts.contains(unit)) throw JournalError("second verdict for unit " + unit);
    VerdictEvent e;
    e.verdict = ValidationVerdict::from_checks(unit, check_from(j, "lang_check"), number_or_null(j, "sem_score"),
                                               check_from(j, "sem_check"), number_or_null(j, "judge_score"),
                                               check_from(j, "judge_check"), j.value("reason", std::string()));
    if (e.verdict.kept != j.at("kept").get<bool>()) throw JournalError("verdict for " + unit + " is inconsistent");
    if (!j.at("detected_lang").is_null()) e.detected_lang = j.at("detected_lang").get<std::string>();
    const auto scores = j.value("judge_scores", json::object());
    for (const auto& [k, s] : scores.items()) e.judge_scores[k] = s.get<int>();
    e.judge_calls = j.value("judge_calls", 0);
    e.judge_raw = j.value("judge_raw", std::string());
    e.usage = usage_from(j.value("usage", json::object()));
    st.verdicts[unit] = std::move(e);
  } else {
    throw JournalError("unknown event '" + kind + "'");
  }
  ++st.events;
}

// Reads complete lines; returns the byte length covered by them.
std::size_t replay_into(const std::filesystem::path& path, JournalState& st, bool& has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw JournalError("cannot open journal " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();
  std::size_t pos = 0, line_no = 0;
  has_header = false;
  while (pos < data.size()) {
    const auto nl = data.find('\n', pos);
    if (nl == std::string::npos) break;  // interrupted write
    ++line_no;
    const std::string_view line(data.data() + pos, nl - pos);
    try {
      const auto j = json::parse(line);
      if (!has_header) {
        if (j.at("event").get<std::string>() != "run") throw JournalError("first line is not a run header");
        st.header = header_from(j);
        has_header = true;
      } else {
        apply_event(st, j);
      }
    } catch (const JournalError& e) {
      throw JournalError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw JournalError(path.string() + ":" + std::to_string(line_no) + ": malformed event: " + e.what());
    }
    pos = nl + 1;
  }
  return pos;
}

std::string describe_mismatch(const JournalHeader& old_h, const JournalHeader& new_h) {
  std::string out;
  if (old_h.dataset_id != new_h.dataset_id) {
    out += " dataset '" + old_h.dataset_id + "' vs '" + new_h.dataset_id + "';";
  }
  if (old_h.config_fingerprint != new_h.config_fingerprint) {
    out += " config fingerprint " + old_h.config_fingerprint.substr(0, 12) + " vs " +
           new_h.config_fingerprint.substr(0, 12) + ";";
  }
  if (old_h.prompt_fingerprints != new_h.prompt_fingerprints) out += " prompt templates changed;";
  if (old_h.seed != new_h.seed) out += " seed " + std::to_string(old_h.seed) + " vs " + std::to_string(new_h.seed) + ";";
  return out;
}

}  // namespace

JournalState replay_journal(const std::filesystem::path& path) {
  JournalState st;
  bool has_header = false;
  replay_into(path, st, has_header);
  if (!has_header) throw JournalError("journal " + path.string() + " has no run header");
  return st;
}

std::vector<std::pair<std::string, std::string>> kept_translation_pairs(const JournalState& state) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [id, v] : state.verdicts) {
    if (!v.verdict.kept) continue;
    const auto t = state.translated.find(id);
    if (t != state.translated.end() && t->second.ok) out.emplace_back(t->second.source_text, t->second.text);
  }
  return out;
}

RunJournal::RunJournal(std::filesystem::path path, const JournalHeader& header) : path_(std::move(path)) {
  std::error_code ec;
  const bool exists = std::filesystem::exists(path_, ec) && std::filesystem::file_size(path_, ec) > 0;
  std::size_t valid_bytes = 0;
  bool has_header = false;
  if (exists) {
    valid_bytes = replay_into(path_, state_, has_header);
  }
  if (has_header) {
    if (!(state_.header == header)) {
      throw JournalError("refusing to resume " + path_.string() + ": the run was started with different settings (" +
                         describe_mismatch(state_.header, header) +
                         " ). Use a new run directory or restore the original configuration.");
    }
    resumed_ = true;
    // Drop a partially written trailing line before appending.
    if (std::filesystem::file_size(path_) != valid_bytes) std::filesystem::resize_file(path_, valid_bytes);
    out_.open(path_, std::ios::binary | std::ios::app);
  } else {
    state_ = JournalState{};
    state_.header = header;
    out_.open(path_, std::ios::binary | std::ios::trunc);
  }
  if (!out_) throw JournalError("cannot open journal " + path_.string() + " for writing");
  if (!has_header) write_line(header_line(header));
}

void RunJournal::write_line(const std::string& line) {
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw JournalError("write to " + path_.string() + " failed");
}

void RunJournal::append(const DetectedEvent& e) {
  std::lock_guard lock(mutex_);
  write_line(event_line(e));
  state_.detected[e.unit_id] = e;
  ++state_.events;
}

void RunJournal::append(const TranslatedEvent& e) {
  std::lock_guard lock(mutex_);
  write_line(event_line(e));
  state_.translated[e.unit_id] = e;
  ++state_.events;
}

void RunJournal::append(const VerdictEvent& e) {
  std::lock_guard lock(mutex_);
  if (state_.verdicts.contains(e.verdict.unit_id)) {
    throw std::logic_error("unit " + e.verdict.unit_id + " already has a verdict");
  }
  write_line(event_line(e));
  state_.verdicts[e.verdict.unit_id] = e;
  ++state_.events;
}

}  // namespace benchforge
