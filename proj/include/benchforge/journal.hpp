#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "benchforge/core.hpp"

namespace benchforge {

// Append-only run journal: one JSON object per line. The first line is the
// run header; every later line is a unit event. Stage-1 rejections and
// Stage-2 failures are terminal on their own, so only Stage 3 writes verdicts.

struct JournalHeader {
  std::string dataset_id;
  std::string config_fingerprint;
  std::map<std::string, std::string> prompt_fingerprints;  // template version -> sha256
  std::uint64_t seed = 0;
  bool operator==(const JournalHeader&) const = default;
};

struct DetectedEvent {
  std::string unit_id;
  std::string lang;
  bool accepted = false;
  int attempts = 0;
  bool parsed = false;
  std::string error;
  TokenUsage usage;
  bool operator==(const DetectedEvent&) const = default;
};

struct TranslatedEvent {
  std::string unit_id;
  bool ok = false;
  std::string source_text;
  std::string text;
  std::string model;
  std::string prompt_fingerprint;
  int attempts = 0;
  std::string error;
  TokenUsage usage;
  bool operator==(const TranslatedEvent&) const = default;
};

struct VerdictEvent {
  ValidationVerdict verdict;
  std::optional<std::string> detected_lang;
  std::map<std::string, int> judge_scores;
  std::string judge_raw;  // kept for audit
  int judge_calls = 0;
  TokenUsage usage;  // detector + judge calls made during validation
  bool operator==(const VerdictEvent&) const = default;
};

struct JournalState {
  JournalHeader header;
  std::map<std::string, DetectedEvent> detected;
  std::map<std::string, TranslatedEvent> translated;
  std::map<std::string, VerdictEvent> verdicts;
  std::size_t events = 0;  // unit events, header excluded
};

class JournalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rebuilds run state from a journal file. A trailing line without a newline
/// (an interrupted write) is ignored. Throws JournalError on malformed lines
/// or a second verdict for the same unit.
JournalState replay_journal(const std::filesystem::path& path);

/// (source, translation) for every unit with a kept verdict, by unit id.
std::vector<std::pair<std::string, std::string>> kept_translation_pairs(const JournalState& state);

class RunJournal {
 public:
  /// Creates the journal, or replays an existing one. An existing journal
  /// whose header differs from `header` is refused with an explanation.
  RunJournal(std::filesystem::path path, const JournalHeader& header);

  const JournalState& state() const { return state_; }
  bool resumed() const { return resumed_; }
  const std::filesystem::path& path() const { return path_; }

  void append(const DetectedEvent& e);
  void append(const TranslatedEvent& e);
  /// Throws std::logic_error when the unit already has a verdict.
  void append(const VerdictEvent& e);

 private:
  void write_line(const std::string& line);

  std::filesystem::path path_;
  std::ofstream out_;
  std::mutex mutex_;
  JournalState state_;
  bool resumed_ = false;
};

}  // namespace benchforge
