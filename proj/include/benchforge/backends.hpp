#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <semaphore>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "benchforge/core.hpp"

namespace benchforge {

struct ChatMessage {
  std::string role;
  std::string content;
  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 4096;

  /// Throws std::invalid_argument when messages are empty or temperature < 0.
  void validate() const;
};

struct ChatResponse {
  std::string text;
  TokenUsage usage;
  int attempts = 1;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::string model;
};

class BackendError : public std::runtime_error {
 public:
  enum class Kind {
    Transport,      // connection failures and retryable statuses, after retries
    Configuration,  // 4xx: bad key, bad model, bad request
    InvalidResponse,
  };
  BackendError(Kind kind, const std::string& what, int status = 0, int attempts = 1)
      : std::runtime_error(what), kind_(kind), status_(status), attempts_(attempts) {}
  Kind kind() const { return kind_; }
  int status() const { return status_; }
  int attempts() const { return attempts_; }

 private:
  Kind kind_;
  int status_;
  int attempts_;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse chat(const ChatRequest& req) = 0;
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  /// One vector per input text, in input order.
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
};

/// ceil(UTF-8 bytes / 4). Only used when a response carries no usage block.
std::int64_t count_tokens(std::string_view text);

// ---------------------------------------------------------------------------
// Retry

struct RetryPolicy {
  int max_attempts = 5;
  double base_seconds = 1.0;
  double factor = 2.0;
  double jitter = 0.2;  // delay scaled by a uniform factor in [1 - jitter, 1 + jitter]

  /// Delay before retry number `retry` (1-based).
  std::chrono::duration<double> delay(int retry, std::mt19937_64& rng) const;
};

using Sleeper = std::function<void(std::chrono::duration<double>)>;
Sleeper real_sleeper();

// ---------------------------------------------------------------------------
// HTTP transport

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  /// Throws BackendError(Transport) when no response is received.
  virtual HttpResponse post(const std::string& url, const HttpHeaders& headers,
                            const std::string& body) = 0;
};

/// cpp-httplib backed transport; handles http:// and https:// URLs.
std::shared_ptr<HttpTransport> make_http_transport(double timeout_seconds);

struct ClientOptions {
  std::string url;  // full endpoint URL
  std::string model;
  std::string api_key;
  RetryPolicy retry;
  int max_in_flight = 8;
  std::uint64_t seed = 42;
  Sleeper sleep;  // defaults to real_sleeper()
};

/// Runs `attempt` with the retry policy. `attempt` returns an HttpResponse;
/// 5xx, 408, 429 and transport errors are retried, other non-2xx statuses
/// fail immediately. Returns the final 2xx response and the attempt count.
std::pair<HttpResponse, int> post_with_retry(HttpTransport& transport, const ClientOptions& opts,
                                             const HttpHeaders& headers, const std::string& body,
                                             std::mt19937_64& rng);

/// OpenAI-compatible `/v1/chat/completions` client.
class OpenAiChatClient final : public ChatBackend {
 public:
  OpenAiChatClient(ClientOptions opts, std::shared_ptr<HttpTransport> transport);
  ChatResponse chat(const ChatRequest& req) override;

  /// Serialized request body; identical requests give identical bytes.
  static std::string request_body(const ChatRequest& req);

 private:
  ClientOptions opts_;
  std::shared_ptr<HttpTransport> transport_;
  std::counting_semaphore<4096> in_flight_;
  std::atomic<std::uint64_t> next_id_{0};
};

/// OpenAI-compatible `/v1/embeddings` client.
class OpenAiEmbeddingClient final : public EmbeddingBackend {
 public:
  OpenAiEmbeddingClient(ClientOptions opts, std::shared_ptr<HttpTransport> transport);
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

  static std::string request_body(const std::string& model, std::span<const std::string> texts);

 private:
  ClientOptions opts_;
  std::shared_ptr<HttpTransport> transport_;
  std::counting_semaphore<4096> in_flight_;
  std::atomic<std::uint64_t> next_id_{0};
  std::mutex dim_mutex_;
  std::size_t dim_ = 0;
};

// ---------------------------------------------------------------------------
// Deterministic mocks

enum class MockTranslateMode { Identity, Marker, Table, Corrupt };
std::optional<MockTranslateMode> parse_mock_translate_mode(std::string_view name);

inline constexpr std::string_view kMockMarker = "VI:";

/// identity: unchanged; marker: "VI:" prefix; table: lookup, else marker;
/// corrupt: ASCII letters replaced by Cyrillic ones.
std::string mock_translate(std::string_view text, MockTranslateMode mode,
                           const std::map<std::string, std::string>& table = {});

/// Seeded hash of the text mapped to a unit vector.
std::vector<double> mock_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

/// Script-count heuristic standing in for an LLM detector: dominant script
/// decides; Latin text with Vietnamese-specific letters is vie_Latn, and so is
/// anything carrying the "VI:" marker.
LangLabel mock_detect_language(std::string_view text);

/// Returns the last user message.
class MockEchoChat final : public ChatBackend {
 public:
  ChatResponse chat(const ChatRequest& req) override;
};

/// Answers detection prompts (text inside a <text> block) with a short
/// reasoning line followed by `LANG: <code>`.
class MockDetectorChat final : public ChatBackend {
 public:
  explicit MockDetectorChat(std::map<std::string, std::string> table = {},
                            std::set<std::string> garbage = {});
  ChatResponse chat(const ChatRequest& req) override;
  std::uint64_t calls() const { return calls_.load(); }

 private:
  std::map<std::string, std::string> table_;
  std::set<std::string> garbage_;
  std::atomic<std::uint64_t> calls_{0};
};

/// Answers translation prompts (text inside a <source> block) with mock_translate.
class MockTranslatorChat final : public ChatBackend {
 public:
  MockTranslatorChat(MockTranslateMode mode, std::map<std::string, std::string> table = {},
                     std::set<std::string> hard_failures = {});
  ChatResponse chat(const ChatRequest& req) override;
  std::uint64_t calls() const { return calls_.load(); }

 private:
  MockTranslateMode mode_;
  std::map<std::string, std::string> table_;
  std::set<std::string> hard_failures_;
  std::atomic<std::uint64_t> calls_{0};
};

/// Answers judge prompts with a reasoning paragraph and a one-line JSON
/// scorecard. Scores come from the per-source override table, else the defaults.
class MockJudgeChat final : public ChatBackend {
 public:
  explicit MockJudgeChat(std::map<std::string, int> default_scores = {},
                         std::map<std::string, std::map<std::string, int>> per_source = {},
                         std::set<std::string> garbage = {});
  ChatResponse chat(const ChatRequest& req) override;
  std::uint64_t calls() const { return calls_.load(); }

 private:
  std::map<std::string, int> defaults_;
  std::map<std::string, std::map<std::string, int>> per_source_;
  std::set<std::string> garbage_;
  std::atomic<std::uint64_t> calls_{0};
};

class MockEmbedder final : public EmbeddingBackend {
 public:
  MockEmbedder(std::size_t dim = 32, std::uint64_t seed = 42, bool strip_marker = true);

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
  std::vector<double> vector_for(std::string_view text) const;

  /// Makes `text` embed exactly like `canonical`.
  void alias(std::string text, std::string canonical);
  void set_vector(std::string text, std::vector<double> v);
  /// Overrides the vector of `b` so that cos(embed(a), embed(b)) == cosine.
  void force_cosine(const std::string& a, const std::string& b, double cosine);
  void fail_on(std::string text);

  std::size_t dim() const { return dim_; }
  std::uint64_t calls() const { return calls_.load(); }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  bool strip_marker_;
  std::map<std::string, std::string> aliases_;
  std::map<std::string, std::vector<double>> overrides_;
  std::set<std::string> failures_;
  std::atomic<std::uint64_t> calls_{0};
};

// ---------------------------------------------------------------------------

struct BackendSet {
  std::shared_ptr<ChatBackend> detector;
  std::shared_ptr<ChatBackend> translator;
  std::shared_ptr<ChatBackend> judge;
  std::shared_ptr<EmbeddingBackend> embedder;
};

/// Builds the four role backends from configuration. OpenAI-kind URLs fall
/// back to BENCHFORGE_CHAT_URL / BENCHFORGE_EMBED_URL, the key to BENCHFORGE_API_KEY.
BackendSet make_backends(const PipelineConfig& cfg);

/// Resolves the embedding backend alone (used by evaluation and calibration).
std::shared_ptr<EmbeddingBackend> make_embedding_backend(const BackendSettings& settings,
                                                         int max_in_flight, std::uint64_t seed);

}  // namespace benchforge
