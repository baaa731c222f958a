#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "benchforge/backends.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <nlohmann/json.hpp>

#include "benchforge/text.hpp"

namespace benchforge {

using nlohmann::json;
using nlohmann::ordered_json;

void ChatRequest::validate() const {
  if (messages.empty()) throw std::invalid_argument("chat request needs at least one message");
  if (!(temperature >= 0.0)) throw std::invalid_argument("chat temperature must be >= 0");
  if (max_tokens < 1) throw std::invalid_argument("chat max_tokens must be >= 1");
}

std::int64_t count_tokens(std::string_view text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

std::chrono::duration<double> RetryPolicy::delay(int retry, std::mt19937_64& rng) const {
  const double raw = base_seconds * std::pow(factor, std::max(0, retry - 1));
  std::uniform_real_distribution<double> dist(1.0 - jitter, 1.0 + jitter);
  return std::chrono::duration<double>(raw * dist(rng));
}

Sleeper real_sleeper() {
  return [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
}

// ---------------------------------------------------------------------------

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw BackendError(BackendError::Kind::Configuration, "endpoint URL needs a scheme: '" + url + "'");
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw BackendError(BackendError::Kind::Configuration, "unsupported URL scheme in '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  return out;
}

class HttplibTransport final : public HttpTransport {
 public:
  explicit HttplibTransport(double timeout_seconds) : timeout_(timeout_seconds) {}

  HttpResponse post(const std::string& url, const HttpHeaders& headers, const std::string& body) override {
    const auto parsed = parse_url(url);
    httplib::Client client(parsed.origin);
    const auto secs = static_cast<time_t>(timeout_);
    const auto usecs = static_cast<time_t>((timeout_ - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(parsed.path, h, body, "application/json");
    if (!res) {
      throw BackendError(BackendError::Kind::Transport,
                         "request to " + url + " failed: " + httplib::to_string(res.error()));
    }
    return {res->status, res->body};
  }

 private:
  double timeout_;
};

bool retryable_status(int status) { return status >= 500 || status == 408 || status == 429; }

std::string excerpt(std::string_view body) {
  constexpr std::size_t kMax = 300;
  if (body.size() <= kMax) return std::string(body);
  return std::string(body.substr(0, kMax)) + "...";
}

HttpHeaders make_headers(const ClientOptions& opts, std::uint64_t correlation_id) {
  HttpHeaders headers{{"Content-Type", "application/json"},
                      {"X-Request-Id", std::to_string(correlation_id)}};
  if (!opts.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + opts.api_key);
  return headers;
}

// Releases a counting_semaphore slot on scope exit.
template <class Sem>
class SlotGuard {
 public:
  explicit SlotGuard(Sem& sem) : sem_(sem) { sem_.acquire(); }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  Sem& sem_;
};

std::ptrdiff_t clamp_slots(int n) { return std::clamp<std::ptrdiff_t>(n, 1, 4096); }

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport(double timeout_seconds) {
  return std::make_shared<HttplibTransport>(timeout_seconds);
}

std::pair<HttpResponse, int> post_with_retry(HttpTransport& transport, const ClientOptions& opts,
                                             const HttpHeaders& headers, const std::string& body,
                                             std::mt19937_64& rng) {
  const auto sleep = opts.sleep ? opts.sleep : real_sleeper();
  const int max_attempts = std::max(1, opts.retry.max_attempts);
  std::string last_error;
  int last_status = 0;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) sleep(opts.retry.delay(attempt - 1, rng));
    try {
      auto res = transport.post(opts.url, headers, body);
      if (res.status >= 200 && res.status < 300) return {std::move(res), attempt};
      if (!retryable_status(res.status)) {
        throw BackendError(BackendError::Kind::Configuration,
                           "HTTP " + std::to_string(res.status) + " from " + opts.url + ": " +
                               excerpt(res.body),
                           res.status, attempt);
      }
      last_status = res.status;
      last_error = "HTTP " + std::to_string(res.status) + ": " + excerpt(res.body);
    } catch (const BackendError& e) {
      if (e.kind() != BackendError::Kind::Transport) throw;
      last_error = e.what();
      last_status = 0;
    }
  }
  throw BackendError(BackendError::Kind::Transport,
                     "giving up after " + std::to_string(max_attempts) + " attempts: " + last_error,
                     last_status, max_attempts);
}

// ---------------------------------------------------------------------------

OpenAiChatClient::OpenAiChatClient(ClientOptions opts, std::shared_ptr<HttpTransport> transport)
    : opts_(std::move(opts)), transport_(std::move(transport)), in_flight_(clamp_slots(opts_.max_in_flight)) {}

std::string OpenAiChatClient::request_body(const ChatRequest& req) {
  ordered_json j;
  j["model"] = req.model;
  j["messages"] = ordered_json::array();
  for (const auto& m : req.messages) {
    ordered_json msg;
    msg["role"] = m.role;
    msg["content"] = m.content;
    j["messages"].push_back(std::move(msg));
  }
  j["temperature"] = req.temperature;
  j["max_tokens"] = req.max_tokens;
  return j.dump();
}

ChatResponse OpenAiChatClient::chat(const ChatRequest& request) {
  ChatRequest req = request;
  if (req.model.empty()) req.model = opts_.model;
  req.validate();
  const auto id = next_id_.fetch_add(1);
  std::mt19937_64 rng(opts_.seed ^ (id * 0x9E3779B97F4A7C15ULL));
  const auto body = request_body(req);

  SlotGuard guard(in_flight_);
  auto [res, attempts] = post_with_retry(*transport_, opts_, make_headers(opts_, id), body, rng);

  json j;
  try {
    j = json::parse(res.body);
  } catch (const json::parse_error& e) {
    throw BackendError(BackendError::Kind::InvalidResponse,
                       std::string("chat response is not JSON: ") + e.what(), res.status, attempts);
  }
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty() ||
      !(*choices)[0].contains("message") || !(*choices)[0]["message"].contains("content") ||
      !(*choices)[0]["message"]["content"].is_string()) {
    throw BackendError(BackendError::Kind::InvalidResponse,
                       "chat response has no choices[0].message.content: " + excerpt(res.body),
                       res.status, attempts);
  }
  ChatResponse out;
  out.text = (*choices)[0]["message"]["content"].get<std::string>();
  out.attempts = attempts;
  const auto usage = j.find("usage");
  if (usage != j.end() && usage->is_object() && usage->contains("prompt_tokens") &&
      usage->contains("completion_tokens")) {
    out.usage.input_tokens = (*usage)["prompt_tokens"].get<std::int64_t>();
    out.usage.output_tokens = (*usage)["completion_tokens"].get<std::int64_t>();
  } else {
    for (const auto& m : req.messages) out.usage.input_tokens += count_tokens(m.content);
    out.usage.output_tokens = count_tokens(out.text);
  }
  return out;
}

OpenAiEmbeddingClient::OpenAiEmbeddingClient(ClientOptions opts, std::shared_ptr<HttpTransport> transport)
    : opts_(std::move(opts)), transport_(std::move(transport)), in_flight_(clamp_slots(opts_.max_in_flight)) {}

std::string OpenAiEmbeddingClient::request_body(const std::string& model,
                                                std::span<const std::string> texts) {
  ordered_json j;
  j["model"] = model;
  j["input"] = ordered_json::array();
  for (const auto& t : texts) j["input"].push_back(t);
  return j.dump();
}

std::vector<EmbeddingVector> OpenAiEmbeddingClient::embed(std::span<const std::string> texts) {
  if (texts.empty()) throw std::invalid_argument("embed needs at least one text");
  const auto id = next_id_.fetch_add(1);
  std::mt19937_64 rng(opts_.seed ^ (id * 0x9E3779B97F4A7C15ULL));
  const auto body = request_body(opts_.model, texts);

  SlotGuard guard(in_flight_);
  auto [res, attempts] = post_with_retry(*transport_, opts_, make_headers(opts_, id), body, rng);
  json j;
  try {
    j = json::parse(res.body);
  } catch (const json::parse_error& e) {
    throw BackendError(BackendError::Kind::InvalidResponse,
                       std::string("embedding response is not JSON: ") + e.what(), res.status, attempts);
  }
  const auto data = j.find("data");
  if (data == j.end() || !data->is_array() || data->size() != texts.size()) {
    throw BackendError(BackendError::Kind::InvalidResponse,
                       "embedding response must carry one item per input", res.status, attempts);
  }
  std::vector<EmbeddingVector> out(texts.size());
  std::vector<bool> seen(texts.size(), false);
  for (std::size_t pos = 0; pos < data->size(); ++pos) {
    const auto& item = (*data)[pos];
    // Items are matched by their index field, not by arrival order.
    const std::size_t idx = item.contains("index") ? item["index"].get<std::size_t>() : pos;
    if (idx >= texts.size() || seen[idx] || !item.contains("embedding") || !item["embedding"].is_array()) {
      throw BackendError(BackendError::Kind::InvalidResponse, "malformed embedding item", res.status,
                         attempts);
    }
    seen[idx] = true;
    auto values = item["embedding"].get<std::vector<double>>();
    if (values.empty() || !std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
      throw BackendError(BackendError::Kind::InvalidResponse, "embedding has empty or non-finite values",
                         res.status, attempts);
    }
    {
      std::lock_guard lock(dim_mutex_);
      if (dim_ == 0) dim_ = values.size();
      if (values.size() != dim_) {
        throw BackendError(BackendError::Kind::InvalidResponse,
                           "embedding dimension changed within a run (" + std::to_string(dim_) + " vs " +
                               std::to_string(values.size()) + ")",
                           res.status, attempts);
      }
    }
    out[idx] = EmbeddingVector{std::move(values), opts_.model};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mocks

std::optional<MockTranslateMode> parse_mock_translate_mode(std::string_view name) {
  if (name == "identity") return MockTranslateMode::Identity;
  if (name == "marker") return MockTranslateMode::Marker;
  if (name == "table") return MockTranslateMode::Table;
  if (name == "corrupt") return MockTranslateMode::Corrupt;
  return std::nullopt;
}

std::string mock_translate(std::string_view text, MockTranslateMode mode,
                           const std::map<std::string, std::string>& table) {
  switch (mode) {
    case MockTranslateMode::Identity:
      return std::string(text);
    case MockTranslateMode::Marker:
      return std::string(kMockMarker) + std::string(text);
    case MockTranslateMode::Table: {
      const auto it = table.find(std::string(text));
      return it != table.end() ? it->second : std::string(kMockMarker) + std::string(text);
    }
    case MockTranslateMode::Corrupt: {
      std::u32string out;
      for (char32_t c : text::to_u32(text)) {
        if (c >= U'a' && c <= U'z') {
          out.push_back(U'а' + (c - U'a'));
        } else if (c >= U'A' && c <= U'Z') {
          out.push_back(U'А' + (c - U'A'));
        } else {
          out.push_back(c);
        }
      }
      return text::to_utf8(out);
    }
  }
  return std::string(text);
}

namespace {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double unit_uniform(std::uint64_t& state) {
  // 53 random bits in (0, 1).
  return (static_cast<double>(splitmix64(state) >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

enum class Script { Latin, Cyrillic, Greek, Hangul, Han, Kana, Arabic, Thai, Other };

Script script_of(char32_t c) {
  if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') || (c >= 0x00C0 && c <= 0x024F && c != 0x00D7 && c != 0x00F7) ||
      (c >= 0x1E00 && c <= 0x1EFF)) {
    return Script::Latin;
  }
  if (c >= 0x0400 && c <= 0x052F) return Script::Cyrillic;
  if (c >= 0x0370 && c <= 0x03FF) return Script::Greek;
  if ((c >= 0xAC00 && c <= 0xD7AF) || (c >= 0x1100 && c <= 0x11FF)) return Script::Hangul;
  if (c >= 0x4E00 && c <= 0x9FFF) return Script::Han;
  if (c >= 0x3040 && c <= 0x30FF) return Script::Kana;
  if (c >= 0x0600 && c <= 0x06FF) return Script::Arabic;
  if (c >= 0x0E00 && c <= 0x0E7F) return Script::Thai;
  return Script::Other;
}

bool vietnamese_specific(char32_t c) {
  switch (c) {
    case 0x0102: case 0x0103:  // Ă ă
    case 0x0110: case 0x0111:  // Đ đ
    case 0x01A0: case 0x01A1:  // Ơ ơ
    case 0x01AF: case 0x01B0:  // Ư ư
    case 0x0129: case 0x0128:  // ĩ Ĩ
    case 0x0169: case 0x0168:  // ũ Ũ
      return true;
    default:
      return c >= 0x1EA0 && c <= 0x1EF9;
  }
}

std::string last_user_message(const ChatRequest& req) {
  for (auto it = req.messages.rbegin(); it != req.messages.rend(); ++it) {
    if (it->role == "user") return it->content;
  }
  return req.messages.empty() ? std::string() : req.messages.back().content;
}

TokenUsage estimate_usage(const ChatRequest& req, const std::string& reply) {
  TokenUsage u;
  for (const auto& m : req.messages) u.input_tokens += count_tokens(m.content);
  u.output_tokens = count_tokens(reply);
  return u;
}

}  // namespace

std::vector<double> mock_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw std::invalid_argument("mock_embed: dim must be >= 1");
  std::uint64_t state = text.empty() ? seed : seed ^ fnv1a64(text);
  std::vector<double> v(dim);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < dim; i += 2) {
    // Box-Muller keeps the draw independent of the standard library's distributions.
    const double u1 = unit_uniform(state);
    const double u2 = unit_uniform(state);
    const double r = std::sqrt(-2.0 * std::log(u1));
    v[i] = r * std::cos(2.0 * M_PI * u2);
    if (i + 1 < dim) v[i + 1] = r * std::sin(2.0 * M_PI * u2);
  }
  for (double x : v) norm2 += x * x;
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

LangLabel mock_detect_language(std::string_view input) {
  // Marker-mode output stands for a finished Vietnamese translation.
  if (input.starts_with(kMockMarker)) return LangLabel("vie_Latn");
  std::map<Script, std::size_t> counts;
  std::size_t vietnamese = 0;
  for (char32_t c : text::to_u32(input)) {
    const auto s = script_of(c);
    if (s == Script::Other) continue;
    ++counts[s];
    if (vietnamese_specific(c)) ++vietnamese;
  }
  if (counts.empty()) return LangLabel::undetermined();
  const auto dominant =
      std::max_element(counts.begin(), counts.end(), [](const auto& a, const auto& b) { return a.second < b.second; })
          ->first;
  switch (dominant) {
    case Script::Latin:
      return LangLabel(vietnamese > 0 ? "vie_Latn" : "eng_Latn");
    case Script::Cyrillic:
      return LangLabel("rus_Cyrl");
    case Script::Greek:
      return LangLabel("ell_Grek");
    case Script::Hangul:
      return LangLabel("kor_Hang");
    case Script::Han:
      return LangLabel("zho_Hans");
    case Script::Kana:
      return LangLabel("jpn_Jpan");
    case Script::Arabic:
      return LangLabel("arb_Arab");
    case Script::Thai:
      return LangLabel("tha_Thai");
    case Script::Other:
      break;
  }
  return LangLabel::undetermined();
}

ChatResponse MockEchoChat::chat(const ChatRequest& req) {
  req.validate();
  ChatResponse out;
  out.text = last_user_message(req);
  out.usage = estimate_usage(req, out.text);
  return out;
}

MockDetectorChat::MockDetectorChat(std::map<std::string, std::string> table, std::set<std::string> garbage)
    : table_(std::move(table)), garbage_(std::move(garbage)) {}

ChatResponse MockDetectorChat::chat(const ChatRequest& req) {
  req.validate();
  ++calls_;
  const auto payload = text::extract_tagged(last_user_message(req), "text");
  ChatResponse out;
  if (garbage_.contains(payload)) {
    out.text = "I think maybe";
  } else {
    const auto it = table_.find(payload);
    const auto label = it != table_.end() ? it->second : mock_detect_language(payload).code();
    out.text = "The letters and vocabulary point to a single dominant language.\nLANG: " + label;
  }
  out.usage = estimate_usage(req, out.text);
  return out;
}

MockTranslatorChat::MockTranslatorChat(MockTranslateMode mode, std::map<std::string, std::string> table,
                                       std::set<std::string> hard_failures)
    : mode_(mode), table_(std::move(table)), hard_failures_(std::move(hard_failures)) {}

ChatResponse MockTranslatorChat::chat(const ChatRequest& req) {
  req.validate();
  ++calls_;
  const auto source = text::extract_tagged(last_user_message(req), "source");
  if (hard_failures_.contains(source)) {
    throw BackendError(BackendError::Kind::Transport, "mock translator: simulated outage", 503, 5);
  }
  ChatResponse out;
  out.text = mock_translate(source, mode_, table_);
  out.usage = estimate_usage(req, out.text);
  return out;
}

MockJudgeChat::MockJudgeChat(std::map<std::string, int> default_scores,
                             std::map<std::string, std::map<std::string, int>> per_source,
                             std::set<std::string> garbage)
    : defaults_(std::move(default_scores)), per_source_(std::move(per_source)), garbage_(std::move(garbage)) {
  if (defaults_.empty()) {
    for (auto c : kDefaultCriteria) defaults_[std::string(c)] = 5;
  }
}

ChatResponse MockJudgeChat::chat(const ChatRequest& req) {
  req.validate();
  ++calls_;
  const auto prompt = last_user_message(req);
  const auto source = text::extract_tagged(prompt, "source");
  ChatResponse out;
  if (garbage_.contains(source)) {
    out.text = "The translation looks fine overall, I would rate it highly.";
  } else {
    const auto it = per_source_.find(source);
    const auto& scores = it != per_source_.end() ? it->second : defaults_;
    ordered_json card = ordered_json::object();
    for (auto c : kDefaultCriteria) {
      if (const auto s = scores.find(std::string(c)); s != scores.end()) card[std::string(c)] = s->second;
    }
    for (const auto& [k, v] : scores) {
      if (!card.contains(k)) card[k] = v;
    }
    out.text = "Step 1: compared the translation against the source for each criterion.\n"
               "Step 2: assigned scores.\n" +
               card.dump();
  }
  out.usage = estimate_usage(req, out.text);
  return out;
}

MockEmbedder::MockEmbedder(std::size_t dim, std::uint64_t seed, bool strip_marker)
    : dim_(dim), seed_(seed), strip_marker_(strip_marker) {
  if (dim_ == 0) throw std::invalid_argument("MockEmbedder: dim must be >= 1");
}

std::vector<double> MockEmbedder::vector_for(std::string_view input) const {
  std::string key(input);
  if (const auto o = overrides_.find(key); o != overrides_.end()) return o->second;
  if (strip_marker_ && key.starts_with(kMockMarker)) key = key.substr(kMockMarker.size());
  if (const auto a = aliases_.find(key); a != aliases_.end()) key = a->second;
  if (const auto o = overrides_.find(key); o != overrides_.end()) return o->second;
  return mock_embed(key, dim_, seed_);
}

std::vector<EmbeddingVector> MockEmbedder::embed(std::span<const std::string> texts) {
  if (texts.empty()) throw std::invalid_argument("embed needs at least one text");
  ++calls_;
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    if (failures_.contains(t)) {
      throw BackendError(BackendError::Kind::Transport, "mock embedder: simulated outage", 503, 5);
    }
    out.push_back({vector_for(t), "mock-embedder"});
  }
  return out;
}

void MockEmbedder::alias(std::string text, std::string canonical) {
  aliases_[std::move(text)] = std::move(canonical);
}

void MockEmbedder::set_vector(std::string text, std::vector<double> v) {
  if (v.size() != dim_) throw std::invalid_argument("MockEmbedder::set_vector: dimension mismatch");
  overrides_[std::move(text)] = std::move(v);
}

void MockEmbedder::force_cosine(const std::string& a, const std::string& b, double cosine) {
  if (!(cosine >= -1.0 && cosine <= 1.0)) throw std::invalid_argument("force_cosine: cosine outside [-1, 1]");
  if (dim_ < 2) throw std::invalid_argument("force_cosine needs dim >= 2");
  const auto va = vector_for(a);
  // Gram-Schmidt: a direction orthogonal to va derived from b's own hash.
  auto w = mock_embed(b + "\x1f" "orthogonal", dim_, seed_ + 1);
  double dot = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) dot += va[i] * w[i];
  double norm2 = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    w[i] -= dot * va[i];
    norm2 += w[i] * w[i];
  }
  const double inv = 1.0 / std::sqrt(norm2);
  const double sine = std::sqrt(std::max(0.0, 1.0 - cosine * cosine));
  std::vector<double> vb(dim_);
  for (std::size_t i = 0; i < dim_; ++i) vb[i] = cosine * va[i] + sine * w[i] * inv;
  overrides_[b] = std::move(vb);
}

void MockEmbedder::fail_on(std::string text) { failures_.insert(std::move(text)); }

// ---------------------------------------------------------------------------

namespace {

std::string env_or(const std::string& value, const char* env) {
  if (!value.empty()) return value;
  const char* v = std::getenv(env);
  return v ? std::string(v) : std::string();
}

ClientOptions client_options(const BackendSettings& s, const std::string& url, const std::string& model,
                             int max_in_flight, std::uint64_t seed) {
  ClientOptions o;
  o.url = url;
  o.model = model;
  o.api_key = env_or("", "BENCHFORGE_API_KEY");
  o.retry.max_attempts = s.max_attempts;
  o.retry.base_seconds = s.retry_base_seconds;
  o.retry.factor = s.retry_factor;
  o.max_in_flight = max_in_flight;
  o.seed = seed;
  return o;
}

}  // namespace

std::shared_ptr<EmbeddingBackend> make_embedding_backend(const BackendSettings& s, int max_in_flight,
                                                         std::uint64_t seed) {
  if (s.kind == BackendKind::Mock) {
    auto emb = std::make_shared<MockEmbedder>(s.mock.embedding_dim, s.mock.seed);
    for (const auto& [src, tgt] : s.mock.translation_table) emb->alias(tgt, src);
    if (!s.mock.forced_cosines.empty()) {
      const auto mode = parse_mock_translate_mode(s.mock.translate_mode);
      if (!mode) throw ConfigError("unknown mock translate_mode '" + s.mock.translate_mode + "'");
      for (const auto& [src, cos] : s.mock.forced_cosines) {
        emb->force_cosine(src, mock_translate(src, *mode, s.mock.translation_table), cos);
      }
    }
    return emb;
  }
  const auto url = env_or(s.embed_url, "BENCHFORGE_EMBED_URL");
  if (url.empty()) {
    throw ConfigError("no embedding endpoint: set backends.embed_url or BENCHFORGE_EMBED_URL");
  }
  return std::make_shared<OpenAiEmbeddingClient>(client_options(s, url, s.embedding_model, max_in_flight, seed),
                                                 make_http_transport(s.timeout_seconds));
}

BackendSet make_backends(const PipelineConfig& cfg) {
  const auto& s = cfg.backends;
  BackendSet set;
  if (s.kind == BackendKind::Mock) {
    const auto mode = parse_mock_translate_mode(s.mock.translate_mode);
    if (!mode) throw ConfigError("unknown mock translate_mode '" + s.mock.translate_mode + "'");
    set.detector = std::make_shared<MockDetectorChat>(s.mock.detector_table);
    set.translator = std::make_shared<MockTranslatorChat>(*mode, s.mock.translation_table);
    set.judge = std::make_shared<MockJudgeChat>(s.mock.judge_scores, s.mock.judge_source_scores);
  } else {
    const auto url = env_or(s.chat_url, "BENCHFORGE_CHAT_URL");
    if (url.empty()) throw ConfigError("no chat endpoint: set backends.chat_url or BENCHFORGE_CHAT_URL");
    auto transport = make_http_transport(s.timeout_seconds);
    set.detector = std::make_shared<OpenAiChatClient>(
        client_options(s, url, s.detector_model, cfg.max_in_flight, cfg.seed), transport);
    set.translator = std::make_shared<OpenAiChatClient>(
        client_options(s, url, s.translator_model, cfg.max_in_flight, cfg.seed + 1), transport);
    set.judge = std::make_shared<OpenAiChatClient>(
        client_options(s, url, s.judge_model, cfg.max_in_flight, cfg.seed + 2), transport);
  }
  set.embedder = make_embedding_backend(s, cfg.max_in_flight, cfg.seed + 3);
  return set;
}

}  // namespace benchforge
