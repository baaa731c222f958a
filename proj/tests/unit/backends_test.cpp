#include <doctest.h>

#include <cmath>
#include <deque>

#include <nlohmann/json.hpp>

#include "benchforge/backends.hpp"
#include "benchforge/metrics.hpp"

using namespace benchforge;

namespace {

// Replays a scripted list of responses; an entry with status 0 simulates a
// dropped connection.
class ScriptedTransport final : public HttpTransport {
 public:
  explicit ScriptedTransport(std::deque<HttpResponse> script) : script_(std::move(script)) {}
  HttpResponse post(const std::string&, const HttpHeaders& headers, const std::string& body) override {
    ++calls;
    last_body = body;
    last_headers = headers;
    auto r = script_.front();
    script_.pop_front();
    if (r.status == 0) throw BackendError(BackendError::Kind::Transport, "connection reset");
    return r;
  }
  int calls = 0;
  std::string last_body;
  HttpHeaders last_headers;

 private:
  std::deque<HttpResponse> script_;
};

ClientOptions options(std::vector<double>* delays = nullptr) {
  ClientOptions o;
  o.url = "http://localhost:1/v1/chat/completions";
  o.model = "m";
  o.api_key = "secret";
  o.retry.max_attempts = 4;
  o.sleep = [delays](std::chrono::duration<double> d) {
    if (delays) delays->push_back(d.count());
  };
  return o;
}

std::string chat_ok(const std::string& text) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}},
                        {"usage", {{"prompt_tokens", 11}, {"completion_tokens", 3}}}}
      .dump();
}

ChatRequest request(const std::string& text) {
  ChatRequest r;
  r.messages = {{"user", text}};
  return r;
}

}  // namespace

TEST_CASE("echo mock returns the message with estimated usage") {
  MockEchoChat chat;
  const auto r = chat.chat(request("X"));
  CHECK(r.text == "X");
  CHECK(r.usage.input_tokens == count_tokens("X"));
}

TEST_CASE("token estimate is a quarter of the byte count, rounded up") {
  CHECK(count_tokens("") == 0);
  CHECK(count_tokens("abcdefgh") == 2);
  CHECK(count_tokens("abcdefghi") == 3);
}

TEST_CASE("transient failures are retried with growing delays") {
  auto transport = std::make_shared<ScriptedTransport>(
      std::deque<HttpResponse>{{500, "busy"}, {0, ""}, {200, chat_ok("xin chào")}});
  std::vector<double> delays;
  OpenAiChatClient client(options(&delays), transport);
  const auto r = client.chat(request("hello"));
  CHECK(r.text == "xin chào");
  CHECK(r.attempts == 3);
  CHECK(r.usage.input_tokens == 11);
  CHECK(r.usage.output_tokens == 3);
  REQUIRE(delays.size() == 2);
  // Base 1 s and factor 2, each within 20% jitter.
  CHECK(delays[0] >= 0.8);
  CHECK(delays[0] <= 1.2);
  CHECK(delays[1] >= 1.6);
  CHECK(delays[1] <= 2.4);
}

TEST_CASE("client errors fail fast with the body excerpt") {
  auto transport = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{{401, "invalid api key"}});
  OpenAiChatClient client(options(), transport);
  try {
    client.chat(request("hello"));
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.kind() == BackendError::Kind::Configuration);
    CHECK(e.status() == 401);
    CHECK(std::string(e.what()).find("invalid api key") != std::string::npos);
  }
  CHECK(transport->calls == 1);
}

TEST_CASE("retries give up after the configured attempts") {
  auto transport = std::make_shared<ScriptedTransport>(
      std::deque<HttpResponse>{{503, ""}, {503, ""}, {503, ""}, {503, ""}, {200, chat_ok("late")}});
  OpenAiChatClient client(options(), transport);
  CHECK_THROWS_AS(client.chat(request("hello")), BackendError);
  CHECK(transport->calls == 4);
}

TEST_CASE("chat requests carry greedy decoding and the key") {
  auto transport = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{{200, chat_ok("ok")}});
  OpenAiChatClient client(options(), transport);
  client.chat(request("hello"));
  const auto body = nlohmann::json::parse(transport->last_body);
  CHECK(body["model"] == "m");
  CHECK(body["temperature"] == 0.0);
  CHECK(body["messages"][0]["content"] == "hello");
  bool auth = false;
  for (const auto& [k, v] : transport->last_headers) auth = auth || (k == "Authorization" && v == "Bearer secret");
  CHECK(auth);
}

TEST_CASE("malformed responses are reported as such") {
  auto transport = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{{200, "{\"choices\":[]}"}});
  OpenAiChatClient client(options(), transport);
  try {
    client.chat(request("hello"));
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.kind() == BackendError::Kind::InvalidResponse);
  }
}

TEST_CASE("embedding client keeps input order") {
  const auto body = nlohmann::json{{"data",
                                    {{{"index", 1}, {"embedding", {0.0, 1.0}}},
                                     {{"index", 0}, {"embedding", {1.0, 0.0}}}}}}
                        .dump();
  auto transport = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{{200, body}});
  auto o = options();
  o.url = "http://localhost:1/v1/embeddings";
  OpenAiEmbeddingClient client(o, transport);
  const std::vector<std::string> texts{"a", "b"};
  const auto v = client.embed(texts);
  REQUIRE(v.size() == 2);
  CHECK(v[0].values == std::vector<double>{1.0, 0.0});
  CHECK(v[1].values == std::vector<double>{0.0, 1.0});
}

TEST_CASE("mock embeddings are deterministic unit vectors") {
  MockEmbedder e(16, 42);
  const auto a = e.vector_for("same text");
  CHECK(a == e.vector_for("same text"));
  double norm = 0;
  for (double x : a) norm += x * x;
  CHECK(std::sqrt(norm) == doctest::Approx(1.0));
  const auto empty = e.vector_for("");
  CHECK(empty.size() == 16);
  // The marker is stripped so marker translations are self-similar.
  CHECK(metrics::cosine_similarity(e.vector_for("VI:same text"), a) == doctest::Approx(1.0));
  CHECK(MockEmbedder(16, 43).vector_for("same text") != a);
}

TEST_CASE("forced cosine values are exact") {
  MockEmbedder e(32, 42);
  for (double c : {0.79, 0.8, -0.3, 0.999}) {
    e.force_cosine("source", "target", c);
    CHECK(std::abs(metrics::cosine_similarity(e.vector_for("source"), e.vector_for("target")) - c) < 1e-12);
  }
}

TEST_CASE("mock translator modes") {
  CHECK(mock_translate("Hello", MockTranslateMode::Identity) == "Hello");
  CHECK(mock_translate("Hello", MockTranslateMode::Marker) == "VI:Hello");
  CHECK(mock_translate("Hello", MockTranslateMode::Table, {{"Hello", "Xin chào"}}) == "Xin chào");
  CHECK(mock_detect_language(mock_translate("Hello there", MockTranslateMode::Corrupt)).code() == "rus_Cyrl");
}

TEST_CASE("mock detector heuristic") {
  CHECK(mock_detect_language("Hôm nay trời đẹp quá").code() == "vie_Latn");
  CHECK(mock_detect_language("The weather is nice today").code() == "eng_Latn");
  CHECK(mock_detect_language("12345 !!!").code() == "und_Zzzz");
  // Formula-heavy text with a Vietnamese phrase, the kind a character-level
  // model mislabels.
  CHECK(mock_detect_language("data= {{\"Supplier\", \"Material\"}} ... dữ liệu, có cách nào để thay đổi một giá trị?")
            .code() == "vie_Latn");
}
