#include "mmir/http_backend.h"

#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "mmir/errors.h"
#include "test_util.h"

namespace mmir {
namespace {

using nlohmann::json;

json chat_response(const std::string& text, std::vector<std::pair<std::string, double>> top) {
  json tops = json::array();
  for (const auto& [tok, lp] : top) tops.push_back({{"token", tok}, {"logprob", lp}});
  return {{"choices",
           {{{"message", {{"role", "assistant"}, {"content", text}}},
             {"logprobs", {{"content", {{{"token", "x"}, {"logprob", -0.1}, {"top_logprobs", json::array()}},
                                        {{"token", text}, {"logprob", top.empty() ? 0.0 : top[0].second},
                                         {"top_logprobs", tops}}}}}}}}}};
}

// Loopback chat-completions stub.
class StubServer {
 public:
  explicit StubServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/v1/chat/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

BackendRequest text_request() {
  BackendRequest r;
  r.prompt.messages.push_back({Role::kUser, MultimodalContent::text("Rate a vs b")});
  r.prompt.max_output_tokens = 8;
  return r;
}

TEST(ChatRequest, CarriesScoringFields) {
  HttpBackendOptions o;
  o.model = "some-vlm";
  o.top_logprobs = 7;
  ScorePrompt p;
  p.messages.push_back({Role::kUser, MultimodalContent({TextPart{"look: "}, ImagePart{"https://x/y.jpg"}})});
  p.max_output_tokens = 4;
  const auto j = build_chat_request(p, o);
  EXPECT_EQ(j["model"], "some-vlm");
  EXPECT_EQ(j["temperature"], 0.0);
  EXPECT_EQ(j["max_tokens"], 4);
  EXPECT_EQ(j["logprobs"], true);
  EXPECT_EQ(j["top_logprobs"], 7);
  const auto& content = j["messages"][0]["content"];
  EXPECT_EQ(j["messages"][0]["role"], "user");
  EXPECT_EQ(content[0]["type"], "text");
  EXPECT_EQ(content[1]["type"], "image_url");
  EXPECT_EQ(content[1]["image_url"]["url"], "https://x/y.jpg");
}

TEST(ChatRequest, InlinesLocalImages) {
  test::TempDir dir("img");
  const auto path = (dir.path() / "pic.png").string();
  std::ofstream(path, std::ios::binary) << "abc";
  EXPECT_EQ(image_to_url(path), "data:image/png;base64,YWJj");
  EXPECT_THROW(image_to_url((dir.path() / "missing.jpg").string()), Error);
}

TEST(ChatResponse, ParsesLastTokenLogprobs) {
  const auto reply = parse_chat_response(chat_response("True", {{"False", -1.2}, {"True", -0.4}}));
  EXPECT_EQ(reply.text, "True");
  ASSERT_TRUE(reply.last_token_top_logprobs);
  ASSERT_EQ(reply.last_token_top_logprobs->size(), 2u);
  EXPECT_EQ((*reply.last_token_top_logprobs)[0].token, "True");
  EXPECT_DOUBLE_EQ((*reply.last_token_top_logprobs)[1].logprob, -1.2);
}

TEST(ChatResponse, WithoutLogprobs) {
  const json j = {{"choices", {{{"message", {{"content", "55"}}}}}}};
  const auto reply = parse_chat_response(j);
  EXPECT_EQ(reply.text, "55");
  EXPECT_FALSE(reply.last_token_top_logprobs);
  EXPECT_THROW(parse_chat_response(json::object()), Error);
}

TEST(HttpBackend, RoundTripThroughServer) {
  json seen;
  std::string auth;
  StubServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(chat_response("87", {{"87", -0.05}, {"86", -3.0}}).dump(), "application/json");
  });
  HttpBackend backend({.endpoint = server.endpoint(), .model = "m", .api_key = "secret", .top_logprobs = 20});
  const auto reply = backend.complete(text_request());
  EXPECT_EQ(reply.text, "87");
  ASSERT_TRUE(reply.last_token_top_logprobs);
  EXPECT_EQ(reply.last_token_top_logprobs->front().token, "87");
  EXPECT_EQ(seen["model"], "m");
  EXPECT_EQ(seen["top_logprobs"], 20);
  EXPECT_EQ(seen["messages"][0]["content"][0]["text"], "Rate a vs b");
  EXPECT_EQ(auth, "Bearer secret");
}

TEST(HttpBackend, RetriesServerErrors) {
  std::atomic<int> calls{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    if (calls++ < 2) {
      res.status = 503;
      return;
    }
    res.set_content(chat_response("40", {}).dump(), "application/json");
  });
  HttpBackend backend({.endpoint = server.endpoint(), .max_retries = 2, .retry_backoff_s = 0.0});
  EXPECT_EQ(backend.complete(text_request()).text, "40");
  EXPECT_EQ(calls.load(), 3);
}

TEST(HttpBackend, ClientErrorIsNotRetried) {
  std::atomic<int> calls{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 400;
  });
  HttpBackend backend({.endpoint = server.endpoint(), .max_retries = 3, .retry_backoff_s = 0.0});
  try {
    backend.complete(text_request());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendUnavailable);
  }
  EXPECT_EQ(calls.load(), 1);
}

TEST(HttpBackend, UnreachableEndpoint) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  HttpBackend backend({.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions",
                       .max_retries = 1,
                       .timeout_s = 2.0,
                       .retry_backoff_s = 0.0});
  try {
    backend.complete(text_request());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendUnavailable);
  }
}

TEST(HttpBackend, RejectsBadOptions) {
  EXPECT_THROW(HttpBackend({}), Error);
  EXPECT_THROW(HttpBackend({.endpoint = "localhost:8000"}), Error);
}

}  // namespace
}  // namespace mmir
