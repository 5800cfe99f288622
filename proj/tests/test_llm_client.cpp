/*
 * Copyright 2026 The nfqa Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <atomic>
#include <mutex>

#include "nfqa/llm_client.hpp"
#include "test_support.hpp"

using namespace nfqa;
using nfqa::testing::LocalServer;

namespace {

EndpointConfig fast_endpoint(const std::string& url, int retries = 3) {
  EndpointConfig e;
  e.base_url = url;
  e.max_retries = retries;
  e.backoff_base = std::chrono::milliseconds(1);
  e.timeout = std::chrono::milliseconds(5000);
  return e;
}

Json completion(const std::string& content) {
  return Json{{"choices", Json::array({Json{{"message", {{"role", "assistant"}, {"content", content}}}}})},
              {"usage", {{"prompt_tokens", 3}, {"completion_tokens", 2}}}};
}

}  // namespace

TEST_SUITE("llm_client") {

TEST_CASE("request validation") {
  ChatRequest r;
  r.user_prompt = "";
  CHECK_THROWS_AS(r.validate(), InputError);
  r.user_prompt = "hi";
  CHECK_NOTHROW(r.validate());
  r.temperature = -0.1;
  CHECK_THROWS_AS(r.validate(), InputError);
  r.temperature = 0.5;
  r.top_p = 1.5;
  CHECK_THROWS_AS(r.validate(), InputError);
  r.top_p = 0.9;
  r.max_tokens = 0;
  CHECK_THROWS_AS(r.validate(), InputError);
}

TEST_CASE("endpoint validation") {
  EndpointConfig e = fast_endpoint("http://localhost:1");
  CHECK_NOTHROW(e.validate());
  e.max_retries = 6;
  CHECK_THROWS_AS(e.validate(), ConfigError);
  e.max_retries = 3;
  e.max_concurrent_requests = 0;
  CHECK_THROWS_AS(e.validate(), ConfigError);
}

TEST_CASE("sampling defaults") {
  SamplingParams p;
  CHECK(p.temperature == doctest::Approx(0.8));
  CHECK(p.top_p == doctest::Approx(0.95));
  CHECK(p.max_tokens == 512);
  CHECK(SamplingParams::annotation_defaults().temperature == doctest::Approx(0.1));
}

TEST_CASE("scripted transport: first matching rule, replies in order, last repeats") {
  auto m = mock_with_script({MockRule::contains("alpha", {MockReply::with_text("one"),
                                                          MockReply::with_text("two")}),
                             MockRule::any({MockReply::with_text("fallback")})});
  CHECK(m.client.ask("alpha?").text == "one");
  CHECK(m.client.ask("alpha?").text == "two");
  CHECK(m.client.ask("alpha?").text == "two");
  CHECK(m.client.ask("beta").text == "fallback");
  CHECK(m.mock->call_count() == 4);
  CHECK(m.mock->call_log().at(3).user_prompt == "beta");
}

TEST_CASE("scripted transport: echo, unmatched and empty scripts") {
  auto echo = mock_with_script({MockRule::echo_all()});
  CHECK(echo.client.ask("repeat me").text == "repeat me");

  auto strict = mock_with_script({MockRule::contains("only this", "x")});
  CHECK_THROWS_AS(strict.client.ask("something else"), InternalError);

  CHECK_THROWS_AS(ScriptedTransport(std::vector<MockRule>{}), InputError);
}

TEST_CASE("mock scripts load from JSON") {
  const Json script = Json::parse(R"([
    {"contains": "hello", "reply": "hi"},
    {"regex": "^num\\d+$", "replies": ["a", {"fail": "boom"}]},
    {"echo": true}
  ])");
  auto m = mock_with_script(mock_script_from_json(script), fast_endpoint("mock://", 0));
  CHECK(m.client.ask("say hello").text == "hi");
  CHECK(m.client.ask("num42").text == "a");
  CHECK_THROWS_AS(m.client.ask("num42"), TransportError);
  CHECK(m.client.ask("whatever").text == "whatever");
}

TEST_CASE("transient failures are retried up to max_retries") {
  auto ok = mock_with_script({MockRule::any({MockReply::failure(), MockReply::failure(),
                                             MockReply::with_text("done")})},
                             fast_endpoint("mock://", 3));
  CHECK(ok.client.ask("q").text == "done");
  CHECK(ok.mock->call_count() == 3);

  auto exhausted = mock_with_script({MockRule::any({MockReply::failure()})},
                                    fast_endpoint("mock://", 2));
  CHECK_THROWS_AS(exhausted.client.ask("q"), TransportError);
  CHECK(exhausted.mock->call_count() == 3);
}

TEST_CASE("the concurrency cap bounds in-flight requests") {
  EndpointConfig e = fast_endpoint("mock://");
  e.max_concurrent_requests = 2;
  auto transport = std::make_shared<ScriptedTransport>(
      std::vector<MockRule>{MockRule::echo_all()}, std::chrono::milliseconds(15));
  LlmClient client(transport, e);
  parallel_for(8, 8, [&](std::size_t i) { client.ask("q" + std::to_string(i)); });
  CHECK(transport->call_count() == 8);
  CHECK(transport->max_in_flight() <= 2);
  CHECK(transport->max_in_flight() >= 1);
}

TEST_CASE("request body carries model, messages and sampling") {
  ChatRequest r;
  r.model = "m";
  r.system_prompt = "sys";
  r.user_prompt = "user";
  r.temperature = 0.1;
  r.top_p = 0.5;
  r.max_tokens = 7;
  r.seed = 11;
  const Json body = HttpChatTransport::request_body(r);
  CHECK(body.at("model") == "m");
  CHECK(body.at("messages").size() == 2);
  CHECK(body.at("messages")[0].at("role") == "system");
  CHECK(body.at("messages")[1].at("content") == "user");
  CHECK(body.at("temperature").get<double>() == doctest::Approx(0.1));
  CHECK(body.at("top_p").get<double>() == doctest::Approx(0.5));
  CHECK(body.at("max_tokens") == 7);
  CHECK(body.at("seed") == 11);
}

TEST_CASE("malformed completion bodies are transport errors") {
  CHECK_THROWS_AS(HttpChatTransport::parse_response(Json::object()), TransportError);
  CHECK_THROWS_AS(HttpChatTransport::parse_response(Json{{"choices", Json::array()}}),
                  TransportError);
  CHECK(HttpChatTransport::parse_response(completion("x")).text == "x");
}

TEST_CASE("HTTP transport talks to an OpenAI-compatible endpoint") {
  LocalServer srv;
  std::mutex mu;
  std::vector<Json> bodies;
  std::vector<std::string> auth;
  std::atomic<int> calls{0};
  srv.server().Post("/v1/chat/completions", [&](const httplib::Request& req,
                                                 httplib::Response& res) {
    const int n = ++calls;
    {
      std::lock_guard lock(mu);
      bodies.push_back(Json::parse(req.body));
      auth.push_back(req.get_header_value("Authorization"));
    }
    if (n == 1) {
      res.status = 503;
      res.set_content("busy", "text/plain");
      return;
    }
    const Json body = Json::parse(req.body);
    res.set_content(completion("echo: " + body.at("messages").back().at("content").get<std::string>()).dump(),
                    "application/json");
  });
  srv.start();

  EndpointConfig e = fast_endpoint(srv.url() + "/v1");
  e.api_key = "secret";
  SamplingParams p;
  p.model = "tiny";
  LlmClient client(std::make_shared<HttpChatTransport>(e), e, p);
  const ChatResponse r = client.ask("ping");
  CHECK(r.text == "echo: ping");
  CHECK(calls.load() == 2);
  std::lock_guard lock(mu);
  CHECK(bodies.back().at("model") == "tiny");
  CHECK(auth.back() == "Bearer secret");
}

TEST_CASE("HTTP 4xx responses are not retried") {
  LocalServer srv;
  std::atomic<int> calls{0};
  srv.server().Post("/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 400;
    res.set_content("bad", "text/plain");
  });
  srv.start();
  EndpointConfig e = fast_endpoint(srv.url());
  LlmClient client(std::make_shared<HttpChatTransport>(e), e);
  CHECK_THROWS_AS(client.ask("x"), TransportError);
  CHECK(calls.load() == 1);
}

TEST_CASE("unreachable endpoints fail with a transport error after retries") {
  EndpointConfig e = fast_endpoint("http://127.0.0.1:1", 1);
  e.timeout = std::chrono::milliseconds(500);
  LlmClient client(std::make_shared<HttpChatTransport>(e), e);
  CHECK_THROWS_AS(client.ask("x"), TransportError);
}

}  // TEST_SUITE
