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

#include "nfqa/llm_client.hpp"

#include <random>
#include <regex>
#include <semaphore>
#include <thread>

#include "httplib.h"

namespace nfqa {

void ChatRequest::validate() const {
  if (is_blank(user_prompt)) throw InputError("user_prompt is empty");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw InputError("temperature must be in [0, 2], got " +
                     std::to_string(temperature));
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    throw InputError("top_p must be in (0, 1], got " + std::to_string(top_p));
  }
  if (max_tokens <= 0) throw InputError("max_tokens must be positive");
}

void EndpointConfig::validate() const {
  if (max_retries < 0 || max_retries > 5) {
    throw ConfigError("max_retries must be in [0, 5]");
  }
  if (timeout.count() <= 0) throw ConfigError("timeout must be positive");
  if (max_concurrent_requests < 1) {
    throw ConfigError("max_concurrent_requests must be at least 1");
  }
}

SamplingParams SamplingParams::annotation_defaults() {
  SamplingParams params;
  params.temperature = 0.1;
  return params;
}

// --- HTTP ------------------------------------------------------------------

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

SplitUrl split_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("base_url needs a scheme: '" + base_url + "'");
  }
  const auto path_start = base_url.find('/', scheme_end + 3);
  SplitUrl out;
  if (path_start == std::string::npos) {
    out.origin = base_url;
  } else {
    out.origin = base_url.substr(0, path_start);
    out.prefix = base_url.substr(path_start);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  }
  return out;
}

bool transient_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

Json http_post(const EndpointConfig& endpoint, const std::string& path,
               const Json& body) {
  const SplitUrl url = split_url(endpoint.base_url);
  httplib::Client client(url.origin);
  const auto seconds =
      std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
      endpoint.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());
  httplib::Headers headers;
  if (endpoint.api_key && !endpoint.api_key->empty()) {
    headers.emplace("Authorization", "Bearer " + *endpoint.api_key);
  }
  auto result = client.Post(url.prefix + path, headers, body.dump(),
                            "application/json");
  if (!result) {
    throw TransportFailure("request to " + endpoint.base_url + path +
                               " failed: " + httplib::to_string(result.error()),
                           true);
  }
  if (result->status < 200 || result->status >= 300) {
    throw TransportFailure("HTTP " + std::to_string(result->status) + " from " +
                               endpoint.base_url + path + ": " +
                               result->body.substr(0, 200),
                           transient_status(result->status));
  }
  try {
    return Json::parse(result->body);
  } catch (const Json::parse_error& e) {
    throw TransportFailure(
        "non-JSON body from " + endpoint.base_url + path + ": " + e.what(),
        false);
  }
}

}  // namespace

HttpChatTransport::HttpChatTransport(EndpointConfig endpoint)
    : endpoint_(std::move(endpoint)) {
  split_url(endpoint_.base_url);
}

Json HttpChatTransport::request_body(const ChatRequest& request) {
  Json messages = Json::array();
  if (request.system_prompt) {
    messages.push_back({{"role", "system"}, {"content", *request.system_prompt}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user_prompt}});
  Json body = {{"model", request.model},
               {"messages", messages},
               {"temperature", request.temperature},
               {"top_p", request.top_p},
               {"max_tokens", request.max_tokens}};
  if (request.seed) body["seed"] = *request.seed;
  return body;
}

ChatResponse HttpChatTransport::parse_response(const Json& body) {
  const auto choices = body.find("choices");
  if (choices == body.end() || !choices->is_array() || choices->empty()) {
    throw TransportFailure("chat completion response has no choices", false);
  }
  const Json& message = (*choices)[0].value("message", Json::object());
  const auto content = message.find("content");
  if (content == message.end() || !content->is_string()) {
    throw TransportFailure("chat completion choice has no message content",
                           false);
  }
  ChatResponse response;
  response.text = content->get<std::string>();
  response.model = body.value("model", "");
  if (auto usage = body.find("usage"); usage != body.end() && usage->is_object()) {
    response.usage = TokenUsage{usage->value("prompt_tokens", 0),
                                usage->value("completion_tokens", 0)};
  }
  return response;
}

ChatResponse HttpChatTransport::send(const ChatRequest& request) {
  return parse_response(
      http_post(endpoint_, "/chat/completions", request_body(request)));
}

Json post_json(const EndpointConfig& endpoint, const std::string& path,
               const Json& body) {
  endpoint.validate();
  return with_retries(endpoint, [&] { return http_post(endpoint, path, body); });
}

namespace detail {

void backoff_sleep(const EndpointConfig& endpoint, int attempt) {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  const double window =
      static_cast<double>(endpoint.backoff_base.count()) * (1u << attempt);
  std::uniform_real_distribution<double> jitter(0.0, window);
  std::this_thread::sleep_for(
      std::chrono::duration<double, std::milli>(jitter(rng)));
}

}  // namespace detail

// --- scripted mock ---------------------------------------------------------

namespace {

std::string full_prompt(const ChatRequest& request) {
  std::string text = request.system_prompt.value_or("");
  if (!text.empty()) text += "\n";
  text += request.user_prompt;
  return text;
}

}  // namespace

MockRule MockRule::contains(std::string needle, std::vector<MockReply> replies) {
  MockRule rule;
  rule.description = "contains \"" + needle + "\"";
  rule.matcher = [needle = std::move(needle)](const ChatRequest& r) {
    return full_prompt(r).find(needle) != std::string::npos;
  };
  rule.replies = std::move(replies);
  return rule;
}

MockRule MockRule::contains(std::string needle, std::string reply) {
  return contains(std::move(needle), {MockReply::with_text(std::move(reply))});
}

MockRule MockRule::regex(const std::string& pattern,
                         std::vector<MockReply> replies) {
  MockRule rule;
  rule.description = "regex /" + pattern + "/";
  std::regex re(pattern, std::regex::ECMAScript);
  rule.matcher = [re](const ChatRequest& r) {
    return std::regex_search(full_prompt(r), re);
  };
  rule.replies = std::move(replies);
  return rule;
}

MockRule MockRule::any(std::vector<MockReply> replies) {
  MockRule rule;
  rule.description = "any";
  rule.matcher = [](const ChatRequest&) { return true; };
  rule.replies = std::move(replies);
  return rule;
}

MockRule MockRule::echo_all() { return any({MockReply::echo()}); }

std::vector<MockRule> mock_script_from_json(const Json& script) {
  if (!script.is_array()) throw ConfigError("mock script must be a JSON list");
  auto reply_of = [](const Json& item) {
    if (item.is_string()) return MockReply::with_text(item.get<std::string>());
    if (item.is_object() && item.contains("fail")) {
      return MockReply::failure(item.at("fail").get<std::string>());
    }
    if (item.is_object() && item.value("echo", false)) return MockReply::echo();
    throw ConfigError("mock reply must be a string, {\"fail\": msg} or {\"echo\": true}");
  };
  std::vector<MockRule> rules;
  for (const auto& entry : script) {
    if (!entry.is_object()) throw ConfigError("mock rule must be an object");
    std::vector<MockReply> replies;
    if (entry.contains("reply")) replies.push_back(reply_of(entry.at("reply")));
    if (entry.contains("replies")) {
      for (const auto& item : entry.at("replies")) replies.push_back(reply_of(item));
    }
    if (entry.value("echo", false)) replies.push_back(MockReply::echo());
    if (entry.contains("fail")) {
      replies.push_back(MockReply::failure(entry.at("fail").get<std::string>()));
    }
    if (replies.empty()) throw ConfigError("mock rule has no reply");
    try {
      if (entry.contains("contains")) {
        rules.push_back(MockRule::contains(entry.at("contains").get<std::string>(),
                                           std::move(replies)));
      } else if (entry.contains("regex")) {
        rules.push_back(MockRule::regex(entry.at("regex").get<std::string>(),
                                        std::move(replies)));
      } else {
        rules.push_back(MockRule::any(std::move(replies)));
      }
    } catch (const std::regex_error& e) {
      throw ConfigError(std::string("bad mock regex: ") + e.what());
    }
  }
  return rules;
}

ScriptedTransport::ScriptedTransport(std::vector<MockRule> script,
                                     std::chrono::milliseconds latency)
    : latency_(latency) {
  if (script.empty()) throw InputError("mock script is empty");
  for (auto& rule : script) {
    if (rule.replies.empty()) throw InputError("mock rule without replies");
    rules_.push_back({std::move(rule), 0});
  }
}

ChatResponse ScriptedTransport::send(const ChatRequest& request) {
  MockReply reply;
  {
    std::lock_guard lock(mutex_);
    log_.push_back(request);
    ++in_flight_;
    max_in_flight_ = std::max(max_in_flight_, in_flight_);
    RuleState* hit = nullptr;
    for (auto& state : rules_) {
      if (state.rule.matcher(request)) {
        hit = &state;
        break;
      }
    }
    if (hit == nullptr) {
      --in_flight_;
      throw InternalError("mock script has no rule for prompt: " +
                          request.user_prompt.substr(0, 120));
    }
    reply = hit->rule.replies[std::min(hit->next, hit->rule.replies.size() - 1)];
    ++hit->next;
  }
  if (latency_.count() > 0) std::this_thread::sleep_for(latency_);
  {
    std::lock_guard lock(mutex_);
    --in_flight_;
  }
  switch (reply.kind) {
    case MockReply::Kind::kFail:
      throw TransportFailure(reply.text, true);
    case MockReply::Kind::kEcho:
      return {request.user_prompt, request.model, std::nullopt};
    case MockReply::Kind::kText:
      break;
  }
  return {reply.text, request.model, std::nullopt};
}

std::vector<ChatRequest> ScriptedTransport::call_log() const {
  std::lock_guard lock(mutex_);
  return log_;
}

std::size_t ScriptedTransport::call_count() const {
  std::lock_guard lock(mutex_);
  return log_.size();
}

int ScriptedTransport::max_in_flight() const {
  std::lock_guard lock(mutex_);
  return max_in_flight_;
}

// --- client ----------------------------------------------------------------

struct LlmClient::Gate {
  explicit Gate(int slots) : semaphore(slots) {}
  std::counting_semaphore<1024> semaphore;
};

LlmClient::LlmClient(std::shared_ptr<ChatTransport> transport,
                     EndpointConfig endpoint, SamplingParams defaults)
    : transport_(std::move(transport)),
      endpoint_(std::move(endpoint)),
      defaults_(std::move(defaults)) {
  if (!transport_) throw ConfigError("LLM client without transport");
  endpoint_.validate();
  gate_ = std::make_shared<Gate>(std::min(endpoint_.max_concurrent_requests, 1024));
}

ChatResponse LlmClient::complete(const ChatRequest& request) const {
  request.validate();
  gate_->semaphore.acquire();
  struct Release {
    Gate& gate;
    ~Release() { gate.semaphore.release(); }
  } release{*gate_};
  return with_retries(endpoint_, [&] { return transport_->send(request); });
}

ChatResponse LlmClient::ask(const std::string& user_prompt,
                            std::optional<std::string> system_prompt) const {
  ChatRequest request;
  request.model = defaults_.model;
  request.system_prompt = std::move(system_prompt);
  request.user_prompt = user_prompt;
  request.temperature = defaults_.temperature;
  request.top_p = defaults_.top_p;
  request.max_tokens = defaults_.max_tokens;
  request.seed = defaults_.seed;
  return complete(request);
}

MockClient mock_with_script(std::vector<MockRule> script, EndpointConfig endpoint,
                            SamplingParams defaults) {
  auto transport = std::make_shared<ScriptedTransport>(std::move(script));
  if (endpoint.base_url.empty()) {
    endpoint.base_url = "mock://";
    endpoint.backoff_base = std::chrono::milliseconds(1);
  }
  return {LlmClient(transport, endpoint, std::move(defaults)), transport};
}

}  // namespace nfqa
