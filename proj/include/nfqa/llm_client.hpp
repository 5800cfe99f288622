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

#ifndef NFQA_LLM_CLIENT_HPP_
#define NFQA_LLM_CLIENT_HPP_

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "nfqa/core.hpp"

namespace nfqa {

struct ChatRequest {
  std::string model;
  std::optional<std::string> system_prompt;
  std::string user_prompt;
  double temperature = 0.8;
  double top_p = 0.95;
  int max_tokens = 512;
  std::optional<std::int64_t> seed;

  /// InputError on an empty prompt or out-of-range sampling parameters.
  void validate() const;
};

struct TokenUsage {
  int prompt = 0;
  int completion = 0;
};

struct ChatResponse {
  std::string text;  // raw completion, never trimmed
  std::string model;
  std::optional<TokenUsage> usage;
};

struct EndpointConfig {
  std::string base_url;
  std::optional<std::string> api_key;
  std::chrono::milliseconds timeout{60000};
  int max_retries = 3;
  int max_concurrent_requests = 4;
  // First backoff window; doubles per retry, full jitter.
  std::chrono::milliseconds backoff_base{500};

  /// ConfigError when max_retries is outside [0, 5], timeout is not
  /// positive or the concurrency cap is below 1.
  void validate() const;
};

/// Per-role sampling defaults applied by LlmClient::ask.
struct SamplingParams {
  std::string model;
  double temperature = 0.8;
  double top_p = 0.95;
  int max_tokens = 512;
  std::optional<std::int64_t> seed;

  static SamplingParams annotation_defaults();
};

/// Thrown by transports. Non-transient failures (4xx other than 408/429)
/// are not retried.
class TransportFailure : public TransportError {
 public:
  TransportFailure(const std::string& message, bool transient)
      : TransportError(message), transient_(transient) {}
  bool transient() const { return transient_; }

 private:
  bool transient_;
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual ChatResponse send(const ChatRequest& request) = 0;
};

/// OpenAI-compatible POST {base_url}/chat/completions.
class HttpChatTransport : public ChatTransport {
 public:
  explicit HttpChatTransport(EndpointConfig endpoint);
  ChatResponse send(const ChatRequest& request) override;

  static Json request_body(const ChatRequest& request);
  /// Extracts the first choice's message content. TransportError when the
  /// body does not have the chat-completion shape.
  static ChatResponse parse_response(const Json& body);

 private:
  EndpointConfig endpoint_;
};

// --- scripted mock ---------------------------------------------------------

struct MockReply {
  enum class Kind { kText, kEcho, kFail };
  Kind kind = Kind::kText;
  std::string text;

  static MockReply with_text(std::string text) {
    return {Kind::kText, std::move(text)};
  }
  static MockReply echo() { return {Kind::kEcho, {}}; }
  static MockReply failure(std::string message = "scripted transport failure") {
    return {Kind::kFail, std::move(message)};
  }
};

/// First rule whose matcher accepts the request answers it. Replies are
/// consumed in order; the last one repeats once the list is exhausted.
struct MockRule {
  std::function<bool(const ChatRequest&)> matcher;
  std::vector<MockReply> replies;
  std::string description;

  static MockRule contains(std::string needle, std::vector<MockReply> replies);
  static MockRule contains(std::string needle, std::string reply);
  static MockRule regex(const std::string& pattern, std::vector<MockReply> replies);
  static MockRule any(std::vector<MockReply> replies);
  static MockRule echo_all();
};

/// Loads a script from JSON: a list of rules, each with an optional
/// "contains" or "regex" matcher (neither means match-all) and one of
/// "reply" (string), "replies" (list of strings or {"fail": msg}),
/// "echo": true or "fail": msg.
std::vector<MockRule> mock_script_from_json(const Json& script);

class ScriptedTransport : public ChatTransport {
 public:
  /// InputError on an empty script.
  explicit ScriptedTransport(std::vector<MockRule> script,
                             std::chrono::milliseconds latency = {});

  /// InternalError when no rule matches.
  ChatResponse send(const ChatRequest& request) override;

  std::vector<ChatRequest> call_log() const;
  std::size_t call_count() const;
  /// Highest number of simultaneous send() calls observed.
  int max_in_flight() const;

 private:
  struct RuleState {
    MockRule rule;
    std::size_t next = 0;
  };

  mutable std::mutex mutex_;
  std::vector<RuleState> rules_;
  std::vector<ChatRequest> log_;
  std::chrono::milliseconds latency_;
  int in_flight_ = 0;
  int max_in_flight_ = 0;
};

// --- client ----------------------------------------------------------------

/// Shareable handle for one LLM role. Copies share the transport and the
/// concurrency cap.
class LlmClient {
 public:
  LlmClient(std::shared_ptr<ChatTransport> transport, EndpointConfig endpoint,
            SamplingParams defaults = {});

  /// Validates, waits for a concurrency slot, then calls the transport with
  /// up to max_retries retries on transient failures (exponential backoff,
  /// full jitter).
  ChatResponse complete(const ChatRequest& request) const;

  /// complete() with this role's sampling defaults.
  ChatResponse ask(const std::string& user_prompt,
                   std::optional<std::string> system_prompt = std::nullopt) const;

  const SamplingParams& defaults() const { return defaults_; }
  const EndpointConfig& endpoint() const { return endpoint_; }
  ChatTransport& transport() const { return *transport_; }

 private:
  struct Gate;

  std::shared_ptr<ChatTransport> transport_;
  EndpointConfig endpoint_;
  SamplingParams defaults_;
  std::shared_ptr<Gate> gate_;
};

struct MockClient {
  LlmClient client;
  std::shared_ptr<ScriptedTransport> mock;
};

/// A client answering from a script, with retries and backoff tuned for
/// tests (1 ms base).
MockClient mock_with_script(std::vector<MockRule> script,
                            EndpointConfig endpoint = {},
                            SamplingParams defaults = {});

// --- plain JSON endpoints (classifier, reranker) ---------------------------

/// POST {base_url}{path} with a JSON body, retrying transient failures like
/// LlmClient does. Returns the parsed response body.
Json post_json(const EndpointConfig& endpoint, const std::string& path,
               const Json& body);

/// Retry driver shared by the LLM client and JSON endpoints.
template <typename Fn>
auto with_retries(const EndpointConfig& endpoint, Fn&& fn) -> decltype(fn());

namespace detail {
void backoff_sleep(const EndpointConfig& endpoint, int attempt);
}

template <typename Fn>
auto with_retries(const EndpointConfig& endpoint, Fn&& fn) -> decltype(fn()) {
  for (int attempt = 0;; ++attempt) {
    try {
      return fn();
    } catch (const TransportFailure& failure) {
      if (!failure.transient() || attempt >= endpoint.max_retries) throw;
    } catch (const TransportError&) {
      if (attempt >= endpoint.max_retries) throw;
    }
    detail::backoff_sleep(endpoint, attempt);
  }
}

}  // namespace nfqa

#endif  // NFQA_LLM_CLIENT_HPP_
