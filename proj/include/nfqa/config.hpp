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

#ifndef NFQA_CONFIG_HPP_
#define NFQA_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nfqa/llm_client.hpp"
#include "nfqa/pipeline.hpp"

namespace nfqa {

/// One LLM role. String values may contain ${VAR} references, resolved
/// from the environment when the client is built.
struct LlmRoleConfig {
  std::string model;
  std::string base_url;
  std::optional<std::string> api_key;
  double temperature = 0.8;
  double top_p = 0.95;
  int max_tokens = 512;
  std::optional<std::int64_t> seed;
  int timeout_ms = 60000;
  int max_retries = 3;
  int max_concurrent_requests = 4;
  int backoff_ms = 500;
  std::optional<std::string> mock;         // "echo"
  std::optional<std::string> mock_script;  // JSON rule file

  bool is_mock() const { return mock.has_value() || mock_script.has_value(); }
  bool operator==(const LlmRoleConfig&) const = default;
};

struct ClassifierSection {
  std::string mode = "heuristic";  // heuristic | remote
  std::optional<std::string> endpoint;
  std::optional<std::string> rules;
  bool operator==(const ClassifierSection&) const = default;
};

struct RetrievalSection {
  std::optional<std::string> corpus;  // passages JSONL
  std::optional<std::string> index;   // index directory
  double k1 = 0.9;
  double b = 0.4;
  std::string reranker = "lexical";  // lexical | remote
  std::optional<std::string> reranker_endpoint;
  bool operator==(const RetrievalSection&) const = default;
};

struct EvalSection {
  std::string scorer = "scorer";
  std::optional<std::string> dataset;
  std::size_t max_parallel = 4;
  double max_error_fraction = 0.2;
  bool operator==(const EvalSection&) const = default;
};

struct DatasetSection {
  std::vector<std::string> writers{"writer"};
  std::string strong = "strong";
  std::string annotator = "annotator";
  std::string scheme = "rewrite-plus-two";  // or diverse-three
  std::size_t max_parallel = 4;
  bool operator==(const DatasetSection&) const = default;
};

struct AppConfig {
  std::map<std::string, LlmRoleConfig> llm;
  ClassifierSection classifier;
  RetrievalSection retrieval;
  PipelineConfig pipeline;
  EvalSection eval;
  DatasetSection dataset;
  std::string log_level = "info";

  /// YAML text. ConfigError on syntax errors, unknown keys or bad values.
  static AppConfig parse(const std::string& text);
  /// InputError when the file cannot be read.
  static AppConfig load(const std::string& path);
  /// YAML that parse() turns back into an equal config.
  std::string dump() const;

  /// ConfigError unless every role has a base_url or a mock and numeric
  /// settings are in range.
  void validate() const;
  /// ConfigError when the role is not configured.
  const LlmRoleConfig& role(const std::string& name) const;
  bool has_role(const std::string& name) const { return llm.count(name) > 0; }

  bool operator==(const AppConfig&) const = default;
};

/// Replaces ${VAR} with the environment value. ConfigError when unset.
std::string interpolate_env(const std::string& text);

/// Builds a client for a role: scripted transport for mocks, HTTP otherwise.
LlmClient make_llm_client(const LlmRoleConfig& role);

}  // namespace nfqa

#endif  // NFQA_CONFIG_HPP_
