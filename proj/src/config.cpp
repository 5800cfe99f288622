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

#include "nfqa/config.hpp"

#include <cstdlib>
#include <regex>
#include <set>

#include <yaml-cpp/yaml.h>

namespace nfqa {

namespace {

void check_keys(const YAML::Node& node, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError("'" + where + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in '" + where + "'");
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, const std::string& where, T& out) {
  const YAML::Node value = node[key];
  if (!value) return;
  try {
    out = value.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("bad value for '" + where + "." + key + "'");
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, const std::string& where,
          std::optional<T>& out) {
  const YAML::Node value = node[key];
  if (!value || value.IsNull()) return;
  T tmp{};
  read(node, key, where, tmp);
  out = std::move(tmp);
}

LlmRoleConfig parse_role(const YAML::Node& node, const std::string& where) {
  check_keys(node, where,
             {"model", "base_url", "api_key", "temperature", "top_p", "max_tokens", "seed",
              "timeout_ms", "max_retries", "max_concurrent_requests", "backoff_ms", "mock",
              "mock_script"});
  LlmRoleConfig r;
  read(node, "model", where, r.model);
  read(node, "base_url", where, r.base_url);
  read(node, "api_key", where, r.api_key);
  read(node, "temperature", where, r.temperature);
  read(node, "top_p", where, r.top_p);
  read(node, "max_tokens", where, r.max_tokens);
  read(node, "seed", where, r.seed);
  read(node, "timeout_ms", where, r.timeout_ms);
  read(node, "max_retries", where, r.max_retries);
  read(node, "max_concurrent_requests", where, r.max_concurrent_requests);
  read(node, "backoff_ms", where, r.backoff_ms);
  read(node, "mock", where, r.mock);
  read(node, "mock_script", where, r.mock_script);
  return r;
}

template <typename T>
void emit_opt(YAML::Emitter& out, const char* key, const std::optional<T>& value) {
  if (value) out << YAML::Key << key << YAML::Value << *value;
}

}  // namespace

AppConfig AppConfig::parse(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  AppConfig c;
  if (!root || root.IsNull()) return c;
  check_keys(root, "config",
             {"llm", "classifier", "retrieval", "pipeline", "eval", "dataset", "log_level"});
  read(root, "log_level", "config", c.log_level);

  if (const auto llm = root["llm"]) {
    if (!llm.IsMap()) throw ConfigError("'llm' must map role names to settings");
    for (const auto& kv : llm) {
      const auto name = kv.first.as<std::string>();
      c.llm[name] = parse_role(kv.second, "llm." + name);
    }
  }
  if (const auto n = root["classifier"]) {
    check_keys(n, "classifier", {"mode", "endpoint", "rules"});
    read(n, "mode", "classifier", c.classifier.mode);
    read(n, "endpoint", "classifier", c.classifier.endpoint);
    read(n, "rules", "classifier", c.classifier.rules);
  }
  if (const auto n = root["retrieval"]) {
    check_keys(n, "retrieval", {"corpus", "index", "k1", "b", "reranker", "reranker_endpoint"});
    read(n, "corpus", "retrieval", c.retrieval.corpus);
    read(n, "index", "retrieval", c.retrieval.index);
    read(n, "k1", "retrieval", c.retrieval.k1);
    read(n, "b", "retrieval", c.retrieval.b);
    read(n, "reranker", "retrieval", c.retrieval.reranker);
    read(n, "reranker_endpoint", "retrieval", c.retrieval.reranker_endpoint);
  }
  if (const auto n = root["pipeline"]) {
    check_keys(n, "pipeline",
               {"k_final", "k_per_keyword", "k_per_subquery", "prompt_dir", "max_parallel"});
    read(n, "k_final", "pipeline", c.pipeline.k_final);
    read(n, "k_per_keyword", "pipeline", c.pipeline.k_per_keyword);
    read(n, "k_per_subquery", "pipeline", c.pipeline.k_per_subquery);
    read(n, "prompt_dir", "pipeline", c.pipeline.prompt_dir);
    read(n, "max_parallel", "pipeline", c.pipeline.max_parallel);
  }
  if (const auto n = root["eval"]) {
    check_keys(n, "eval", {"scorer", "dataset", "max_parallel", "max_error_fraction"});
    read(n, "scorer", "eval", c.eval.scorer);
    read(n, "dataset", "eval", c.eval.dataset);
    read(n, "max_parallel", "eval", c.eval.max_parallel);
    read(n, "max_error_fraction", "eval", c.eval.max_error_fraction);
  }
  if (const auto n = root["dataset"]) {
    check_keys(n, "dataset", {"writers", "strong", "annotator", "scheme", "max_parallel"});
    read(n, "writers", "dataset", c.dataset.writers);
    read(n, "strong", "dataset", c.dataset.strong);
    read(n, "annotator", "dataset", c.dataset.annotator);
    read(n, "scheme", "dataset", c.dataset.scheme);
    read(n, "max_parallel", "dataset", c.dataset.max_parallel);
  }
  c.validate();
  return c;
}

AppConfig AppConfig::load(const std::string& path) {
  try {
    return parse(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string AppConfig::dump() const {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "log_level" << YAML::Value << log_level;
  out << YAML::Key << "llm" << YAML::Value << YAML::BeginMap;
  for (const auto& [name, r] : llm) {
    out << YAML::Key << name << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "model" << YAML::Value << r.model;
    out << YAML::Key << "base_url" << YAML::Value << r.base_url;
    emit_opt(out, "api_key", r.api_key);
    out << YAML::Key << "temperature" << YAML::Value << r.temperature;
    out << YAML::Key << "top_p" << YAML::Value << r.top_p;
    out << YAML::Key << "max_tokens" << YAML::Value << r.max_tokens;
    emit_opt(out, "seed", r.seed);
    out << YAML::Key << "timeout_ms" << YAML::Value << r.timeout_ms;
    out << YAML::Key << "max_retries" << YAML::Value << r.max_retries;
    out << YAML::Key << "max_concurrent_requests" << YAML::Value << r.max_concurrent_requests;
    out << YAML::Key << "backoff_ms" << YAML::Value << r.backoff_ms;
    emit_opt(out, "mock", r.mock);
    emit_opt(out, "mock_script", r.mock_script);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::Key << "classifier" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << classifier.mode;
  emit_opt(out, "endpoint", classifier.endpoint);
  emit_opt(out, "rules", classifier.rules);
  out << YAML::EndMap;

  out << YAML::Key << "retrieval" << YAML::Value << YAML::BeginMap;
  emit_opt(out, "corpus", retrieval.corpus);
  emit_opt(out, "index", retrieval.index);
  out << YAML::Key << "k1" << YAML::Value << retrieval.k1;
  out << YAML::Key << "b" << YAML::Value << retrieval.b;
  out << YAML::Key << "reranker" << YAML::Value << retrieval.reranker;
  emit_opt(out, "reranker_endpoint", retrieval.reranker_endpoint);
  out << YAML::EndMap;

  out << YAML::Key << "pipeline" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "k_final" << YAML::Value << pipeline.k_final;
  out << YAML::Key << "k_per_keyword" << YAML::Value << pipeline.k_per_keyword;
  out << YAML::Key << "k_per_subquery" << YAML::Value << pipeline.k_per_subquery;
  emit_opt(out, "prompt_dir", pipeline.prompt_dir);
  out << YAML::Key << "max_parallel" << YAML::Value << pipeline.max_parallel;
  out << YAML::EndMap;

  out << YAML::Key << "eval" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "scorer" << YAML::Value << eval.scorer;
  emit_opt(out, "dataset", eval.dataset);
  out << YAML::Key << "max_parallel" << YAML::Value << eval.max_parallel;
  out << YAML::Key << "max_error_fraction" << YAML::Value << eval.max_error_fraction;
  out << YAML::EndMap;

  out << YAML::Key << "dataset" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "writers" << YAML::Value << YAML::Flow << dataset.writers;
  out << YAML::Key << "strong" << YAML::Value << dataset.strong;
  out << YAML::Key << "annotator" << YAML::Value << dataset.annotator;
  out << YAML::Key << "scheme" << YAML::Value << dataset.scheme;
  out << YAML::Key << "max_parallel" << YAML::Value << dataset.max_parallel;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

void AppConfig::validate() const {
  for (const auto& [name, r] : llm) {
    if (!r.is_mock() && r.base_url.empty()) {
      throw ConfigError("llm role '" + name + "' needs base_url, mock or mock_script");
    }
    if (r.mock && *r.mock != "echo") {
      throw ConfigError("llm role '" + name + "': mock must be \"echo\"");
    }
    if (r.max_retries < 0 || r.max_retries > 5) {
      throw ConfigError("llm role '" + name + "': max_retries must be in [0, 5]");
    }
    if (r.max_concurrent_requests < 1 || r.timeout_ms <= 0 || r.backoff_ms < 0 ||
        r.max_tokens < 1) {
      throw ConfigError("llm role '" + name + "' has a non-positive limit");
    }
    if (r.temperature < 0.0 || r.temperature > 2.0 || r.top_p <= 0.0 || r.top_p > 1.0) {
      throw ConfigError("llm role '" + name + "' has sampling parameters out of range");
    }
  }
  if (classifier.mode != "heuristic" && classifier.mode != "remote") {
    throw ConfigError("classifier.mode must be heuristic or remote");
  }
  if (classifier.mode == "remote" && !classifier.endpoint) {
    throw ConfigError("classifier.mode remote needs classifier.endpoint");
  }
  if (retrieval.reranker != "lexical" && retrieval.reranker != "remote") {
    throw ConfigError("retrieval.reranker must be lexical or remote");
  }
  if (retrieval.reranker == "remote" && !retrieval.reranker_endpoint) {
    throw ConfigError("retrieval.reranker remote needs retrieval.reranker_endpoint");
  }
  Bm25Params{retrieval.k1, retrieval.b}.validate();
  pipeline.validate();
  if (eval.max_parallel == 0 || dataset.max_parallel == 0) {
    throw ConfigError("max_parallel must be at least 1");
  }
  if (eval.max_error_fraction < 0.0 || eval.max_error_fraction > 1.0) {
    throw ConfigError("eval.max_error_fraction must be in [0, 1]");
  }
  if (dataset.scheme != "rewrite-plus-two" && dataset.scheme != "diverse-three") {
    throw ConfigError("dataset.scheme must be rewrite-plus-two or diverse-three");
  }
  static const std::set<std::string> levels{"trace", "debug", "info", "warn",
                                            "error", "critical", "off"};
  if (!levels.count(log_level)) throw ConfigError("unknown log_level '" + log_level + "'");
}

const LlmRoleConfig& AppConfig::role(const std::string& name) const {
  const auto it = llm.find(name);
  if (it == llm.end()) throw ConfigError("llm role '" + name + "' is not configured");
  return it->second;
}

std::string interpolate_env(const std::string& text) {
  static const std::regex var(R"(\$\{([A-Za-z_][A-Za-z0-9_]*)\})");
  std::string out;
  auto begin = text.cbegin();
  for (auto it = std::sregex_iterator(text.begin(), text.end(), var);
       it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out.append(begin, m[0].first);
    const std::string name = m[1].str();
    const char* value = std::getenv(name.c_str());
    if (value == nullptr) throw ConfigError("environment variable '" + name + "' is not set");
    out += value;
    begin = m[0].second;
  }
  out.append(begin, text.cend());
  return out;
}

LlmClient make_llm_client(const LlmRoleConfig& role) {
  EndpointConfig endpoint;
  endpoint.base_url = interpolate_env(role.base_url);
  if (role.api_key) endpoint.api_key = interpolate_env(*role.api_key);
  endpoint.timeout = std::chrono::milliseconds(role.timeout_ms);
  endpoint.max_retries = role.max_retries;
  endpoint.max_concurrent_requests = role.max_concurrent_requests;
  endpoint.backoff_base = std::chrono::milliseconds(role.backoff_ms);

  SamplingParams sampling;
  sampling.model = interpolate_env(role.model);
  sampling.temperature = role.temperature;
  sampling.top_p = role.top_p;
  sampling.max_tokens = role.max_tokens;
  sampling.seed = role.seed;

  std::shared_ptr<ChatTransport> transport;
  if (role.mock_script) {
    const std::string path = interpolate_env(*role.mock_script);
    Json script;
    try {
      script = Json::parse(read_file(path));
    } catch (const Json::exception& e) {
      throw ConfigError("mock script '" + path + "': " + e.what());
    }
    transport = std::make_shared<ScriptedTransport>(mock_script_from_json(script));
    if (endpoint.base_url.empty()) endpoint.base_url = "mock://";
  } else if (role.mock) {
    transport = std::make_shared<ScriptedTransport>(std::vector<MockRule>{MockRule::echo_all()});
    if (endpoint.base_url.empty()) endpoint.base_url = "mock://";
  } else {
    endpoint.validate();
    transport = std::make_shared<HttpChatTransport>(endpoint);
  }
  return LlmClient(std::move(transport), endpoint, sampling);
}

}  // namespace nfqa
