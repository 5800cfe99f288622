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

#ifndef NFQA_CLASSIFIER_HPP_
#define NFQA_CLASSIFIER_HPP_

#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "nfqa/core.hpp"
#include "nfqa/llm_client.hpp"

namespace nfqa {

/// Pattern syntax, always case-insensitive:
///   "^text"     the question starts with text (after trimming)
///   "re:expr"   ECMAScript regex search
///   otherwise   substring match
struct PatternRule {
  NfqType nfq_type = NfqType::kEvidenceBased;
  std::string pattern;
  int priority = 0;
};

/// Rules sorted by ascending priority. Unique priorities are enforced.
class RuleSet {
 public:
  /// ConfigError on duplicate priorities or a bad regex.
  explicit RuleSet(std::vector<PatternRule> rules);

  /// The shipped rules (see README for the list).
  static RuleSet defaults();
  /// JSON list of {"type", "pattern", "priority"}.
  static RuleSet from_json(const Json& rules);

  /// First matching rule in priority order, if any.
  std::optional<NfqType> match(const std::string& text) const;

  const std::vector<PatternRule>& rules() const { return rules_; }

 private:
  struct Compiled {
    enum class Kind { kPrefix, kContains, kRegex } kind;
    std::string needle;
    std::regex regex;
  };

  std::vector<PatternRule> rules_;
  std::vector<Compiled> compiled_;
};

/// Factoid test used by the heuristic classifier: leading who/when/where/
/// which (optionally followed by is/was/did/...) and none of the
/// non-factoid markers of the rule set.
bool heuristic_is_factoid(const std::string& text, const RuleSet& rules);

class Classifier {
 public:
  virtual ~Classifier() = default;
  /// InputError on blank text.
  virtual NfqType classify(const Question& question) const = 0;
  virtual bool is_factoid(const Question& question) const = 0;
};

/// Rules in priority order, first match wins, no match is EvidenceBased.
class HeuristicClassifier : public Classifier {
 public:
  explicit HeuristicClassifier(RuleSet rules = RuleSet::defaults());
  NfqType classify(const Question& question) const override;
  bool is_factoid(const Question& question) const override;

  const RuleSet& rules() const { return rules_; }

 private:
  RuleSet rules_;
};

/// POST {endpoint}/classify {"text": ...} -> {"label": <type or "factoid">}.
class RemoteClassifier : public Classifier {
 public:
  explicit RemoteClassifier(EndpointConfig endpoint);
  NfqType classify(const Question& question) const override;
  bool is_factoid(const Question& question) const override;

  /// The raw label: one of the six type strings or "factoid".
  std::string label(const Question& question) const;

 private:
  EndpointConfig endpoint_;
};

enum class ClassifierMode { kRemote, kHeuristic };

struct ClassifierConfig {
  ClassifierMode mode = ClassifierMode::kHeuristic;
  std::optional<EndpointConfig> endpoint;
  std::optional<std::string> rules_path;

  /// ConfigError when Remote mode has no endpoint.
  void validate() const;
};

std::unique_ptr<Classifier> make_classifier(const ClassifierConfig& config);

}  // namespace nfqa

#endif  // NFQA_CLASSIFIER_HPP_
