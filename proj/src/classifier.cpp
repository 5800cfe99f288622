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

#include "nfqa/classifier.hpp"

#include <algorithm>
#include <set>

namespace nfqa {

RuleSet::RuleSet(std::vector<PatternRule> rules) : rules_(std::move(rules)) {
  std::stable_sort(rules_.begin(), rules_.end(),
                   [](const PatternRule& a, const PatternRule& b) {
                     return a.priority < b.priority;
                   });
  std::set<int> seen;
  for (const auto& rule : rules_) {
    if (!seen.insert(rule.priority).second) {
      throw ConfigError("duplicate classifier rule priority " +
                        std::to_string(rule.priority));
    }
    if (rule.pattern.empty()) throw ConfigError("empty classifier rule pattern");
    Compiled compiled;
    if (rule.pattern.starts_with("re:")) {
      compiled.kind = Compiled::Kind::kRegex;
      try {
        compiled.regex = std::regex(rule.pattern.substr(3),
                                    std::regex::ECMAScript | std::regex::icase);
      } catch (const std::regex_error& e) {
        throw ConfigError("bad classifier regex '" + rule.pattern + "': " + e.what());
      }
    } else if (rule.pattern.starts_with("^")) {
      compiled.kind = Compiled::Kind::kPrefix;
      compiled.needle = to_lower(rule.pattern.substr(1));
    } else {
      compiled.kind = Compiled::Kind::kContains;
      compiled.needle = to_lower(rule.pattern);
    }
    compiled_.push_back(std::move(compiled));
  }
}

RuleSet RuleSet::defaults() {
  using T = NfqType;
  return RuleSet({
      {T::kComparison, "difference between", 10},
      {T::kComparison, "differences between", 11},
      {T::kComparison, "similarities", 12},
      {T::kComparison,
       R"(re:\sor\s.*\b(better|worse|more|less)\b|\b(better|worse|more|less)\b.*\sor\s)",
       13},
      {T::kComparison, "compared to", 14},
      {T::kComparison, R"(re:\b(vs\.?|versus)\s)", 15},
      {T::kDebate, "^should ", 20},
      {T::kDebate, R"(re:^(is|are)\s.+\s(good|bad)\b)", 21},
      {T::kDebate, "do you agree", 22},
      {T::kDebate, "what kind of", 23},
      {T::kDebate, "what do you think", 24},
      {T::kDebate, "is it right", 25},
      {T::kInstruction, "how can you", 30},
      {T::kInstruction, "how do i", 31},
      {T::kInstruction, "how to", 32},
      {T::kInstruction, "steps to", 33},
      {T::kInstruction, "how can i", 34},
      {T::kReason, "why ", 40},
      {T::kReason, "for what reason", 41},
      {T::kReason, "what reason", 42},
      {T::kReason, "cause of", 43},
      {T::kExperience, "best ", 50},
      {T::kExperience, "recommend", 51},
      {T::kExperience, "what are some", 52},
  });
}

RuleSet RuleSet::from_json(const Json& rules) {
  if (!rules.is_array()) throw ConfigError("classifier rules must be a JSON list");
  std::vector<PatternRule> parsed;
  for (const auto& entry : rules) {
    try {
      PatternRule rule;
      rule.nfq_type = parse_nfq_type(entry.at("type").get<std::string>());
      rule.pattern = entry.at("pattern").get<std::string>();
      rule.priority = entry.at("priority").get<int>();
      parsed.push_back(std::move(rule));
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("bad classifier rule: ") + e.what());
    } catch (const InputError& e) {
      throw ConfigError(std::string("bad classifier rule: ") + e.what());
    }
  }
  return RuleSet(std::move(parsed));
}

std::optional<NfqType> RuleSet::match(const std::string& text) const {
  const std::string lowered = to_lower(trim(text));
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const Compiled& c = compiled_[i];
    bool hit = false;
    switch (c.kind) {
      case Compiled::Kind::kPrefix:
        hit = lowered.starts_with(c.needle);
        break;
      case Compiled::Kind::kContains:
        hit = lowered.find(c.needle) != std::string::npos;
        break;
      case Compiled::Kind::kRegex:
        hit = std::regex_search(lowered, c.regex);
        break;
    }
    if (hit) return rules_[i].nfq_type;
  }
  return std::nullopt;
}

bool heuristic_is_factoid(const std::string& text, const RuleSet& rules) {
  static const std::regex kLeadingWh(R"(^(who|when|where|which)\s+\w+)",
                                     std::regex::ECMAScript | std::regex::icase);
  if (!std::regex_search(trim(text), kLeadingWh)) return false;
  return !rules.match(text).has_value();
}

HeuristicClassifier::HeuristicClassifier(RuleSet rules) : rules_(std::move(rules)) {}

NfqType HeuristicClassifier::classify(const Question& question) const {
  question.validate();
  return rules_.match(question.text).value_or(NfqType::kEvidenceBased);
}

bool HeuristicClassifier::is_factoid(const Question& question) const {
  question.validate();
  return heuristic_is_factoid(question.text, rules_);
}

RemoteClassifier::RemoteClassifier(EndpointConfig endpoint)
    : endpoint_(std::move(endpoint)) {
  endpoint_.validate();
}

std::string RemoteClassifier::label(const Question& question) const {
  question.validate();
  const Json reply = post_json(endpoint_, "/classify", Json{{"text", question.text}});
  if (!reply.is_object() || !reply.contains("label") || !reply["label"].is_string()) {
    throw TransportError("classifier response has no string 'label'");
  }
  return reply["label"].get<std::string>();
}

NfqType RemoteClassifier::classify(const Question& question) const {
  const std::string raw = label(question);
  try {
    return parse_nfq_type(raw);
  } catch (const InputError&) {
    if (raw == "factoid") return NfqType::kEvidenceBased;
    throw TransportError("classifier returned unknown label '" + raw + "'");
  }
}

bool RemoteClassifier::is_factoid(const Question& question) const {
  return label(question) == "factoid";
}

void ClassifierConfig::validate() const {
  if (mode == ClassifierMode::kRemote && !endpoint) {
    throw ConfigError("remote classifier requires an endpoint");
  }
}

std::unique_ptr<Classifier> make_classifier(const ClassifierConfig& config) {
  config.validate();
  if (config.mode == ClassifierMode::kRemote) {
    return std::make_unique<RemoteClassifier>(*config.endpoint);
  }
  if (config.rules_path) {
    Json rules;
    try {
      rules = Json::parse(read_file(*config.rules_path));
    } catch (const Json::parse_error& e) {
      throw ConfigError("classifier rules file is not JSON: " + std::string(e.what()));
    } catch (const InputError& e) {
      throw ConfigError(e.what());
    }
    return std::make_unique<HeuristicClassifier>(RuleSet::from_json(rules));
  }
  return std::make_unique<HeuristicClassifier>();
}

}  // namespace nfqa
