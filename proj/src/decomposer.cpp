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

#include "nfqa/decomposer.hpp"

#include <regex>
#include <set>

namespace nfqa {

std::string_view to_string(CompareType type) {
  switch (type) {
    case CompareType::kDifference:
      return "differences";
    case CompareType::kSimilarity:
      return "similarities";
    case CompareType::kSuperiority:
      return "superiority";
  }
  return "differences";
}

CompareType parse_compare_type(std::string_view text) {
  static const std::regex kDifference("^differences?$", std::regex::icase);
  static const std::regex kSimilarity("^similarit(y|ies)$", std::regex::icase);
  static const std::regex kSuperiority("^superior(ity)?$", std::regex::icase);
  const std::string value = trim(text);
  if (std::regex_match(value, kDifference)) return CompareType::kDifference;
  if (std::regex_match(value, kSimilarity)) return CompareType::kSimilarity;
  if (std::regex_match(value, kSuperiority)) return CompareType::kSuperiority;
  throw ParseError("unknown compare_type '" + value + "'");
}

Json CompareAnalysis::to_json() const {
  return Json{{"is_compare", is_compare},
              {"compare_type", compare_type ? std::string(nfqa::to_string(*compare_type)) : ""},
              {"keywords_list", keywords}};
}

Json ExperienceKeywords::to_json() const { return Json(keywords); }

Json SubQuerySet::to_json() const { return Json(queries); }

Json DebatePlan::to_json() const {
  Json mapping = Json::object();
  for (const auto& [opinion, query] : sub_queries) mapping[opinion] = query;
  return Json{{"debate_topic", debate_topic},
              {"dist_opinion", opinions},
              {"sub-queries", mapping}};
}

namespace {

const Json& require_key(const Json& object, const char* key) {
  auto it = object.find(key);
  if (it == object.end()) {
    throw ParseError(std::string("LLM output is missing key '") + key + "'");
  }
  return *it;
}

// Non-blank strings of a JSON list; blank entries are dropped.
std::vector<std::string> string_list(const Json& value, const char* what) {
  if (!value.is_array()) throw ParseError(std::string(what) + " is not a list");
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string()) {
      throw ParseError(std::string(what) + " contains a non-string element");
    }
    std::string text = trim(item.get<std::string>());
    if (!text.empty()) out.push_back(std::move(text));
  }
  return out;
}

Json expect_object(std::string_view raw) {
  Json parsed = extract_first_json(raw);
  if (!parsed.is_object()) throw ParseError("expected a JSON object");
  return parsed;
}

Json expect_list(std::string_view raw) {
  Json parsed = extract_first_json(raw);
  if (!parsed.is_array()) throw ParseError("expected a JSON list");
  return parsed;
}

}  // namespace

CompareAnalysis parse_compare_analysis(std::string_view raw) {
  const Json object = expect_object(raw);
  const Json& is_compare = require_key(object, "is_compare");
  const Json& compare_type = require_key(object, "compare_type");
  const Json& keywords = require_key(object, "keywords_list");
  if (!is_compare.is_boolean()) throw ParseError("is_compare is not a boolean");
  if (!compare_type.is_string() && !compare_type.is_null()) {
    throw ParseError("compare_type is not a string");
  }

  CompareAnalysis analysis;
  analysis.is_compare = is_compare.get<bool>();
  analysis.keywords = string_list(keywords, "keywords_list");
  if (!analysis.is_compare) return analysis;

  analysis.compare_type =
      parse_compare_type(compare_type.is_string() ? compare_type.get<std::string>() : "");
  if (analysis.keywords.size() < 2) {
    throw InputError("comparison needs at least two keywords, got " +
                     std::to_string(analysis.keywords.size()));
  }
  return analysis;
}

ExperienceKeywords parse_experience_keywords(std::string_view raw) {
  const std::vector<std::string> keywords = string_list(expect_list(raw), "keywords");
  ExperienceKeywords out;
  std::set<std::string> seen;
  for (const auto& keyword : keywords) {
    if (seen.insert(to_lower(keyword)).second) out.keywords.push_back(keyword);
  }
  if (out.keywords.empty()) throw InputError("experience keyword list is empty");
  return out;
}

SubQuerySet parse_subqueries(std::string_view raw, NfqType origin_type) {
  SubQuerySet set;
  set.origin_type = origin_type;
  set.queries = string_list(expect_list(raw), "sub-queries");
  if (set.queries.size() < kMinSubQueries) {
    throw InputError("expected at least 2 sub-queries, got " +
                     std::to_string(set.queries.size()));
  }
  if (set.queries.size() > kMaxSubQueries) set.queries.resize(kMaxSubQueries);
  return set;
}

DebatePlan parse_debate_plan(std::string_view raw) {
  const Json object = expect_object(raw);
  const Json& topic = require_key(object, "debate_topic");
  const Json& opinions = require_key(object, "dist_opinion");
  const Json& queries = require_key(object, "sub-queries");
  if (!topic.is_string()) throw ParseError("debate_topic is not a string");
  if (!queries.is_object()) throw ParseError("sub-queries is not an object");

  DebatePlan plan;
  plan.debate_topic = trim(topic.get<std::string>());
  if (plan.debate_topic.empty()) throw InputError("debate_topic is empty");
  plan.opinions = string_list(opinions, "dist_opinion");

  std::set<std::string> opinion_set(plan.opinions.begin(), plan.opinions.end());
  if (opinion_set.size() != plan.opinions.size()) {
    throw InputError("dist_opinion contains duplicates");
  }
  for (const auto& [key, value] : queries.items()) {
    if (!value.is_string()) throw ParseError("sub-query for '" + key + "' is not a string");
    if (!opinion_set.contains(key)) {
      throw InputError("sub-query '" + key + "' has no matching opinion");
    }
  }
  for (const auto& opinion : plan.opinions) {
    auto it = queries.find(opinion);
    if (it == queries.end()) {
      throw InputError("opinion '" + opinion + "' has no sub-query");
    }
    std::string query = trim(it->get<std::string>());
    if (query.empty()) throw InputError("sub-query for '" + opinion + "' is empty");
    plan.sub_queries.emplace_back(opinion, std::move(query));
  }
  if (plan.opinions.size() < kMinSubQueries) {
    throw InputError("debate plan needs at least 2 opinions, got " +
                     std::to_string(plan.opinions.size()));
  }
  if (plan.opinions.size() > kMaxSubQueries) {
    plan.opinions.resize(kMaxSubQueries);
    plan.sub_queries.resize(kMaxSubQueries);
  }
  return plan;
}

CompareAnalysis analyze_comparison(const Question& question, const LlmClient& client,
                                   const PromptSet& prompts) {
  question.validate();
  return ask_and_parse(client,
                       render_comparison_keywords_prompt(prompts, question.text),
                       [](const std::string& raw) { return parse_compare_analysis(raw); });
}

ExperienceKeywords extract_experience_keywords(const Question& question,
                                               const LlmClient& client,
                                               const PromptSet& prompts) {
  question.validate();
  return ask_and_parse(client,
                       render_experience_keywords_prompt(prompts, question.text),
                       [](const std::string& raw) { return parse_experience_keywords(raw); });
}

SubQuerySet generate_subqueries(const Question& question, NfqType nfq_type,
                                const LlmClient& client, const PromptSet& prompts) {
  question.validate();
  if (nfq_type != NfqType::kReason && nfq_type != NfqType::kInstruction) {
    throw InputError("sub-query generation needs a reason or instruction question, got " +
                     std::string(to_string(nfq_type)));
  }
  return ask_and_parse(client, render_subquery_prompt(prompts, nfq_type, question.text),
                       [nfq_type](const std::string& raw) {
                         return parse_subqueries(raw, nfq_type);
                       });
}

DebatePlan decompose_debate(const Question& question, const LlmClient& client,
                            const PromptSet& prompts) {
  question.validate();
  return ask_and_parse(client, render_debate_prompt(prompts, question.text),
                       [](const std::string& raw) { return parse_debate_plan(raw); });
}

}  // namespace nfqa
