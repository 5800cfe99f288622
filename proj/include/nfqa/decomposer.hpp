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

#ifndef NFQA_DECOMPOSER_HPP_
#define NFQA_DECOMPOSER_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nfqa/core.hpp"
#include "nfqa/llm_client.hpp"
#include "nfqa/prompts.hpp"

namespace nfqa {

/// Parses the first balanced {...} or [...] region of `text` that is valid
/// JSON. Prose and ``` fences around it are ignored. ParseError if none.
Json extract_first_json(std::string_view text);

enum class CompareType { kDifference, kSimilarity, kSuperiority };

/// "differences", "similarities", "superiority".
std::string_view to_string(CompareType type);
/// Accepts difference(s), similarit(y|ies), superior(ity), any case.
/// ParseError otherwise.
CompareType parse_compare_type(std::string_view text);

struct CompareAnalysis {
  bool is_compare = false;
  std::optional<CompareType> compare_type;
  std::vector<std::string> keywords;

  Json to_json() const;
  bool operator==(const CompareAnalysis&) const = default;
};

struct ExperienceKeywords {
  std::vector<std::string> keywords;

  Json to_json() const;
  bool operator==(const ExperienceKeywords&) const = default;
};

struct SubQuerySet {
  NfqType origin_type = NfqType::kReason;
  std::vector<std::string> queries;

  Json to_json() const;
  bool operator==(const SubQuerySet&) const = default;
};

struct DebatePlan {
  std::string debate_topic;
  std::vector<std::string> opinions;
  /// (opinion, sub-query) in opinion order.
  std::vector<std::pair<std::string, std::string>> sub_queries;

  Json to_json() const;
  bool operator==(const DebatePlan&) const = default;
};

inline constexpr std::size_t kMinSubQueries = 2;
inline constexpr std::size_t kMaxSubQueries = 5;

// Schema parsers over raw LLM output. ParseError when the JSON or the
// schema is broken; InputError when the schema holds but the content
// violates a bound.
CompareAnalysis parse_compare_analysis(std::string_view raw);
ExperienceKeywords parse_experience_keywords(std::string_view raw);
SubQuerySet parse_subqueries(std::string_view raw, NfqType origin_type);
DebatePlan parse_debate_plan(std::string_view raw);

// LLM-driven decomposition. Each renders its prompt, asks the client, and
// parses; a ParseError triggers exactly one retry with the same prompt.
CompareAnalysis analyze_comparison(const Question& question, const LlmClient& client,
                                   const PromptSet& prompts);
ExperienceKeywords extract_experience_keywords(const Question& question,
                                               const LlmClient& client,
                                               const PromptSet& prompts);
/// InputError when nfq_type is not Reason or Instruction.
SubQuerySet generate_subqueries(const Question& question, NfqType nfq_type,
                                const LlmClient& client, const PromptSet& prompts);
DebatePlan decompose_debate(const Question& question, const LlmClient& client,
                            const PromptSet& prompts);

/// Calls the client and parses, retrying once when the parser throws
/// ParseError. Shared with the LINKAGE scorer.
template <typename Parse>
auto ask_and_parse(const LlmClient& client, const std::string& prompt, Parse&& parse,
                   std::optional<std::string> system_prompt = std::nullopt)
    -> decltype(parse(std::string{})) {
  try {
    return parse(client.ask(prompt, system_prompt).text);
  } catch (const ParseError&) {
    return parse(client.ask(prompt, system_prompt).text);
  }
}

}  // namespace nfqa

#endif  // NFQA_DECOMPOSER_HPP_
