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

#ifndef NFQA_PROMPTS_HPP_
#define NFQA_PROMPTS_HPP_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nfqa/core.hpp"

namespace nfqa {

enum class PromptId {
  kLinkage,
  kLlm,
  kRag,
  kComparisonKeywords,
  kComparisonAnswer,
  kExperienceKeywords,
  kReasonSubqueries,
  kInstructionSubqueries,
  kAggregator,
  kDebateSubqueries,
  kMediator,
  kReferenceRewrite,
  kReferenceDiverse,
  kAnnotationSystem,
  kAnnotationInput,
};

/// Asset file stem, e.g. "linkage" for prompts/linkage.txt.
std::string_view asset_name(PromptId id);

/// A prompt with named slots. `{name}` is replaced for declared slot names
/// only; other brace text is literal. `{{` and `}}` render as `{` and `}`.
/// Substituted values are never rescanned.
class PromptTemplate {
 public:
  PromptTemplate(std::string text, std::vector<std::string> slots);

  /// InternalError if a declared slot has no value.
  std::string render(const std::map<std::string, std::string>& values) const;

  const std::string& text() const { return text_; }
  const std::vector<std::string>& slots() const { return slots_; }

 private:
  std::string text_;
  std::vector<std::string> slots_;
};

class PromptSet {
 public:
  /// Templates compiled into the binary.
  static PromptSet defaults();
  /// Reads <dir>/<asset>.txt for each prompt that exists there; the rest
  /// come from the defaults. ConfigError if dir is not a directory.
  static PromptSet from_directory(const std::string& dir);

  const PromptTemplate& get(PromptId id) const;

 private:
  std::map<PromptId, PromptTemplate> templates_;
};

// --- slot formatting -------------------------------------------------------

/// "[1] title\ntext" blocks separated by blank lines; empty for no passages.
std::string format_passages(std::span<const Passage> passages);
/// "\n1. text\n2. text..." (leading newline so the list starts on its own
/// line after "Reference answer list:").
std::string format_reference_answers(std::span<const std::string> answers);
/// "Answer 1: text\nAnswer 2: text..."
std::string format_candidate_answers(std::span<const std::string> answers);
/// "Question 1: q\nAnswer 1: a" blocks separated by blank lines.
std::string format_qa_pairs(std::span<const QaPair> pairs);

struct PerspectiveResponse {
  std::string response;
  std::string perspective;
};
/// One "\n  - Response i: \"...\" (Perspective: ...)" line per response.
std::string format_mediator_responses(std::span<const PerspectiveResponse> responses);

// --- renderers -------------------------------------------------------------

std::string render_llm_prompt(const PromptSet& set, const std::string& question);
std::string render_rag_prompt(const PromptSet& set, const std::string& question,
                              std::span<const Passage> passages);
std::string render_comparison_keywords_prompt(const PromptSet& set,
                                              const std::string& query);
std::string render_comparison_answer_prompt(const PromptSet& set,
                                            const std::string& question,
                                            std::string_view comparison_type,
                                            std::span<const std::string> keywords,
                                            std::span<const Passage> passages);
std::string render_experience_keywords_prompt(const PromptSet& set,
                                              const std::string& question);
/// Reason or Instruction template; InternalError for other types.
std::string render_subquery_prompt(const PromptSet& set, NfqType type,
                                   const std::string& query);
std::string render_aggregator_prompt(const PromptSet& set,
                                     const std::string& original_question,
                                     std::span<const QaPair> pairs);
std::string render_debate_prompt(const PromptSet& set, const std::string& query);
std::string render_mediator_prompt(const PromptSet& set,
                                   const std::string& debate_topic,
                                   std::span<const PerspectiveResponse> responses);
std::string render_linkage_prompt(const PromptSet& set, const std::string& question,
                                  std::span<const std::string> references,
                                  const std::string& candidate);
std::string render_reference_rewrite_prompt(const PromptSet& set,
                                            const std::string& question,
                                            const std::string& ground_truth);
std::string render_reference_diverse_prompt(const PromptSet& set,
                                            const std::string& question,
                                            const std::string& ground_truth);
std::string annotation_system_prompt(const PromptSet& set);
std::string render_annotation_input_prompt(const PromptSet& set,
                                           const std::string& question,
                                           std::span<const std::string> candidates);

}  // namespace nfqa

#endif  // NFQA_PROMPTS_HPP_
