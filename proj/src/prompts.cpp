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

#include "nfqa/prompts.hpp"

#include <algorithm>
#include <array>
#include <filesystem>

namespace nfqa {

namespace detail {
const std::map<std::string, std::string>& embedded_prompts();
}

namespace {

struct PromptSpec {
  PromptId id;
  std::string_view asset;
  std::vector<std::string> slots;
};

const std::vector<PromptSpec>& prompt_specs() {
  static const std::vector<PromptSpec> specs = {
      {PromptId::kLinkage, "linkage", {"question", "reference_answers", "candidate_answer"}},
      {PromptId::kLlm, "llm", {"question"}},
      {PromptId::kRag, "rag", {"reference_passages", "question"}},
      {PromptId::kComparisonKeywords, "comparison_keywords", {"query"}},
      {PromptId::kComparisonAnswer,
       "comparison_answer",
       {"question", "comparison_type", "keywords", "reference_passages"}},
      {PromptId::kExperienceKeywords, "experience_keywords", {"question"}},
      {PromptId::kReasonSubqueries, "reason_subqueries", {"query"}},
      {PromptId::kInstructionSubqueries, "instruction_subqueries", {"query"}},
      {PromptId::kAggregator, "aggregator", {"original_question", "qa_pairs_text"}},
      {PromptId::kDebateSubqueries, "debate_subqueries", {"query"}},
      {PromptId::kMediator, "mediator", {"debate_topic", "responses"}},
      {PromptId::kReferenceRewrite, "reference_rewrite", {"question", "ground_truth"}},
      {PromptId::kReferenceDiverse, "reference_diverse", {"question", "ground_truth"}},
      {PromptId::kAnnotationSystem, "annotation_system", {}},
      {PromptId::kAnnotationInput, "annotation_input", {"question", "reference_answers"}},
  };
  return specs;
}

// Asset files end with one newline that is not part of the prompt.
std::string strip_final_newline(std::string text) {
  if (!text.empty() && text.back() == '\n') text.pop_back();
  if (!text.empty() && text.back() == '\r') text.pop_back();
  return text;
}

}  // namespace

std::string_view asset_name(PromptId id) {
  for (const auto& spec : prompt_specs()) {
    if (spec.id == id) return spec.asset;
  }
  throw InternalError("unknown prompt id");
}

PromptTemplate::PromptTemplate(std::string text, std::vector<std::string> slots)
    : text_(std::move(text)), slots_(std::move(slots)) {}

std::string PromptTemplate::render(
    const std::map<std::string, std::string>& values) const {
  for (const auto& slot : slots_) {
    if (!values.contains(slot)) {
      throw InternalError("prompt slot '" + slot + "' has no value");
    }
  }
  std::string out;
  out.reserve(text_.size() + 256);
  std::size_t i = 0;
  while (i < text_.size()) {
    const char c = text_[i];
    if (c == '{' && i + 1 < text_.size() && text_[i + 1] == '{') {
      out += '{';
      i += 2;
      continue;
    }
    if (c == '}' && i + 1 < text_.size() && text_[i + 1] == '}') {
      out += '}';
      i += 2;
      continue;
    }
    if (c == '{') {
      const auto close = text_.find('}', i + 1);
      if (close != std::string::npos) {
        const std::string name = text_.substr(i + 1, close - i - 1);
        if (std::find(slots_.begin(), slots_.end(), name) != slots_.end()) {
          out += values.at(name);
          i = close + 1;
          continue;
        }
      }
    }
    out += c;
    ++i;
  }
  return out;
}

PromptSet PromptSet::defaults() {
  PromptSet set;
  const auto& embedded = detail::embedded_prompts();
  for (const auto& spec : prompt_specs()) {
    auto it = embedded.find(std::string(spec.asset));
    if (it == embedded.end()) {
      throw InternalError("prompt asset '" + std::string(spec.asset) +
                          "' was not embedded");
    }
    set.templates_.emplace(spec.id,
                           PromptTemplate(strip_final_newline(it->second), spec.slots));
  }
  return set;
}

PromptSet PromptSet::from_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw ConfigError("prompt directory '" + dir + "' does not exist");
  }
  PromptSet set = defaults();
  for (const auto& spec : prompt_specs()) {
    const fs::path path = fs::path(dir) / (std::string(spec.asset) + ".txt");
    if (fs::exists(path)) {
      set.templates_.insert_or_assign(
          spec.id,
          PromptTemplate(strip_final_newline(read_file(path.string())), spec.slots));
    }
  }
  return set;
}

const PromptTemplate& PromptSet::get(PromptId id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw InternalError("prompt not loaded");
  return it->second;
}

// --- slot formatting -------------------------------------------------------

std::string format_passages(std::span<const Passage> passages) {
  std::string out;
  for (std::size_t i = 0; i < passages.size(); ++i) {
    if (i > 0) out += "\n\n";
    out += "[" + std::to_string(i + 1) + "] ";
    if (!passages[i].title.empty()) out += passages[i].title + "\n";
    out += passages[i].text;
  }
  return out;
}

std::string format_reference_answers(std::span<const std::string> answers) {
  std::string out;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    out += "\n" + std::to_string(i + 1) + ". " + answers[i];
  }
  return out;
}

std::string format_candidate_answers(std::span<const std::string> answers) {
  std::string out;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (i > 0) out += "\n";
    out += "Answer " + std::to_string(i + 1) + ": " + answers[i];
  }
  return out;
}

std::string format_qa_pairs(std::span<const QaPair> pairs) {
  std::string out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::string n = std::to_string(i + 1);
    if (i > 0) out += "\n\n";
    out += "Question " + n + ": " + pairs[i].question + "\n";
    out += "Answer " + n + ": " + pairs[i].answer;
  }
  return out;
}

std::string format_mediator_responses(
    std::span<const PerspectiveResponse> responses) {
  std::string out;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    out += "\n  - Response " + std::to_string(i + 1) + ": \"" +
           responses[i].response + "\" (Perspective: " + responses[i].perspective +
           ")";
  }
  return out;
}

// --- renderers -------------------------------------------------------------

std::string render_llm_prompt(const PromptSet& set, const std::string& question) {
  return set.get(PromptId::kLlm).render({{"question", question}});
}

std::string render_rag_prompt(const PromptSet& set, const std::string& question,
                              std::span<const Passage> passages) {
  return set.get(PromptId::kRag).render(
      {{"question", question}, {"reference_passages", format_passages(passages)}});
}

std::string render_comparison_keywords_prompt(const PromptSet& set,
                                              const std::string& query) {
  return set.get(PromptId::kComparisonKeywords).render({{"query", query}});
}

std::string render_comparison_answer_prompt(const PromptSet& set,
                                            const std::string& question,
                                            std::string_view comparison_type,
                                            std::span<const std::string> keywords,
                                            std::span<const Passage> passages) {
  std::string joined;
  for (std::size_t i = 0; i < keywords.size(); ++i) {
    if (i > 0) joined += ", ";
    joined += keywords[i];
  }
  return set.get(PromptId::kComparisonAnswer)
      .render({{"question", question},
               {"comparison_type", std::string(comparison_type)},
               {"keywords", joined},
               {"reference_passages", format_passages(passages)}});
}

std::string render_experience_keywords_prompt(const PromptSet& set,
                                              const std::string& question) {
  return set.get(PromptId::kExperienceKeywords).render({{"question", question}});
}

std::string render_subquery_prompt(const PromptSet& set, NfqType type,
                                   const std::string& query) {
  switch (type) {
    case NfqType::kReason:
      return set.get(PromptId::kReasonSubqueries).render({{"query", query}});
    case NfqType::kInstruction:
      return set.get(PromptId::kInstructionSubqueries).render({{"query", query}});
    case NfqType::kEvidenceBased:
    case NfqType::kComparison:
    case NfqType::kExperience:
    case NfqType::kDebate:
      break;
  }
  throw InternalError("no sub-query prompt for type " + std::string(to_string(type)));
}

std::string render_aggregator_prompt(const PromptSet& set,
                                     const std::string& original_question,
                                     std::span<const QaPair> pairs) {
  return set.get(PromptId::kAggregator)
      .render({{"original_question", original_question},
               {"qa_pairs_text", format_qa_pairs(pairs)}});
}

std::string render_debate_prompt(const PromptSet& set, const std::string& query) {
  return set.get(PromptId::kDebateSubqueries).render({{"query", query}});
}

std::string render_mediator_prompt(const PromptSet& set,
                                   const std::string& debate_topic,
                                   std::span<const PerspectiveResponse> responses) {
  return set.get(PromptId::kMediator)
      .render({{"debate_topic", debate_topic},
               {"responses", format_mediator_responses(responses)}});
}

std::string render_linkage_prompt(const PromptSet& set, const std::string& question,
                                  std::span<const std::string> references,
                                  const std::string& candidate) {
  return set.get(PromptId::kLinkage)
      .render({{"question", question},
               {"reference_answers", format_reference_answers(references)},
               {"candidate_answer", candidate}});
}

std::string render_reference_rewrite_prompt(const PromptSet& set,
                                            const std::string& question,
                                            const std::string& ground_truth) {
  return set.get(PromptId::kReferenceRewrite)
      .render({{"question", question}, {"ground_truth", ground_truth}});
}

std::string render_reference_diverse_prompt(const PromptSet& set,
                                            const std::string& question,
                                            const std::string& ground_truth) {
  return set.get(PromptId::kReferenceDiverse)
      .render({{"question", question}, {"ground_truth", ground_truth}});
}

std::string annotation_system_prompt(const PromptSet& set) {
  return set.get(PromptId::kAnnotationSystem).render({});
}

std::string render_annotation_input_prompt(const PromptSet& set,
                                           const std::string& question,
                                           std::span<const std::string> candidates) {
  return set.get(PromptId::kAnnotationInput)
      .render({{"question", question},
               {"reference_answers", format_candidate_answers(candidates)}});
}

}  // namespace nfqa
