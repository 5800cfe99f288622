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

#ifndef NFQA_PIPELINE_HPP_
#define NFQA_PIPELINE_HPP_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nfqa/classifier.hpp"
#include "nfqa/core.hpp"
#include "nfqa/decomposer.hpp"
#include "nfqa/llm_client.hpp"
#include "nfqa/prompts.hpp"
#include "nfqa/retrieval.hpp"

namespace nfqa {

struct PipelineConfig {
  std::size_t k_final = 5;         // passages handed to any generator prompt
  std::size_t k_per_keyword = 5;   // comparison / experience searches
  std::size_t k_per_subquery = 5;  // reason / instruction / debate searches
  std::optional<std::string> prompt_dir;
  std::size_t max_parallel = 4;    // concurrent sub-query branches

  /// ConfigError when any k is 0.
  void validate() const;
  bool operator==(const PipelineConfig&) const = default;
};

/// Step names that may appear in a trace.
inline constexpr const char* kTraceStepNames[] = {
    "classify", "decompose", "retrieve", "dedup",
    "rerank",   "generate",  "aggregate", "mediate"};

struct PipelineDeps {
  std::shared_ptr<const Classifier> classifier;
  std::shared_ptr<const CorpusIndex> index;
  std::shared_ptr<const Reranker> reranker;
  std::optional<LlmClient> generator;
  std::optional<LlmClient> decomposer;
  PromptSet prompts = PromptSet::defaults();
  PipelineConfig config;
};

/// Type-aware question answering plus the LLM-only and vanilla RAG
/// baselines. Errors keep their category and gain a "[step]" prefix.
/// Safe to call concurrently.
class Pipeline {
 public:
  /// ConfigError when a dependency needed by every method is missing
  /// (generator). Index, classifier, reranker and decomposer are checked
  /// when a method needs them.
  explicit Pipeline(PipelineDeps deps);

  /// Classifies unless question.nfq_type is set, then dispatches.
  Answer answer(const Question& question) const;
  Answer answer_with(Method method, const Question& question) const;

  Answer answer_evidence_based(const Question& question) const;
  Answer answer_comparison(const Question& question) const;
  Answer answer_experience(const Question& question) const;
  /// Reason and Instruction.
  Answer answer_multi(const Question& question, NfqType type) const;
  Answer answer_debate(const Question& question) const;

  Answer answer_llm_only(const Question& question) const;
  Answer answer_vanilla_rag(const Question& question) const;

  const PipelineConfig& config() const { return deps_.config; }

 private:
  struct Run;

  static Answer finish(const Question& question, std::string text, Run& run);
  Answer dispatch(const Question& question, NfqType type, Run& run) const;
  Answer evidence(const Question& question, Run& run) const;
  Answer comparison(const Question& question, Run& run) const;
  Answer experience(const Question& question, Run& run) const;
  Answer multi(const Question& question, NfqType type, Run& run) const;
  Answer debate(const Question& question, Run& run) const;

  std::vector<Passage> retrieve(const std::string& query, std::size_t k,
                                std::vector<TraceStep>& trace) const;
  std::string generate(const std::string& step, const std::string& prompt,
                       Json detail, std::vector<TraceStep>& trace) const;
  std::vector<Passage> rerank_top(const std::string& query,
                                  std::vector<Passage> passages,
                                  std::vector<TraceStep>& trace) const;

  const CorpusIndex& index() const;
  const LlmClient& decomposer() const;

  PipelineDeps deps_;
};

}  // namespace nfqa

#endif  // NFQA_PIPELINE_HPP_
