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

#ifndef NFQA_EVALUATION_HPP_
#define NFQA_EVALUATION_HPP_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nfqa/core.hpp"
#include "nfqa/llm_client.hpp"
#include "nfqa/pipeline.hpp"
#include "nfqa/prompts.hpp"
#include "nfqa/records.hpp"

namespace nfqa {

struct EvalCase {
  Question question;
  std::string candidate;
  ReferenceList references;

  /// InputError on a blank candidate, blank question or bad reference list.
  void validate() const;
};

struct RankResult {
  std::string case_id;
  int rank = 1;       // 1 = better than every reference
  int list_size = 1;  // |R|
  std::string raw_output;

  bool operator==(const RankResult&) const = default;
};

struct EvalSummary {
  std::size_t n = 0;
  double mrr = 0.0;
  double mpr = 0.0;
  std::vector<RankResult> per_case;
};

/// The listwise ranking prompt with references numbered best first.
std::string build_linkage_prompt(const EvalCase& eval_case, const PromptSet& prompts);

/// First "[[k]]" clamped to [1, list_size]; failing that, the first
/// standalone integer within [1, list_size]. ParseError otherwise.
int parse_rank(std::string_view raw, int list_size);

/// Prompt -> scorer -> parse_rank, with one retry on ParseError.
RankResult score_candidate(const EvalCase& eval_case, const LlmClient& scorer,
                           const PromptSet& prompts);

/// Mean of 1 / rank. InputError on an empty list.
double mrr(std::span<const RankResult> ranks);
/// Mean of (1 - (rank - 1) / |R|) * 100. InputError on an empty list.
double mpr(std::span<const RankResult> ranks);
EvalSummary summarize(std::vector<RankResult> ranks);

struct CaseError {
  std::string case_id;
  ErrorCategory category = ErrorCategory::kInternal;
  std::string message;
};

struct GroupMetrics {
  std::size_t n = 0;
  double mrr = 0.0;
  double mpr = 0.0;
};

struct EvalReport {
  Method method = Method::kTypedRag;
  std::string dataset;
  std::size_t total_cases = 0;
  EvalSummary overall;
  std::map<std::string, GroupMetrics> subsets;  // by source tag
  std::map<std::string, GroupMetrics> by_type;  // by NFQ type key
  std::vector<std::string> case_sources;        // parallel to overall.per_case
  std::vector<std::string> case_types;          // parallel to overall.per_case
  std::vector<std::string> candidates;          // parallel to overall.per_case
  std::vector<CaseError> errors;

  Json to_json() const;
  /// Markdown tables with 4-decimal metrics.
  std::string table() const;
  double error_fraction() const;
};

struct EvalOptions {
  Method method = Method::kTypedRag;
  // Typed-RAG uses the dataset's NFQ label instead of classifying again.
  bool use_dataset_types = true;
  std::size_t max_parallel = 4;
  double max_error_fraction = 0.2;
  bool enforce_error_budget = true;
};

/// Throws (category of the first case error) when more than
/// max_error_fraction of the cases failed.
void enforce_error_budget(const EvalReport& report, double max_error_fraction);

/// Answers every record with the chosen method, ranks the answer against
/// the record's references and aggregates MRR/MPR overall, per source and
/// per NFQ type. Per-case failures are recorded and excluded.
EvalReport run_eval(const std::vector<DatasetRecord>& records,
                    const std::string& dataset_name, const Pipeline& pipeline,
                    const LlmClient& scorer, const PromptSet& prompts,
                    const EvalOptions& options = {});

/// Loads the dataset file first; InputError when it has no records.
EvalReport run_eval(const std::string& dataset_path, const Pipeline& pipeline,
                    const LlmClient& scorer, const PromptSet& prompts,
                    const EvalOptions& options = {});

}  // namespace nfqa

#endif  // NFQA_EVALUATION_HPP_
