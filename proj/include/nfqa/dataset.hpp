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

#ifndef NFQA_DATASET_HPP_
#define NFQA_DATASET_HPP_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nfqa/classifier.hpp"
#include "nfqa/core.hpp"
#include "nfqa/llm_client.hpp"
#include "nfqa/prompts.hpp"
#include "nfqa/records.hpp"

namespace nfqa {

inline constexpr std::size_t kReferencesPerRecord = 10;

struct SourceRecord {
  std::string id;
  std::string question;
  GoldAnswer gold_answer;
  std::string source;  // NQ, SQD, TQA, 2WMH, HQA, MSQ or a custom tag

  /// InputError on a blank question or empty gold answer.
  void validate() const;
  bool operator==(const SourceRecord&) const = default;
};

enum class SourceFormat { kNq, kSquad, kTriviaQa, kTwoWiki, kHotpotQa, kMusique, kCustom };

/// "nq", "squad", "triviaqa", "2wiki", "hotpotqa", "musique", "custom"
/// plus the short tags (case-insensitive). InputError otherwise.
SourceFormat parse_source_format(std::string_view text);
std::string_view source_tag(SourceFormat format);

/// Reads one source file and normalizes it. Layouts:
///   nq        JSONL {"question", "answer": str | [str], "id"?}
///   squad     JSON  {"data": [{"paragraphs": [{"qas": [{"id", "question", "answers": [{"text"}]}]}]}]}
///   triviaqa  JSON  {"Data": [{"QuestionId", "Question", "Answer": {"Value"}}]}
///   2wiki     JSON  [{"_id", "question", "answer"}]
///   hotpotqa  JSON  [{"_id", "question", "answer"}]
///   musique   JSONL {"id", "question", "answer"}
///   custom    JSONL {"id", "question", "gold_answer", "source"?}
/// Records that fail validation are skipped with a warning.
std::vector<SourceRecord> load_source(SourceFormat format, const std::string& path);

struct FilteredRecord {
  SourceRecord record;
  NfqType nfq_type = NfqType::kEvidenceBased;
};

/// Drops factoid questions, classifies the rest and rejects records whose
/// heuristic rule match disagrees with the classifier label.
std::vector<FilteredRecord> filter_nfq(const std::vector<SourceRecord>& records,
                                       const Classifier& classifier,
                                       const RuleSet& post_filter = RuleSet::defaults());

enum class ReferenceScheme {
  kRewritePlusTwo,  // rewrite answer + Answers 1-2 of the diverse prompt
  kDiverseThree,    // Answers 1-3 of the diverse prompt
};

struct ReferenceCandidate {
  std::string text;
  std::string origin;  // "superior", "rewrite" or "diverse-<k>"
  std::size_t writer = 0;
};

/// Splits "Answer 1: ...\nAnswer 2: ...\nAnswer 3: ..." into three texts.
/// ParseError if a label is missing.
std::vector<std::string> parse_labeled_answers(std::string_view raw, std::size_t count = 3);

/// The strong client's superior answer first, then three per writer.
/// InputError without writers.
std::vector<ReferenceCandidate> generate_reference_candidates(
    const SourceRecord& record, const std::vector<const LlmClient*>& writers,
    const LlmClient& strong, const PromptSet& prompts,
    ReferenceScheme scheme = ReferenceScheme::kRewritePlusTwo);

/// Parses "Answer X: [[Y]]" lines; X must cover 1..count exactly and Y be
/// in [0, 3]. ParseError otherwise.
std::vector<int> parse_quality_labels(std::string_view raw, std::size_t count);

/// One annotator call at temperature 0.1 (one retry on ParseError).
std::vector<int> annotate_quality(const std::string& question,
                                  const std::vector<std::string>& candidates,
                                  const LlmClient& annotator, const PromptSet& prompts);

/// Stable sort by descending label. InputError on a length mismatch.
DatasetRecord assemble_record(const FilteredRecord& record,
                              const std::vector<std::string>& candidates,
                              const std::vector<int>& labels);

struct BuildOptions {
  ReferenceScheme scheme = ReferenceScheme::kRewritePlusTwo;
  std::size_t max_parallel = 4;
  double max_error_fraction = 0.2;
  std::optional<RuleSet> post_filter;  // defaults to RuleSet::defaults()
};

struct BuildResult {
  std::vector<DatasetRecord> records;  // input order
  std::size_t candidates_in = 0;       // after filtering
  std::vector<std::pair<std::string, std::string>> errors;  // (id, message)
};

/// filter -> generate -> annotate -> assemble for every record. Records
/// are marked partial when fewer than three writers are given. Throws when
/// more than max_error_fraction of the filtered records failed.
BuildResult build_dataset(const std::vector<SourceRecord>& sources, const Classifier& classifier,
                          const std::vector<const LlmClient*>& writers, const LlmClient& strong,
                          const LlmClient& annotator, const PromptSet& prompts,
                          const BuildOptions& options = {});

struct DatasetStats {
  std::vector<std::string> sources;  // column order
  std::map<NfqType, std::map<std::string, std::size_t>> counts;

  std::size_t cell(NfqType type, const std::string& source) const;
  std::size_t type_total(NfqType type) const;
  std::size_t source_total(const std::string& source) const;
  std::size_t grand_total() const;
  /// Share of the grand total in percent (0 for an empty table).
  double percentage(NfqType type) const;
  /// One row per type, Total column as "555 (58.73%)", then a Total row.
  std::string to_markdown() const;
  Json to_json() const;
};

/// Column label for a source tag: NQ -> NQ-NF, 2WMH -> 2WMHQA-NF, ...
std::string stats_column(const std::string& source);

DatasetStats compute_stats(const std::vector<DatasetRecord>& records);
/// InputError on malformed records.
DatasetStats compute_stats(const std::string& dataset_path);

}  // namespace nfqa

#endif  // NFQA_DATASET_HPP_
