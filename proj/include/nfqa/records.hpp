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

#ifndef NFQA_RECORDS_HPP_
#define NFQA_RECORDS_HPP_

#include <string>
#include <vector>

#include "nfqa/core.hpp"

namespace nfqa {

inline constexpr int kMinQuality = 0;
inline constexpr int kMaxQuality = 3;

struct ReferenceAnswer {
  std::string text;
  int quality = 0;

  bool operator==(const ReferenceAnswer&) const = default;
};

/// Reference answers for one question, best first.
struct ReferenceList {
  std::string question_id;
  std::vector<ReferenceAnswer> answers;

  /// InputError unless there are at least 2 answers, every quality is in
  /// [0, 3] and qualities never increase along the list.
  void validate() const;
  std::vector<std::string> texts() const;
  std::size_t size() const { return answers.size(); }

  /// Stable sort by descending quality, then validate.
  static ReferenceList sorted(std::string question_id, std::vector<ReferenceAnswer> answers);

  bool operator==(const ReferenceList&) const = default;
};

/// Gold answer as given by the source: one string or several.
struct GoldAnswer {
  std::vector<std::string> values;

  /// Multi-answer golds are joined with "; " for prompt slots.
  std::string joined() const;
  bool operator==(const GoldAnswer&) const = default;
};

/// One line of a dataset JSONL file.
struct DatasetRecord {
  std::string id;
  std::string question;
  NfqType nfq_type = NfqType::kEvidenceBased;
  GoldAnswer gold_answer;
  ReferenceList references;
  std::string source;
  bool partial = false;  // fewer than three reference writers were used

  Question as_question() const;
  bool operator==(const DatasetRecord&) const = default;
};

void to_json(Json& j, const ReferenceAnswer& a);
void from_json(const Json& j, ReferenceAnswer& a);
void to_json(Json& j, const GoldAnswer& g);
void from_json(const Json& j, GoldAnswer& g);
void to_json(Json& j, const DatasetRecord& r);
/// InputError on schema violations (including an invalid reference list).
void from_json(const Json& j, DatasetRecord& r);

/// Reads a dataset JSONL file; InputError names the offending line.
std::vector<DatasetRecord> load_dataset(const std::string& path);
/// Writes one record per line, in order. ConfigError when not writable.
void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records);

}  // namespace nfqa

#endif  // NFQA_RECORDS_HPP_
