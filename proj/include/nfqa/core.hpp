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

#ifndef NFQA_CORE_HPP_
#define NFQA_CORE_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace nfqa {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Error taxonomy
// ---------------------------------------------------------------------------

enum class ErrorCategory {
  kInput,      // bad user data
  kParse,      // unparseable LLM output
  kTransport,  // retriever / LLM endpoint failures
  kConfig,
  kInternal,
};

std::string_view to_string(ErrorCategory category);

/// Process exit code for an error category. Success is 0; the five
/// categories map to 2..6.
int exit_code(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

  /// Same category, message prefixed with "[context] ".
  Error with_context(std::string_view context) const;

 private:
  ErrorCategory category_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& m) : Error(ErrorCategory::kInput, m) {}
};
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& m) : Error(ErrorCategory::kParse, m) {}
};
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& m)
      : Error(ErrorCategory::kTransport, m) {}
};
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error(ErrorCategory::kConfig, m) {}
};
class InternalError : public Error {
 public:
  explicit InternalError(const std::string& m)
      : Error(ErrorCategory::kInternal, m) {}
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class NfqType {
  kEvidenceBased,
  kComparison,
  kExperience,
  kReason,
  kInstruction,
  kDebate,
};

inline constexpr std::array<NfqType, 6> kAllNfqTypes = {
    NfqType::kEvidenceBased, NfqType::kComparison,  NfqType::kExperience,
    NfqType::kReason,        NfqType::kInstruction, NfqType::kDebate,
};

/// Dataset-file form: "evidence-based", "comparison", ...
std::string_view to_string(NfqType type);
/// Inverse of to_string(NfqType). Throws InputError on anything else.
NfqType parse_nfq_type(std::string_view text);
/// Table-style label: "Evidence-based", "Comparison", ...
std::string_view display_name(NfqType type);

struct Question {
  std::string id;
  std::string text;
  std::optional<std::string> source;
  std::optional<NfqType> nfq_type;

  /// Throws InputError when text is blank.
  void validate() const;
  bool operator==(const Question&) const = default;
};

struct Passage {
  std::string id;
  std::string title;
  std::string text;
  std::optional<double> score;

  bool operator==(const Passage&) const = default;
};

enum class Method { kLlmOnly, kVanillaRag, kTypedRag };

std::string_view to_string(Method method);
/// Accepts "llm_only"/"vanilla_rag"/"typed_rag" and the CLI short forms
/// "llm"/"rag"/"typed".
Method parse_method(std::string_view text);

/// One pipeline step. Digests are FNV-1a/64 hex of the step's input and
/// output text so traces stay small but comparable.
struct TraceStep {
  std::string name;
  std::string input_digest;
  std::string output_digest;
  Json detail = Json::object();

  bool operator==(const TraceStep&) const = default;
};

struct Answer {
  std::string question_id;
  std::string text;
  Method method = Method::kTypedRag;
  std::vector<TraceStep> trace;

  std::vector<std::string> step_names() const;
  bool operator==(const Answer&) const = default;
};

struct QaPair {
  std::string question;
  std::string answer;

  bool operator==(const QaPair&) const = default;
};

void to_json(Json& j, NfqType t);
void from_json(const Json& j, NfqType& t);
void to_json(Json& j, Method m);
void from_json(const Json& j, Method& m);
void to_json(Json& j, const Question& q);
void from_json(const Json& j, Question& q);
void to_json(Json& j, const Passage& p);
void from_json(const Json& j, Passage& p);
void to_json(Json& j, const TraceStep& s);
void from_json(const Json& j, TraceStep& s);
void to_json(Json& j, const Answer& a);
void from_json(const Json& j, Answer& a);
void to_json(Json& j, const QaPair& p);
void from_json(const Json& j, QaPair& p);

// ---------------------------------------------------------------------------
// Small shared helpers
// ---------------------------------------------------------------------------

std::string trim(std::string_view text);
std::string to_lower(std::string_view text);
bool is_blank(std::string_view text);

/// 16 hex chars of FNV-1a/64.
std::string digest(std::string_view text);

/// Runs fn(0..count-1) on at most max_workers threads and returns when all
/// calls finished. Exceptions escaping fn are rethrown (first by index).
void parallel_for(std::size_t count, std::size_t max_workers,
                  const std::function<void(std::size_t)>& fn);

/// Reads a whole file; InputError if it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace nfqa

#endif  // NFQA_CORE_HPP_
