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

#include "nfqa/core.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace nfqa {

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kInput:
      return "InputError";
    case ErrorCategory::kParse:
      return "ParseError";
    case ErrorCategory::kTransport:
      return "TransportError";
    case ErrorCategory::kConfig:
      return "ConfigError";
    case ErrorCategory::kInternal:
      return "InternalError";
  }
  return "InternalError";
}

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kInput:
      return 2;
    case ErrorCategory::kParse:
      return 3;
    case ErrorCategory::kTransport:
      return 4;
    case ErrorCategory::kConfig:
      return 5;
    case ErrorCategory::kInternal:
      return 6;
  }
  return 6;
}

Error Error::with_context(std::string_view context) const {
  std::string message = "[";
  message += context;
  message += "] ";
  message += what();
  return Error(category_, message);
}

namespace {

struct TypeNames {
  NfqType type;
  std::string_view key;
  std::string_view display;
};

constexpr std::array<TypeNames, 6> kTypeNames = {{
    {NfqType::kEvidenceBased, "evidence-based", "Evidence-based"},
    {NfqType::kComparison, "comparison", "Comparison"},
    {NfqType::kExperience, "experience", "Experience"},
    {NfqType::kReason, "reason", "Reason"},
    {NfqType::kInstruction, "instruction", "Instruction"},
    {NfqType::kDebate, "debate", "Debate"},
}};

const TypeNames& names_of(NfqType type) {
  for (const auto& entry : kTypeNames) {
    if (entry.type == type) return entry;
  }
  throw InternalError("unknown NfqType value");
}

}  // namespace

std::string_view to_string(NfqType type) { return names_of(type).key; }

std::string_view display_name(NfqType type) { return names_of(type).display; }

NfqType parse_nfq_type(std::string_view text) {
  for (const auto& entry : kTypeNames) {
    if (entry.key == text) return entry.type;
  }
  throw InputError("unknown NFQ type '" + std::string(text) + "'");
}

void Question::validate() const {
  if (is_blank(text)) throw InputError("question text is empty");
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kLlmOnly:
      return "llm_only";
    case Method::kVanillaRag:
      return "vanilla_rag";
    case Method::kTypedRag:
      return "typed_rag";
  }
  return "typed_rag";
}

Method parse_method(std::string_view text) {
  if (text == "llm_only" || text == "llm") return Method::kLlmOnly;
  if (text == "vanilla_rag" || text == "rag") return Method::kVanillaRag;
  if (text == "typed_rag" || text == "typed") return Method::kTypedRag;
  throw InputError("unknown method '" + std::string(text) + "'");
}

std::vector<std::string> Answer::step_names() const {
  std::vector<std::string> names;
  names.reserve(trace.size());
  for (const auto& step : trace) names.push_back(step.name);
  return names;
}

// --- JSON ------------------------------------------------------------------

void to_json(Json& j, NfqType t) { j = std::string(to_string(t)); }

void from_json(const Json& j, NfqType& t) {
  if (!j.is_string()) throw InputError("nfq_type must be a string");
  t = parse_nfq_type(j.get<std::string>());
}

void to_json(Json& j, Method m) { j = std::string(to_string(m)); }

void from_json(const Json& j, Method& m) {
  if (!j.is_string()) throw InputError("method must be a string");
  m = parse_method(j.get<std::string>());
}

namespace {

std::string required_string(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw InputError(std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

void to_json(Json& j, const Question& q) {
  j = Json{{"id", q.id}, {"text", q.text}};
  if (q.source) j["source"] = *q.source;
  if (q.nfq_type) j["nfq_type"] = *q.nfq_type;
}

void from_json(const Json& j, Question& q) {
  q.id = required_string(j, "id");
  q.text = required_string(j, "text");
  q.source.reset();
  q.nfq_type.reset();
  if (auto it = j.find("source"); it != j.end() && !it->is_null()) {
    q.source = it->get<std::string>();
  }
  if (auto it = j.find("nfq_type"); it != j.end() && !it->is_null()) {
    q.nfq_type = it->get<NfqType>();
  }
}

void to_json(Json& j, const Passage& p) {
  j = Json{{"id", p.id}, {"title", p.title}, {"text", p.text}};
  if (p.score) j["score"] = *p.score;
}

void from_json(const Json& j, Passage& p) {
  p.id = required_string(j, "id");
  p.title = j.contains("title") ? j.at("title").get<std::string>() : "";
  p.text = required_string(j, "text");
  p.score.reset();
  if (auto it = j.find("score"); it != j.end() && !it->is_null()) {
    p.score = it->get<double>();
  }
}

void to_json(Json& j, const TraceStep& s) {
  j = Json{{"name", s.name},
           {"input_digest", s.input_digest},
           {"output_digest", s.output_digest},
           {"detail", s.detail}};
}

void from_json(const Json& j, TraceStep& s) {
  s.name = required_string(j, "name");
  s.input_digest = j.value("input_digest", "");
  s.output_digest = j.value("output_digest", "");
  s.detail = j.value("detail", Json::object());
}

void to_json(Json& j, const Answer& a) {
  j = Json{{"question_id", a.question_id},
           {"text", a.text},
           {"method", a.method},
           {"trace", a.trace}};
}

void from_json(const Json& j, Answer& a) {
  a.question_id = required_string(j, "question_id");
  a.text = required_string(j, "text");
  a.method = j.at("method").get<Method>();
  a.trace = j.value("trace", std::vector<TraceStep>{});
}

void to_json(Json& j, const QaPair& p) {
  j = Json{{"question", p.question}, {"answer", p.answer}};
}

void from_json(const Json& j, QaPair& p) {
  p.question = required_string(j, "question");
  p.answer = required_string(j, "answer");
}

// --- helpers ---------------------------------------------------------------

std::string trim(std::string_view text) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_space(text[begin])) ++begin;
  while (end > begin && is_space(text[end - 1])) --end;
  return std::string(text.substr(begin, end - begin));
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string digest(std::string_view text) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[hash & 0xF];
    hash >>= 4;
  }
  return out;
}

void parallel_for(std::size_t count, std::size_t max_workers,
                  const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  std::vector<std::exception_ptr> errors(count);
  const std::size_t workers = std::clamp<std::size_t>(max_workers, 1, count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace nfqa
