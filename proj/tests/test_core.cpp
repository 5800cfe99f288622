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

#include <doctest.h>

#include <atomic>
#include <set>
#include <thread>

#include "nfqa/core.hpp"

using namespace nfqa;

TEST_SUITE("core") {

TEST_CASE("exit codes are distinct for every category and success") {
  std::set<int> codes{0};
  for (auto c : {ErrorCategory::kInput, ErrorCategory::kParse, ErrorCategory::kTransport,
                 ErrorCategory::kConfig, ErrorCategory::kInternal}) {
    const int code = exit_code(c);
    CHECK(code != 0);
    CHECK(codes.insert(code).second);
  }
  CHECK(codes.size() == 6);
  CHECK(exit_code(ErrorCategory::kInput) == 2);
  CHECK(exit_code(ErrorCategory::kInternal) == 6);
}

TEST_CASE("with_context keeps the category and prefixes the step") {
  const Error e = ParseError("bad json").with_context("decompose");
  CHECK(e.category() == ErrorCategory::kParse);
  CHECK(std::string(e.what()) == "[decompose] bad json");
}

TEST_CASE("NFQ type strings round-trip and reject anything else") {
  for (NfqType t : kAllNfqTypes) {
    CHECK(parse_nfq_type(to_string(t)) == t);
  }
  CHECK(to_string(NfqType::kEvidenceBased) == "evidence-based");
  CHECK(display_name(NfqType::kEvidenceBased) == "Evidence-based");
  CHECK_THROWS_AS(parse_nfq_type("Evidence-Based"), InputError);
  CHECK_THROWS_AS(parse_nfq_type("factoid"), InputError);
  CHECK_THROWS_AS(parse_nfq_type(""), InputError);
}

TEST_CASE("method names and CLI aliases") {
  CHECK(parse_method("llm") == Method::kLlmOnly);
  CHECK(parse_method("rag") == Method::kVanillaRag);
  CHECK(parse_method("typed") == Method::kTypedRag);
  CHECK(parse_method(to_string(Method::kVanillaRag)) == Method::kVanillaRag);
  CHECK_THROWS_AS(parse_method("hybrid"), InputError);
}

TEST_CASE("question validation rejects blank text") {
  CHECK_THROWS_AS((Question{"q", "   ", std::nullopt, std::nullopt}.validate()), InputError);
  CHECK_NOTHROW((Question{"q", "Why?", std::nullopt, std::nullopt}.validate()));
}

TEST_CASE("answer JSON round-trip keeps the trace") {
  Answer a{"q1", "text", Method::kTypedRag,
           {{"classify", "aa", "bb", Json{{"nfq_type", "reason"}}}, {"generate", "c", "d", {}}}};
  const Json j = a;
  CHECK(j.get<Answer>() == a);
  CHECK(a.step_names() == std::vector<std::string>{"classify", "generate"});
}

TEST_CASE("digest is FNV-1a 64 in hex") {
  CHECK(digest("") == "cbf29ce484222325");
  CHECK(digest("a") == "af63dc4c8601ec8c");
}

TEST_CASE("string helpers") {
  CHECK(trim("  a b \n") == "a b");
  CHECK(to_lower("AbC") == "abc");
  CHECK(is_blank(" \t\n"));
  CHECK_FALSE(is_blank(" x "));
}

TEST_CASE("parallel_for runs every index within the worker cap") {
  std::vector<int> seen(50, 0);
  std::atomic<int> running{0};
  std::atomic<int> peak{0};
  parallel_for(seen.size(), 3, [&](std::size_t i) {
    const int now = ++running;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
    seen[i] += 1;
    --running;
  });
  for (int v : seen) CHECK(v == 1);
  CHECK(peak.load() <= 3);
}

TEST_CASE("parallel_for rethrows the lowest-index failure") {
  try {
    parallel_for(10, 4, [](std::size_t i) {
      if (i == 7) throw InputError("seven");
      if (i == 3) throw ParseError("three");
    });
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::kParse);
  }
}

TEST_CASE("read_file reports missing files as input errors") {
  CHECK_THROWS_AS(read_file("/nonexistent/nfqa/file"), InputError);
}

}  // TEST_SUITE
