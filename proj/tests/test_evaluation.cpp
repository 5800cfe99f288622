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

#include <random>

#include "nfqa/evaluation.hpp"
#include "test_support.hpp"

using namespace nfqa;
using namespace nfqa::testing;

namespace {

std::vector<RankResult> ranks_of(std::initializer_list<int> ranks, int size) {
  std::vector<RankResult> out;
  for (int r : ranks) out.push_back(RankResult{"c", r, size, ""});
  return out;
}

ReferenceList refs(std::size_t n) {
  ReferenceList list{"q", {}};
  for (std::size_t i = 0; i < n; ++i) {
    list.answers.push_back({"ref " + std::to_string(i + 1), static_cast<int>(n > 3 ? 3 - i * 3 / n : 3 - i)});
  }
  return list;
}

LlmClient scorer_from_fixture() {
  return mock_with_script(
             mock_script_from_json(Json::parse(read_file(fixture("eval_scorer.json")))))
      .client;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("rank parsing") {
  CHECK(parse_rank("[[2]]", 10) == 2);
  CHECK(parse_rank("The answer ranks [[ 3 ]] overall", 10) == 3);
  CHECK(parse_rank("[[2]] or maybe [[5]]", 10) == 2);
  CHECK(parse_rank("[[15]]", 10) == 10);
  CHECK(parse_rank("[[0]]", 10) == 1);
  CHECK(parse_rank("[[99999999999999999999]]", 4) == 4);
  CHECK(parse_rank("I would put it at 3", 10) == 3);
  CHECK(parse_rank("Out of 12 answers, 4", 10) == 4);
  CHECK(parse_rank("2nd place, so 5", 10) == 5);
  CHECK_THROWS_AS(parse_rank("better than most", 10), ParseError);
  CHECK_THROWS_AS(parse_rank("42", 10), ParseError);
  CHECK_THROWS_AS(parse_rank("", 10), ParseError);
}

TEST_CASE("worked metric fixture") {
  const auto r = ranks_of({1, 2, 4}, 10);
  CHECK(mrr(r) == doctest::Approx(0.583333).epsilon(1e-6));
  CHECK(mpr(r) == doctest::Approx(86.6667).epsilon(1e-5));
}

TEST_CASE("metrics match a direct re-evaluation on random rank vectors") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> size_d(1, 12), n_d(1, 40);
    const int n = n_d(rng);
    std::vector<RankResult> rs;
    double rr = 0.0, pr = 0.0;
    for (int i = 0; i < n; ++i) {
      const int size = size_d(rng);
      const int rank = std::uniform_int_distribution<int>(1, size)(rng);
      rs.push_back(RankResult{"c", rank, size, ""});
      rr += 1.0 / rank;
      pr += (1.0 - (rank - 1.0) / size) * 100.0;
    }
    CHECK(std::abs(mrr(rs) - rr / n) <= 1e-12);
    CHECK(std::abs(mpr(rs) - pr / n) <= 1e-12);
  }
}

TEST_CASE("metric bounds and empty input") {
  CHECK(mrr(ranks_of({1, 1}, 5)) == 1.0);
  CHECK(mpr(ranks_of({1}, 5)) == 100.0);
  CHECK(mpr(ranks_of({5}, 5)) == doctest::Approx(20.0));
  CHECK_THROWS_AS(mrr({}), InputError);
  CHECK_THROWS_AS(mpr({}), InputError);
  const EvalSummary s = summarize(ranks_of({1, 2, 4}, 10));
  CHECK(s.n == 3);
  CHECK(s.mrr == mrr(s.per_case));
}

TEST_CASE("reference list invariants") {
  CHECK_NOTHROW(refs(10).validate());
  ReferenceList one{"q", {{"a", 3}}};
  CHECK_THROWS_AS(one.validate(), InputError);
  ReferenceList rising{"q", {{"a", 1}, {"b", 2}}};
  CHECK_THROWS_AS(rising.validate(), InputError);
  ReferenceList out_of_range{"q", {{"a", 4}, {"b", 2}}};
  CHECK_THROWS_AS(out_of_range.validate(), InputError);
  const auto sorted = ReferenceList::sorted("q", {{"x", 1}, {"y", 3}, {"z", 1}, {"w", 3}});
  CHECK(sorted.texts() == std::vector<std::string>{"y", "w", "x", "z"});
}

TEST_CASE("the LINKAGE prompt lists references best first") {
  EvalCase c{Question{"q", "Why?", std::nullopt, std::nullopt}, "Because.", refs(3)};
  const std::string prompt = build_linkage_prompt(c, PromptSet::defaults());
  CHECK(prompt.find("Reference answer list:\n1. ref 1\n2. ref 2\n3. ref 3\n") != std::string::npos);
  CHECK(prompt.find("Candidate answer:Because.") != std::string::npos);
  c.candidate = " ";
  CHECK_THROWS_AS(build_linkage_prompt(c, PromptSet::defaults()), InputError);
}

TEST_CASE("scoring retries once on an unparseable reply") {
  auto m = mock_with_script({MockRule::any({MockReply::with_text("hmm"),
                                            MockReply::with_text("[[3]]")})});
  EvalCase c{Question{"q", "Why?", std::nullopt, std::nullopt}, "Because.", refs(10)};
  const RankResult r = score_candidate(c, m.client, PromptSet::defaults());
  CHECK(r.rank == 3);
  CHECK(r.list_size == 10);
  CHECK(r.raw_output == "[[3]]");
  CHECK(m.mock->call_count() == 2);

  auto never = mock_with_script({MockRule::any({MockReply::with_text("hmm")})});
  CHECK_THROWS_AS(score_candidate(c, never.client, PromptSet::defaults()), ParseError);
}

TEST_CASE("run_eval over the three-case fixture") {
  auto mp = make_mock_pipeline();
  const LlmClient scorer = scorer_from_fixture();
  EvalOptions options;
  options.method = Method::kLlmOnly;
  const EvalReport report =
      run_eval(fixture("eval_cases.jsonl"), *mp.pipeline, scorer, PromptSet::defaults(), options);
  CHECK(report.overall.n == 3);
  CHECK(report.overall.mrr == doctest::Approx(0.583333).epsilon(1e-6));
  CHECK(report.overall.mpr == doctest::Approx(86.6667).epsilon(1e-5));
  std::vector<int> got;
  for (const auto& r : report.overall.per_case) got.push_back(r.rank);
  CHECK(got == std::vector<int>{1, 2, 4});
  REQUIRE(report.subsets.count("NQ") == 1);
  CHECK(report.subsets.at("NQ").n == 2);
  CHECK(report.subsets.at("NQ").mrr == doctest::Approx(0.75));
  CHECK(report.subsets.at("SQD").mpr == doctest::Approx(70.0));
  CHECK(report.by_type.at("debate").mrr == doctest::Approx(0.5));

  const std::string table = report.table();
  CHECK(table.find("| Overall | 3 | 0.5833 | 86.6667 |") != std::string::npos);
  CHECK(table.find("| NQ | 2 | 0.7500 | 95.0000 |") != std::string::npos);

  const Json j = report.to_json();
  CHECK(j.at("method") == "llm_only");
  CHECK(j.at("subsets").at("SQD").at("n") == 1);
  CHECK(j.at("per_case").size() == 3);
  CHECK(j.at("per_case")[2].at("id") == "e3");
}

TEST_CASE("typed evaluation uses the dataset's type labels") {
  auto mp = make_mock_pipeline();
  const LlmClient scorer = scorer_from_fixture();
  const EvalReport report = run_eval(fixture("eval_cases.jsonl"), *mp.pipeline, scorer,
                                     PromptSet::defaults());
  CHECK(report.method == Method::kTypedRag);
  CHECK(report.candidates.at(1) == "Deterrence is contested and wrongful convictions are a risk.");
}

TEST_CASE("failed cases are excluded, and too many failures fail the run") {
  auto mp = make_mock_pipeline();
  auto partial = mock_with_script(
      {MockRule::contains("Question:Why did the Treaty", "[[1]]"),
       MockRule::contains("Question:Should capital", "[[2]]"),
       MockRule::any({MockReply::with_text("no idea")})});
  EvalOptions options;
  options.method = Method::kLlmOnly;
  CHECK_THROWS_AS(run_eval(fixture("eval_cases.jsonl"), *mp.pipeline, partial.client,
                           PromptSet::defaults(), options),
                  Error);
  options.enforce_error_budget = false;
  const EvalReport report = run_eval(fixture("eval_cases.jsonl"), *mp.pipeline, partial.client,
                                     PromptSet::defaults(), options);
  CHECK(report.overall.n == 2);
  REQUIRE(report.errors.size() == 1);
  CHECK(report.errors[0].category == ErrorCategory::kParse);
  CHECK(report.error_fraction() == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(enforce_error_budget(report, 0.2), Error);
  CHECK_NOTHROW(enforce_error_budget(report, 0.5));
}

TEST_CASE("an empty dataset is an input error") {
  auto mp = make_mock_pipeline();
  const LlmClient scorer = scorer_from_fixture();
  CHECK_THROWS_AS(run_eval(fixture("empty.jsonl"), *mp.pipeline, scorer, PromptSet::defaults()),
                  InputError);
}

}  // TEST_SUITE
