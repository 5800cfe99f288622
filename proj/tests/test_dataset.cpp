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

#include "nfqa/dataset.hpp"
#include "test_support.hpp"

using namespace nfqa;
using namespace nfqa::testing;

namespace {

SourceRecord src(std::string id, std::string question, std::string source = "NQ") {
  return SourceRecord{std::move(id), std::move(question), GoldAnswer{{"Gold for " + question}},
                      std::move(source)};
}

class FixedClassifier : public Classifier {
 public:
  explicit FixedClassifier(NfqType type) : type_(type) {}
  NfqType classify(const Question&) const override { return type_; }
  bool is_factoid(const Question&) const override { return false; }

 private:
  NfqType type_;
};

DatasetRecord stats_record(const std::string& id, NfqType type, const std::string& source) {
  DatasetRecord r;
  r.id = id;
  r.question = "q " + id;
  r.nfq_type = type;
  r.gold_answer = GoldAnswer{{"g"}};
  r.references = ReferenceList{id, {{"a", 3}, {"b", 1}}};
  r.source = source;
  return r;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("source format names and tags") {
  CHECK(parse_source_format("nq") == SourceFormat::kNq);
  CHECK(parse_source_format("SQD") == SourceFormat::kSquad);
  CHECK(parse_source_format("TriviaQA") == SourceFormat::kTriviaQa);
  CHECK(parse_source_format("2wmh") == SourceFormat::kTwoWiki);
  CHECK(parse_source_format("hqa") == SourceFormat::kHotpotQa);
  CHECK(parse_source_format("musique") == SourceFormat::kMusique);
  CHECK(parse_source_format("jsonl") == SourceFormat::kCustom);
  CHECK_THROWS_AS(parse_source_format("arxiv"), InputError);
  CHECK(source_tag(SourceFormat::kTwoWiki) == "2WMH");
  CHECK(stats_column("2WMH") == "2WMHQA-NF");
  CHECK(stats_column("SQD") == "SQD-NF");
}

TEST_CASE("source adapters normalize every layout") {
  TempDir dir;
  write_file(dir.file("nq.jsonl"),
             "{\"id\": \"n1\", \"question\": \"Why is the sky blue?\", \"answer\": \"Scattering\"}\n"
             "{\"question\": \"How do tides work?\", \"answer\": [\"Moon\", \"Sun\"]}\n"
             "{\"id\": \"n3\", \"question\": \"  \", \"answer\": \"x\"}\n");
  const auto nq = load_source(SourceFormat::kNq, dir.file("nq.jsonl"));
  REQUIRE(nq.size() == 2);
  CHECK(nq[0].id == "n1");
  CHECK(nq[0].source == "NQ");
  CHECK(nq[1].gold_answer.values == std::vector<std::string>{"Moon", "Sun"});
  CHECK_FALSE(nq[1].id.empty());

  write_file(dir.file("squad.json"), R"({"data": [{"paragraphs": [{"qas": [
      {"id": "s1", "question": "Why do leaves fall?", "answers": [{"text": "Abscission"}]},
      {"id": "s2", "question": "How do bees fly?", "answers": []}]}]}]})");
  const auto squad = load_source(SourceFormat::kSquad, dir.file("squad.json"));
  REQUIRE(squad.size() == 1);
  CHECK(squad[0] == SourceRecord{"s1", "Why do leaves fall?", GoldAnswer{{"Abscission"}}, "SQD"});

  write_file(dir.file("tqa.json"), R"({"Data": [
      {"QuestionId": "t1", "Question": "Why do cats purr?", "Answer": {"Value": "Contentment"}}]})");
  const auto tqa = load_source(SourceFormat::kTriviaQa, dir.file("tqa.json"));
  REQUIRE(tqa.size() == 1);
  CHECK(tqa[0].source == "TQA");
  CHECK(tqa[0].gold_answer.joined() == "Contentment");

  write_file(dir.file("multi.json"),
             R"([{"_id": "w1", "question": "Why did Rome fall?", "answer": "Many reasons"}])");
  const auto wiki = load_source(SourceFormat::kTwoWiki, dir.file("multi.json"));
  const auto hotpot = load_source(SourceFormat::kHotpotQa, dir.file("multi.json"));
  REQUIRE(wiki.size() == 1);
  CHECK(wiki[0].source == "2WMH");
  CHECK(hotpot[0].source == "HQA");
  CHECK(hotpot[0].id == "w1");

  write_file(dir.file("msq.jsonl"),
             "{\"id\": \"m1\", \"question\": \"Why is ice slippery?\", \"answer\": \"Melt layer\"}\n");
  CHECK(load_source(SourceFormat::kMusique, dir.file("msq.jsonl"))[0].source == "MSQ");

  write_file(dir.file("custom.jsonl"),
             "{\"id\": \"c1\", \"question\": \"Why read?\", \"gold_answer\": [\"a\", \"b\"], "
             "\"source\": \"BLOG\"}\n");
  const auto custom = load_source(SourceFormat::kCustom, dir.file("custom.jsonl"));
  REQUIRE(custom.size() == 1);
  CHECK(custom[0].source == "BLOG");
  CHECK(custom[0].gold_answer.joined() == "a; b");

  CHECK_THROWS_AS(load_source(SourceFormat::kNq, dir.file("missing.jsonl")), InputError);
}

TEST_CASE("filtering drops factoid questions and rule disagreements") {
  HeuristicClassifier classifier;
  const auto out = filter_nfq(
      {src("a", "When was Google founded?"),
       src("b", "How does sterilisation help to keep the money flow even?"),
       src("c", "Why did the Treaty of Versailles lead to instability?"),
       src("c", "Why did the Treaty of Versailles lead to instability?")},
      classifier);
  REQUIRE(out.size() == 2);
  CHECK(out[0].record.id == "b");
  CHECK(out[0].nfq_type == NfqType::kEvidenceBased);
  CHECK(out[1].nfq_type == NfqType::kReason);

  FixedClassifier always_reason(NfqType::kReason);
  const auto disagree = filter_nfq({src("d", "Should zoos be banned?"),
                                    src("e", "Why do zoos exist?"),
                                    src("f", "How are zoos funded?")},
                                   always_reason);
  REQUIRE(disagree.size() == 2);
  CHECK(disagree[0].record.id == "e");
  CHECK(disagree[1].record.id == "f");
}

TEST_CASE("labeled answer parsing") {
  const auto three =
      parse_labeled_answers("Answer 1: good one\nstill good\nAnswer 2: middling\nAnswer 3: bad");
  REQUIRE(three.size() == 3);
  CHECK(three[0] == "good one\nstill good");
  CHECK(three[1] == "middling");
  CHECK(three[2] == "bad");
  CHECK_THROWS_AS(parse_labeled_answers("Answer 1: a\nAnswer 3: c"), ParseError);
  CHECK_THROWS_AS(parse_labeled_answers("no labels at all"), ParseError);
}

TEST_CASE("quality label parsing") {
  CHECK(parse_quality_labels("Answer 1: [[3]]\nAnswer 2: [[1]]", 2) == std::vector<int>{3, 1});
  CHECK(parse_quality_labels("reasoning...\nAnswer 2: [[0]]\nAnswer 1: [[2]]", 2) ==
        std::vector<int>{2, 0});
  CHECK_THROWS_AS(parse_quality_labels("Answer 1: [[5]]\nAnswer 2: [[1]]", 2), ParseError);
  CHECK_THROWS_AS(parse_quality_labels("Answer 1: [[3]]", 2), ParseError);
  CHECK_THROWS_AS(parse_quality_labels("Answer 1: [[3]]\nAnswer 3: [[1]]", 2), ParseError);
  CHECK_THROWS_AS(parse_quality_labels("Answer 1: [[3]]\nAnswer 1: [[1]]", 2), ParseError);
}

TEST_CASE("annotation runs at low temperature and retries once") {
  auto annotator = mock_with_script(
      {MockRule::any({MockReply::with_text("unsure"), MockReply::with_text(
                                                          "Answer 1: [[1]]\nAnswer 2: [[2]]")})});
  const auto labels = annotate_quality("Why?", {"a", "b"}, annotator.client,
                                       PromptSet::defaults());
  CHECK(labels == std::vector<int>{1, 2});
  const auto log = annotator.mock->call_log();
  REQUIRE(log.size() == 2);
  CHECK(log[0].temperature == doctest::Approx(0.1));
  REQUIRE(log[0].system_prompt.has_value());
  CHECK(log[0].user_prompt.find("Answer 1: a\nAnswer 2: b") != std::string::npos);
}

TEST_CASE("assembly sorts by descending quality, stable on ties") {
  const FilteredRecord f{src("r", "Why?"), NfqType::kReason};
  const auto r = assemble_record(f, {"first", "second", "third"}, {1, 3, 2});
  CHECK(r.references.texts() == std::vector<std::string>{"second", "third", "first"});
  const auto ties = assemble_record(f, {"a", "b", "c", "d"}, {2, 3, 2, 3});
  CHECK(ties.references.texts() == std::vector<std::string>{"b", "d", "a", "c"});
  CHECK(ties.nfq_type == NfqType::kReason);
  CHECK_THROWS_AS(assemble_record(f, {"a", "b"}, {1}), InputError);
}

TEST_CASE("reference candidates under both schemes") {
  auto mocks = make_dataset_mocks(3);
  const auto rec = src("r", "Why did Rome fall?");
  const auto c = generate_reference_candidates(rec, mocks.writer_ptrs(), mocks.strong.client,
                                               PromptSet::defaults());
  REQUIRE(c.size() == kReferencesPerRecord);
  CHECK(c[0].text == "Superior answer.");
  CHECK(c[0].origin == "superior");
  CHECK(c[1].text == "Rewrite by writer 1.");
  CHECK(c[2].text == "Fair answer by writer 1.");
  CHECK(c[3].text == "Weak answer by writer 1.");
  CHECK(c[9].writer == 3);

  const auto d = generate_reference_candidates(rec, mocks.writer_ptrs(), mocks.strong.client,
                                               PromptSet::defaults(),
                                               ReferenceScheme::kDiverseThree);
  REQUIRE(d.size() == kReferencesPerRecord);
  CHECK(d[3].text == "Poor answer by writer 1.");
  CHECK(d[3].origin == "diverse-3");
  CHECK_THROWS_AS(generate_reference_candidates(rec, {}, mocks.strong.client,
                                                PromptSet::defaults()),
                  InputError);
}

TEST_CASE("build_dataset end to end with mocks") {
  auto mocks = make_dataset_mocks(3);
  HeuristicClassifier classifier;
  const auto result = build_dataset(
      {src("a", "When was Google founded?"), src("b", "Why did Rome fall?", "SQD"),
       src("c", "Should zoos be banned?", "HQA")},
      classifier, mocks.writer_ptrs(), mocks.strong.client, mocks.annotator.client,
      PromptSet::defaults());
  CHECK(result.candidates_in == 2);
  CHECK(result.errors.empty());
  REQUIRE(result.records.size() == 2);
  const auto& r = result.records[0];
  CHECK(r.id == "b");
  CHECK(r.nfq_type == NfqType::kReason);
  CHECK(r.source == "SQD");
  CHECK_FALSE(r.partial);
  REQUIRE(r.references.size() == kReferencesPerRecord);
  CHECK(r.references.texts() ==
        std::vector<std::string>{"Superior answer.", "Rewrite by writer 1.", "Rewrite by writer 2.",
                                 "Rewrite by writer 3.", "Fair answer by writer 1.",
                                 "Fair answer by writer 2.", "Fair answer by writer 3.",
                                 "Weak answer by writer 1.", "Weak answer by writer 2.",
                                 "Weak answer by writer 3."});
  CHECK(result.records[1].nfq_type == NfqType::kDebate);
}

TEST_CASE("fewer writers mark records partial; no writers is a config error") {
  auto mocks = make_dataset_mocks(1);
  HeuristicClassifier classifier;
  const auto result = build_dataset({src("b", "Why did Rome fall?")}, classifier,
                                    mocks.writer_ptrs(), mocks.strong.client,
                                    mocks.annotator.client, PromptSet::defaults());
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].partial);
  CHECK(result.records[0].references.size() == 4);
  CHECK_THROWS_AS(build_dataset({src("b", "Why?")}, classifier, {}, mocks.strong.client,
                                mocks.annotator.client, PromptSet::defaults()),
                  ConfigError);
}

TEST_CASE("build failures beyond the budget raise with the failure category") {
  auto mocks = make_dataset_mocks(3);
  auto bad_annotator = mock_with_script({MockRule::any({MockReply::with_text("nothing")})});
  HeuristicClassifier classifier;
  try {
    build_dataset({src("b", "Why did Rome fall?")}, classifier, mocks.writer_ptrs(),
                  mocks.strong.client, bad_annotator.client, PromptSet::defaults());
    FAIL("expected the error budget to be exceeded");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::kParse);
    CHECK(std::string(e.what()).find("1 of 1 records failed") != std::string::npos);
  }
}

TEST_CASE("stats table") {
  const auto one = compute_stats({stats_record("x", NfqType::kReason, "NQ")});
  CHECK(one.grand_total() == 1);
  CHECK(one.percentage(NfqType::kReason) == doctest::Approx(100.0));
  const std::string md = one.to_markdown();
  CHECK(md.rfind("| NFQ Type | NQ-NF | SQD-NF | TQA-NF | 2WMHQA-NF | HQA-NF | MSQ-NF | Total |\n",
                 0) == 0);
  CHECK(md.find("| Reason | 1 | 0 | 0 | 0 | 0 | 0 | 1 (100.00%) |") != std::string::npos);
  CHECK(md.find("| Debate | 0 | 0 | 0 | 0 | 0 | 0 | 0 (0.00%) |") != std::string::npos);
  CHECK(md.find("| Total | 1 | 0 | 0 | 0 | 0 | 0 | 1 |") != std::string::npos);

  const auto extra = compute_stats({stats_record("x", NfqType::kReason, "BLOG"),
                                    stats_record("y", NfqType::kDebate, "ABC"),
                                    stats_record("z", NfqType::kDebate, "TQA")});
  REQUIRE(extra.sources.size() == 8);
  CHECK(extra.sources[6] == "ABC");
  CHECK(extra.sources[7] == "BLOG");
  CHECK(extra.to_json().at("total") == 3);
  CHECK(compute_stats(std::vector<DatasetRecord>{}).percentage(NfqType::kReason) == 0.0);
}

TEST_CASE("dataset files round-trip") {
  TempDir dir;
  std::vector<DatasetRecord> records{stats_record("x", NfqType::kReason, "NQ"),
                                     stats_record("y", NfqType::kDebate, "SQD")};
  records[1].gold_answer = GoldAnswer{{"one", "two"}};
  records[1].partial = true;
  save_dataset(dir.file("d.jsonl"), records);
  CHECK(load_dataset(dir.file("d.jsonl")) == records);
  CHECK(compute_stats(dir.file("d.jsonl")).grand_total() == 2);
  write_file(dir.file("bad.jsonl"), "{\"id\": \"x\"}\n");
  CHECK_THROWS_AS(load_dataset(dir.file("bad.jsonl")), InputError);
}

}  // TEST_SUITE
