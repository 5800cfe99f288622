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

#include "test_support.hpp"

namespace nfqa::testing {

std::vector<MockRule> pipeline_script() {
  std::vector<MockRule> rules;
  rules.push_back(MockRule::contains("aggregating answers to a question",
                                     "Reparations and the Depression together bred instability."));
  rules.push_back(MockRule::contains("mediator in a debate",
                                     "Deterrence is contested and wrongful convictions are a risk."));
  rules.push_back(MockRule::contains("compare-type with a specific comparison type",
                                     "Fuel cells refuel fast; battery cars charge from the grid."));
  rules.push_back(MockRule::contains(
      "compare-type question (i.e.",
      R"({"is_compare": true, "compare_type": "differences", "keywords_list": ["hydrogen fuel cell", "battery electric vehicle"]})"));
  rules.push_back(MockRule::contains("experience-type question",
                                     R"(["sourdough bread", "kneading"])"));
  rules.push_back(MockRule::contains(
      "reason-type question",
      R"(["What reparations did the Treaty of Versailles impose?", "How did the Great Depression deepen extremism?"])"));
  rules.push_back(MockRule::contains(
      "instruction-type question",
      R"(["How long should bread dough be kneaded?", "How is sourdough bread fermented?"])"));
  rules.push_back(MockRule::contains(
      "debate-type question",
      R"({"debate_topic": "Capital punishment", "dist_opinion": ["supporter", "opponent"], "sub-queries": {"supporter": "Does capital punishment deter crime?", "opponent": "Does capital punishment risk wrongful convictions?"}})"));
  rules.push_back(MockRule::contains(
      "### Question\nWhat reparations did the Treaty of Versailles impose?",
      "Heavy reparations."));
  rules.push_back(MockRule::contains(
      "### Question\nHow did the Great Depression deepen extremism?", "Hardship fed extremism."));
  rules.push_back(MockRule::contains("### Question\nHow long should bread dough be kneaded?",
                                     "About ten minutes."));
  rules.push_back(MockRule::contains("### Question\nHow is sourdough bread fermented?",
                                     "With lactobacilli and yeast."));
  rules.push_back(MockRule::contains("### Question\nDoes capital punishment deter crime?",
                                     "Supporters cite deterrence."));
  rules.push_back(MockRule::contains(
      "### Question\nDoes capital punishment risk wrongful convictions?",
      "Opponents cite wrongful convictions."));
  rules.push_back(MockRule::contains("### References", "Answer from the references."));
  rules.push_back(MockRule::contains("Answer the following question.", "Answer from memory."));
  return rules;
}

MockPipeline make_mock_pipeline(PipelineConfig config) {
  auto mocked = mock_with_script(pipeline_script());
  PipelineDeps deps;
  deps.classifier = std::make_shared<HeuristicClassifier>();
  deps.index = fixture_index();
  deps.reranker = std::make_shared<LexicalReranker>();
  deps.generator = mocked.client;
  deps.config = config;
  return MockPipeline{mocked.mock, std::make_unique<Pipeline>(std::move(deps))};
}

}  // namespace nfqa::testing

namespace nfqa::testing {

std::vector<std::pair<std::string, std::string>> render_golden_prompts() {
  const PromptSet set = PromptSet::defaults();
  const std::string q = "How does sterilisation help to keep the money flow even?";
  const std::string cmp =
      "What are the differences between a hydrogen fuel cell and a battery electric vehicle?";
  const std::string reason = "Why did the Treaty of Versailles lead to instability?";
  const std::string gold = "It offsets interventions; keeps money supply stable";
  const std::vector<Passage> passages{
      {"p01", "Monetary sterilisation", "Sterilisation offsets intervention.", std::nullopt},
      {"p02", "Open market operations", "Central banks trade securities.", std::nullopt}};
  const std::vector<std::string> keywords{"hydrogen fuel cell", "battery electric vehicle"};
  const std::vector<QaPair> pairs{{"What did the treaty impose?", "Heavy reparations."},
                                  {"What followed?", "Economic hardship."}};
  const std::vector<PerspectiveResponse> responses{{"It deters crime.", "supporter"},
                                                   {"Courts make mistakes.", "opponent"}};
  const std::vector<std::string> refs{"Best answer.", "Middle answer.", "Weak answer."};
  const std::vector<std::string> candidates{"First.", "Second.", "Third."};

  return {
      {"llm", render_llm_prompt(set, q)},
      {"rag", render_rag_prompt(set, q, passages)},
      {"comparison_keywords", render_comparison_keywords_prompt(set, cmp)},
      {"comparison_answer",
       render_comparison_answer_prompt(set, cmp, "differences", keywords, passages)},
      {"experience_keywords",
       render_experience_keywords_prompt(set, "What are some tips for baking sourdough bread at home?")},
      {"reason_subqueries", render_subquery_prompt(set, NfqType::kReason, reason)},
      {"instruction_subqueries",
       render_subquery_prompt(set, NfqType::kInstruction, "How to knead bread dough?")},
      {"aggregator", render_aggregator_prompt(set, reason, pairs)},
      {"debate_subqueries", render_debate_prompt(set, "Is capital punishment justified?")},
      {"mediator", render_mediator_prompt(set, "Capital punishment", responses)},
      {"linkage", render_linkage_prompt(set, q, refs, "Candidate answer.")},
      {"reference_rewrite", render_reference_rewrite_prompt(set, q, gold)},
      {"reference_diverse", render_reference_diverse_prompt(set, q, gold)},
      {"annotation_system", annotation_system_prompt(set)},
      {"annotation_input", render_annotation_input_prompt(set, q, candidates)},
  };
}

}  // namespace nfqa::testing

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace nfqa::testing {

namespace {

std::vector<std::string> oracle_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80) {
      cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words{
      "bank",  "money", "flow",  "even",  "policy", "rate",   "bread", "dough",
      "yeast", "knead", "war",   "peace", "treaty", "fuel",   "cell",  "battery",
      "car",   "grid",  "water", "sky",   "blue",   "light",  "wine",  "port",
      "vote",  "law",   "court", "crime", "Zebra",  "ZEBRA2", "x1",    "café"};
  return words;
}

}  // namespace

std::vector<std::pair<std::string, double>> bm25_oracle(const std::vector<Passage>& passages,
                                                        const std::string& query, double k1,
                                                        double b) {
  const double n = static_cast<double>(passages.size());
  std::vector<std::vector<std::string>> docs;
  double total_len = 0.0;
  for (const auto& p : passages) {
    docs.push_back(oracle_tokens(p.text));
    total_len += static_cast<double>(docs.back().size());
  }
  const double avgdl = total_len / n;
  const auto q_tokens = oracle_tokens(query);
  const std::set<std::string> terms(q_tokens.begin(), q_tokens.end());

  std::vector<std::pair<std::string, double>> out;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    double score = 0.0;
    bool matched = false;
    for (const auto& t : terms) {
      const double tf = static_cast<double>(std::count(docs[d].begin(), docs[d].end(), t));
      if (tf == 0.0) continue;
      matched = true;
      double df = 0.0;
      for (const auto& other : docs) {
        if (std::find(other.begin(), other.end(), t) != other.end()) df += 1.0;
      }
      const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
      const double len = static_cast<double>(docs[d].size());
      score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len / avgdl));
    }
    if (matched) out.emplace_back(passages[d].id, score);
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  return out;
}

std::string compare_ranking(const std::vector<Passage>& got,
                            const std::vector<std::pair<std::string, double>>& expected,
                            double tol) {
  std::ostringstream why;
  if (got.size() != expected.size()) {
    why << "size " << got.size() << " vs " << expected.size();
    return why.str();
  }
  std::map<std::string, double> truth(expected.begin(), expected.end());
  for (std::size_t i = 0; i < got.size(); ++i) {
    const auto it = truth.find(got[i].id);
    if (it == truth.end()) return "unexpected id " + got[i].id;
    if (!got[i].score) return "missing score for " + got[i].id;
    const double s = *got[i].score;
    if (std::abs(s - it->second) > tol || std::abs(s - expected[i].second) > tol) {
      why << "score mismatch at " << i << ": " << s << " vs " << expected[i].second;
      return why.str();
    }
    if (got[i].id != expected[i].first && std::abs(it->second - expected[i].second) > tol) {
      why << "order mismatch at " << i << ": " << got[i].id << " vs " << expected[i].first;
      return why.str();
    }
    if (i > 0) {
      const double prev = *got[i - 1].score;
      if (s > prev) return "scores increase at " + std::to_string(i);
      if (s == prev && got[i - 1].id > got[i].id) return "tie not ordered by id";
    }
  }
  return {};
}

std::vector<Passage> random_corpus(std::mt19937& rng, std::size_t max_passages) {
  const auto& vocab = vocabulary();
  std::uniform_int_distribution<std::size_t> count(1, max_passages);
  std::uniform_int_distribution<std::size_t> length(1, 20);
  std::uniform_int_distribution<std::size_t> word(0, vocab.size() - 1);
  std::uniform_int_distribution<int> sep(0, 3);
  static const char* separators[] = {" ", ", ", ". ", " - "};
  std::vector<Passage> out;
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    const std::size_t len = length(rng);
    for (std::size_t w = 0; w < len; ++w) {
      if (w > 0) text += separators[sep(rng)];
      text += vocab[word(rng)];
    }
    out.push_back(Passage{"d" + std::to_string(i), "", text, std::nullopt});
  }
  return out;
}

std::string random_query(std::mt19937& rng, std::size_t max_tokens) {
  const auto& vocab = vocabulary();
  std::uniform_int_distribution<std::size_t> count(1, max_tokens);
  std::uniform_int_distribution<std::size_t> word(0, vocab.size() + 2);
  std::string q;
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) q += " ";
    const std::size_t w = word(rng);
    q += w < vocab.size() ? vocab[w] : "unseen" + std::to_string(w);
  }
  return q;
}

}  // namespace nfqa::testing

namespace nfqa::testing {

Json writer_script_json(std::size_t writer) {
  const std::string w = std::to_string(writer);
  return Json::array(
      {Json{{"contains", "Generate three different answers"},
            {"reply", "Answer 1: Fair answer by writer " + w + ".\nAnswer 2: Weak answer by writer " +
                          w + ".\nAnswer 3: Poor answer by writer " + w + "."}},
       Json{{"contains", "rewrite this answer"}, {"reply", "Rewrite by writer " + w + "."}}});
}

Json strong_script_json() {
  return Json::array({Json{{"contains", "rewrite this answer"}, {"reply", "Superior answer."}}});
}

Json annotator_script_json(std::size_t writers) {
  std::string reply = "Answer 1: [[3]]";
  std::size_t n = 1;
  for (std::size_t w = 0; w < writers; ++w) {
    for (int label : {2, 1, 0}) {
      reply += "\nAnswer " + std::to_string(++n) + ": [[" + std::to_string(label) + "]]";
    }
  }
  return Json::array({Json{{"reply", reply}}});
}

std::vector<const LlmClient*> DatasetMocks::writer_ptrs() const {
  std::vector<const LlmClient*> out;
  for (const auto& w : writers) out.push_back(&w.client);
  return out;
}

DatasetMocks make_dataset_mocks(std::size_t writers) {
  std::vector<MockClient> ws;
  for (std::size_t w = 1; w <= writers; ++w) {
    ws.push_back(mock_with_script(mock_script_from_json(writer_script_json(w))));
  }
  return DatasetMocks{std::move(ws), mock_with_script(mock_script_from_json(strong_script_json())),
                      mock_with_script(mock_script_from_json(annotator_script_json(writers)))};
}

}  // namespace nfqa::testing
