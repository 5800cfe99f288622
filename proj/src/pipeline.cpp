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

#include "nfqa/pipeline.hpp"

#include <algorithm>

namespace nfqa {

void PipelineConfig::validate() const {
  if (k_final == 0 || k_per_keyword == 0 || k_per_subquery == 0) {
    throw ConfigError("pipeline k values must be at least 1");
  }
  if (max_parallel == 0) throw ConfigError("pipeline max_parallel must be at least 1");
}

struct Pipeline::Run {
  Method method;
  std::vector<TraceStep> trace;
};

namespace {

template <typename Fn>
auto in_step(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.with_context(name);
  }
}

Json passage_ids(const std::vector<Passage>& passages) {
  Json ids = Json::array();
  for (const auto& p : passages) ids.push_back(p.id);
  return ids;
}

std::string joined_ids(const std::vector<Passage>& passages) {
  std::string out;
  for (const auto& p : passages) out += p.id + "\n";
  return out;
}

// One sub-query branch: its trace steps and, on success, the answer text.
struct Branch {
  std::vector<TraceStep> steps;
  std::optional<std::string> answer;
  std::optional<Error> error;
};

}  // namespace

Answer Pipeline::finish(const Question& question, std::string text, Run& run) {
  Answer answer;
  answer.question_id = question.id;
  answer.text = std::move(text);
  answer.method = run.method;
  answer.trace = std::move(run.trace);
  return answer;
}

Pipeline::Pipeline(PipelineDeps deps) : deps_(std::move(deps)) {
  deps_.config.validate();
  if (!deps_.generator) throw ConfigError("pipeline needs a generator LLM");
  if (deps_.config.prompt_dir) {
    deps_.prompts = PromptSet::from_directory(*deps_.config.prompt_dir);
  }
}

const CorpusIndex& Pipeline::index() const {
  if (!deps_.index) throw ConfigError("pipeline has no retrieval index");
  return *deps_.index;
}

const LlmClient& Pipeline::decomposer() const {
  if (deps_.decomposer) return *deps_.decomposer;
  return *deps_.generator;
}

// --- steps -----------------------------------------------------------------

std::vector<Passage> Pipeline::retrieve(const std::string& query, std::size_t k,
                                        std::vector<TraceStep>& trace) const {
  auto passages = in_step("retrieve", [&] { return index().search(query, k); });
  trace.push_back({"retrieve", digest(query), digest(joined_ids(passages)),
                   Json{{"query", query}, {"k", k}, {"ids", passage_ids(passages)}}});
  return passages;
}

std::string Pipeline::generate(const std::string& step, const std::string& prompt,
                               Json detail, std::vector<TraceStep>& trace) const {
  std::string text =
      in_step(step.c_str(), [&] { return deps_.generator->ask(prompt).text; });
  trace.push_back({step, digest(prompt), digest(text), std::move(detail)});
  return text;
}

std::vector<Passage> Pipeline::rerank_top(const std::string& query,
                                          std::vector<Passage> passages,
                                          std::vector<TraceStep>& trace) const {
  const std::string input = joined_ids(passages);
  const std::size_t entering = passages.size();
  if (!passages.empty()) {
    if (!deps_.reranker) throw ConfigError("pipeline has no reranker");
    passages = in_step("rerank", [&] {
      return nfqa::rerank(RerankRequest{query, std::move(passages)}, *deps_.reranker);
    });
  }
  if (passages.size() > deps_.config.k_final) passages.resize(deps_.config.k_final);
  Json scores = Json::array();
  for (const auto& p : passages) scores.push_back(p.score.value_or(0.0));
  trace.push_back({"rerank", digest(query + "\n" + input), digest(joined_ids(passages)),
                   Json{{"query", query},
                        {"candidates", entering},
                        {"ids", passage_ids(passages)},
                        {"scores", scores}}});
  return passages;
}

// --- public entry points ---------------------------------------------------

Answer Pipeline::answer(const Question& question) const {
  question.validate();
  Run run{Method::kTypedRag, {}};
  NfqType type;
  if (question.nfq_type) {
    type = *question.nfq_type;
  } else {
    if (!deps_.classifier) throw ConfigError("pipeline has no classifier");
    type = in_step("classify", [&] { return deps_.classifier->classify(question); });
    run.trace.push_back({"classify", digest(question.text),
                         digest(std::string(to_string(type))),
                         Json{{"nfq_type", to_string(type)}}});
  }
  return dispatch(question, type, run);
}

Answer Pipeline::dispatch(const Question& question, NfqType type, Run& run) const {
  switch (type) {
    case NfqType::kEvidenceBased:
      return evidence(question, run);
    case NfqType::kComparison:
      return comparison(question, run);
    case NfqType::kExperience:
      return experience(question, run);
    case NfqType::kReason:
    case NfqType::kInstruction:
      return multi(question, type, run);
    case NfqType::kDebate:
      return debate(question, run);
  }
  throw InternalError("unhandled NFQ type");
}

Answer Pipeline::answer_with(Method method, const Question& question) const {
  switch (method) {
    case Method::kLlmOnly:
      return answer_llm_only(question);
    case Method::kVanillaRag:
      return answer_vanilla_rag(question);
    case Method::kTypedRag:
      return answer(question);
  }
  throw InternalError("unhandled method");
}

Answer Pipeline::answer_evidence_based(const Question& question) const {
  question.validate();
  Run run{Method::kTypedRag, {}};
  return evidence(question, run);
}

Answer Pipeline::answer_comparison(const Question& question) const {
  question.validate();
  Run run{Method::kTypedRag, {}};
  return comparison(question, run);
}

Answer Pipeline::answer_experience(const Question& question) const {
  question.validate();
  Run run{Method::kTypedRag, {}};
  return experience(question, run);
}

Answer Pipeline::answer_multi(const Question& question, NfqType type) const {
  question.validate();
  Run run{Method::kTypedRag, {}};
  return multi(question, type, run);
}

Answer Pipeline::answer_debate(const Question& question) const {
  question.validate();
  Run run{Method::kTypedRag, {}};
  return debate(question, run);
}

Answer Pipeline::answer_llm_only(const Question& question) const {
  question.validate();
  Run run{Method::kLlmOnly, {}};
  const std::string prompt = render_llm_prompt(deps_.prompts, question.text);
  std::string text = generate("generate", prompt, Json{{"passages", 0}}, run.trace);
  return finish(question, std::move(text), run);
}

Answer Pipeline::answer_vanilla_rag(const Question& question) const {
  question.validate();
  Run run{Method::kVanillaRag, {}};
  return evidence(question, run);
}

// --- strategies ------------------------------------------------------------

Answer Pipeline::evidence(const Question& question, Run& run) const {
  const auto passages = retrieve(question.text, deps_.config.k_final, run.trace);
  const std::string prompt = render_rag_prompt(deps_.prompts, question.text, passages);
  std::string text =
      generate("generate", prompt, Json{{"passages", passages.size()}}, run.trace);
  return finish(question, std::move(text), run);
}

Answer Pipeline::comparison(const Question& question, Run& run) const {
  const CompareAnalysis analysis = in_step(
      "decompose", [&] { return analyze_comparison(question, decomposer(), deps_.prompts); });
  Json detail = analysis.to_json();
  detail["nfq_type"] = to_string(NfqType::kComparison);
  run.trace.push_back({"decompose", digest(question.text), digest(analysis.to_json().dump()),
                       std::move(detail)});
  if (!analysis.is_compare) return evidence(question, run);

  std::vector<Passage> pool;
  for (const auto& keyword : analysis.keywords) {
    auto hits = retrieve(keyword, deps_.config.k_per_keyword, run.trace);
    pool.insert(pool.end(), std::make_move_iterator(hits.begin()),
                std::make_move_iterator(hits.end()));
  }
  const std::size_t before = pool.size();
  pool = dedup(std::move(pool));
  run.trace.push_back({"dedup", digest(std::to_string(before)), digest(joined_ids(pool)),
                       Json{{"in", before}, {"out", pool.size()}, {"ids", passage_ids(pool)}}});

  const auto passages = rerank_top(question.text, std::move(pool), run.trace);
  const std::string prompt = render_comparison_answer_prompt(
      deps_.prompts, question.text, to_string(*analysis.compare_type), analysis.keywords,
      passages);
  std::string text =
      generate("generate", prompt, Json{{"passages", passages.size()}}, run.trace);
  return finish(question, std::move(text), run);
}

Answer Pipeline::experience(const Question& question, Run& run) const {
  const ExperienceKeywords keywords = in_step("decompose", [&] {
    return extract_experience_keywords(question, decomposer(), deps_.prompts);
  });
  Json detail = Json{{"nfq_type", to_string(NfqType::kExperience)},
                     {"keywords", keywords.keywords}};
  run.trace.push_back({"decompose", digest(question.text),
                       digest(keywords.to_json().dump()), std::move(detail)});

  std::string keyword_query;
  for (std::size_t i = 0; i < keywords.keywords.size(); ++i) {
    if (i > 0) keyword_query += " ";
    keyword_query += keywords.keywords[i];
  }

  std::vector<Passage> pool = retrieve(question.text, deps_.config.k_per_keyword, run.trace);
  auto keyword_hits = retrieve(keyword_query, deps_.config.k_per_keyword, run.trace);
  pool.insert(pool.end(), std::make_move_iterator(keyword_hits.begin()),
              std::make_move_iterator(keyword_hits.end()));
  const std::size_t before = pool.size();
  pool = dedup(std::move(pool));
  run.trace.push_back({"dedup", digest(std::to_string(before)), digest(joined_ids(pool)),
                       Json{{"in", before}, {"out", pool.size()}, {"ids", passage_ids(pool)}}});

  const auto passages = rerank_top(keyword_query, std::move(pool), run.trace);
  const std::string prompt = render_rag_prompt(deps_.prompts, question.text, passages);
  std::string text =
      generate("generate", prompt, Json{{"passages", passages.size()}}, run.trace);
  return finish(question, std::move(text), run);
}

namespace {

// Runs retrieve + generate for every sub-query, concurrently, and keeps the
// results in sub-query order. Branch errors are captured, not thrown.
template <typename Retrieve, typename Generate>
std::vector<Branch> run_branches(const std::vector<std::string>& queries,
                                 std::size_t max_parallel, Retrieve&& retrieve,
                                 Generate&& generate) {
  std::vector<Branch> branches(queries.size());
  parallel_for(queries.size(), max_parallel, [&](std::size_t i) {
    Branch& branch = branches[i];
    try {
      auto passages = retrieve(queries[i], branch.steps);
      branch.answer = generate(queries[i], passages, branch.steps);
    } catch (const Error& e) {
      branch.error = e;
      const bool retrieved = !branch.steps.empty();
      branch.steps.push_back({retrieved ? "generate" : "retrieve", digest(queries[i]), "",
                              Json{{"query", queries[i]}, {"error", e.what()}}});
    }
  });
  return branches;
}

}  // namespace

Answer Pipeline::multi(const Question& question, NfqType type, Run& run) const {
  const SubQuerySet set = in_step("decompose", [&] {
    return generate_subqueries(question, type, decomposer(), deps_.prompts);
  });
  run.trace.push_back({"decompose", digest(question.text), digest(set.to_json().dump()),
                       Json{{"nfq_type", to_string(type)}, {"sub_queries", set.queries}}});

  const std::size_t depth = std::min(deps_.config.k_per_subquery, deps_.config.k_final);
  auto branches = run_branches(
      set.queries, deps_.config.max_parallel,
      [&](const std::string& query, std::vector<TraceStep>& steps) {
        return retrieve(query, depth, steps);
      },
      [&](const std::string& query, const std::vector<Passage>& passages,
          std::vector<TraceStep>& steps) {
        return generate("generate", render_rag_prompt(deps_.prompts, query, passages),
                        Json{{"query", query}, {"passages", passages.size()}}, steps);
      });

  std::vector<QaPair> pairs;
  std::optional<Error> first_error;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    auto& branch = branches[i];
    for (auto& step : branch.steps) run.trace.push_back(std::move(step));
    if (branch.answer) {
      pairs.push_back({set.queries[i], *branch.answer});
    } else if (!first_error) {
      first_error = branch.error;
    }
  }
  if (pairs.size() < kMinSubQueries) {
    const std::string message = "only " + std::to_string(pairs.size()) +
                                " sub-answers succeeded; need at least 2";
    if (first_error) throw Error(first_error->category(), message + ": " + first_error->what());
    throw InternalError(message);
  }

  const std::string prompt = render_aggregator_prompt(deps_.prompts, question.text, pairs);
  std::string text =
      generate("aggregate", prompt, Json{{"pairs", pairs.size()}}, run.trace);
  return finish(question, std::move(text), run);
}

Answer Pipeline::debate(const Question& question, Run& run) const {
  const DebatePlan plan = in_step(
      "decompose", [&] { return decompose_debate(question, decomposer(), deps_.prompts); });
  Json detail = plan.to_json();
  detail["nfq_type"] = to_string(NfqType::kDebate);
  run.trace.push_back({"decompose", digest(question.text), digest(plan.to_json().dump()),
                       std::move(detail)});

  std::vector<std::string> queries;
  for (const auto& entry : plan.sub_queries) queries.push_back(entry.second);
  const std::size_t depth = std::min(deps_.config.k_per_subquery, deps_.config.k_final);
  auto branches = run_branches(
      queries, deps_.config.max_parallel,
      [&](const std::string& query, std::vector<TraceStep>& steps) {
        return retrieve(query, depth, steps);
      },
      [&](const std::string& query, const std::vector<Passage>& passages,
          std::vector<TraceStep>& steps) {
        return generate("generate", render_rag_prompt(deps_.prompts, query, passages),
                        Json{{"query", query}, {"passages", passages.size()}}, steps);
      });

  std::vector<PerspectiveResponse> responses;
  std::optional<Error> first_error;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    auto& branch = branches[i];
    for (auto& step : branch.steps) run.trace.push_back(std::move(step));
    if (branch.answer) {
      responses.push_back({*branch.answer, plan.sub_queries[i].first});
    } else if (!first_error) {
      first_error = branch.error;
    }
  }
  if (responses.size() < kMinSubQueries) {
    const std::string message = "only " + std::to_string(responses.size()) +
                                " opinion responses succeeded; need at least 2";
    if (first_error) throw Error(first_error->category(), message + ": " + first_error->what());
    throw InternalError(message);
  }

  const std::string prompt =
      render_mediator_prompt(deps_.prompts, plan.debate_topic, responses);
  std::string text = generate("mediate", prompt,
                              Json{{"debate_topic", plan.debate_topic},
                                   {"responses", responses.size()}},
                              run.trace);
  return finish(question, std::move(text), run);
}

}  // namespace nfqa
