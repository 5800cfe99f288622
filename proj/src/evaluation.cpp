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

#include "nfqa/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <regex>
#include <sstream>

#include <spdlog/spdlog.h>

#include "nfqa/decomposer.hpp"

namespace nfqa {

void EvalCase::validate() const {
  question.validate();
  if (is_blank(candidate)) {
    throw InputError("candidate answer for '" + question.id + "' is blank");
  }
  references.validate();
}

std::string build_linkage_prompt(const EvalCase& eval_case, const PromptSet& prompts) {
  eval_case.validate();
  const auto refs = eval_case.references.texts();
  return render_linkage_prompt(prompts, eval_case.question.text, refs, eval_case.candidate);
}

namespace {

// Values too long for int are clamped anyway, so cap them early.
long long parse_digits(const std::string& digits) {
  if (digits.size() > 12) return 1'000'000'000'000LL;
  return std::stoll(digits);
}

}  // namespace

int parse_rank(std::string_view raw, int list_size) {
  if (list_size < 1) throw InputError("rank list size must be at least 1");
  const std::string text(raw);
  static const std::regex bracketed(R"(\[\[\s*(\d+)\s*\]\])");
  std::smatch m;
  if (std::regex_search(text, m, bracketed)) {
    const long long k = parse_digits(m[1].str());
    return static_cast<int>(std::clamp<long long>(k, 1, list_size));
  }
  static const std::regex standalone(R"(\b(\d+)\b)");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), standalone);
       it != std::sregex_iterator(); ++it) {
    const long long k = parse_digits((*it)[1].str());
    if (k >= 1 && k <= list_size) return static_cast<int>(k);
  }
  std::string shown = text.substr(0, 200);
  throw ParseError("no rank found in scorer output: \"" + shown + "\"");
}

RankResult score_candidate(const EvalCase& eval_case, const LlmClient& scorer,
                           const PromptSet& prompts) {
  const std::string prompt = build_linkage_prompt(eval_case, prompts);
  const int list_size = static_cast<int>(eval_case.references.size());
  std::string last_raw;
  const int rank = ask_and_parse(scorer, prompt, [&](const std::string& raw) {
    last_raw = raw;
    return parse_rank(raw, list_size);
  });
  return RankResult{eval_case.question.id, rank, list_size, last_raw};
}

double mrr(std::span<const RankResult> ranks) {
  if (ranks.empty()) throw InputError("MRR of an empty result list");
  double sum = 0.0;
  for (const auto& r : ranks) sum += 1.0 / r.rank;
  return sum / static_cast<double>(ranks.size());
}

double mpr(std::span<const RankResult> ranks) {
  if (ranks.empty()) throw InputError("MPR of an empty result list");
  double sum = 0.0;
  for (const auto& r : ranks) {
    sum += (1.0 - static_cast<double>(r.rank - 1) / r.list_size) * 100.0;
  }
  return sum / static_cast<double>(ranks.size());
}

EvalSummary summarize(std::vector<RankResult> ranks) {
  EvalSummary s;
  s.n = ranks.size();
  s.mrr = mrr(ranks);
  s.mpr = mpr(ranks);
  s.per_case = std::move(ranks);
  return s;
}

double EvalReport::error_fraction() const {
  if (total_cases == 0) return 0.0;
  return static_cast<double>(errors.size()) / static_cast<double>(total_cases);
}

namespace {

Json metrics_json(const GroupMetrics& g) {
  return Json{{"n", g.n}, {"mrr", g.mrr}, {"mpr", g.mpr}};
}

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void append_group_table(std::ostringstream& out, const std::string& heading,
                        const std::map<std::string, GroupMetrics>& groups,
                        const EvalSummary& overall) {
  out << "| " << heading << " | N | MRR | MPR |\n";
  out << "|---|---:|---:|---:|\n";
  for (const auto& [name, g] : groups) {
    out << "| " << name << " | " << g.n << " | " << fixed4(g.mrr) << " | " << fixed4(g.mpr)
        << " |\n";
  }
  out << "| Overall | " << overall.n << " | " << fixed4(overall.mrr) << " | "
      << fixed4(overall.mpr) << " |\n";
}

GroupMetrics group_of(const std::vector<RankResult>& ranks) {
  return GroupMetrics{ranks.size(), mrr(ranks), mpr(ranks)};
}

}  // namespace

Json EvalReport::to_json() const {
  Json subsets_json = Json::object();
  for (const auto& [name, g] : subsets) subsets_json[name] = metrics_json(g);
  Json types_json = Json::object();
  for (const auto& [name, g] : by_type) types_json[name] = metrics_json(g);
  Json cases = Json::array();
  for (std::size_t i = 0; i < overall.per_case.size(); ++i) {
    const auto& r = overall.per_case[i];
    cases.push_back(Json{{"id", r.case_id},
                         {"source", case_sources.at(i)},
                         {"nfq_type", case_types.at(i)},
                         {"rank", r.rank},
                         {"list_size", r.list_size},
                         {"candidate", candidates.at(i)},
                         {"raw_output", r.raw_output}});
  }
  Json errs = Json::array();
  for (const auto& e : errors) {
    errs.push_back(Json{{"id", e.case_id},
                        {"category", std::string(nfqa::to_string(e.category))},
                        {"message", e.message}});
  }
  return Json{{"method", method},
              {"dataset", dataset},
              {"total_cases", total_cases},
              {"overall", Json{{"n", overall.n}, {"mrr", overall.mrr}, {"mpr", overall.mpr}}},
              {"subsets", subsets_json},
              {"by_type", types_json},
              {"per_case", cases},
              {"errors", errs}};
}

std::string EvalReport::table() const {
  std::ostringstream out;
  out << "method: " << nfqa::to_string(method) << "  dataset: " << dataset
      << "  scored: " << overall.n << "/" << total_cases << "\n\n";
  append_group_table(out, "Subset", subsets, overall);
  out << "\n";
  append_group_table(out, "NFQ Type", by_type, overall);
  return out.str();
}

void enforce_error_budget(const EvalReport& report, double max_error_fraction) {
  if (report.errors.empty()) return;
  if (report.error_fraction() <= max_error_fraction) return;
  const auto& first = report.errors.front();
  throw Error(first.category,
              std::to_string(report.errors.size()) + " of " +
                  std::to_string(report.total_cases) + " cases failed; first: [" +
                  first.case_id + "] " + first.message);
}

EvalReport run_eval(const std::vector<DatasetRecord>& records,
                    const std::string& dataset_name, const Pipeline& pipeline,
                    const LlmClient& scorer, const PromptSet& prompts,
                    const EvalOptions& options) {
  if (records.empty()) throw InputError("dataset '" + dataset_name + "' has no records");

  struct Slot {
    std::optional<RankResult> rank;
    std::string candidate;
    std::optional<CaseError> error;
  };
  std::vector<Slot> slots(records.size());

  parallel_for(records.size(), std::max<std::size_t>(1, options.max_parallel),
               [&](std::size_t i) {
                 const auto& record = records[i];
                 try {
                   Question q = record.as_question();
                   if (!options.use_dataset_types) q.nfq_type.reset();
                   Answer answer = pipeline.answer_with(options.method, q);
                   EvalCase c{q, answer.text, record.references};
                   slots[i].candidate = answer.text;
                   slots[i].rank = score_candidate(c, scorer, prompts);
                 } catch (const Error& e) {
                   slots[i].error = CaseError{record.id, e.category(), e.what()};
                 } catch (const std::exception& e) {
                   slots[i].error = CaseError{record.id, ErrorCategory::kInternal, e.what()};
                 }
               });

  EvalReport report;
  report.method = options.method;
  report.dataset = dataset_name;
  report.total_cases = records.size();

  std::vector<RankResult> ranks;
  std::map<std::string, std::vector<RankResult>> by_source;
  std::map<std::string, std::vector<RankResult>> by_type;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (slots[i].error) {
      spdlog::warn("case '{}' skipped: {}", slots[i].error->case_id, slots[i].error->message);
      report.errors.push_back(*slots[i].error);
      continue;
    }
    const auto& r = *slots[i].rank;
    const std::string source = records[i].source.empty() ? "unknown" : records[i].source;
    const std::string type(nfqa::to_string(records[i].nfq_type));
    ranks.push_back(r);
    by_source[source].push_back(r);
    by_type[type].push_back(r);
    report.case_sources.push_back(source);
    report.case_types.push_back(type);
    report.candidates.push_back(slots[i].candidate);
  }

  if (options.enforce_error_budget) enforce_error_budget(report, options.max_error_fraction);
  if (ranks.empty()) {
    const auto& first = report.errors.front();
    throw Error(first.category, "every case failed; first: [" + first.case_id + "] " +
                                    first.message);
  }
  if (!report.errors.empty()) {
    spdlog::warn("{} of {} cases failed and were excluded", report.errors.size(),
                 report.total_cases);
  }

  report.overall = summarize(std::move(ranks));
  for (const auto& [name, rs] : by_source) report.subsets[name] = group_of(rs);
  for (const auto& [name, rs] : by_type) report.by_type[name] = group_of(rs);
  return report;
}

EvalReport run_eval(const std::string& dataset_path, const Pipeline& pipeline,
                    const LlmClient& scorer, const PromptSet& prompts,
                    const EvalOptions& options) {
  return run_eval(load_dataset(dataset_path), dataset_path, pipeline, scorer, prompts, options);
}

}  // namespace nfqa
