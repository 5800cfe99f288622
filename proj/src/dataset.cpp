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

#include "nfqa/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <regex>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "nfqa/decomposer.hpp"

namespace nfqa {

void SourceRecord::validate() const {
  if (is_blank(question)) throw InputError("source record '" + id + "' has a blank question");
  const bool has_gold = std::any_of(gold_answer.values.begin(), gold_answer.values.end(),
                                    [](const std::string& v) { return !is_blank(v); });
  if (!has_gold) throw InputError("source record '" + id + "' has no gold answer");
}

namespace {

struct FormatName {
  SourceFormat format;
  const char* tag;
  const char* names[3];
};

constexpr FormatName kFormats[] = {
    {SourceFormat::kNq, "NQ", {"nq", "naturalquestions", "nq-nf"}},
    {SourceFormat::kSquad, "SQD", {"squad", "sqd", "sqd-nf"}},
    {SourceFormat::kTriviaQa, "TQA", {"triviaqa", "tqa", "tqa-nf"}},
    {SourceFormat::kTwoWiki, "2WMH", {"2wiki", "2wmh", "2wmhqa-nf"}},
    {SourceFormat::kHotpotQa, "HQA", {"hotpotqa", "hqa", "hqa-nf"}},
    {SourceFormat::kMusique, "MSQ", {"musique", "msq", "msq-nf"}},
    {SourceFormat::kCustom, "custom", {"custom", "jsonl", "custom"}},
};

std::string string_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_string()) return {};
  return j.at(key).get<std::string>();
}

GoldAnswer gold_from(const Json& value) {
  GoldAnswer g;
  if (value.is_string()) {
    g.values.push_back(value.get<std::string>());
  } else if (value.is_array()) {
    for (const auto& v : value) {
      if (v.is_string()) g.values.push_back(v.get<std::string>());
    }
  }
  return g;
}

Json parse_json_file(const std::string& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::vector<Json> parse_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file '" + path + "'");
  std::vector<Json> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw InputError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void push_valid(std::vector<SourceRecord>& out, SourceRecord r) {
  try {
    r.validate();
    out.push_back(std::move(r));
  } catch (const InputError& e) {
    spdlog::warn("skipping source record: {}", e.what());
  }
}

std::string fallback_id(std::string_view tag, std::size_t index) {
  return to_lower(tag) + "-" + std::to_string(index);
}

}  // namespace

SourceFormat parse_source_format(std::string_view text) {
  const std::string lowered = to_lower(trim(text));
  for (const auto& f : kFormats) {
    if (lowered == to_lower(f.tag)) return f.format;
    for (const char* n : f.names) {
      if (lowered == n) return f.format;
    }
  }
  throw InputError("unknown source format '" + std::string(text) + "'");
}

std::string_view source_tag(SourceFormat format) {
  for (const auto& f : kFormats) {
    if (f.format == format) return f.tag;
  }
  return "custom";
}

std::vector<SourceRecord> load_source(SourceFormat format, const std::string& path) {
  const std::string tag(source_tag(format));
  std::vector<SourceRecord> out;
  switch (format) {
    case SourceFormat::kNq:
    case SourceFormat::kMusique: {
      const auto rows = parse_jsonl_file(path);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const Json& row = rows[i];
        SourceRecord r;
        r.id = string_field(row, "id");
        if (r.id.empty()) r.id = fallback_id(tag, i + 1);
        r.question = string_field(row, "question");
        if (row.contains("answer")) r.gold_answer = gold_from(row.at("answer"));
        r.source = tag;
        push_valid(out, std::move(r));
      }
      break;
    }
    case SourceFormat::kCustom: {
      const auto rows = parse_jsonl_file(path);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const Json& row = rows[i];
        SourceRecord r;
        r.id = string_field(row, "id");
        if (r.id.empty()) r.id = fallback_id(tag, i + 1);
        r.question = string_field(row, "question");
        if (row.contains("gold_answer")) r.gold_answer = gold_from(row.at("gold_answer"));
        r.source = string_field(row, "source");
        if (r.source.empty()) r.source = tag;
        push_valid(out, std::move(r));
      }
      break;
    }
    case SourceFormat::kSquad: {
      const Json doc = parse_json_file(path);
      if (!doc.contains("data") || !doc.at("data").is_array()) {
        throw InputError(path + ": SQuAD file needs a 'data' list");
      }
      std::size_t index = 0;
      for (const auto& article : doc.at("data")) {
        if (!article.contains("paragraphs")) continue;
        for (const auto& para : article.at("paragraphs")) {
          if (!para.contains("qas")) continue;
          for (const auto& qa : para.at("qas")) {
            ++index;
            SourceRecord r;
            r.id = string_field(qa, "id");
            if (r.id.empty()) r.id = fallback_id(tag, index);
            r.question = string_field(qa, "question");
            if (qa.contains("answers") && qa.at("answers").is_array()) {
              std::set<std::string> seen;
              for (const auto& a : qa.at("answers")) {
                const std::string text = string_field(a, "text");
                if (!text.empty() && seen.insert(text).second) r.gold_answer.values.push_back(text);
              }
            }
            r.source = tag;
            push_valid(out, std::move(r));
          }
        }
      }
      break;
    }
    case SourceFormat::kTriviaQa: {
      const Json doc = parse_json_file(path);
      if (!doc.contains("Data") || !doc.at("Data").is_array()) {
        throw InputError(path + ": TriviaQA file needs a 'Data' list");
      }
      std::size_t index = 0;
      for (const auto& row : doc.at("Data")) {
        ++index;
        SourceRecord r;
        r.id = string_field(row, "QuestionId");
        if (r.id.empty()) r.id = fallback_id(tag, index);
        r.question = string_field(row, "Question");
        if (row.contains("Answer")) {
          const std::string value = string_field(row.at("Answer"), "Value");
          if (!value.empty()) r.gold_answer.values.push_back(value);
        }
        r.source = tag;
        push_valid(out, std::move(r));
      }
      break;
    }
    case SourceFormat::kTwoWiki:
    case SourceFormat::kHotpotQa: {
      const Json doc = parse_json_file(path);
      if (!doc.is_array()) throw InputError(path + ": expected a JSON list of questions");
      std::size_t index = 0;
      for (const auto& row : doc) {
        ++index;
        SourceRecord r;
        r.id = string_field(row, "_id");
        if (r.id.empty()) r.id = fallback_id(tag, index);
        r.question = string_field(row, "question");
        if (row.contains("answer")) r.gold_answer = gold_from(row.at("answer"));
        r.source = tag;
        push_valid(out, std::move(r));
      }
      break;
    }
  }
  return out;
}

std::vector<FilteredRecord> filter_nfq(const std::vector<SourceRecord>& records,
                                       const Classifier& classifier, const RuleSet& post_filter) {
  std::vector<FilteredRecord> out;
  std::set<std::string> emitted;
  for (const auto& record : records) {
    try {
      Question q{record.id, record.question, record.source, std::nullopt};
      if (classifier.is_factoid(q)) {
        spdlog::debug("dropping factoid question '{}'", record.id);
        continue;
      }
      const NfqType type = classifier.classify(q);
      const auto rule = post_filter.match(record.question);
      if (rule && *rule != type) {
        spdlog::debug("post-filter rejects '{}': rules say {}, classifier says {}", record.id,
                      to_string(*rule), to_string(type));
        continue;
      }
      if (!emitted.insert(record.id).second) {
        spdlog::warn("duplicate source id '{}' skipped", record.id);
        continue;
      }
      out.push_back(FilteredRecord{record, type});
    } catch (const Error& e) {
      spdlog::warn("filtering '{}' failed: {}", record.id, e.what());
    }
  }
  return out;
}

std::vector<std::string> parse_labeled_answers(std::string_view raw, std::size_t count) {
  const std::string text(raw);
  static const std::regex label(R"(Answer\s*(\d+)\s*:)", std::regex::icase);
  struct Hit {
    std::size_t number;
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Hit> hits;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), label);
       it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    const std::string digits = m[1].str();
    const std::size_t number = digits.size() > 6 ? 0 : std::stoul(digits);
    hits.push_back(Hit{number, static_cast<std::size_t>(m.position(0)),
                       static_cast<std::size_t>(m.position(0) + m.length(0))});
  }
  std::vector<std::string> answers;
  for (std::size_t k = 1; k <= count; ++k) {
    auto it = std::find_if(hits.begin(), hits.end(), [k](const Hit& h) { return h.number == k; });
    if (it == hits.end()) {
      throw ParseError("missing \"Answer " + std::to_string(k) + ":\" in writer output");
    }
    const std::size_t stop = std::next(it) == hits.end() ? text.size() : std::next(it)->begin;
    std::string body = trim(std::string_view(text).substr(it->end, stop - it->end));
    if (body.empty()) {
      throw ParseError("\"Answer " + std::to_string(k) + ":\" has no text in writer output");
    }
    answers.push_back(std::move(body));
  }
  return answers;
}

std::vector<ReferenceCandidate> generate_reference_candidates(
    const SourceRecord& record, const std::vector<const LlmClient*>& writers,
    const LlmClient& strong, const PromptSet& prompts, ReferenceScheme scheme) {
  record.validate();
  if (writers.empty()) throw InputError("reference generation needs at least one writer");
  const std::string gold = record.gold_answer.joined();
  const std::string rewrite_prompt =
      render_reference_rewrite_prompt(prompts, record.question, gold);
  const std::string diverse_prompt =
      render_reference_diverse_prompt(prompts, record.question, gold);

  std::vector<ReferenceCandidate> out;
  out.push_back(ReferenceCandidate{trim(strong.ask(rewrite_prompt).text), "superior", 0});
  for (std::size_t w = 0; w < writers.size(); ++w) {
    const LlmClient& writer = *writers[w];
    const auto diverse = ask_and_parse(writer, diverse_prompt, [](const std::string& raw) {
      return parse_labeled_answers(raw, 3);
    });
    if (scheme == ReferenceScheme::kRewritePlusTwo) {
      out.push_back(ReferenceCandidate{trim(writer.ask(rewrite_prompt).text), "rewrite", w + 1});
      out.push_back(ReferenceCandidate{diverse[0], "diverse-1", w + 1});
      out.push_back(ReferenceCandidate{diverse[1], "diverse-2", w + 1});
    } else {
      for (std::size_t k = 0; k < 3; ++k) {
        out.push_back(
            ReferenceCandidate{diverse[k], "diverse-" + std::to_string(k + 1), w + 1});
      }
    }
  }
  for (const auto& c : out) {
    if (is_blank(c.text)) throw ParseError("a reference writer returned an empty answer");
  }
  return out;
}

std::vector<int> parse_quality_labels(std::string_view raw, std::size_t count) {
  if (count == 0) throw InputError("no candidates to label");
  const std::string text(raw);
  static const std::regex line(R"(Answer\s*(\d+)\s*:\s*\[\[\s*(-?\d+)\s*\]\])",
                               std::regex::icase);
  std::vector<std::optional<int>> labels(count);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), line);
       it != std::sregex_iterator(); ++it) {
    const std::string xs = (*it)[1].str();
    const std::string ys = (*it)[2].str();
    const std::size_t x = xs.size() > 6 ? 0 : std::stoul(xs);
    if (x < 1 || x > count) {
      throw ParseError("annotation labels Answer " + xs + " but there are " +
                       std::to_string(count) + " candidates");
    }
    const long y = ys.size() > 6 ? 99 : std::stol(ys);
    if (y < kMinQuality || y > kMaxQuality) {
      throw ParseError("annotation gives Answer " + xs + " quality " + ys + " outside [0, 3]");
    }
    if (labels[x - 1]) throw ParseError("annotation labels Answer " + xs + " twice");
    labels[x - 1] = static_cast<int>(y);
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (!labels[i]) throw ParseError("annotation is missing Answer " + std::to_string(i + 1));
    out.push_back(*labels[i]);
  }
  return out;
}

std::vector<int> annotate_quality(const std::string& question,
                                  const std::vector<std::string>& candidates,
                                  const LlmClient& annotator, const PromptSet& prompts) {
  if (candidates.empty()) throw InputError("no candidates to annotate");
  ChatRequest request;
  request.model = annotator.defaults().model;
  request.system_prompt = annotation_system_prompt(prompts);
  request.user_prompt = render_annotation_input_prompt(prompts, question, candidates);
  request.temperature = SamplingParams::annotation_defaults().temperature;
  request.top_p = annotator.defaults().top_p;
  request.max_tokens = annotator.defaults().max_tokens;
  request.seed = annotator.defaults().seed;
  const auto parse = [&](const std::string& raw) {
    return parse_quality_labels(raw, candidates.size());
  };
  try {
    return parse(annotator.complete(request).text);
  } catch (const ParseError&) {
    return parse(annotator.complete(request).text);
  }
}

DatasetRecord assemble_record(const FilteredRecord& record,
                              const std::vector<std::string>& candidates,
                              const std::vector<int>& labels) {
  if (candidates.size() != labels.size()) {
    throw InputError("got " + std::to_string(candidates.size()) + " candidates but " +
                     std::to_string(labels.size()) + " labels");
  }
  std::vector<ReferenceAnswer> answers;
  answers.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    answers.push_back(ReferenceAnswer{candidates[i], labels[i]});
  }
  DatasetRecord out;
  out.id = record.record.id;
  out.question = record.record.question;
  out.nfq_type = record.nfq_type;
  out.gold_answer = record.record.gold_answer;
  out.source = record.record.source;
  out.references = ReferenceList::sorted(out.id, std::move(answers));
  return out;
}

BuildResult build_dataset(const std::vector<SourceRecord>& sources, const Classifier& classifier,
                          const std::vector<const LlmClient*>& writers, const LlmClient& strong,
                          const LlmClient& annotator, const PromptSet& prompts,
                          const BuildOptions& options) {
  if (writers.empty()) throw ConfigError("dataset building needs at least one reference writer");
  const auto filtered =
      filter_nfq(sources, classifier, options.post_filter.value_or(RuleSet::defaults()));
  BuildResult result;
  result.candidates_in = filtered.size();
  if (filtered.empty()) {
    spdlog::warn("no non-factoid questions left after filtering {} source records",
                 sources.size());
    return result;
  }
  const bool partial = writers.size() < 3;
  if (partial) {
    spdlog::warn("only {} reference writer(s) configured; records are marked partial",
                 writers.size());
  }

  std::vector<std::optional<DatasetRecord>> built(filtered.size());
  std::vector<std::optional<std::string>> failures(filtered.size());
  std::vector<ErrorCategory> categories(filtered.size(), ErrorCategory::kInternal);
  parallel_for(filtered.size(), std::max<std::size_t>(1, options.max_parallel),
               [&](std::size_t i) {
                 const auto& f = filtered[i];
                 try {
                   const auto candidates = generate_reference_candidates(
                       f.record, writers, strong, prompts, options.scheme);
                   std::vector<std::string> texts;
                   for (const auto& c : candidates) texts.push_back(c.text);
                   const auto labels = annotate_quality(f.record.question, texts, annotator,
                                                        prompts);
                   DatasetRecord r = assemble_record(f, texts, labels);
                   r.partial = partial;
                   built[i] = std::move(r);
                 } catch (const Error& e) {
                   categories[i] = e.category();
                   failures[i] = e.what();
                 } catch (const std::exception& e) {
                   failures[i] = e.what();
                 }
               });

  std::optional<ErrorCategory> first_category;
  for (std::size_t i = 0; i < filtered.size(); ++i) {
    if (built[i]) {
      result.records.push_back(std::move(*built[i]));
    } else {
      spdlog::warn("record '{}' failed: {}", filtered[i].record.id, *failures[i]);
      result.errors.emplace_back(filtered[i].record.id, *failures[i]);
      if (!first_category) first_category = categories[i];
    }
  }
  const double fraction =
      static_cast<double>(result.errors.size()) / static_cast<double>(filtered.size());
  if (fraction > options.max_error_fraction) {
    throw Error(*first_category, std::to_string(result.errors.size()) + " of " +
                         std::to_string(filtered.size()) + " records failed; first: [" +
                         result.errors.front().first + "] " + result.errors.front().second);
  }
  return result;
}

std::string stats_column(const std::string& source) {
  try {
    const SourceFormat f = parse_source_format(source);
    switch (f) {
      case SourceFormat::kNq: return "NQ-NF";
      case SourceFormat::kSquad: return "SQD-NF";
      case SourceFormat::kTriviaQa: return "TQA-NF";
      case SourceFormat::kTwoWiki: return "2WMHQA-NF";
      case SourceFormat::kHotpotQa: return "HQA-NF";
      case SourceFormat::kMusique: return "MSQ-NF";
      case SourceFormat::kCustom: break;
    }
  } catch (const InputError&) {
  }
  return source.empty() ? "custom" : source;
}

std::size_t DatasetStats::cell(NfqType type, const std::string& source) const {
  const auto row = counts.find(type);
  if (row == counts.end()) return 0;
  const auto c = row->second.find(source);
  return c == row->second.end() ? 0 : c->second;
}

std::size_t DatasetStats::type_total(NfqType type) const {
  std::size_t total = 0;
  for (const auto& s : sources) total += cell(type, s);
  return total;
}

std::size_t DatasetStats::source_total(const std::string& source) const {
  std::size_t total = 0;
  for (const NfqType t : kAllNfqTypes) total += cell(t, source);
  return total;
}

std::size_t DatasetStats::grand_total() const {
  std::size_t total = 0;
  for (const NfqType t : kAllNfqTypes) total += type_total(t);
  return total;
}

double DatasetStats::percentage(NfqType type) const {
  const std::size_t total = grand_total();
  if (total == 0) return 0.0;
  return 100.0 * static_cast<double>(type_total(type)) / static_cast<double>(total);
}

std::string DatasetStats::to_markdown() const {
  std::ostringstream out;
  out << "| NFQ Type |";
  for (const auto& s : sources) out << " " << s << " |";
  out << " Total |\n|---|";
  for (std::size_t i = 0; i < sources.size(); ++i) out << "---:|";
  out << "---:|\n";
  for (const NfqType t : kAllNfqTypes) {
    out << "| " << display_name(t) << " |";
    for (const auto& s : sources) out << " " << cell(t, s) << " |";
    char pct[32];
    std::snprintf(pct, sizeof pct, "%.2f", percentage(t));
    out << " " << type_total(t) << " (" << pct << "%) |\n";
  }
  out << "| Total |";
  for (const auto& s : sources) out << " " << source_total(s) << " |";
  out << " " << grand_total() << " |\n";
  return out.str();
}

Json DatasetStats::to_json() const {
  Json types = Json::object();
  for (const NfqType t : kAllNfqTypes) {
    Json row = Json::object();
    for (const auto& s : sources) row[s] = cell(t, s);
    types[std::string(to_string(t))] =
        Json{{"counts", row}, {"total", type_total(t)}, {"percentage", percentage(t)}};
  }
  Json totals = Json::object();
  for (const auto& s : sources) totals[s] = source_total(s);
  return Json{{"sources", sources},
              {"types", types},
              {"source_totals", totals},
              {"total", grand_total()}};
}

DatasetStats compute_stats(const std::vector<DatasetRecord>& records) {
  DatasetStats stats;
  stats.sources = {"NQ-NF", "SQD-NF", "TQA-NF", "2WMHQA-NF", "HQA-NF", "MSQ-NF"};
  std::set<std::string> extra;
  for (const auto& r : records) {
    const std::string column = stats_column(r.source);
    if (std::find(stats.sources.begin(), stats.sources.end(), column) == stats.sources.end()) {
      extra.insert(column);
    }
    ++stats.counts[r.nfq_type][column];
  }
  stats.sources.insert(stats.sources.end(), extra.begin(), extra.end());
  return stats;
}

DatasetStats compute_stats(const std::string& dataset_path) {
  return compute_stats(load_dataset(dataset_path));
}

}  // namespace nfqa
