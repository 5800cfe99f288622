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

#include "nfqa/records.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace nfqa {

void ReferenceList::validate() const {
  if (answers.size() < 2) {
    throw InputError("reference list for '" + question_id + "' needs at least 2 answers, got " +
                     std::to_string(answers.size()));
  }
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const int q = answers[i].quality;
    if (q < kMinQuality || q > kMaxQuality) {
      throw InputError("reference " + std::to_string(i + 1) + " of '" + question_id +
                       "' has quality " + std::to_string(q) + " outside [0, 3]");
    }
    if (i > 0 && q > answers[i - 1].quality) {
      throw InputError("reference list for '" + question_id +
                       "' is not sorted by descending quality");
    }
  }
}

std::vector<std::string> ReferenceList::texts() const {
  std::vector<std::string> out;
  out.reserve(answers.size());
  for (const auto& a : answers) out.push_back(a.text);
  return out;
}

ReferenceList ReferenceList::sorted(std::string question_id,
                                    std::vector<ReferenceAnswer> answers) {
  std::stable_sort(answers.begin(), answers.end(),
                   [](const auto& a, const auto& b) { return a.quality > b.quality; });
  ReferenceList list{std::move(question_id), std::move(answers)};
  list.validate();
  return list;
}

std::string GoldAnswer::joined() const {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += "; ";
    out += values[i];
  }
  return out;
}

Question DatasetRecord::as_question() const {
  Question q;
  q.id = id;
  q.text = question;
  if (!source.empty()) q.source = source;
  q.nfq_type = nfq_type;
  return q;
}

void to_json(Json& j, const ReferenceAnswer& a) {
  j = Json{{"text", a.text}, {"quality", a.quality}};
}

void from_json(const Json& j, ReferenceAnswer& a) {
  if (!j.is_object() || !j.contains("text") || !j.at("text").is_string()) {
    throw InputError("reference answer needs a string 'text'");
  }
  if (!j.contains("quality") || !j.at("quality").is_number_integer()) {
    throw InputError("reference answer needs an integer 'quality'");
  }
  a.text = j.at("text").get<std::string>();
  a.quality = j.at("quality").get<int>();
}

void to_json(Json& j, const GoldAnswer& g) {
  if (g.values.size() == 1) {
    j = g.values.front();
  } else {
    j = g.values;
  }
}

void from_json(const Json& j, GoldAnswer& g) {
  g.values.clear();
  if (j.is_string()) {
    g.values.push_back(j.get<std::string>());
    return;
  }
  if (!j.is_array()) throw InputError("'gold_answer' must be a string or a list of strings");
  for (const auto& v : j) {
    if (!v.is_string()) throw InputError("'gold_answer' must be a string or a list of strings");
    g.values.push_back(v.get<std::string>());
  }
}

void to_json(Json& j, const DatasetRecord& r) {
  j = Json{{"id", r.id},
           {"question", r.question},
           {"nfq_type", r.nfq_type},
           {"gold_answer", r.gold_answer},
           {"references", r.references.answers},
           {"source", r.source},
           {"partial", r.partial}};
}

namespace {

std::string required_string(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw InputError(std::string("missing string field '") + key + "'");
  }
  return j.at(key).get<std::string>();
}

}  // namespace

void from_json(const Json& j, DatasetRecord& r) {
  if (!j.is_object()) throw InputError("dataset record must be a JSON object");
  r.id = required_string(j, "id");
  r.question = required_string(j, "question");
  if (is_blank(r.question)) throw InputError("record '" + r.id + "' has a blank question");
  r.nfq_type = parse_nfq_type(required_string(j, "nfq_type"));
  r.gold_answer = j.contains("gold_answer") ? j.at("gold_answer").get<GoldAnswer>() : GoldAnswer{};
  r.source = j.contains("source") && j.at("source").is_string()
                 ? j.at("source").get<std::string>()
                 : std::string{};
  r.partial = j.contains("partial") && j.at("partial").is_boolean() && j.at("partial").get<bool>();
  if (!j.contains("references") || !j.at("references").is_array()) {
    throw InputError("record '" + r.id + "' needs a 'references' list");
  }
  r.references.question_id = r.id;
  r.references.answers = j.at("references").get<std::vector<ReferenceAnswer>>();
  r.references.validate();
}

std::vector<DatasetRecord> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset '" + path + "'");
  std::vector<DatasetRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      Json j = Json::parse(line);
      records.push_back(j.get<DatasetRecord>());
    } catch (const Json::exception& e) {
      throw InputError(path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw InputError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write dataset '" + path + "'");
  for (const auto& r : records) out << Json(r).dump() << '\n';
  if (!out) throw ConfigError("failed writing dataset '" + path + "'");
}

}  // namespace nfqa
