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

#include "nfqa/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <semaphore>
#include <set>
#include <unordered_set>

namespace nfqa {

namespace fs = std::filesystem;

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    const bool word_char = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                           (c >= 'A' && c <= 'Z') || c >= 0x80;
    if (word_char) {
      current += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                        : static_cast<char>(c);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

void Bm25Params::validate() const {
  if (!(k1 > 0.0)) throw ConfigError("bm25 k1 must be positive");
  if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("bm25 b must be in [0, 1]");
}

// --- index -----------------------------------------------------------------

CorpusIndex CorpusIndex::build(std::vector<Passage> passages, Bm25Params params) {
  params.validate();
  CorpusIndex index;
  index.params_ = params;
  std::unordered_set<std::string> ids;
  for (std::size_t doc = 0; doc < passages.size(); ++doc) {
    Passage& passage = passages[doc];
    if (!ids.insert(passage.id).second) {
      throw InputError("duplicate passage id '" + passage.id + "'");
    }
    if (is_blank(passage.text)) {
      throw InputError("passage '" + passage.id + "' has empty text");
    }
    passage.score.reset();
    const auto tokens = tokenize(passage.text);
    std::map<std::string, std::uint32_t> counts;
    for (const auto& token : tokens) ++counts[token];
    for (const auto& [term, tf] : counts) {
      index.postings_[term].push_back({static_cast<std::uint32_t>(doc), tf});
    }
    index.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
  }
  index.store_ = std::move(passages);
  index.finish();
  return index;
}

void CorpusIndex::finish() {
  const double total =
      std::accumulate(doc_lengths_.begin(), doc_lengths_.end(), 0.0);
  avg_doc_len_ = doc_lengths_.empty() ? 0.0 : total / static_cast<double>(doc_lengths_.size());
}

CorpusIndex CorpusIndex::build_from_jsonl(const std::string& corpus_path,
                                          Bm25Params params) {
  std::ifstream in(corpus_path);
  if (!in) throw InputError("cannot open corpus '" + corpus_path + "'");
  std::vector<Passage> passages;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto where = corpus_path + ":" + std::to_string(line_no);
    Json object = Json::parse(line, nullptr, false);
    if (object.is_discarded() || !object.is_object()) {
      throw InputError(where + ": not a JSON object");
    }
    for (const char* key : {"id", "text"}) {
      if (!object.contains(key) || !object[key].is_string()) {
        throw InputError(where + ": missing string field '" + key + "'");
      }
    }
    if (object.contains("title") && !object["title"].is_string()) {
      throw InputError(where + ": field 'title' is not a string");
    }
    Passage passage;
    passage.id = object["id"].get<std::string>();
    passage.title = object.value("title", "");
    passage.text = object["text"].get<std::string>();
    if (is_blank(passage.text)) throw InputError(where + ": empty 'text'");
    passages.push_back(std::move(passage));
  }
  try {
    return build(std::move(passages), params);
  } catch (const InputError& e) {
    throw InputError(corpus_path + ": " + e.what());
  }
}

void CorpusIndex::save(const std::string& dir) const {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError("cannot create index directory '" + dir + "'");
  }
  auto open = [&](const char* name) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + (fs::path(dir) / name).string() + "'");
    return out;
  };

  {
    auto out = open("manifest.json");
    Json manifest = {{"format", "nfqa-bm25"},
                     {"version", kIndexFormatVersion},
                     {"k1", params_.k1},
                     {"b", params_.b},
                     {"doc_count", doc_count()},
                     {"avg_doc_len", avg_doc_len_}};
    out << manifest.dump(2) << "\n";
  }
  {
    auto out = open("store.jsonl");
    for (std::size_t doc = 0; doc < store_.size(); ++doc) {
      Json row = {{"id", store_[doc].id},
                  {"title", store_[doc].title},
                  {"text", store_[doc].text},
                  {"length", doc_lengths_[doc]}};
      out << row.dump() << "\n";
    }
  }
  {
    auto out = open("postings.jsonl");
    std::vector<const std::string*> terms;
    terms.reserve(postings_.size());
    for (const auto& entry : postings_) terms.push_back(&entry.first);
    std::sort(terms.begin(), terms.end(),
              [](const std::string* a, const std::string* b) { return *a < *b; });
    for (const std::string* term : terms) {
      Json list = Json::array();
      for (const Posting& p : postings_.at(*term)) list.push_back({p.doc, p.tf});
      out << Json{{"t", *term}, {"p", list}}.dump() << "\n";
    }
    if (!out) throw ConfigError("failed writing postings to '" + dir + "'");
  }
}

CorpusIndex CorpusIndex::load(const std::string& dir) {
  const fs::path manifest_path = fs::path(dir) / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw ConfigError("no index manifest in '" + dir + "'");
  }
  Json manifest = Json::parse(read_file(manifest_path.string()), nullptr, false);
  if (manifest.is_discarded() || manifest.value("format", "") != "nfqa-bm25") {
    throw ConfigError("'" + manifest_path.string() + "' is not an index manifest");
  }
  if (manifest.value("version", 0) != kIndexFormatVersion) {
    throw ConfigError("index format version " + manifest.value("version", Json(0)).dump() +
                      " is not supported");
  }

  CorpusIndex index;
  index.params_.k1 = manifest.at("k1").get<double>();
  index.params_.b = manifest.at("b").get<double>();
  index.params_.validate();

  auto lines = [&](const char* name) {
    std::ifstream in(fs::path(dir) / name);
    if (!in) throw ConfigError("index file '" + std::string(name) + "' is missing");
    std::vector<Json> rows;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      Json row = Json::parse(line, nullptr, false);
      if (row.is_discarded()) throw InputError("corrupt index file '" + std::string(name) + "'");
      rows.push_back(std::move(row));
    }
    return rows;
  };

  try {
    for (const Json& row : lines("store.jsonl")) {
      Passage passage;
      passage.id = row.at("id").get<std::string>();
      passage.title = row.at("title").get<std::string>();
      passage.text = row.at("text").get<std::string>();
      index.store_.push_back(std::move(passage));
      index.doc_lengths_.push_back(row.at("length").get<std::uint32_t>());
    }
    for (const Json& row : lines("postings.jsonl")) {
      std::vector<Posting> list;
      for (const Json& p : row.at("p")) {
        Posting posting{p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>()};
        if (posting.doc >= index.store_.size()) {
          throw InputError("posting refers to unknown document");
        }
        list.push_back(posting);
      }
      index.postings_.emplace(row.at("t").get<std::string>(), std::move(list));
    }
  } catch (const Json::exception& e) {
    throw InputError("corrupt index in '" + dir + "': " + e.what());
  }
  if (index.store_.size() != manifest.at("doc_count").get<std::size_t>()) {
    throw InputError("index store does not match manifest doc_count");
  }
  index.finish();
  return index;
}

std::span<const Posting> CorpusIndex::postings(const std::string& term) const {
  auto it = postings_.find(term);
  if (it == postings_.end()) return {};
  return it->second;
}

double CorpusIndex::idf(const std::string& term) const {
  const double n = static_cast<double>(doc_count());
  const double df = static_cast<double>(postings(term).size());
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

std::vector<Passage> CorpusIndex::search(std::string_view query, std::size_t k) const {
  if (k == 0) throw InputError("k must be at least 1");
  const auto tokens = tokenize(query);
  if (tokens.empty()) throw InputError("query has no searchable terms");
  const std::set<std::string> terms(tokens.begin(), tokens.end());

  std::unordered_map<std::uint32_t, double> scores;
  for (const auto& term : terms) {
    const auto list = postings(term);
    if (list.empty()) continue;
    const double term_idf = idf(term);
    for (const Posting& p : list) {
      const double tf = p.tf;
      const double norm =
          1.0 - params_.b + params_.b * doc_lengths_[p.doc] / avg_doc_len_;
      scores[p.doc] += term_idf * tf * (params_.k1 + 1.0) / (tf + params_.k1 * norm);
    }
  }

  std::vector<std::pair<std::uint32_t, double>> ranked(scores.begin(), scores.end());
  auto better = [this](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return store_[a.first].id < store_[b.first].id;
  };
  const std::size_t take = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take),
                    ranked.end(), better);

  std::vector<Passage> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    Passage passage = store_[ranked[i].first];
    passage.score = ranked[i].second;
    out.push_back(std::move(passage));
  }
  return out;
}

CorpusIndex build_index(const std::string& corpus_path, const Bm25Params& params,
                        const std::string& out_dir) {
  CorpusIndex index = CorpusIndex::build_from_jsonl(corpus_path, params);
  index.save(out_dir);
  return index;
}

// --- dedup / rerank --------------------------------------------------------

std::vector<Passage> dedup(std::vector<Passage> passages) {
  std::unordered_set<std::string> seen;
  std::vector<Passage> out;
  out.reserve(passages.size());
  for (auto& passage : passages) {
    if (seen.insert(passage.id).second) out.push_back(std::move(passage));
  }
  return out;
}

void RerankRequest::validate() const {
  if (is_blank(query)) throw InputError("rerank query is empty");
  if (passages.empty()) throw InputError("rerank request has no passages");
  if (passages.size() > kMaxRerankPassages) {
    throw InputError("rerank request exceeds " + std::to_string(kMaxRerankPassages) +
                     " passages");
  }
}

double token_f1(std::string_view query, std::string_view text) {
  const auto query_tokens = tokenize(query);
  const auto text_tokens = tokenize(text);
  if (query_tokens.empty() || text_tokens.empty()) return 0.0;
  std::map<std::string, int> remaining;
  for (const auto& token : text_tokens) ++remaining[token];
  int common = 0;
  for (const auto& token : query_tokens) {
    auto it = remaining.find(token);
    if (it != remaining.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / text_tokens.size();
  const double recall = static_cast<double>(common) / query_tokens.size();
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<double> LexicalReranker::scores(const RerankRequest& request) const {
  std::vector<double> out;
  out.reserve(request.passages.size());
  for (const auto& passage : request.passages) {
    out.push_back(token_f1(request.query, passage.text));
  }
  return out;
}

struct RemoteReranker::Gate {
  explicit Gate(int slots) : semaphore(slots) {}
  std::counting_semaphore<1024> semaphore;
};

RemoteReranker::RemoteReranker(EndpointConfig endpoint)
    : endpoint_(std::move(endpoint)) {
  endpoint_.validate();
  gate_ = std::make_unique<Gate>(std::min(endpoint_.max_concurrent_requests, 1024));
}

RemoteReranker::~RemoteReranker() = default;

std::vector<double> RemoteReranker::scores(const RerankRequest& request) const {
  Json passages = Json::array();
  for (const auto& passage : request.passages) passages.push_back(passage);
  gate_->semaphore.acquire();
  Json reply;
  try {
    reply = post_json(endpoint_, "/rerank",
                      Json{{"query", request.query}, {"passages", passages}});
  } catch (...) {
    gate_->semaphore.release();
    throw;
  }
  gate_->semaphore.release();
  if (!reply.is_object() || !reply.contains("scores") || !reply["scores"].is_array()) {
    throw TransportError("rerank response has no 'scores' list");
  }
  std::vector<double> out;
  for (const auto& value : reply["scores"]) {
    if (!value.is_number()) throw TransportError("rerank score is not a number");
    out.push_back(value.get<double>());
  }
  if (out.size() != request.passages.size()) {
    throw TransportError("rerank returned " + std::to_string(out.size()) +
                         " scores for " + std::to_string(request.passages.size()) +
                         " passages");
  }
  return out;
}

std::vector<Passage> rerank(const RerankRequest& request, const Reranker& reranker) {
  request.validate();
  const std::vector<double> scores = reranker.scores(request);
  if (scores.size() != request.passages.size()) {
    throw InternalError("reranker returned the wrong number of scores");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<Passage> out;
  out.reserve(order.size());
  for (std::size_t i : order) {
    Passage passage = request.passages[i];
    passage.score = scores[i];
    out.push_back(std::move(passage));
  }
  return out;
}

}  // namespace nfqa
