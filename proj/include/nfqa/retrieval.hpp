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

#ifndef NFQA_RETRIEVAL_HPP_
#define NFQA_RETRIEVAL_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nfqa/core.hpp"
#include "nfqa/llm_client.hpp"

namespace nfqa {

/// Lowercases and splits on anything that is not an ASCII letter or digit.
/// Bytes >= 0x80 count as token characters so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

struct Bm25Params {
  double k1 = 0.9;
  double b = 0.4;

  /// ConfigError unless k1 > 0 and b in [0, 1].
  void validate() const;
  bool operator==(const Bm25Params&) const = default;
};

struct Posting {
  std::uint32_t doc = 0;  // position in the store
  std::uint32_t tf = 0;
};

inline constexpr int kIndexFormatVersion = 1;

/// Immutable BM25 index over a passage store.
///
/// score(q, d) = sum over distinct query terms t of
///   idf(t) * tf(t,d) * (k1 + 1) / (tf(t,d) + k1 * (1 - b + b * len(d) / avgdl))
/// with idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)).
class CorpusIndex {
 public:
  /// InputError on duplicate ids or empty passage text.
  static CorpusIndex build(std::vector<Passage> passages, Bm25Params params = {});
  /// Reads a JSONL corpus of {id, title, text}. InputError names the
  /// offending line.
  static CorpusIndex build_from_jsonl(const std::string& corpus_path,
                                      Bm25Params params = {});

  /// Writes manifest.json, store.jsonl and postings.jsonl into dir
  /// (created if needed). Output is deterministic. ConfigError when dir
  /// cannot be written.
  void save(const std::string& dir) const;
  /// ConfigError when the directory or manifest is missing or the format
  /// version differs; InputError on corrupt content.
  static CorpusIndex load(const std::string& dir);

  /// Top-k passages by score, ties by ascending id. Only passages sharing a
  /// term with the query are returned. InputError when the query has no
  /// tokens or k is 0.
  std::vector<Passage> search(std::string_view query, std::size_t k) const;

  std::size_t doc_count() const { return store_.size(); }
  double avg_doc_len() const { return avg_doc_len_; }
  const Bm25Params& params() const { return params_; }
  const std::vector<Passage>& passages() const { return store_; }
  std::span<const std::uint32_t> doc_lengths() const { return doc_lengths_; }
  std::span<const Posting> postings(const std::string& term) const;
  std::size_t vocabulary_size() const { return postings_.size(); }
  double idf(const std::string& term) const;

 private:
  CorpusIndex() = default;
  void finish();

  Bm25Params params_;
  std::vector<Passage> store_;
  std::vector<std::uint32_t> doc_lengths_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  double avg_doc_len_ = 0.0;
};

/// build_from_jsonl + save.
CorpusIndex build_index(const std::string& corpus_path, const Bm25Params& params,
                        const std::string& out_dir);

/// Drops later passages whose id was already seen.
std::vector<Passage> dedup(std::vector<Passage> passages);

inline constexpr std::size_t kMaxRerankPassages = 100;

struct RerankRequest {
  std::string query;
  std::vector<Passage> passages;

  /// InputError on a blank query, no passages or more than 100 passages.
  void validate() const;
};

class Reranker {
 public:
  virtual ~Reranker() = default;
  /// One relevance score per passage, in input order.
  virtual std::vector<double> scores(const RerankRequest& request) const = 0;
};

/// SQuAD-style token-overlap F1 between two texts.
double token_f1(std::string_view query, std::string_view text);

/// Token-overlap F1 against the passage text. Never fails.
class LexicalReranker : public Reranker {
 public:
  std::vector<double> scores(const RerankRequest& request) const override;
};

/// POST {endpoint}/rerank {"query", "passages"} -> {"scores": [...]}.
class RemoteReranker : public Reranker {
 public:
  explicit RemoteReranker(EndpointConfig endpoint);
  ~RemoteReranker() override;
  std::vector<double> scores(const RerankRequest& request) const override;

 private:
  struct Gate;
  EndpointConfig endpoint_;
  std::unique_ptr<Gate> gate_;
};

/// Scores the passages and returns them sorted by descending score (stable
/// on input order), each carrying its new score.
std::vector<Passage> rerank(const RerankRequest& request, const Reranker& reranker);

}  // namespace nfqa

#endif  // NFQA_RETRIEVAL_HPP_
