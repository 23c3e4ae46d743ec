/*
 * Copyright 2026 The QACheck Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Paragraph corpus, inverted index and Okapi BM25 ranking.
//
//   score(D, Q) = sum over distinct t in Q of
//                 idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |D| / avgdl))
//   idf(t)      = ln(1 + (N - df + 0.5) / (df + 0.5))
//
// The index is immutable once built; concurrent searches are safe.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qacheck/error.hpp"

namespace qacheck::retrieval {

class DuplicateId : public Error {
 public:
  using Error::Error;
};

class EmptyIndex : public Error {
 public:
  using Error::Error;
};

inline constexpr double kDefaultK1 = 0.9;
inline constexpr double kDefaultB = 0.4;

struct CorpusDoc {
  std::string id;
  std::string title;
  std::string text;

  bool operator==(const CorpusDoc&) const = default;
};

struct Posting {
  std::uint32_t doc = 0;  // ordinal into the corpus
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

struct Bm25Params {
  double k1 = kDefaultK1;
  double b = kDefaultB;

  bool operator==(const Bm25Params&) const = default;
};

// Lowercases ASCII, splits on every non-alphanumeric byte, drops empty tokens.
// No stemming and no stopword removal.
std::vector<std::string> tokenize(std::string_view text);

struct Hit {
  std::uint32_t doc = 0;
  double score = 0.0;

  bool operator==(const Hit&) const = default;
};

class Index {
 public:
  Index() = default;

  [[nodiscard]] std::size_t doc_count() const noexcept { return docs_.size(); }
  [[nodiscard]] double avg_doc_len() const noexcept { return avg_doc_len_; }
  [[nodiscard]] const Bm25Params& params() const noexcept { return params_; }
  [[nodiscard]] const std::vector<CorpusDoc>& docs() const noexcept { return docs_; }
  [[nodiscard]] const std::vector<std::uint32_t>& doc_lengths() const noexcept { return doc_lengths_; }
  [[nodiscard]] const std::unordered_map<std::string, std::vector<Posting>>& postings() const noexcept {
    return postings_;
  }
  // Postings for `term`, sorted by doc ordinal; empty when the term is unseen.
  [[nodiscard]] const std::vector<Posting>& postings_for(std::string_view term) const;
  [[nodiscard]] double idf(std::string_view term) const;

  bool operator==(const Index&) const = default;

 private:
  friend Index build_index(std::vector<CorpusDoc> docs, Bm25Params params);
  friend Index load_snapshot(const std::filesystem::path& path);

  std::vector<CorpusDoc> docs_;
  std::vector<std::uint32_t> doc_lengths_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  double avg_doc_len_ = 0.0;
  Bm25Params params_;
};

// Throws InvalidArgument on an empty corpus or empty doc text, DuplicateId on a repeated id.
Index build_index(std::vector<CorpusDoc> docs, Bm25Params params = {});

// Query terms are deduplicated; terms absent from the corpus contribute 0.
double bm25_score(const Index& index, const std::vector<std::string>& query_terms, std::uint32_t doc);

// Documents scoring > 0, ordered by score descending then ordinal ascending, at most k.
std::vector<Hit> search(const Index& index, std::string_view query, std::size_t k);

// JSON Lines, one {"id","title","text"} object per paragraph. ParseError names the line.
std::vector<CorpusDoc> load_corpus(const std::filesystem::path& path);

// Binary snapshot; layout documented in docs/index_format.md.
void save_snapshot(const Index& index, const std::filesystem::path& path);
Index load_snapshot(const std::filesystem::path& path);

}  // namespace qacheck::retrieval
