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

#include "qacheck/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace qacheck::retrieval {
namespace {

const std::vector<Posting> kNoPostings;

constexpr char kMagic[5] = {'Q', 'I', 'D', 'X', '1'};
constexpr std::uint32_t kSnapshotVersion = 1;

bool is_alnum(unsigned char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// Little-endian writer/reader for the snapshot.
class Writer {
 public:
  explicit Writer(std::string& out) : out_(out) {}
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }

 private:
  std::string& out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const auto n = u32();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  [[nodiscard]] bool at_end() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw ParseError("truncated index snapshot");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_alnum(c)) {
      cur.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

const std::vector<Posting>& Index::postings_for(std::string_view term) const {
  auto it = postings_.find(std::string(term));
  return it == postings_.end() ? kNoPostings : it->second;
}

double Index::idf(std::string_view term) const {
  const auto df = static_cast<double>(postings_for(term).size());
  const auto n = static_cast<double>(docs_.size());
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

Index build_index(std::vector<CorpusDoc> docs, Bm25Params params) {
  if (docs.empty()) throw InvalidArgument("cannot build an index over an empty corpus");
  std::unordered_set<std::string> ids;
  Index index;
  index.params_ = params;
  index.doc_lengths_.reserve(docs.size());
  std::uint64_t total_len = 0;
  for (std::uint32_t ord = 0; ord < docs.size(); ++ord) {
    const auto& doc = docs[ord];
    if (!ids.insert(doc.id).second) throw DuplicateId("duplicate document id '" + doc.id + "'");
    if (doc.text.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw InvalidArgument("document '" + doc.id + "' has empty text");
    }
    const auto terms = tokenize(doc.text);
    std::unordered_map<std::string, std::uint32_t> counts;
    for (const auto& t : terms) ++counts[t];
    // Ordinals are visited in increasing order, so each posting list stays sorted.
    for (auto& [term, tf] : counts) index.postings_[term].push_back(Posting{ord, tf});
    index.doc_lengths_.push_back(static_cast<std::uint32_t>(terms.size()));
    total_len += terms.size();
  }
  index.avg_doc_len_ = static_cast<double>(total_len) / static_cast<double>(docs.size());
  index.docs_ = std::move(docs);
  return index;
}

double bm25_score(const Index& index, const std::vector<std::string>& query_terms, std::uint32_t doc) {
  if (doc >= index.doc_count()) throw InvalidArgument("document ordinal out of range");
  const auto& p = index.params();
  const double len = index.doc_lengths()[doc];
  const double avg = index.avg_doc_len();
  const double norm = p.k1 * (1.0 - p.b + (avg > 0.0 ? p.b * len / avg : 0.0));
  double score = 0.0;
  std::set<std::string_view> seen;
  for (const auto& term : query_terms) {
    if (!seen.insert(term).second) continue;
    const auto& list = index.postings_for(term);
    auto it = std::lower_bound(list.begin(), list.end(), doc,
                               [](const Posting& post, std::uint32_t d) { return post.doc < d; });
    if (it == list.end() || it->doc != doc) continue;
    const double tf = it->tf;
    score += index.idf(term) * tf * (p.k1 + 1.0) / (tf + norm);
  }
  return score;
}

std::vector<Hit> search(const Index& index, std::string_view query, std::size_t k) {
  if (k == 0) throw InvalidArgument("search depth k must be >= 1");
  auto terms = tokenize(query);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

  // Accumulate per-term contributions over the posting lists only.
  const auto& p = index.params();
  const double avg = index.avg_doc_len();
  std::unordered_map<std::uint32_t, double> acc;
  for (const auto& term : terms) {
    const auto& list = index.postings_for(term);
    if (list.empty()) continue;
    const double idf = index.idf(term);
    for (const auto& post : list) {
      const double len = index.doc_lengths()[post.doc];
      const double norm = p.k1 * (1.0 - p.b + (avg > 0.0 ? p.b * len / avg : 0.0));
      const double tf = post.tf;
      acc[post.doc] += idf * tf * (p.k1 + 1.0) / (tf + norm);
    }
  }
  std::vector<Hit> hits;
  hits.reserve(acc.size());
  for (const auto& [doc, score] : acc) {
    if (score > 0.0) hits.push_back(Hit{doc, score});
  }
  const auto by_rank = [](const Hit& a, const Hit& b) { return a.score != b.score ? a.score > b.score : a.doc < b.doc; };
  if (hits.size() > k) {
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), by_rank);
    hits.resize(k);
  } else {
    std::sort(hits.begin(), hits.end(), by_rank);
  }
  return hits;
}

std::vector<CorpusDoc> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus " + path.string());
  std::vector<CorpusDoc> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw ParseError("malformed corpus line", line_no);
    }
    if (!row.is_object() || !row.contains("id") || !row.contains("text") || !row["text"].is_string()) {
      throw ParseError("corpus line needs \"id\" and \"text\" fields", line_no);
    }
    CorpusDoc doc;
    doc.id = row["id"].is_string() ? row["id"].get<std::string>() : row["id"].dump();
    doc.title = row.value("title", std::string());
    doc.text = row["text"].get<std::string>();
    docs.push_back(std::move(doc));
  }
  return docs;
}

void save_snapshot(const Index& index, const std::filesystem::path& path) {
  std::string buf;
  Writer w(buf);
  w.raw(kMagic, sizeof kMagic);
  w.u32(kSnapshotVersion);
  w.u64(index.doc_count());
  w.f64(index.params().k1);
  w.f64(index.params().b);

  std::string docs_section;
  {
    Writer d(docs_section);
    for (std::size_t i = 0; i < index.doc_count(); ++i) {
      const auto& doc = index.docs()[i];
      d.str(doc.id);
      d.str(doc.title);
      d.str(doc.text);
      d.u32(index.doc_lengths()[i]);
    }
  }
  w.u64(docs_section.size());
  w.raw(docs_section.data(), docs_section.size());

  // Terms are written in byte order so equal corpora give identical files.
  std::vector<const std::string*> terms;
  terms.reserve(index.postings().size());
  for (const auto& [term, list] : index.postings()) terms.push_back(&term);
  std::sort(terms.begin(), terms.end(), [](const std::string* a, const std::string* b) { return *a < *b; });

  std::string postings_section;
  {
    Writer pw(postings_section);
    pw.u64(terms.size());
    for (const auto* term : terms) {
      const auto& list = index.postings_for(*term);
      pw.str(*term);
      pw.u32(static_cast<std::uint32_t>(list.size()));
      for (const auto& post : list) {
        pw.u32(post.doc);
        pw.u32(post.tf);
      }
    }
  }
  w.u64(postings_section.size());
  w.raw(postings_section.data(), postings_section.size());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write index snapshot " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing index snapshot " + path.string());
}

Index load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open index snapshot " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(buf);
  if (r.raw(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) throw ParseError("not an index snapshot (bad magic)");
  if (const auto v = r.u32(); v != kSnapshotVersion) {
    throw ParseError("unsupported index snapshot version " + std::to_string(v));
  }
  Index index;
  const auto n = r.u64();
  index.params_.k1 = r.f64();
  index.params_.b = r.f64();

  Reader docs(r.raw(r.u64()));
  std::uint64_t total_len = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    CorpusDoc doc;
    doc.id = docs.str();
    doc.title = docs.str();
    doc.text = docs.str();
    index.doc_lengths_.push_back(docs.u32());
    total_len += index.doc_lengths_.back();
    index.docs_.push_back(std::move(doc));
  }
  if (!docs.at_end()) throw ParseError("index snapshot document section has trailing bytes");

  Reader posts(r.raw(r.u64()));
  const auto term_count = posts.u64();
  for (std::uint64_t t = 0; t < term_count; ++t) {
    auto term = posts.str();
    const auto len = posts.u32();
    std::vector<Posting> list;
    list.reserve(len);
    for (std::uint32_t i = 0; i < len; ++i) {
      Posting post;
      post.doc = posts.u32();
      post.tf = posts.u32();
      if (post.doc >= n || post.tf == 0) throw ParseError("index snapshot has an invalid posting");
      list.push_back(post);
    }
    index.postings_.emplace(std::move(term), std::move(list));
  }
  if (!posts.at_end() || !r.at_end()) throw ParseError("index snapshot has trailing bytes");
  index.avg_doc_len_ = n == 0 ? 0.0 : static_cast<double>(total_len) / static_cast<double>(n);
  return index;
}

}  // namespace qacheck::retrieval
