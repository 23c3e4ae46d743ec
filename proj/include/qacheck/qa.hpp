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

// Question answering: one interface, three interchangeable implementations.
//
//  - RetrieverReader: BM25 over a paragraph index, then a reading prompt over the top-k passages.
//  - Seq2Seq: a single call that produces the answer on the first line and evidence after it.
//  - ReciterReader: the model recites a passage from memory, then the reading prompt answers from it.

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "qacheck/core.hpp"
#include "qacheck/genbackend.hpp"
#include "qacheck/prompts.hpp"
#include "qacheck/retrieval.hpp"

namespace qacheck {

class EmptyGeneration : public Error {
 public:
  using Error::Error;
};

// Generation call shared by the reasoning roles and the QA backends: sends the
// prompt and appends the exchange to `log` (when given) before returning, so a
// failing caller still leaves the exchange on record.
std::string call_backend(const gen::Generator& backend, std::string_view role, std::string prompt,
                         const gen::GenRequest& shape, std::vector<RawExchange>* log);

}  // namespace qacheck

namespace qacheck::qa {

inline constexpr std::size_t kDefaultTopK = 3;
inline constexpr std::string_view kUnknownAnswer = "unknown";

struct QAResult {
  std::string answer;
  std::vector<EvidencePassage> evidence;
};

// Reading prompt over numbered passages.
std::string render_reader_prompt(std::string_view question, const std::vector<EvidencePassage>& passages);
std::string render_seq2seq_prompt(std::string_view question);

class QaBackend {
 public:
  virtual ~QaBackend() = default;
  // Every generation call is appended to `log` when it is non-null.
  virtual QAResult answer(std::string_view question, std::vector<RawExchange>* log) const = 0;
  [[nodiscard]] virtual QaBackendKind kind() const noexcept = 0;
};

class RetrieverReader final : public QaBackend {
 public:
  RetrieverReader(std::shared_ptr<const retrieval::Index> index, std::shared_ptr<const gen::Generator> reader,
                  std::size_t k = kDefaultTopK);

  // Throws EmptyIndex when the index has no documents. When no passage matches
  // any query term the answer is "unknown" with no evidence and no reader call.
  QAResult answer(std::string_view question, std::vector<RawExchange>* log) const override;
  [[nodiscard]] QaBackendKind kind() const noexcept override { return QaBackendKind::RetrieverReader; }

 private:
  std::shared_ptr<const retrieval::Index> index_;
  std::shared_ptr<const gen::Generator> reader_;
  std::size_t k_;
};

class Seq2Seq final : public QaBackend {
 public:
  explicit Seq2Seq(std::shared_ptr<const gen::Generator> model);

  QAResult answer(std::string_view question, std::vector<RawExchange>* log) const override;
  [[nodiscard]] QaBackendKind kind() const noexcept override { return QaBackendKind::Seq2Seq; }

 private:
  std::shared_ptr<const gen::Generator> model_;
};

class ReciterReader final : public QaBackend {
 public:
  ReciterReader(std::shared_ptr<const gen::Generator> reciter, std::shared_ptr<const gen::Generator> reader,
                std::shared_ptr<const prompts::DemoBank> bank);

  QAResult answer(std::string_view question, std::vector<RawExchange>* log) const override;
  [[nodiscard]] QaBackendKind kind() const noexcept override { return QaBackendKind::ReciterReader; }

 private:
  std::shared_ptr<const gen::Generator> reciter_;
  std::shared_ptr<const gen::Generator> reader_;
  std::shared_ptr<const prompts::DemoBank> bank_;
};

// Free-function forms of the three strategies.
QAResult answer_retriever_reader(std::string_view question, const retrieval::Index& index,
                                 const gen::Generator& reader, std::size_t k = kDefaultTopK,
                                 std::vector<RawExchange>* log = nullptr);
QAResult answer_seq2seq(std::string_view question, const gen::Generator& model,
                        std::vector<RawExchange>* log = nullptr);
QAResult answer_reciter_reader(std::string_view question, const gen::Generator& reciter,
                               const gen::Generator& reader, const prompts::DemoBank& bank,
                               std::vector<RawExchange>* log = nullptr);

}  // namespace qacheck::qa
