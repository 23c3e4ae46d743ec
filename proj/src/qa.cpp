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

#include "qacheck/qa.hpp"

namespace qacheck {

std::string call_backend(const gen::Generator& backend, std::string_view role, std::string prompt,
                         const gen::GenRequest& shape, std::vector<RawExchange>* log) {
  gen::GenRequest req = shape;
  req.prompt = std::move(prompt);
  try {
    auto res = gen::generate(backend, req);
    if (log != nullptr) log->push_back(RawExchange{std::string(role), req.prompt, res.text});
    return std::move(res.text);
  } catch (...) {
    if (log != nullptr) log->push_back(RawExchange{std::string(role), std::move(req.prompt), ""});
    throw;
  }
}

}  // namespace qacheck

namespace qacheck::qa {
namespace {

gen::GenRequest reader_shape() { return gen::GenRequest{"", 64, 0.0, {}}; }
gen::GenRequest recite_shape() { return gen::GenRequest{"", 256, 0.0, {}}; }
gen::GenRequest seq2seq_shape() { return gen::GenRequest{"", 128, 0.0, {}}; }

std::string read_answer(std::string_view question, const std::vector<EvidencePassage>& passages,
                        const gen::Generator& reader, std::vector<RawExchange>* log) {
  const auto completion = call_backend(reader, roles::kQaReader, render_reader_prompt(question, passages),
                                       reader_shape(), log);
  auto line = first_nonempty_line(completion);
  if (!line) throw EmptyGeneration("reader returned an empty answer for: " + std::string(question));
  return *line;
}

}  // namespace

std::string render_reader_prompt(std::string_view question, const std::vector<EvidencePassage>& passages) {
  std::string out =
      "Answer the question using only the passages below. Reply with a short answer on a single line. "
      "If the passages do not contain the answer, reply \"unknown\".\n\n";
  for (std::size_t i = 0; i < passages.size(); ++i) {
    const auto& p = passages[i];
    out += "Passage " + std::to_string(i + 1);
    if (p.title && !p.title->empty()) out += " (" + *p.title + ")";
    out += ": " + p.text + "\n";
  }
  out += "\nQuestion: ";
  out += question;
  out += "\nAnswer:";
  return prompts::normalize_newlines(out);
}

std::string render_seq2seq_prompt(std::string_view question) {
  std::string out = "Answer the question and then provide a one-sentence evidence statement.\nQuestion: ";
  out += question;
  out += "\nAnswer:";
  return prompts::normalize_newlines(out);
}

QAResult answer_retriever_reader(std::string_view question, const retrieval::Index& index,
                                 const gen::Generator& reader, std::size_t k, std::vector<RawExchange>* log) {
  if (index.doc_count() == 0) throw retrieval::EmptyIndex("retriever-reader has an empty index");
  const auto hits = retrieval::search(index, question, k);
  if (hits.empty()) return QAResult{std::string(kUnknownAnswer), {}};
  QAResult result;
  for (const auto& hit : hits) {
    const auto& doc = index.docs()[hit.doc];
    result.evidence.push_back(EvidencePassage{
        doc.id, doc.title.empty() ? std::nullopt : std::optional<std::string>(doc.title), doc.text, hit.score});
  }
  result.answer = read_answer(question, result.evidence, reader, log);
  return result;
}

QAResult answer_seq2seq(std::string_view question, const gen::Generator& model, std::vector<RawExchange>* log) {
  const auto completion = call_backend(model, roles::kQaSeq2Seq, render_seq2seq_prompt(question),
                                       seq2seq_shape(), log);
  const auto body = trim(completion);
  if (body.empty()) throw EmptyGeneration("seq2seq model returned an empty completion for: " + std::string(question));
  const auto nl = body.find('\n');
  QAResult result;
  result.answer = std::string(trim(body.substr(0, nl)));
  std::string evidence = nl == std::string_view::npos ? std::string() : std::string(trim(body.substr(nl + 1)));
  if (evidence.empty()) evidence = result.answer;
  result.evidence.push_back(EvidencePassage{std::string(kGeneratedSource), std::nullopt, std::move(evidence), std::nullopt});
  return result;
}

QAResult answer_reciter_reader(std::string_view question, const gen::Generator& reciter, const gen::Generator& reader,
                               const prompts::DemoBank& bank, std::vector<RawExchange>* log) {
  const auto recited = call_backend(reciter, roles::kQaRecite, prompts::render_recite(bank, question).text,
                                    recite_shape(), log);
  const auto passage = trim(recited);
  if (passage.empty()) {
    throw EmptyGeneration("recitation (call 1 of 2) returned an empty passage for: " + std::string(question));
  }
  QAResult result;
  result.evidence.push_back(
      EvidencePassage{std::string(kGeneratedSource), std::nullopt, std::string(passage), std::nullopt});
  try {
    result.answer = read_answer(question, result.evidence, reader, log);
  } catch (const EmptyGeneration&) {
    throw EmptyGeneration("reader (call 2 of 2) returned an empty answer for: " + std::string(question));
  }
  return result;
}

RetrieverReader::RetrieverReader(std::shared_ptr<const retrieval::Index> index,
                                 std::shared_ptr<const gen::Generator> reader, std::size_t k)
    : index_(std::move(index)), reader_(std::move(reader)), k_(k) {
  if (!index_ || !reader_) throw InvalidArgument("retriever-reader needs an index and a reader backend");
  if (k_ == 0) throw InvalidArgument("retrieval depth k must be >= 1");
}

QAResult RetrieverReader::answer(std::string_view question, std::vector<RawExchange>* log) const {
  return answer_retriever_reader(question, *index_, *reader_, k_, log);
}

Seq2Seq::Seq2Seq(std::shared_ptr<const gen::Generator> model) : model_(std::move(model)) {
  if (!model_) throw InvalidArgument("seq2seq needs a generation backend");
}

QAResult Seq2Seq::answer(std::string_view question, std::vector<RawExchange>* log) const {
  return answer_seq2seq(question, *model_, log);
}

ReciterReader::ReciterReader(std::shared_ptr<const gen::Generator> reciter, std::shared_ptr<const gen::Generator> reader,
                             std::shared_ptr<const prompts::DemoBank> bank)
    : reciter_(std::move(reciter)), reader_(std::move(reader)), bank_(std::move(bank)) {
  if (!reciter_ || !reader_ || !bank_) throw InvalidArgument("reciter-reader needs two backends and a demo bank");
}

QAResult ReciterReader::answer(std::string_view question, std::vector<RawExchange>* log) const {
  return answer_reciter_reader(question, *reciter_, *reader_, *bank_, log);
}

}  // namespace qacheck::qa
