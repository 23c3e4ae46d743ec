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

// Domain types shared by every module: claims, QA pairs, evidence, and the
// reasoning trace that records one complete check.

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qacheck/error.hpp"

namespace qacheck {

enum class Label { Supported, Refuted };

std::string_view to_string(Label label) noexcept;
// Accepts the canonical names case-insensitively.
Label label_from_string(std::string_view s);

enum class QaBackendKind { RetrieverReader, Seq2Seq, ReciterReader };

inline constexpr QaBackendKind kDefaultQaBackend = QaBackendKind::ReciterReader;

std::string_view to_string(QaBackendKind kind) noexcept;
std::optional<QaBackendKind> parse_qa_backend(std::string_view name) noexcept;
// All selectable backend names, in declaration order.
const std::vector<std::string>& qa_backend_names();

enum class TraceStatus { Running, Done, Error };

std::string_view to_string(TraceStatus status) noexcept;
TraceStatus trace_status_from_string(std::string_view s);

using Timestamp = std::chrono::time_point<std::chrono::system_clock, std::chrono::milliseconds>;

Timestamp now_ms() noexcept;
// RFC 3339, UTC, millisecond precision: 2026-01-31T12:00:00.123Z
std::string format_timestamp(Timestamp t);
Timestamp parse_timestamp(std::string_view s);

struct Claim {
  std::string id;
  std::string text;
  std::optional<Label> gold_label;

  bool operator==(const Claim&) const = default;
};

// Throws InvalidArgument when the id is empty or the text is blank.
Claim make_claim(std::string id, std::string text, std::optional<Label> gold = std::nullopt);

inline constexpr std::string_view kGeneratedSource = "generated";

struct EvidencePassage {
  std::string source_id;
  std::optional<std::string> title;
  std::string text;
  std::optional<double> score;  // present only for passages from a retrieval index

  bool operator==(const EvidencePassage&) const = default;
};

struct QAPair {
  int index = 0;  // 1-based position once stored in a Context
  std::string question;
  std::string answer;
  std::vector<EvidencePassage> evidence;

  bool operator==(const QAPair&) const = default;
};

// Ordered, append-only list of accepted QA pairs.
class Context {
 public:
  Context() = default;

  // Stores a copy of `pair` with its index set to the next position.
  const QAPair& append(QAPair pair);

  [[nodiscard]] const std::vector<QAPair>& pairs() const noexcept { return pairs_; }
  [[nodiscard]] std::size_t size() const noexcept { return pairs_.size(); }
  [[nodiscard]] bool empty() const noexcept { return pairs_.empty(); }
  // True when a stored pair has the same question and answer text.
  [[nodiscard]] bool contains(std::string_view question, std::string_view answer) const noexcept;

  bool operator==(const Context&) const = default;

 private:
  std::vector<QAPair> pairs_;
};

struct ReasoningStep {
  int depth = 1;
  std::string question;
  std::string answer;
  std::vector<EvidencePassage> evidence;
  bool accepted = false;
  std::optional<std::string> rejection_reason;

  bool operator==(const ReasoningStep&) const = default;
};

struct Verdict {
  Label label = Label::Refuted;
  std::string rationale;

  bool operator==(const Verdict&) const = default;
};

struct RawExchange {
  std::string role;
  std::string prompt;
  std::string completion;

  bool operator==(const RawExchange&) const = default;
};

struct ReasoningTrace {
  std::string trace_id;
  Claim claim;
  QaBackendKind qa_backend = kDefaultQaBackend;
  std::vector<ReasoningStep> steps;
  std::optional<Verdict> verdict;
  std::vector<RawExchange> raw_exchanges;
  Timestamp started_at{};
  std::optional<Timestamp> finished_at;
  TraceStatus status = TraceStatus::Running;
  std::optional<std::string> error_detail;
  int max_depth = 5;  // configured bound the steps were produced under

  bool operator==(const ReasoningTrace&) const = default;

  // Rebuilds the context from the accepted steps, in order.
  [[nodiscard]] Context context() const;
};

// Exchange roles used in raw_exchanges.
namespace roles {
inline constexpr std::string_view kVerifier = "verifier";
inline constexpr std::string_view kQuestionGenerator = "question_generator";
inline constexpr std::string_view kValidator = "validator";
inline constexpr std::string_view kReasoner = "reasoner";
inline constexpr std::string_view kQaReader = "qa_reader";
inline constexpr std::string_view kQaRecite = "qa_recite";
inline constexpr std::string_view kQaSeq2Seq = "qa_seq2seq";
}  // namespace roles

// Checks every invariant of the trace types. Returns one human-readable
// description per violation; an empty list means the trace is well formed.
std::vector<std::string> validate_trace(const ReasoningTrace& trace);

// Whitespace helpers used across modules.
std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);
// First line of `text` that is non-empty after trimming, trimmed; nullopt if none.
std::optional<std::string> first_nonempty_line(std::string_view text);

}  // namespace qacheck
