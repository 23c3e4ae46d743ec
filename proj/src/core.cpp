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

#include "qacheck/core.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <ctime>

#include <fmt/format.h>

namespace qacheck {

std::string_view to_string(Label label) noexcept {
  return label == Label::Supported ? "Supported" : "Refuted";
}

Label label_from_string(std::string_view s) {
  const std::string lower = to_lower(trim(s));
  if (lower == "supported") return Label::Supported;
  if (lower == "refuted") return Label::Refuted;
  throw InvalidArgument("unknown label '" + std::string(s) + "'");
}

std::string_view to_string(QaBackendKind kind) noexcept {
  switch (kind) {
    case QaBackendKind::RetrieverReader:
      return "retriever_reader";
    case QaBackendKind::Seq2Seq:
      return "seq2seq";
    case QaBackendKind::ReciterReader:
      return "reciter_reader";
  }
  return "reciter_reader";
}

std::optional<QaBackendKind> parse_qa_backend(std::string_view name) noexcept {
  for (auto kind : {QaBackendKind::RetrieverReader, QaBackendKind::Seq2Seq, QaBackendKind::ReciterReader}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

const std::vector<std::string>& qa_backend_names() {
  static const std::vector<std::string> names = {"retriever_reader", "seq2seq", "reciter_reader"};
  return names;
}

std::string_view to_string(TraceStatus status) noexcept {
  switch (status) {
    case TraceStatus::Running:
      return "running";
    case TraceStatus::Done:
      return "done";
    case TraceStatus::Error:
      return "error";
  }
  return "error";
}

TraceStatus trace_status_from_string(std::string_view s) {
  if (s == "running") return TraceStatus::Running;
  if (s == "done") return TraceStatus::Done;
  if (s == "error") return TraceStatus::Error;
  throw InvalidArgument("unknown trace status '" + std::string(s) + "'");
}

Timestamp now_ms() noexcept {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

std::string format_timestamp(Timestamp t) {
  const auto ms_total = t.time_since_epoch().count();
  auto secs = static_cast<std::time_t>(ms_total / 1000);
  auto ms = static_cast<int>(ms_total % 1000);
  if (ms < 0) {
    ms += 1000;
    secs -= 1;
  }
  std::tm tm{};
  gmtime_r(&secs, &tm);
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}.{:03d}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                     tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
}

Timestamp parse_timestamp(std::string_view s) {
  int year = 0, mon = 0, day = 0, hour = 0, min = 0, sec = 0, ms = 0;
  const std::string str(s);
  if (std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3dZ", &year, &mon, &day, &hour, &min, &sec, &ms) != 7) {
    throw ParseError("malformed timestamp '" + str + "'");
  }
  std::tm tm{};
  tm.tm_year = year - 1900;
  tm.tm_mon = mon - 1;
  tm.tm_mday = day;
  tm.tm_hour = hour;
  tm.tm_min = min;
  tm.tm_sec = sec;
  const std::time_t secs = timegm(&tm);
  return Timestamp{std::chrono::milliseconds{static_cast<std::int64_t>(secs) * 1000 + ms}};
}

Claim make_claim(std::string id, std::string text, std::optional<Label> gold) {
  if (id.empty()) throw InvalidArgument("claim id must be non-empty");
  if (trim(text).empty()) throw InvalidArgument("claim text must be non-empty");
  return Claim{std::move(id), std::move(text), gold};
}

const QAPair& Context::append(QAPair pair) {
  pair.index = static_cast<int>(pairs_.size()) + 1;
  pairs_.push_back(std::move(pair));
  return pairs_.back();
}

bool Context::contains(std::string_view question, std::string_view answer) const noexcept {
  return std::any_of(pairs_.begin(), pairs_.end(),
                     [&](const QAPair& p) { return p.question == question && p.answer == answer; });
}

Context ReasoningTrace::context() const {
  Context ctx;
  for (const auto& step : steps) {
    if (step.accepted) ctx.append(QAPair{0, step.question, step.answer, step.evidence});
  }
  return ctx;
}

std::vector<std::string> validate_trace(const ReasoningTrace& trace) {
  std::vector<std::string> out;
  if (trace.trace_id.empty()) out.emplace_back("trace_id is empty");
  if (trace.claim.id.empty()) out.emplace_back("claim id is empty");
  if (trim(trace.claim.text).empty()) out.emplace_back("claim text is empty");
  if (trace.max_depth < 1) out.emplace_back("max_depth must be at least 1");

  if (trace.status == TraceStatus::Done && !trace.verdict) out.emplace_back("done trace missing verdict");
  if (trace.status == TraceStatus::Error && !trace.error_detail) out.emplace_back("error trace missing error_detail");
  if (trace.status == TraceStatus::Running && trace.finished_at) out.emplace_back("running trace has finished_at");
  if (trace.status != TraceStatus::Running && !trace.finished_at) out.emplace_back("finished trace missing finished_at");
  if (trace.finished_at && *trace.finished_at < trace.started_at) out.emplace_back("finished_at precedes started_at");
  if (trace.verdict && trim(trace.verdict->rationale).empty()) out.emplace_back("verdict rationale is empty");

  std::size_t accepted = 0;
  int context_length = 0;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& step = trace.steps[i];
    const std::string where = "step " + std::to_string(i + 1);
    if (step.depth < 1) out.push_back(where + ": depth " + std::to_string(step.depth) + " is below 1");
    if (step.depth > trace.max_depth) {
      out.push_back(where + ": depth " + std::to_string(step.depth) + " exceeds max_depth " +
                    std::to_string(trace.max_depth));
    }
    if (!step.accepted && !step.rejection_reason) out.push_back(where + ": rejected step missing rejection_reason");
    if (trim(step.question).empty()) out.push_back(where + ": question is empty");
    if (step.accepted) {
      ++accepted;
      if (trim(step.answer).empty()) out.push_back(where + ": accepted step has empty answer");
      // Each accepted pair extends the context by one, so its depth is its context position.
      context_length = std::max(context_length, step.depth);
    }
    for (const auto& ev : step.evidence) {
      if (trim(ev.text).empty()) out.push_back(where + ": evidence passage with empty text");
      const bool generated = ev.source_id == kGeneratedSource;
      if (generated && ev.score) out.push_back(where + ": generated evidence carries a retrieval score");
      if (!generated && !ev.score) out.push_back(where + ": retrieved evidence '" + ev.source_id + "' missing score");
      if (ev.score && *ev.score < 0.0) out.push_back(where + ": negative evidence score");
    }
    const bool asked = std::any_of(trace.raw_exchanges.begin(), trace.raw_exchanges.end(), [&](const RawExchange& x) {
      if (x.role != roles::kQuestionGenerator) return false;
      auto line = first_nonempty_line(x.completion);
      return line && *line == step.question;
    });
    if (!asked) out.push_back(where + ": no question_generator exchange produced '" + step.question + "'");
  }
  if (accepted != static_cast<std::size_t>(context_length)) {
    out.push_back("accepted step count " + std::to_string(accepted) + " does not match context length " +
                  std::to_string(context_length));
  }

  if (trace.status == TraceStatus::Done) {
    const auto reasoner_calls = std::count_if(trace.raw_exchanges.begin(), trace.raw_exchanges.end(),
                                              [](const RawExchange& x) { return x.role == roles::kReasoner; });
    if (reasoner_calls != 1) {
      out.push_back("done trace has " + std::to_string(reasoner_calls) + " reasoner exchanges, expected 1");
    } else if (trace.raw_exchanges.back().role != roles::kReasoner) {
      out.emplace_back("reasoner exchange is not the last exchange");
    }
  }
  return out;
}

std::string_view trim(std::string_view s) noexcept {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<std::string> first_nonempty_line(std::string_view text) {
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = trim(text.substr(0, nl));
    if (!line.empty()) return std::string(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return std::nullopt;
}

}  // namespace qacheck
