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

#include "qacheck/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <random>

namespace qacheck::pipeline {
namespace {

constexpr std::string_view kFinalAnswerPhrase = "final answer is";
constexpr std::string_view kReasonerPromptTail = "Therefore, the final answer is";

// Short-answer roles stop at the first blank line.
gen::GenRequest short_answer_shape() { return gen::GenRequest{"", 32, 0.0, {"\n\n"}}; }
gen::GenRequest question_shape() { return gen::GenRequest{"", 64, 0.0, {}}; }
gen::GenRequest reasoner_shape() { return gen::GenRequest{"", 256, 0.0, {}}; }

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

std::optional<Label> try_parse_final_answer(std::string_view text) {
  const auto lower = to_lower(text);
  const auto pos = lower.rfind(kFinalAnswerPhrase);
  if (pos == std::string::npos) return std::nullopt;
  std::string_view rest = std::string_view(lower).substr(pos + kFinalAnswerPhrase.size());
  const auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  std::size_t i = 0;
  while (i < rest.size() && !is_word(rest[i])) ++i;
  std::size_t j = i;
  while (j < rest.size() && is_word(rest[j])) ++j;
  const auto token = rest.substr(i, j - i);
  if (token == "true") return Label::Supported;
  if (token == "false") return Label::Refuted;
  return std::nullopt;
}

void notify(const TraceObserver& observer, const ReasoningTrace& trace) {
  if (observer) observer(trace);
}

}  // namespace

bool parse_yes_no(std::string_view text) {
  std::string s = std::string(trim(to_lower(text)));
  constexpr std::string_view kAnswerPrefix = "the answer:";
  if (starts_with(s, kAnswerPrefix)) s = std::string(trim(std::string_view(s).substr(kAnswerPrefix.size())));
  if (starts_with(s, "yes")) return true;
  if (starts_with(s, "no")) return false;
  throw UnparseableCompletion("expected a yes/no answer, got: \"" + std::string(trim(text)).substr(0, 80) + "\"");
}

Label parse_final_answer(std::string_view text) {
  if (auto label = try_parse_final_answer(text)) return *label;
  throw UnparseableVerdict("no \"final answer is\" clause resolving to true or false in: \"" +
                           std::string(trim(text)).substr(0, 120) + "\"");
}

void PipelineConfig::validate() const {
  if (max_depth < 1) throw InvalidArgument("max_depth must be >= 1");
  if (max_regen_attempts < 1) throw InvalidArgument("max_regen_attempts must be >= 1");
}

RoleBackends RoleBackends::uniform(std::shared_ptr<const gen::Generator> backend) {
  return RoleBackends{backend, backend, backend, backend};
}

Pipeline::Pipeline(PipelineConfig config, RoleBackends backends, std::shared_ptr<const qa::QaBackend> qa,
                   std::shared_ptr<const prompts::DemoBank> bank)
    : config_(config), backends_(std::move(backends)), qa_(std::move(qa)), bank_(std::move(bank)) {
  config_.validate();
  if (!backends_.verifier || !backends_.generator || !backends_.validator || !backends_.reasoner) {
    throw InvalidArgument("every reasoning role needs a generation backend");
  }
  if (!qa_) throw InvalidArgument("pipeline needs a QA backend");
  if (!bank_) bank_ = std::shared_ptr<const prompts::DemoBank>(&prompts::DemoBank::builtin(), [](const auto*) {});
  config_.qa_backend = qa_->kind();
}

bool Pipeline::verify_sufficiency(const Claim& claim, const Context& context, std::vector<RawExchange>* log) const {
  auto prompt = prompts::render(*bank_, prompts::Role::Verifier, claim, context).text;
  const auto completion = call_backend(*backends_.verifier, roles::kVerifier, std::move(prompt), short_answer_shape(), log);
  return parse_yes_no(completion);
}

std::string Pipeline::generate_question(const Claim& claim, const Context& context,
                                        std::span<const std::string> rejected, std::vector<RawExchange>* log) const {
  prompts::RenderExtras extra;
  extra.avoid_questions.assign(rejected.begin(), rejected.end());
  prompts::Role role = prompts::Role::InitialQuestion;
  if (!context.empty()) {
    role = prompts::Role::FollowupQuestion;
    extra.question_index = static_cast<int>(context.size()) + 1;
  }
  auto prompt = prompts::render(*bank_, role, claim, context, extra).text;
  const auto completion =
      call_backend(*backends_.generator, roles::kQuestionGenerator, std::move(prompt), question_shape(), log);
  auto line = first_nonempty_line(completion);
  if (!line) throw EmptyGeneration("question generator returned no question");
  return *line;
}

bool Pipeline::validate_qa(const Claim& claim, const Context& context, const QAPair& new_pair,
                           std::vector<RawExchange>* log) const {
  if (trim(new_pair.question).empty() || trim(new_pair.answer).empty()) {
    throw InvalidArgument("QA pair to validate must have a question and an answer");
  }
  if (context.contains(new_pair.question, new_pair.answer)) return false;
  prompts::RenderExtras extra;
  extra.new_pair = new_pair;
  auto prompt = prompts::render(*bank_, prompts::Role::Validator, claim, context, extra).text;
  const auto completion =
      call_backend(*backends_.validator, roles::kValidator, std::move(prompt), short_answer_shape(), log);
  return parse_yes_no(completion);
}

Verdict Pipeline::reason(const Claim& claim, const Context& context, std::vector<RawExchange>* log) const {
  auto prompt = prompts::render(*bank_, prompts::Role::Reasoner, claim, context).text;
  const auto completion = call_backend(*backends_.reasoner, roles::kReasoner, std::move(prompt), reasoner_shape(), log);
  if (auto label = try_parse_final_answer(completion)) return Verdict{*label, completion};
  // The prompt ends mid-sentence, so a bare ": False." continues the final-answer clause.
  std::string continued = std::string(kReasonerPromptTail) + completion;
  if (auto label = try_parse_final_answer(continued)) return Verdict{*label, std::move(continued)};
  return Verdict{parse_final_answer(completion), completion};
}

ReasoningTrace Pipeline::run_check(const Claim& claim, std::string trace_id, const TraceObserver& observer) const {
  ReasoningTrace trace;
  trace.trace_id = std::move(trace_id);
  trace.claim = claim;
  trace.qa_backend = qa_->kind();
  trace.max_depth = config_.max_depth;
  trace.started_at = now_ms();
  trace.status = TraceStatus::Running;
  notify(observer, trace);

  auto* log = &trace.raw_exchanges;
  Context context;
  try {
    if (trim(claim.text).empty()) throw prompts::EmptyClaim("claim text is empty");
    while (static_cast<int>(context.size()) < config_.max_depth && !verify_sufficiency(claim, context, log)) {
      const int depth = static_cast<int>(context.size()) + 1;
      std::vector<std::string> rejected;
      std::optional<QAPair> last_candidate;
      bool accepted = false;

      for (int attempt = 0; attempt < config_.max_regen_attempts && !accepted; ++attempt) {
        auto question = generate_question(claim, context, rejected, log);
        if (std::find(rejected.begin(), rejected.end(), question) != rejected.end()) {
          trace.steps.push_back(
              ReasoningStep{depth, question, "", {}, false, std::string(kRejectedRepeatedQuestion)});
          notify(observer, trace);
          continue;
        }
        auto result = qa_->answer(question, log);
        QAPair pair{0, question, result.answer, result.evidence};
        const bool duplicate = context.contains(pair.question, pair.answer);
        if (!duplicate) last_candidate = pair;
        if (validate_qa(claim, context, pair, log)) {
          trace.steps.push_back(ReasoningStep{depth, pair.question, pair.answer, pair.evidence, true, std::nullopt});
          context.append(std::move(pair));
          accepted = true;
        } else {
          trace.steps.push_back(ReasoningStep{
              depth, pair.question, pair.answer, pair.evidence, false,
              std::string(duplicate ? kRejectedDuplicatePair : kRejectedByValidator)});
          rejected.push_back(std::move(question));
        }
        notify(observer, trace);
      }

      if (!accepted) {
        // Out of attempts: keep the last new candidate so the loop always progresses.
        // With nothing new to add the context cannot grow, so go straight to the verdict.
        if (!last_candidate) break;
        trace.steps.push_back(ReasoningStep{depth, last_candidate->question, last_candidate->answer,
                                            last_candidate->evidence, true, std::nullopt});
        context.append(std::move(*last_candidate));
        notify(observer, trace);
      }
    }
    trace.verdict = reason(claim, context, log);
    trace.status = TraceStatus::Done;
  } catch (const std::exception& e) {
    trace.status = TraceStatus::Error;
    trace.error_detail = e.what();
  }
  trace.finished_at = now_ms();
  notify(observer, trace);
  return trace;
}

std::string random_trace_id() {
  thread_local std::mt19937_64 rng{[] {
    std::random_device rd;
    std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
    return std::mt19937_64(seq);
  }()};
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buf;
}

}  // namespace qacheck::pipeline
