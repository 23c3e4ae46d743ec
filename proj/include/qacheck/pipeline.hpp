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

// The question-guided verification loop.
//
// Each iteration asks the verifier whether the context already settles the
// claim; if not, a question is generated, answered by the QA backend and
// checked by the validator. Accepted pairs extend the context. The reasoner
// produces the verdict once the verifier is satisfied or the context reaches
// max_depth pairs.

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qacheck/core.hpp"
#include "qacheck/genbackend.hpp"
#include "qacheck/prompts.hpp"
#include "qacheck/qa.hpp"

namespace qacheck::pipeline {

class UnparseableCompletion : public Error {
 public:
  using Error::Error;
};

class UnparseableVerdict : public Error {
 public:
  using Error::Error;
};

// lowercase + trim, strip a leading "the answer:", then "yes..." -> true, "no..." -> false.
bool parse_yes_no(std::string_view text);

// Label from the first true/false token after the last "final answer is".
Label parse_final_answer(std::string_view text);

struct PipelineConfig {
  int max_depth = 5;
  int max_regen_attempts = 3;
  QaBackendKind qa_backend = kDefaultQaBackend;

  void validate() const;
};

// Generation backends for the reasoning roles; they may all be the same handle.
struct RoleBackends {
  std::shared_ptr<const gen::Generator> verifier;
  std::shared_ptr<const gen::Generator> generator;
  std::shared_ptr<const gen::Generator> validator;
  std::shared_ptr<const gen::Generator> reasoner;

  static RoleBackends uniform(std::shared_ptr<const gen::Generator> backend);
};

// Rejection reasons recorded on rejected steps.
inline constexpr std::string_view kRejectedByValidator = "validator judged the pair not useful";
inline constexpr std::string_view kRejectedDuplicatePair = "duplicate of a pair already in the context";
inline constexpr std::string_view kRejectedRepeatedQuestion = "repeats a question already rejected at this depth";

// Called with the current trace snapshot after every change: new step, verdict, or failure.
using TraceObserver = std::function<void(const ReasoningTrace&)>;

class Pipeline {
 public:
  Pipeline(PipelineConfig config, RoleBackends backends, std::shared_ptr<const qa::QaBackend> qa,
           std::shared_ptr<const prompts::DemoBank> bank = nullptr);

  bool verify_sufficiency(const Claim& claim, const Context& context, std::vector<RawExchange>* log = nullptr) const;

  // First non-empty completion line, trimmed. `rejected` lists questions that
  // were already turned down at this depth and must not be asked again.
  std::string generate_question(const Claim& claim, const Context& context, std::span<const std::string> rejected,
                                std::vector<RawExchange>* log = nullptr) const;

  // A pair identical to one already in the context is rejected without a backend call.
  bool validate_qa(const Claim& claim, const Context& context, const QAPair& new_pair,
                   std::vector<RawExchange>* log = nullptr) const;

  Verdict reason(const Claim& claim, const Context& context, std::vector<RawExchange>* log = nullptr) const;

  // Runs the full loop. Never throws for role failures: the returned trace has
  // status error and keeps every step and exchange made before the failure.
  ReasoningTrace run_check(const Claim& claim, std::string trace_id, const TraceObserver& observer = {}) const;

  [[nodiscard]] const PipelineConfig& config() const noexcept { return config_; }

 private:
  PipelineConfig config_;
  RoleBackends backends_;
  std::shared_ptr<const qa::QaBackend> qa_;
  std::shared_ptr<const prompts::DemoBank> bank_;
};

// 32 hex chars from a 128-bit random value.
std::string random_trace_id();

}  // namespace qacheck::pipeline
