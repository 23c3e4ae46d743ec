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

// Few-shot prompt rendering for the reasoning roles.
//
// Every prompt is the role's demonstrations joined by blank lines, a
// separator line "--------", and a final query block holding the claim, the
// accumulated context, and any role-specific extras. Rendering is a pure
// function of its inputs and always uses "\n" line endings.

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qacheck/core.hpp"

namespace qacheck::prompts {

class MissingExtra : public Error {
 public:
  using Error::Error;
};

class EmptyClaim : public Error {
 public:
  using Error::Error;
};

enum class Role { Verifier, InitialQuestion, FollowupQuestion, Validator, Reasoner, Reciter };

inline constexpr std::array<Role, 6> kAllRoles = {Role::Verifier,  Role::InitialQuestion, Role::FollowupQuestion,
                                                  Role::Validator, Role::Reasoner,        Role::Reciter};

std::string_view to_string(Role role) noexcept;
std::optional<Role> parse_role(std::string_view name) noexcept;

inline constexpr std::string_view kSeparator = "--------";

enum class Provenance { Published, Authored };

struct Demo {
  std::string text;
  Provenance provenance = Provenance::Authored;
};

class DemoBank {
 public:
  DemoBank() = default;
  explicit DemoBank(std::map<Role, std::vector<Demo>> demos);

  // Parses {role: [{"text": ..., "provenance": "published"|"authored"}]}.
  // Throws ParseError on unknown roles, empty demo text or bad provenance.
  static DemoBank from_json_text(std::string_view text);
  static DemoBank load(const std::filesystem::path& path);
  // The bank compiled into the library.
  static const DemoBank& builtin();

  [[nodiscard]] const std::vector<Demo>& demos(Role role) const;

 private:
  std::map<Role, std::vector<Demo>> demos_;
};

struct RenderExtras {
  std::optional<QAPair> new_pair;           // validator
  std::optional<int> question_index;        // follow-up question
  std::vector<std::string> avoid_questions; // question generation after a rejection
  std::optional<std::string> question;      // reciter
};

struct PromptRender {
  Role role = Role::Verifier;
  std::string text;
  std::string claim_echo;
  std::string context_echo;
};

// "Question i = ...\nAnswer i = ...\n" per pair, in order; empty for an empty context.
std::string render_qa_contexts(const Context& context);
// "Qi: ...\nAi: ...\n" per pair, the reasoner's context layout.
std::string render_reasoner_contexts(const Context& context);
// "Question = ...\nAnswer = ...\n"
std::string render_new_pair(const QAPair& pair);

// Throws EmptyClaim for a blank claim, MissingExtra when the role needs an
// extra that is absent (validator: new_pair; follow-up: non-empty context and
// question_index; reciter: question).
PromptRender render(const DemoBank& bank, Role role, const Claim& claim, const Context& context,
                    const RenderExtras& extra = {});

// Reciter prompt for a bare question; the reciter does not see the claim.
PromptRender render_recite(const DemoBank& bank, std::string_view question);

std::string normalize_newlines(std::string_view text);

}  // namespace qacheck::prompts
