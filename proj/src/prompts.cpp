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

#include "qacheck/prompts.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "builtin_data.hpp"

namespace qacheck::prompts {
namespace {

const std::vector<Demo> kNoDemos;

void append_avoid_block(std::string& out, const std::vector<std::string>& avoid) {
  if (avoid.empty()) return;
  out += "Do not repeat these questions:\n";
  for (const auto& q : avoid) out += "- " + q + "\n";
}

std::string join_demos(const DemoBank& bank, Role role) {
  std::string out;
  for (const auto& demo : bank.demos(role)) {
    out += normalize_newlines(demo.text);
    out += "\n\n";
  }
  out += kSeparator;
  out += "\n";
  return out;
}

}  // namespace

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::Verifier:
      return "verifier";
    case Role::InitialQuestion:
      return "initial_question";
    case Role::FollowupQuestion:
      return "followup_question";
    case Role::Validator:
      return "validator";
    case Role::Reasoner:
      return "reasoner";
    case Role::Reciter:
      return "reciter";
  }
  return "verifier";
}

std::optional<Role> parse_role(std::string_view name) noexcept {
  for (auto role : kAllRoles) {
    if (to_string(role) == name) return role;
  }
  return std::nullopt;
}

DemoBank::DemoBank(std::map<Role, std::vector<Demo>> demos) : demos_(std::move(demos)) {}

DemoBank DemoBank::from_json_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed demo bank: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("demo bank must be a JSON object keyed by role");
  std::map<Role, std::vector<Demo>> demos;
  for (const auto& [name, list] : j.items()) {
    auto role = parse_role(name);
    if (!role) throw ParseError("demo bank has unknown role '" + name + "'");
    if (!list.is_array()) throw ParseError("demo bank role '" + name + "' must map to a list");
    auto& out = demos[*role];
    for (const auto& item : list) {
      Demo demo;
      demo.text = item.value("text", std::string());
      if (trim(demo.text).empty()) throw ParseError("demo bank role '" + name + "' has an empty demo");
      const auto prov = item.value("provenance", std::string("authored"));
      if (prov == "published") {
        demo.provenance = Provenance::Published;
      } else if (prov == "authored") {
        demo.provenance = Provenance::Authored;
      } else {
        throw ParseError("demo bank role '" + name + "' has unknown provenance '" + prov + "'");
      }
      out.push_back(std::move(demo));
    }
  }
  return DemoBank(std::move(demos));
}

DemoBank DemoBank::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open demo bank " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

const DemoBank& DemoBank::builtin() {
  static const DemoBank bank = from_json_text(builtin::kDemoBankJson);
  return bank;
}

const std::vector<Demo>& DemoBank::demos(Role role) const {
  auto it = demos_.find(role);
  return it == demos_.end() ? kNoDemos : it->second;
}

std::string render_qa_contexts(const Context& context) {
  std::string out;
  for (const auto& p : context.pairs()) {
    const auto i = std::to_string(p.index);
    out += "Question " + i + " = " + p.question + "\n";
    out += "Answer " + i + " = " + p.answer + "\n";
  }
  return out;
}

std::string render_reasoner_contexts(const Context& context) {
  std::string out;
  for (const auto& p : context.pairs()) {
    const auto i = std::to_string(p.index);
    out += "Q" + i + ": " + p.question + "\n";
    out += "A" + i + ": " + p.answer + "\n";
  }
  return out;
}

std::string render_new_pair(const QAPair& pair) {
  return "Question = " + pair.question + "\nAnswer = " + pair.answer + "\n";
}

PromptRender render(const DemoBank& bank, Role role, const Claim& claim, const Context& context,
                    const RenderExtras& extra) {
  if (role == Role::Reciter) {
    if (!extra.question) throw MissingExtra("reciter prompt requires a question");
    return render_recite(bank, *extra.question);
  }
  if (trim(claim.text).empty()) throw EmptyClaim("cannot render a prompt for an empty claim");

  PromptRender r;
  r.role = role;
  r.claim_echo = claim.text;
  std::string block = "Claim = " + claim.text + "\n";
  switch (role) {
    case Role::Verifier:
      r.context_echo = render_qa_contexts(context);
      block += "We already know the following:\n" + r.context_echo;
      block += "Can we know whether the claim is true or false now? Yes or no?\n";
      block += "Prediction = ";
      break;
    case Role::InitialQuestion:
      block += "To verify the above claim, we can first ask a simple question:\n";
      append_avoid_block(block, extra.avoid_questions);
      block += "Question = ";
      break;
    case Role::FollowupQuestion:
      if (context.empty()) throw MissingExtra("follow-up question prompt requires a non-empty context");
      if (!extra.question_index) throw MissingExtra("follow-up question prompt requires a question index");
      r.context_echo = render_qa_contexts(context);
      block += "We already know the following:\n" + r.context_echo;
      block += "To verify the claim, what is the next question we need to know the answer to?\n";
      append_avoid_block(block, extra.avoid_questions);
      block += "Question " + std::to_string(*extra.question_index) + " = ";
      break;
    case Role::Validator:
      if (!extra.new_pair) throw MissingExtra("validator prompt requires the new QA pair");
      r.context_echo = render_qa_contexts(context);
      block += "We already know the following:\n" + r.context_echo;
      block += "Now we further know:\n" + render_new_pair(*extra.new_pair);
      block += "Does the QA pair have additional knowledge useful for verifying the claim?\n";
      block += "The answer: ";
      break;
    case Role::Reasoner:
      r.context_echo = render_reasoner_contexts(context);
      block = "Contexts:\n" + r.context_echo + block;
      block += "Is this claim true or false?\n";
      block += "Answer:\n";
      block += "Therefore, the final answer is";
      break;
    case Role::Reciter:
      break;
  }
  r.text = normalize_newlines(join_demos(bank, role) + block);
  return r;
}

PromptRender render_recite(const DemoBank& bank, std::string_view question) {
  if (trim(question).empty()) throw MissingExtra("reciter prompt requires a non-empty question");
  PromptRender r;
  r.role = Role::Reciter;
  std::string block = "Recite a short factual passage that contains the information needed to answer: ";
  block += question;
  block += "\nPassage: ";
  r.text = normalize_newlines(join_demos(bank, Role::Reciter) + block);
  return r;
}

std::string normalize_newlines(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r') {
      out.push_back('\n');
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

}  // namespace qacheck::prompts
