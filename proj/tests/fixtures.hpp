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

// Builders for the checked-in fixtures: the Onsager transcript, the 20-claim
// evaluation set, and the prompt goldens.

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qacheck/engine.hpp"
#include "qacheck/pipeline.hpp"
#include "support.hpp"

namespace qacheck::testing {

struct GoldenCase {
  std::string file;  // name under tests/golden
  std::string text;  // rendered prompt
};

inline QAPair qa_pair(std::string_view q, std::string_view a) {
  QAPair p;
  p.question = std::string(q);
  p.answer = std::string(a);
  return p;
}

// All six roles over one claim: `first` is the known pair, `second` the new one.
inline std::vector<GoldenCase> golden_cases_for(const std::string& name, std::string_view claim_text,
                                                const QAPair& first, const QAPair& second) {
  using prompts::Role;
  const auto& bank = prompts::DemoBank::builtin();
  const auto claim = make_claim(name, std::string(claim_text));
  Context one;
  one.append(first);
  Context both = one;
  both.append(second);

  std::vector<GoldenCase> out;
  const auto add = [&](Role role, const std::string& text) {
    out.push_back({name + "_" + std::string(prompts::to_string(role)) + ".txt", text});
  };
  add(Role::Verifier, prompts::render(bank, Role::Verifier, claim, one).text);
  add(Role::InitialQuestion, prompts::render(bank, Role::InitialQuestion, claim, Context{}).text);
  prompts::RenderExtras followup;
  followup.question_index = 2;
  add(Role::FollowupQuestion, prompts::render(bank, Role::FollowupQuestion, claim, one, followup).text);
  prompts::RenderExtras validator;
  validator.new_pair = second;
  add(Role::Validator, prompts::render(bank, Role::Validator, claim, one, validator).text);
  add(Role::Reasoner, prompts::render(bank, Role::Reasoner, claim, both).text);
  add(Role::Reciter, prompts::render_recite(bank, first.question).text);
  return out;
}

inline std::vector<GoldenCase> golden_cases() {
  auto out = golden_cases_for("superdrag", kSuperdragClaim, qa_pair(kSuperdragQ1, "Yes"),
                              qa_pair(kSuperdragQ2, "Yes"));
  auto onsager =
      golden_cases_for("onsager", kOnsagerClaim, qa_pair(kOnsagerQ1, kOnsagerA1), qa_pair(kOnsagerQ2, kOnsagerA2));
  out.insert(out.end(), onsager.begin(), onsager.end());
  return out;
}

// Twenty claims, ten per gold label. `predicted` is what the scripted reasoner
// answers; nullopt makes it reply with an unparseable verdict.
struct EvalClaimSpec {
  const char* id;
  const char* claim;
  Label gold;
  std::optional<Label> predicted;
};

inline const std::array<EvalClaimSpec, 20>& eval_claims() {
  constexpr auto S = Label::Supported;
  constexpr auto R = Label::Refuted;
  static const std::array<EvalClaimSpec, 20> kClaims = {{
      {"c01", "The Danube flows through Vienna.", S, S},
      {"c02", "Mount Kilimanjaro is in Tanzania.", S, S},
      {"c03", "The Louvre is located in Paris.", S, S},
      {"c04", "Ada Lovelace worked with Charles Babbage.", S, S},
      {"c05", "The Great Barrier Reef lies off Queensland.", S, S},
      {"c06", "Johann Sebastian Bach was born in Eisenach.", S, S},
      {"c07", "The Atacama Desert is in Chile.", S, S},
      {"c08", "Alan Turing was born in London.", S, R},
      {"c09", "Lake Baikal is the deepest lake on Earth.", S, R},
      {"c10", "Frida Kahlo was a Mexican painter.", S, R},
      {"c11", "The Thames flows through Madrid.", R, R},
      {"c12", "Mount Fuji is in South Korea.", R, R},
      {"c13", "The Prado Museum is located in Rome.", R, R},
      {"c14", "Isaac Newton was born in the twentieth century.", R, R},
      {"c15", "The Sahara is the smallest desert in Africa.", R, R},
      {"c16", "Ludwig van Beethoven was born in Lisbon.", R, R},
      {"c17", "The Gobi Desert is in Brazil.", R, R},
      {"c18", "Nikola Tesla was born in Canada.", R, R},
      {"c19", "Lake Victoria is in South America.", R, S},
      {"c20", "Vincent van Gogh was a Japanese sculptor.", R, std::nullopt},
  }};
  return kClaims;
}

// Hand-computed metrics for eval_claims() (percent).
//   Supported: tp 7, fp 1, fn 3 -> P 87.5, R 70, F1 77.78
//   Refuted (c20 errors and falls back to Refuted): tp 9, fp 3, fn 1 -> P 75, R 90, F1 81.82
inline constexpr double kEvalSupportedF1 = 100.0 * 2.0 * 0.875 * 0.7 / (0.875 + 0.7);
inline constexpr double kEvalRefutedF1 = 100.0 * 2.0 * 0.75 * 0.9 / (0.75 + 0.9);
inline constexpr double kEvalMacroF1 = (kEvalSupportedF1 + kEvalRefutedF1) / 2.0;

// One question per claim, then the verifier is satisfied.
inline std::string eval_responder(const gen::GenRequest& req) {
  const std::string_view block = final_block(req.prompt);
  const EvalClaimSpec* spec = nullptr;
  for (const auto& c : eval_claims()) {
    if (contains(block, c.claim)) spec = &c;
  }
  switch (classify_prompt(req.prompt)) {
    case PromptKind::Verifier:
      return contains(block, "Question 1 = ") ? "Yes, we can know." : "No, we cannot know.";
    case PromptKind::InitialQuestion:
    case PromptKind::FollowupQuestion:
      return spec ? std::string("Is it true that ") + spec->claim : "Is it true?";
    case PromptKind::Validator:
      return "Yes";
    case PromptKind::Recite:
      return "A short passage about the subject.";
    case PromptKind::Reader:
    case PromptKind::Seq2Seq:
      return "yes";
    case PromptKind::Reasoner:
      if (spec == nullptr || !spec->predicted) return "I cannot decide.";
      return *spec->predicted == Label::Supported ? "Therefore, the final answer is: True."
                                                   : "Therefore, the final answer is: False.";
  }
  return "";
}

// Runs `responder` over every claim through a recording backend and returns it.
inline std::shared_ptr<gen::RecordingBackend> record(gen::FunctionBackend::Fn responder,
                                                     const std::vector<Claim>& claims) {
  auto recorder = std::make_shared<gen::RecordingBackend>(
      std::make_shared<gen::FunctionBackend>(std::move(responder), "fixture"));
  const pipeline::Engine engine(pipeline::RoleBackends::uniform(recorder), recorder, nullptr);
  const auto pipe = engine.make_pipeline(pipeline::PipelineConfig{});
  for (const auto& claim : claims) (void)pipe.run_check(claim, "0");
  return recorder;
}

inline void write_fixtures(const std::filesystem::path& fixtures, const std::filesystem::path& goldens) {
  std::filesystem::create_directories(fixtures);
  std::filesystem::create_directories(goldens);

  const nlohmann::json scripted = {{"kind", "scripted"}, {"script_path", "onsager_script.jsonl"}};
  record(onsager_responder, {make_claim("onsager", std::string(kOnsagerClaim))})
      ->write_script(fixtures / "onsager_script.jsonl");
  write_file(fixtures / "onsager_backends.json", nlohmann::json{{"default", scripted}}.dump(2) + "\n");

  std::vector<Claim> claims;
  std::string dataset;
  for (const auto& c : eval_claims()) {
    claims.push_back(make_claim(c.id, c.claim, c.gold));
    dataset += nlohmann::json{{"id", c.id}, {"claim", c.claim}, {"label", to_lower(to_string(c.gold))}}.dump() + "\n";
  }
  write_file(fixtures / "eval20.jsonl", dataset);
  record(eval_responder, claims)->write_script(fixtures / "eval20_script.jsonl");
  const nlohmann::json eval_scripted = {{"kind", "scripted"}, {"script_path", "eval20_script.jsonl"}};
  write_file(fixtures / "eval20_backends.json", nlohmann::json{{"default", eval_scripted}}.dump(2) + "\n");

  for (const auto& g : golden_cases()) write_file(goldens / g.file, g.text);
}

}  // namespace qacheck::testing
