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

// Helpers shared by the test binaries and the fixture generator.

#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qacheck/core.hpp"
#include "qacheck/genbackend.hpp"
#include "qacheck/prompts.hpp"

namespace qacheck::testing {

inline std::filesystem::path source_dir() { return QACHECK_SOURCE_DIR; }
inline std::filesystem::path fixtures_dir() { return source_dir() / "tests" / "fixtures"; }
inline std::filesystem::path golden_dir() { return source_dir() / "tests" / "golden"; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("qacheck-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}
inline bool contains(std::string_view s, std::string_view needle) { return s.find(needle) != std::string_view::npos; }

// The prompt's final block: everything after the last separator line.
inline std::string_view final_block(std::string_view prompt) {
  const auto pos = prompt.rfind("\n--------\n");
  return pos == std::string_view::npos ? prompt : prompt.substr(pos + 10);
}

// Which role a rendered prompt belongs to, judged from its final block only.
enum class PromptKind { Verifier, InitialQuestion, FollowupQuestion, Validator, Reasoner, Recite, Reader, Seq2Seq };

inline PromptKind classify_prompt(std::string_view prompt) {
  const auto block = final_block(prompt);
  if (ends_with(block, "Prediction = ")) return PromptKind::Verifier;
  if (ends_with(block, "The answer: ")) return PromptKind::Validator;
  if (ends_with(block, "Therefore, the final answer is")) return PromptKind::Reasoner;
  if (ends_with(block, "Passage: ")) return PromptKind::Recite;
  if (contains(block, "one-sentence evidence statement")) return PromptKind::Seq2Seq;
  if (ends_with(block, "Answer:")) return PromptKind::Reader;
  if (ends_with(block, "Question = ")) return PromptKind::InitialQuestion;
  return PromptKind::FollowupQuestion;
}

// Onsager example: the two questions, their answers and the final rationale.
inline constexpr std::string_view kOnsagerClaim = "Lars Onsager won the Nobel Prize when he was 30 years old.";
inline constexpr std::string_view kOnsagerQ1 = "When Lars Onsager won the Nobel Prize?";
inline constexpr std::string_view kOnsagerA1 = "1968";
inline constexpr std::string_view kOnsagerQ2 = "When was Lars Onsager born?";
inline constexpr std::string_view kOnsagerA2 = "1903";
inline constexpr std::string_view kOnsagerRationale =
    "Lars Onsager won the Nobel Prize in 1968.\nLars Onsager was born in 1903.\nTherefore, the final answer is: False.";

inline constexpr std::string_view kSuperdragClaim = "Superdrag and Collective Soul are both rock bands.";
inline constexpr std::string_view kSuperdragQ1 = "Is Superdrag a rock band?";
inline constexpr std::string_view kSuperdragQ2 = "Is Collective Soul a rock band?";

// Answers each prompt the way the Onsager transcript does.
inline std::string onsager_responder(const gen::GenRequest& req) {
  const std::string_view p = req.prompt;
  const auto block = final_block(p);
  switch (classify_prompt(p)) {
    case PromptKind::Verifier:
      return contains(block, kOnsagerQ2) ? "Yes, we can know." : "No, we cannot know.";
    case PromptKind::InitialQuestion:
      return std::string(kOnsagerQ1);
    case PromptKind::FollowupQuestion:
      return std::string(kOnsagerQ2);
    case PromptKind::Validator:
      return "Yes";
    case PromptKind::Reasoner:
      return std::string(kOnsagerRationale);
    case PromptKind::Recite:
      return contains(block, kOnsagerQ2)
                 ? "Lars Onsager (November 27, 1903 - October 5, 1976) was a Norwegian-American physical chemist."
                 : "Lars Onsager received the Nobel Prize in Chemistry in 1968.";
    case PromptKind::Reader:
      return std::string(contains(block, "Question: " + std::string(kOnsagerQ2)) ? kOnsagerA2 : kOnsagerA1);
    case PromptKind::Seq2Seq:
      return "unknown";
  }
  return "";
}

}  // namespace qacheck::testing
