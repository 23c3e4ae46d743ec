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

// Minimal server-sent-events frame parser for tests.

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace qacheck::testing {

struct SseEvent {
  std::string type;
  nlohmann::json data;
};

inline std::vector<SseEvent> parse_sse(const std::string& text) {
  std::vector<SseEvent> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find("\n\n", pos);
    if (end == std::string::npos) break;
    const auto frame = text.substr(pos, end - pos);
    pos = end + 2;
    if (frame.rfind(':', 0) == 0) continue;  // comment
    SseEvent ev;
    std::size_t lp = 0;
    while (lp < frame.size()) {
      auto le = frame.find('\n', lp);
      if (le == std::string::npos) le = frame.size();
      const auto line = frame.substr(lp, le - lp);
      if (line.rfind("event: ", 0) == 0) ev.type = line.substr(7);
      if (line.rfind("data: ", 0) == 0) ev.data = nlohmann::json::parse(line.substr(6));
      lp = le + 1;
    }
    out.push_back(std::move(ev));
  }
  return out;
}

}  // namespace qacheck::testing
