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

// Canonical JSON form of the core types. Field names are snake_case and
// timestamps are RFC 3339 strings; absent optionals serialize as null.

#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "qacheck/core.hpp"

namespace qacheck {

void to_json(nlohmann::json& j, Label v);
void from_json(const nlohmann::json& j, Label& v);
void to_json(nlohmann::json& j, const Claim& v);
void from_json(const nlohmann::json& j, Claim& v);
void to_json(nlohmann::json& j, const EvidencePassage& v);
void from_json(const nlohmann::json& j, EvidencePassage& v);
void to_json(nlohmann::json& j, const QAPair& v);
void from_json(const nlohmann::json& j, QAPair& v);
void to_json(nlohmann::json& j, const Context& v);
void from_json(const nlohmann::json& j, Context& v);
void to_json(nlohmann::json& j, const ReasoningStep& v);
void from_json(const nlohmann::json& j, ReasoningStep& v);
void to_json(nlohmann::json& j, const Verdict& v);
void from_json(const nlohmann::json& j, Verdict& v);
void to_json(nlohmann::json& j, const RawExchange& v);
void from_json(const nlohmann::json& j, RawExchange& v);
void to_json(nlohmann::json& j, const ReasoningTrace& v);
void from_json(const nlohmann::json& j, ReasoningTrace& v);

// Pretty-printed canonical text (2-space indent, trailing newline).
std::string trace_to_json_text(const ReasoningTrace& trace);
// Throws ParseError on malformed input.
ReasoningTrace trace_from_json_text(const std::string& text);

}  // namespace qacheck
