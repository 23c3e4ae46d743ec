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

#include "qacheck/json_io.hpp"

using nlohmann::json;

namespace qacheck {
namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

}  // namespace

void to_json(json& j, Label v) { j = std::string(to_string(v)); }
void from_json(const json& j, Label& v) { v = label_from_string(j.get<std::string>()); }

void to_json(json& j, const Claim& v) {
  j = json{{"id", v.id}, {"text", v.text}, {"gold_label", opt(v.gold_label)}};
}
void from_json(const json& j, Claim& v) {
  v.id = j.at("id").get<std::string>();
  v.text = j.at("text").get<std::string>();
  v.gold_label = get_opt<Label>(j, "gold_label");
}

void to_json(json& j, const EvidencePassage& v) {
  j = json{{"source_id", v.source_id}, {"title", opt(v.title)}, {"text", v.text}, {"score", opt(v.score)}};
}
void from_json(const json& j, EvidencePassage& v) {
  v.source_id = j.at("source_id").get<std::string>();
  v.title = get_opt<std::string>(j, "title");
  v.text = j.at("text").get<std::string>();
  v.score = get_opt<double>(j, "score");
}

void to_json(json& j, const QAPair& v) {
  j = json{{"index", v.index}, {"question", v.question}, {"answer", v.answer}, {"evidence", v.evidence}};
}
void from_json(const json& j, QAPair& v) {
  v.index = j.at("index").get<int>();
  v.question = j.at("question").get<std::string>();
  v.answer = j.at("answer").get<std::string>();
  v.evidence = j.value("evidence", std::vector<EvidencePassage>{});
}

void to_json(json& j, const Context& v) { j = json{{"pairs", v.pairs()}}; }
void from_json(const json& j, Context& v) {
  v = Context{};
  for (auto pair : j.at("pairs").get<std::vector<QAPair>>()) v.append(std::move(pair));
}

void to_json(json& j, const ReasoningStep& v) {
  j = json{{"depth", v.depth},       {"question", v.question}, {"answer", v.answer},
           {"evidence", v.evidence}, {"accepted", v.accepted}, {"rejection_reason", opt(v.rejection_reason)}};
}
void from_json(const json& j, ReasoningStep& v) {
  v.depth = j.at("depth").get<int>();
  v.question = j.at("question").get<std::string>();
  v.answer = j.at("answer").get<std::string>();
  v.evidence = j.value("evidence", std::vector<EvidencePassage>{});
  v.accepted = j.at("accepted").get<bool>();
  v.rejection_reason = get_opt<std::string>(j, "rejection_reason");
}

void to_json(json& j, const Verdict& v) { j = json{{"label", v.label}, {"rationale", v.rationale}}; }
void from_json(const json& j, Verdict& v) {
  v.label = j.at("label").get<Label>();
  v.rationale = j.at("rationale").get<std::string>();
}

void to_json(json& j, const RawExchange& v) {
  j = json{{"role", v.role}, {"prompt", v.prompt}, {"completion", v.completion}};
}
void from_json(const json& j, RawExchange& v) {
  v.role = j.at("role").get<std::string>();
  v.prompt = j.at("prompt").get<std::string>();
  v.completion = j.at("completion").get<std::string>();
}

void to_json(json& j, const ReasoningTrace& v) {
  j = json{{"trace_id", v.trace_id},
           {"claim", v.claim},
           {"qa_backend", std::string(to_string(v.qa_backend))},
           {"max_depth", v.max_depth},
           {"steps", v.steps},
           {"verdict", opt(v.verdict)},
           {"raw_exchanges", v.raw_exchanges},
           {"started_at", format_timestamp(v.started_at)},
           {"finished_at", v.finished_at ? json(format_timestamp(*v.finished_at)) : json(nullptr)},
           {"status", std::string(to_string(v.status))},
           {"error_detail", opt(v.error_detail)}};
}
void from_json(const json& j, ReasoningTrace& v) {
  v.trace_id = j.at("trace_id").get<std::string>();
  v.claim = j.at("claim").get<Claim>();
  const auto backend = j.at("qa_backend").get<std::string>();
  auto kind = parse_qa_backend(backend);
  if (!kind) throw ParseError("unknown qa_backend '" + backend + "'");
  v.qa_backend = *kind;
  v.max_depth = j.value("max_depth", 5);
  v.steps = j.at("steps").get<std::vector<ReasoningStep>>();
  v.verdict = get_opt<Verdict>(j, "verdict");
  v.raw_exchanges = j.at("raw_exchanges").get<std::vector<RawExchange>>();
  v.started_at = parse_timestamp(j.at("started_at").get<std::string>());
  auto finished = get_opt<std::string>(j, "finished_at");
  v.finished_at = finished ? std::optional<Timestamp>(parse_timestamp(*finished)) : std::nullopt;
  v.status = trace_status_from_string(j.at("status").get<std::string>());
  v.error_detail = get_opt<std::string>(j, "error_detail");
}

std::string trace_to_json_text(const ReasoningTrace& trace) { return json(trace).dump(2) + "\n"; }

ReasoningTrace trace_from_json_text(const std::string& text) {
  try {
    return json::parse(text).get<ReasoningTrace>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed trace JSON: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("malformed trace JSON: ") + e.what());
  }
}

}  // namespace qacheck
