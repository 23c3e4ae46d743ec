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

// Batch evaluation: dataset loading, macro-F1 over {Supported, Refuted}, and
// the JSON / text report.

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qacheck/core.hpp"
#include "qacheck/engine.hpp"
#include "qacheck/trace_store.hpp"

namespace qacheck::eval {

class UnknownLabel : public ParseError {
 public:
  using ParseError::ParseError;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

enum class DatasetFormat { Native, Hover, Feverous };

std::optional<DatasetFormat> parse_format(std::string_view name) noexcept;
std::string_view to_string(DatasetFormat f) noexcept;

struct Dataset {
  std::string name;
  std::vector<Claim> claims;
  std::size_t skipped = 0;  // rows outside the two-label scope (NOT ENOUGH INFO)
};

// native:   JSONL {"id","claim","label": "supported"|"refuted"}
// hover:    JSONL or JSON array, label SUPPORTED | NOT_SUPPORTED, id from "id" or "uid"
// feverous: JSONL or JSON array, label SUPPORTS | REFUTES | NOT ENOUGH INFO (skipped)
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);

struct LabelMetrics {
  double precision = 0.0;  // percent
  double recall = 0.0;     // percent
  double f1 = 0.0;         // percent
  std::size_t support = 0; // gold count
};

struct Metrics {
  LabelMetrics supported;
  LabelMetrics refuted;
  double macro_f1 = 0.0;  // percent, unrounded
};

// Per-label F1 is 0 when precision + recall is 0. Throws EmptyInput or LengthMismatch.
Metrics compute_metrics(std::span<const Label> golds, std::span<const Label> preds);
double macro_f1(std::span<const Label> golds, std::span<const Label> preds);

// Fixed two-decimal display form, e.g. "73.33".
std::string format_percent(double value);

// Verdict assigned to claims whose trace ended in error.
inline constexpr Label kErroredFallback = Label::Refuted;

struct ClaimRow {
  std::string id;
  Label gold = Label::Refuted;
  Label predicted = Label::Refuted;
  std::size_t n_steps = 0;  // accepted QA pairs
  std::string trace_id;
  bool errored = false;
  std::optional<std::string> error_detail;
};

struct EvalReport {
  std::string dataset_name;
  std::size_t n_claims = 0;
  std::size_t skipped = 0;
  std::size_t n_errored = 0;
  Metrics metrics;
  std::vector<ClaimRow> rows;
  nlohmann::json config;
};

// Deterministic per-claim trace id so reruns produce identical reports.
std::string eval_trace_id(std::string_view dataset_name, std::string_view claim_id);

// Runs every claim (up to `concurrency` at once), persists each trace to
// `store` when given, and aggregates metrics in dataset order.
EvalReport run_eval(const Dataset& dataset, const pipeline::Engine& engine, const pipeline::PipelineConfig& config,
                    std::size_t concurrency, const store::TraceStore* store = nullptr);

nlohmann::json report_to_json(const EvalReport& report);
std::string report_to_table(const EvalReport& report);

}  // namespace qacheck::eval
