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

#include "qacheck/evalharness.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>

#include "qacheck/genbackend.hpp"
#include "qacheck/json_io.hpp"

using nlohmann::json;

namespace qacheck::eval {
namespace {

// A parsed dataset row with the line (JSONL) or element (array) number it came from.
struct RawRow {
  json value;
  std::size_t line = 0;
};

std::vector<RawRow> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  std::vector<RawRow> rows;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    json arr;
    try {
      arr = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed dataset JSON array: ") + e.what());
    }
    for (std::size_t i = 0; i < arr.size(); ++i) rows.push_back(RawRow{arr[i], i + 1});
    return rows;
  }
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(RawRow{json::parse(line), line_no});
    } catch (const json::parse_error&) {
      throw ParseError("malformed dataset row", line_no);
    }
  }
  return rows;
}

std::string row_id(const json& row, std::size_t line) {
  for (const char* key : {"id", "uid", "idx"}) {
    if (auto it = row.find(key); it != row.end() && !it->is_null()) {
      return it->is_string() ? it->get<std::string>() : it->dump();
    }
  }
  return "row-" + std::to_string(line);
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

LabelMetrics label_metrics(std::span<const Label> golds, std::span<const Label> preds, Label label) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const bool g = golds[i] == label;
    const bool p = preds[i] == label;
    if (g && p) ++tp;
    if (!g && p) ++fp;
    if (g && !p) ++fn;
  }
  LabelMetrics m;
  m.support = tp + fn;
  const double precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double f1 = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
  m.precision = 100.0 * precision;
  m.recall = 100.0 * recall;
  m.f1 = 100.0 * f1;
  return m;
}

json label_json(const LabelMetrics& m) {
  return json{{"precision", round2(m.precision)},
              {"recall", round2(m.recall)},
              {"f1", round2(m.f1)},
              {"support", m.support}};
}

}  // namespace

std::optional<DatasetFormat> parse_format(std::string_view name) noexcept {
  if (name == "native") return DatasetFormat::Native;
  if (name == "hover") return DatasetFormat::Hover;
  if (name == "feverous") return DatasetFormat::Feverous;
  return std::nullopt;
}

std::string_view to_string(DatasetFormat f) noexcept {
  switch (f) {
    case DatasetFormat::Native:
      return "native";
    case DatasetFormat::Hover:
      return "hover";
    case DatasetFormat::Feverous:
      return "feverous";
  }
  return "native";
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  Dataset ds;
  ds.name = path.stem().string();
  std::unordered_set<std::string> ids;
  for (const auto& [row, line] : read_rows(path)) {
    if (!row.is_object()) throw ParseError("dataset row is not an object", line);
    const auto claim_it = row.find("claim");
    if (claim_it == row.end() || !claim_it->is_string()) throw ParseError("dataset row has no \"claim\" string", line);
    const auto label_it = row.find("label");
    if (label_it == row.end() || !label_it->is_string()) throw ParseError("dataset row has no \"label\" string", line);
    const auto raw_label = label_it->get<std::string>();
    const auto id = row_id(row, line);

    std::optional<Label> label;
    switch (format) {
      case DatasetFormat::Native: {
        const auto l = to_lower(raw_label);
        if (l == "supported") label = Label::Supported;
        if (l == "refuted") label = Label::Refuted;
        break;
      }
      case DatasetFormat::Hover:
        if (raw_label == "SUPPORTED") label = Label::Supported;
        if (raw_label == "NOT_SUPPORTED") label = Label::Refuted;
        break;
      case DatasetFormat::Feverous:
        if (raw_label == "SUPPORTS") label = Label::Supported;
        if (raw_label == "REFUTES") label = Label::Refuted;
        if (raw_label == "NOT ENOUGH INFO") {
          ++ds.skipped;
          continue;
        }
        break;
    }
    if (!label) throw UnknownLabel("row '" + id + "' has unknown label '" + raw_label + "'", line);
    if (!ids.insert(id).second) throw ParseError("duplicate claim id '" + id + "'", line);
    try {
      ds.claims.push_back(make_claim(id, claim_it->get<std::string>(), label));
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), line);
    }
  }
  return ds;
}

Metrics compute_metrics(std::span<const Label> golds, std::span<const Label> preds) {
  if (golds.size() != preds.size()) {
    throw LengthMismatch("gold and prediction lists differ in length (" + std::to_string(golds.size()) + " vs " +
                         std::to_string(preds.size()) + ")");
  }
  if (golds.empty()) throw EmptyInput("no labels to score");
  Metrics m;
  m.supported = label_metrics(golds, preds, Label::Supported);
  m.refuted = label_metrics(golds, preds, Label::Refuted);
  m.macro_f1 = (m.supported.f1 + m.refuted.f1) / 2.0;
  return m;
}

double macro_f1(std::span<const Label> golds, std::span<const Label> preds) {
  return compute_metrics(golds, preds).macro_f1;
}

std::string format_percent(double value) { return fmt::format("{:.2f}", value); }

std::string eval_trace_id(std::string_view dataset_name, std::string_view claim_id) {
  std::string key(dataset_name);
  key += '\n';
  key += claim_id;
  return gen::sha256_hex(key).substr(0, 32);
}

EvalReport run_eval(const Dataset& dataset, const pipeline::Engine& engine, const pipeline::PipelineConfig& config,
                    std::size_t concurrency, const store::TraceStore* store) {
  if (concurrency == 0) throw InvalidArgument("concurrency must be >= 1");
  const auto pipe = engine.make_pipeline(config);
  const auto n = dataset.claims.size();
  std::vector<ClaimRow> rows(n);
  std::vector<std::string> failures(n);
  std::atomic<std::size_t> next{0};

  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const auto& claim = dataset.claims[i];
      auto trace = pipe.run_check(claim, eval_trace_id(dataset.name, claim.id));
      ClaimRow row;
      row.id = claim.id;
      row.gold = claim.gold_label.value_or(Label::Refuted);
      row.trace_id = trace.trace_id;
      row.n_steps = trace.context().size();
      if (trace.status == TraceStatus::Done && trace.verdict) {
        row.predicted = trace.verdict->label;
      } else {
        row.predicted = kErroredFallback;
        row.errored = true;
        row.error_detail = trace.error_detail.value_or("unknown error");
      }
      if (store != nullptr) {
        try {
          store->save(trace);
          store->append_index(trace);
        } catch (const std::exception& e) {
          failures[i] = e.what();
        }
      }
      rows[i] = std::move(row);
    }
  };
  const auto threads = std::min(concurrency, std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures) {
    if (!f.empty()) throw IoError("failed to persist a trace: " + f);
  }

  EvalReport report;
  report.dataset_name = dataset.name;
  report.n_claims = n;
  report.skipped = dataset.skipped;
  std::vector<Label> golds, preds;
  for (const auto& row : rows) {
    golds.push_back(row.gold);
    preds.push_back(row.predicted);
    if (row.errored) ++report.n_errored;
  }
  if (n > 0) report.metrics = compute_metrics(golds, preds);
  report.rows = std::move(rows);
  report.config = json{{"max_depth", config.max_depth},
                       {"max_regen_attempts", config.max_regen_attempts},
                       {"qa_backend", std::string(to_string(config.qa_backend))},
                       {"backends", engine.describe()}};
  return report;
}

json report_to_json(const EvalReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back(json{{"id", r.id},
                        {"gold", r.gold},
                        {"predicted", r.predicted},
                        {"n_steps", r.n_steps},
                        {"trace_id", r.trace_id},
                        {"errored", r.errored},
                        {"error_detail", r.error_detail ? json(*r.error_detail) : json(nullptr)}});
  }
  return json{
      {"dataset_name", report.dataset_name},
      {"n_claims", report.n_claims},
      {"skipped", report.skipped},
      {"n_errored", report.n_errored},
      {"errored_fallback_label", kErroredFallback},
      {"per_label", {{"Supported", label_json(report.metrics.supported)}, {"Refuted", label_json(report.metrics.refuted)}}},
      {"macro_f1", report.metrics.macro_f1},
      {"macro_f1_display", format_percent(report.metrics.macro_f1)},
      {"published_reference_macro_f1",
       {{"note", "full-scale published results for this method; not reproducible at desk scale"},
        {"hover_2hop", 55.67},
        {"hover_3hop", 54.67},
        {"hover_4hop", 52.35},
        {"feverous", 59.47}}},
      {"rows", rows},
      {"config", report.config}};
}

std::string report_to_table(const EvalReport& report) {
  std::string out;
  out += fmt::format("dataset: {}\n", report.dataset_name);
  out += fmt::format("claims: {}\n", report.n_claims);
  out += fmt::format("skipped: {}\n", report.skipped);
  out += fmt::format("errored: {} (scored as {})\n", report.n_errored, to_string(kErroredFallback));
  out += fmt::format("{:<10} {:>9} {:>9} {:>9} {:>8}\n", "label", "precision", "recall", "f1", "support");
  for (const auto& [name, m] : {std::pair{"Supported", report.metrics.supported}, std::pair{"Refuted", report.metrics.refuted}}) {
    out += fmt::format("{:<10} {:>9} {:>9} {:>9} {:>8}\n", name, format_percent(m.precision), format_percent(m.recall),
                       format_percent(m.f1), m.support);
  }
  out += fmt::format("macro F1: {}\n", format_percent(report.metrics.macro_f1));
  out += "published reference macro-F1 (full scale, not reproduced here): "
         "HOVER 2-hop 55.67, 3-hop 54.67, 4-hop 52.35; FEVEROUS 59.47\n";
  return out;
}

}  // namespace qacheck::eval
