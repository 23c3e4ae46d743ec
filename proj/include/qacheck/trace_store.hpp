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

#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qacheck/core.hpp"

namespace qacheck::store {

// Writes to a sibling temp file, fsyncs it, then renames over `path`, so
// readers only ever observe complete files.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Trace ids are lowercase hex; anything else is refused before touching the filesystem.
bool is_valid_trace_id(std::string_view id) noexcept;

struct IndexRow {
  std::string trace_id;
  std::string claim_text;
  TraceStatus status = TraceStatus::Running;
  std::string started_at;
};

// One JSON file per trace plus an append-only index.jsonl. A trace gets a
// row when it starts and another when it finishes; the latest row wins.
class TraceStore {
 public:
  // Creates `root` if needed and probes that it is writable (IoError otherwise).
  explicit TraceStore(std::filesystem::path root);

  void save(const ReasoningTrace& trace) const;
  void append_index(const ReasoningTrace& trace) const;
  [[nodiscard]] std::optional<ReasoningTrace> load(std::string_view trace_id) const;
  // Latest row per trace, newest started_at first.
  [[nodiscard]] std::vector<IndexRow> list(std::size_t limit) const;

  [[nodiscard]] const std::filesystem::path& root() const noexcept { return root_; }
  [[nodiscard]] std::filesystem::path trace_path(std::string_view trace_id) const;

 private:
  std::filesystem::path root_;
  mutable std::mutex index_mu_;
};

}  // namespace qacheck::store
