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

#include "qacheck/trace_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qacheck/json_io.hpp"

namespace qacheck::store {
namespace {

constexpr const char* kIndexFile = "index.jsonl";

void write_all(int fd, std::string_view data, const std::filesystem::path& path) {
  while (!data.empty()) {
    const auto n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError("write failed for " + path.string() + ": " + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

void fsync_dir(const std::filesystem::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  static std::atomic<unsigned> counter{0};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("cannot create " + tmp.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, content, tmp);
    if (::fsync(fd) != 0) throw IoError("fsync failed for " + tmp.string());
  } catch (...) {
    ::close(fd);
    ::unlink(tmp.c_str());
    throw;
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    ::unlink(tmp.c_str());
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + std::strerror(errno));
  }
  fsync_dir(path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

bool is_valid_trace_id(std::string_view id) noexcept {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

TraceStore::TraceStore(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw IoError("cannot create trace store " + root_.string() + ": " + ec.message());
  // Fail at startup rather than on the first write.
  const auto probe = root_ / (".probe." + std::to_string(::getpid()));
  const int fd = ::open(probe.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("trace store " + root_.string() + " is not writable: " + std::strerror(errno));
  ::close(fd);
  ::unlink(probe.c_str());
}

std::filesystem::path TraceStore::trace_path(std::string_view trace_id) const {
  return root_ / (std::string(trace_id) + ".json");
}

void TraceStore::save(const ReasoningTrace& trace) const {
  if (!is_valid_trace_id(trace.trace_id)) throw InvalidArgument("invalid trace id '" + trace.trace_id + "'");
  write_file_atomic(trace_path(trace.trace_id), trace_to_json_text(trace));
}

void TraceStore::append_index(const ReasoningTrace& trace) const {
  const nlohmann::json row = {{"trace_id", trace.trace_id},
                              {"claim_text", trace.claim.text},
                              {"status", std::string(to_string(trace.status))},
                              {"started_at", format_timestamp(trace.started_at)}};
  const auto line = row.dump() + "\n";
  std::lock_guard lock(index_mu_);
  const auto path = root_ / kIndexFile;
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, line, path);
    ::fsync(fd);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
}

std::optional<ReasoningTrace> TraceStore::load(std::string_view trace_id) const {
  if (!is_valid_trace_id(trace_id)) return std::nullopt;
  std::ifstream in(trace_path(trace_id), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return trace_from_json_text(ss.str());
}

std::vector<IndexRow> TraceStore::list(std::size_t limit) const {
  std::vector<IndexRow> rows;
  std::map<std::string, std::size_t> position;
  {
    std::lock_guard lock(index_mu_);
    std::ifstream in(root_ / kIndexFile);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error&) {
        continue;  // a torn final line after a crash
      }
      IndexRow row{j.value("trace_id", ""), j.value("claim_text", ""),
                   trace_status_from_string(j.value("status", "running")), j.value("started_at", "")};
      auto [it, inserted] = position.emplace(row.trace_id, rows.size());
      if (inserted) {
        rows.push_back(std::move(row));
      } else {
        rows[it->second] = std::move(row);
      }
    }
  }
  // RFC 3339 UTC strings order chronologically; ties keep insertion order reversed.
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rows[a].started_at != rows[b].started_at ? rows[a].started_at > rows[b].started_at : a > b;
  });
  std::vector<IndexRow> out;
  for (std::size_t i = 0; i < order.size() && out.size() < limit; ++i) out.push_back(rows[order[i]]);
  return out;
}

}  // namespace qacheck::store
