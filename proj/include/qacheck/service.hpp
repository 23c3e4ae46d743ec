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

// HTTP API over the pipeline.
//
//   POST /api/check              {"claim_text", "qa_backend"?, "max_depth"?} -> 202 {"trace_id"}
//   GET  /api/trace/{id}         current trace snapshot
//   GET  /api/trace/{id}/events  server-sent events: step*, verdict | error, done
//   GET  /api/traces?limit=N     recent traces, newest first
//   GET  /api/examples           pre-defined claims
//   GET  /api/backends           selectable QA backends
//   GET  /api/health             {"status":"ok"}

#pragma once

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "qacheck/core.hpp"
#include "qacheck/engine.hpp"
#include "qacheck/trace_store.hpp"

namespace httplib {
class Server;
}

namespace qacheck::service {

inline constexpr std::size_t kMaxClaimChars = 2000;
inline constexpr int kDefaultPort = 8080;

struct ServiceConfig {
  std::string host = "0.0.0.0";
  int port = kDefaultPort;  // 0 picks a free port
  std::filesystem::path store_dir = "traces";
  std::string cors_origin = "*";
  std::optional<std::filesystem::path> examples_path;  // JSON list; built-in list when absent
  std::optional<std::filesystem::path> static_dir;     // served at "/" when set
  int default_max_depth = 5;
  int max_regen_attempts = 3;
};

// Status code plus JSON body, as returned by the request handlers.
struct Reply {
  int status = 200;
  nlohmann::json body;
};

// Renders one server-sent event: "event: <type>\ndata: <json>\n\n".
std::string sse_event(std::string_view type, const nlohmann::json& data);

class Service {
 public:
  // Opens the trace store (throws IoError when it is not writable).
  Service(ServiceConfig config, std::shared_ptr<const pipeline::Engine> engine);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Returns false when the address cannot be bound (e.g. port in use).
  bool bind();
  [[nodiscard]] int port() const noexcept { return bound_port_; }
  // Serves until stop(); call after a successful bind().
  void listen();
  void stop();
  // Blocks until every submitted check has finished.
  void wait_idle();

  // Handler bodies, callable without HTTP.
  Reply submit_check(const std::string& request_body);
  Reply get_trace(const std::string& trace_id) const;
  Reply list_traces(std::size_t limit) const;
  Reply examples() const;
  Reply backends() const;

 private:
  struct LiveTrace {
    std::mutex mu;
    std::condition_variable cv;
    ReasoningTrace snapshot;
  };

  void install_routes();
  void run(std::shared_ptr<LiveTrace> live, pipeline::Pipeline pipe, Claim claim, std::string trace_id);
  std::shared_ptr<LiveTrace> find_live(const std::string& trace_id) const;

  ServiceConfig config_;
  std::shared_ptr<const pipeline::Engine> engine_;
  store::TraceStore store_;
  nlohmann::json examples_;
  std::unique_ptr<httplib::Server> server_;
  int bound_port_ = -1;

  mutable std::mutex live_mu_;
  std::map<std::string, std::shared_ptr<LiveTrace>> live_;

  std::mutex active_mu_;
  std::condition_variable active_cv_;
  std::size_t active_ = 0;
  std::atomic<bool> stopping_{false};
};

}  // namespace qacheck::service
