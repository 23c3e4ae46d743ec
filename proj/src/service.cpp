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

#include "qacheck/service.hpp"

#include <thread>

#include <httplib.h>

#include "builtin_data.hpp"
#include "qacheck/json_io.hpp"
#include "qacheck/pipeline.hpp"

using nlohmann::json;

namespace qacheck::service {
namespace {

constexpr std::size_t kDefaultListLimit = 50;
constexpr std::size_t kMaxListLimit = 1000;
constexpr int kMaxRequestDepth = 20;
constexpr auto kKeepAlive = std::chrono::seconds(15);

json error_body(const std::string& message) { return json{{"error", message}}; }

void send(httplib::Response& res, const Reply& reply) {
  res.status = reply.status;
  res.set_content(reply.body.dump(), "application/json");
}

json load_examples(const std::optional<std::filesystem::path>& path) {
  std::string text = builtin::kExamplesJson;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw IoError("cannot open examples file " + path->string());
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  try {
    auto j = json::parse(text);
    if (!j.is_array()) throw ParseError("examples file must hold a JSON list");
    return j;
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed examples file: ") + e.what());
  }
}

// Per-connection replay-then-follow cursor for the event stream.
struct StreamCursor {
  std::size_t sent_steps = 0;
  bool closed = false;
};

// Appends events for everything in `trace` past the cursor; closes the stream
// once the trace has finished.
std::string drain(const ReasoningTrace& trace, StreamCursor& cur) {
  std::string out;
  for (; cur.sent_steps < trace.steps.size(); ++cur.sent_steps) out += sse_event("step", trace.steps[cur.sent_steps]);
  if (trace.status == TraceStatus::Done) {
    if (trace.verdict) out += sse_event("verdict", *trace.verdict);
    out += sse_event("done", json{{"trace_id", trace.trace_id}, {"status", "done"}});
    cur.closed = true;
  } else if (trace.status == TraceStatus::Error) {
    out += sse_event("error", json{{"trace_id", trace.trace_id}, {"error", trace.error_detail.value_or("")}});
    cur.closed = true;
  }
  return out;
}

}  // namespace

std::string sse_event(std::string_view type, const json& data) {
  std::string out = "event: ";
  out += type;
  out += "\ndata: ";
  out += data.dump();
  out += "\n\n";
  return out;
}

Service::Service(ServiceConfig config, std::shared_ptr<const pipeline::Engine> engine)
    : config_(std::move(config)),
      engine_(std::move(engine)),
      store_(config_.store_dir),
      examples_(load_examples(config_.examples_path)),
      server_(std::make_unique<httplib::Server>()) {
  if (!engine_) throw InvalidArgument("service needs an engine");
  // SO_REUSEADDR only: with SO_REUSEPORT a second server would silently share a busy port.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  install_routes();
}

Service::~Service() {
  stop();
  wait_idle();
}

bool Service::bind() {
  if (config_.port == 0) {
    bound_port_ = server_->bind_to_any_port(config_.host);
    return bound_port_ > 0;
  }
  if (!server_->bind_to_port(config_.host, config_.port)) return false;
  bound_port_ = config_.port;
  return true;
}

void Service::listen() { server_->listen_after_bind(); }

void Service::stop() {
  stopping_ = true;
  {
    std::lock_guard lock(live_mu_);
    for (auto& [id, live] : live_) live->cv.notify_all();
  }
  server_->stop();
}

void Service::wait_idle() {
  std::unique_lock lock(active_mu_);
  active_cv_.wait(lock, [&] { return active_ == 0; });
}

std::shared_ptr<Service::LiveTrace> Service::find_live(const std::string& trace_id) const {
  std::lock_guard lock(live_mu_);
  auto it = live_.find(trace_id);
  return it == live_.end() ? nullptr : it->second;
}

Reply Service::submit_check(const std::string& request_body) {
  json req;
  try {
    req = json::parse(request_body);
  } catch (const json::parse_error&) {
    return {400, error_body("request body must be JSON")};
  }
  if (!req.is_object()) return {400, error_body("request body must be a JSON object")};
  const auto claim_it = req.find("claim_text");
  if (claim_it == req.end() || !claim_it->is_string()) return {400, error_body("claim_text is required")};
  const auto claim_text = claim_it->get<std::string>();
  if (trim(claim_text).empty()) return {400, error_body("claim_text must be non-empty")};
  if (claim_text.size() > kMaxClaimChars) {
    return {400, error_body("claim_text exceeds " + std::to_string(kMaxClaimChars) + " characters")};
  }

  pipeline::PipelineConfig cfg;
  cfg.max_depth = config_.default_max_depth;
  cfg.max_regen_attempts = config_.max_regen_attempts;
  if (auto it = req.find("max_depth"); it != req.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<int>() < 1 || it->get<int>() > kMaxRequestDepth) {
      return {400, error_body("max_depth must be an integer in [1, " + std::to_string(kMaxRequestDepth) + "]")};
    }
    cfg.max_depth = it->get<int>();
  }
  std::string backend_name(to_string(kDefaultQaBackend));
  if (auto it = req.find("qa_backend"); it != req.end() && !it->is_null()) {
    if (!it->is_string()) return {400, error_body("qa_backend must be a string")};
    backend_name = it->get<std::string>();
  }
  const auto kind = parse_qa_backend(backend_name);
  if (!kind) {
    return {422, json{{"error", "unknown qa_backend '" + backend_name + "'"}, {"valid_backends", qa_backend_names()}}};
  }
  if (!engine_->available(*kind)) {
    return {422, json{{"error", "qa_backend '" + backend_name + "' is not available on this server"},
                      {"valid_backends", qa_backend_names()}}};
  }
  cfg.qa_backend = *kind;
  if (stopping_) return {503, error_body("service is shutting down")};

  auto pipe = engine_->make_pipeline(cfg);
  const auto trace_id = pipeline::random_trace_id();
  Claim claim = make_claim("claim-" + trace_id.substr(0, 12), claim_text);

  auto live = std::make_shared<LiveTrace>();
  live->snapshot.trace_id = trace_id;
  live->snapshot.claim = claim;
  live->snapshot.qa_backend = *kind;
  live->snapshot.max_depth = cfg.max_depth;
  live->snapshot.started_at = now_ms();
  store_.save(live->snapshot);
  store_.append_index(live->snapshot);
  {
    std::lock_guard lock(live_mu_);
    live_[trace_id] = live;
  }
  {
    std::lock_guard lock(active_mu_);
    ++active_;
  }
  std::thread(&Service::run, this, live, std::move(pipe), std::move(claim), trace_id).detach();
  return {202, json{{"trace_id", trace_id}}};
}

void Service::run(std::shared_ptr<LiveTrace> live, pipeline::Pipeline pipe, Claim claim, std::string trace_id) {
  const auto publish = [&](const ReasoningTrace& trace) {
    // Persist first so a client never sees a finished status the disk does not hold.
    try {
      store_.save(trace);
      if (trace.status != TraceStatus::Running) store_.append_index(trace);
    } catch (const std::exception&) {
      // The in-memory snapshot still serves readers; nothing else to do here.
    }
    std::lock_guard lock(live->mu);
    live->snapshot = trace;
    live->cv.notify_all();
  };
  pipe.run_check(claim, trace_id, publish);
  {
    std::lock_guard lock(live_mu_);
    live_.erase(trace_id);
  }
  std::lock_guard lock(active_mu_);
  --active_;
  active_cv_.notify_all();
}

Reply Service::get_trace(const std::string& trace_id) const {
  if (auto live = find_live(trace_id)) {
    std::lock_guard lock(live->mu);
    return {200, json(live->snapshot)};
  }
  if (!store::is_valid_trace_id(trace_id)) return {404, error_body("unknown trace id")};
  try {
    if (auto trace = store_.load(trace_id)) return {200, json(*trace)};
  } catch (const std::exception& e) {
    return {500, error_body(e.what())};
  }
  return {404, error_body("unknown trace id")};
}

Reply Service::list_traces(std::size_t limit) const {
  json rows = json::array();
  for (const auto& row : store_.list(limit)) {
    rows.push_back(json{{"trace_id", row.trace_id},
                        {"claim_text", row.claim_text},
                        {"status", std::string(to_string(row.status))},
                        {"started_at", row.started_at}});
  }
  return {200, json{{"traces", rows}}};
}

Reply Service::examples() const { return {200, examples_}; }

Reply Service::backends() const {
  json list = json::array();
  for (const auto& name : qa_backend_names()) {
    list.push_back(json{{"name", name}, {"available", engine_->available(*parse_qa_backend(name))}});
  }
  return {200, json{{"backends", list}, {"default", std::string(to_string(kDefaultQaBackend))}}};
}

void Service::install_routes() {
  auto& svr = *server_;
  svr.set_default_headers({{"Access-Control-Allow-Origin", config_.cors_origin}});
  svr.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  svr.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    send(res, {200, json{{"status", "ok"}}});
  });
  svr.Get("/api/examples", [this](const httplib::Request&, httplib::Response& res) { send(res, examples()); });
  svr.Get("/api/backends", [this](const httplib::Request&, httplib::Response& res) { send(res, backends()); });
  svr.Get("/api/traces", [this](const httplib::Request& req, httplib::Response& res) {
    std::size_t limit = kDefaultListLimit;
    if (req.has_param("limit")) {
      try {
        const auto v = std::stoll(req.get_param_value("limit"));
        if (v < 1) throw std::invalid_argument("limit");
        limit = std::min<std::size_t>(static_cast<std::size_t>(v), kMaxListLimit);
      } catch (const std::exception&) {
        send(res, {400, error_body("limit must be a positive integer")});
        return;
      }
    }
    send(res, list_traces(limit));
  });
  svr.Post("/api/check", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, submit_check(req.body));
  });
  svr.Get(R"(/api/trace/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, get_trace(req.matches[1]));
  });
  svr.Get(R"(/api/trace/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    auto live = find_live(id);
    std::optional<ReasoningTrace> stored;
    if (!live) {
      if (store::is_valid_trace_id(id)) {
        try {
          stored = store_.load(id);
        } catch (const std::exception&) {
        }
      }
      if (!stored) {
        send(res, {404, error_body("unknown trace id")});
        return;
      }
    }
    res.set_header("Cache-Control", "no-cache");
    auto cursor = std::make_shared<StreamCursor>();
    res.set_chunked_content_provider(
        "text/event-stream", [this, live, stored, cursor](std::size_t, httplib::DataSink& sink) {
          std::string chunk;
          if (live) {
            std::unique_lock lock(live->mu);
            const auto ready = [&] {
              return stopping_ || live->snapshot.steps.size() > cursor->sent_steps ||
                     live->snapshot.status != TraceStatus::Running;
            };
            if (!live->cv.wait_for(lock, kKeepAlive, ready)) {
              chunk = ": keep-alive\n\n";
            } else {
              chunk = drain(live->snapshot, *cursor);
            }
          } else {
            chunk = drain(*stored, *cursor);
          }
          if (!chunk.empty() && !sink.write(chunk.data(), chunk.size())) return false;
          if (cursor->closed || stopping_) sink.done();
          return true;
        });
  });

  if (config_.static_dir) svr.set_mount_point("/", config_.static_dir->string());
}

}  // namespace qacheck::service
