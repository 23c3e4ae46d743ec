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

#include "qacheck/genbackend.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>
#include <unordered_set>

#include <openssl/evp.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

using nlohmann::json;

namespace qacheck::gen {
namespace {

constexpr std::size_t kPromptPrefixChars = 80;

std::int64_t elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - since).count();
}

// Splits "https://host:port/prefix" into the scheme-host-port part httplib
// wants and the path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = base_url.find('/', host_start);
  if (path_start == std::string::npos) return {base_url, ""};
  std::string prefix = base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, path_start), prefix};
}

}  // namespace

std::string_view to_string(FinishReason r) noexcept {
  switch (r) {
    case FinishReason::Stop:
      return "stop";
    case FinishReason::Length:
      return "length";
    case FinishReason::Error:
      return "error";
  }
  return "error";
}

void BackendConfig::validate() const {
  if (max_retries < 0) throw InvalidArgument("max_retries must be >= 0");
  if (timeout_ms <= 0) throw InvalidArgument("timeout_ms must be > 0");
  if (kind == BackendKind::Remote) {
    if (!base_url || base_url->empty()) throw InvalidArgument("remote backend requires base_url");
    if (!model_name || model_name->empty()) throw InvalidArgument("remote backend requires model_name");
  } else if (!script_path) {
    throw InvalidArgument("scripted backend requires script_path");
  }
}

BackendConfig backend_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  BackendConfig cfg;
  const auto kind = j.value("kind", std::string("remote"));
  if (kind == "remote") {
    cfg.kind = BackendKind::Remote;
  } else if (kind == "scripted") {
    cfg.kind = BackendKind::Scripted;
  } else {
    throw InvalidArgument("unknown backend kind '" + kind + "'");
  }
  if (auto it = j.find("base_url"); it != j.end() && !it->is_null()) cfg.base_url = it->get<std::string>();
  if (auto it = j.find("model_name"); it != j.end() && !it->is_null()) cfg.model_name = it->get<std::string>();
  cfg.api_key_env = j.value("api_key_env", std::string(kDefaultApiKeyEnv));
  cfg.timeout_ms = j.value("timeout_ms", cfg.timeout_ms);
  cfg.max_retries = j.value("max_retries", cfg.max_retries);
  cfg.max_prompt_chars = j.value("max_prompt_chars", cfg.max_prompt_chars);
  if (auto it = j.find("script_path"); it != j.end() && !it->is_null()) {
    std::filesystem::path p = it->get<std::string>();
    cfg.script_path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  if (cfg.kind == BackendKind::Remote) {
    if (const char* base = std::getenv(std::string(kApiBaseEnv).c_str()); base != nullptr && *base != '\0') {
      cfg.base_url = base;
    }
  }
  cfg.validate();
  return cfg;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

ScriptEntry make_script_entry(std::string_view prompt, std::string response) {
  return ScriptEntry{sha256_hex(prompt), std::string(prompt.substr(0, kPromptPrefixChars)), std::move(response)};
}

std::string script_entry_line(const ScriptEntry& entry) {
  // Prefix truncation may split a UTF-8 sequence; replace rather than throw.
  return json{{"key", entry.key}, {"prompt_prefix", entry.prompt_prefix}, {"response", entry.response}}.dump(
      -1, ' ', false, json::error_handler_t::replace);
}

ScriptedBackend::ScriptedBackend(std::unordered_map<std::string, std::string> responses, std::string origin)
    : responses_(std::move(responses)), origin_(std::move(origin)) {}

GenResponse ScriptedBackend::generate(const GenRequest& req) const {
  const auto start = std::chrono::steady_clock::now();
  auto it = responses_.find(sha256_hex(req.prompt));
  if (it == responses_.end()) {
    throw ScriptMissError("no scripted response for prompt starting: \"" +
                          req.prompt.substr(0, kPromptPrefixChars) + "\"");
  }
  return GenResponse{it->second, FinishReason::Stop, elapsed_ms(start)};
}

std::string ScriptedBackend::describe() const { return "scripted:" + origin_; }

bool ScriptedBackend::contains_prompt(std::string_view prompt) const {
  return responses_.count(sha256_hex(prompt)) > 0;
}

ScriptedBackend load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open script file " + path.string());
  std::unordered_map<std::string, std::string> responses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error&) {
      throw ParseError("malformed script line", line_no);
    }
    if (!row.is_object() || !row.contains("key") || !row.contains("response") || !row["key"].is_string() ||
        !row["response"].is_string()) {
      throw ParseError("script line needs string fields \"key\" and \"response\"", line_no);
    }
    auto key = row["key"].get<std::string>();
    if (!responses.emplace(std::move(key), row["response"].get<std::string>()).second) {
      throw ParseError("duplicate prompt key", line_no);
    }
  }
  return ScriptedBackend(std::move(responses), path.filename().string());
}

RemoteBackend::RemoteBackend(BackendConfig config) : config_(std::move(config)) {
  config_.validate();
  if (config_.kind != BackendKind::Remote) throw InvalidArgument("RemoteBackend requires a remote config");
}

std::string RemoteBackend::request_body(const GenRequest& req) const {
  json body = {{"model", *config_.model_name},
               {"messages", json::array({json{{"role", "user"}, {"content", req.prompt}}})},
               {"temperature", req.temperature},
               {"max_tokens", req.max_tokens},
               {"stop", req.stop_sequences}};
  return body.dump();
}

GenResponse RemoteBackend::generate(const GenRequest& req) const {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw AuthError("environment variable " + config_.api_key_env + " holding the API key is not set");
  }
  const auto [host, prefix] = split_base_url(*config_.base_url);
  const std::string path = prefix + "/v1/chat/completions";
  const std::string body = request_body(req);
  const httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);

  const auto start = std::chrono::steady_clock::now();
  std::string last_failure;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.backoff_base * (1LL << (attempt - 1)));

    httplib::Client client(host);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401) throw AuthError("endpoint rejected the API key (HTTP 401)");
    if (res->status == 429 || res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw BackendError("HTTP " + std::to_string(res->status) + " from " + *config_.base_url + ": " +
                         res->body.substr(0, 200));
    }
    try {
      const auto payload = json::parse(res->body);
      const auto& choice = payload.at("choices").at(0);
      GenResponse out;
      const auto& content = choice.at("message").at("content");
      out.text = content.is_null() ? std::string() : content.get<std::string>();
      const auto finish = choice.value("finish_reason", std::string("stop"));
      out.finish_reason = finish == "length" ? FinishReason::Length : FinishReason::Stop;
      out.latency_ms = elapsed_ms(start);
      return out;
    } catch (const json::exception& e) {
      throw BackendError(std::string("malformed completion response: ") + e.what());
    }
  }
  throw TimeoutError("no response from " + *config_.base_url + " after " + std::to_string(config_.max_retries + 1) +
                     " attempts (" + last_failure + ")");
}

std::string RemoteBackend::describe() const { return "remote:" + *config_.model_name + "@" + *config_.base_url; }

FunctionBackend::FunctionBackend(Fn fn, std::string name) : fn_(std::move(fn)), name_(std::move(name)) {}

GenResponse FunctionBackend::generate(const GenRequest& req) const {
  const auto start = std::chrono::steady_clock::now();
  auto text = fn_(req);
  return GenResponse{std::move(text), FinishReason::Stop, elapsed_ms(start)};
}

RecordingBackend::RecordingBackend(std::shared_ptr<const Generator> inner) : inner_(std::move(inner)) {}

GenResponse RecordingBackend::generate(const GenRequest& req) const {
  auto res = inner_->generate(req);
  std::lock_guard lock(mu_);
  entries_.push_back(make_script_entry(req.prompt, res.text));
  return res;
}

std::string RecordingBackend::describe() const { return "recording(" + inner_->describe() + ")"; }

std::vector<ScriptEntry> RecordingBackend::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

void RecordingBackend::write_script(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write script file " + path.string());
  std::unordered_set<std::string> seen;
  for (const auto& entry : entries()) {
    if (seen.insert(entry.key).second) out << script_entry_line(entry) << '\n';
  }
}

std::shared_ptr<const Generator> make_backend(const BackendConfig& config) {
  config.validate();
  if (config.kind == BackendKind::Scripted) return std::make_shared<ScriptedBackend>(load_script(*config.script_path));
  return std::make_shared<RemoteBackend>(config);
}

GenResponse generate(const Generator& backend, const GenRequest& req, std::size_t max_prompt_chars) {
  if (req.prompt.empty()) throw InvalidArgument("generation prompt is empty");
  if (req.prompt.size() > max_prompt_chars) {
    throw InvalidArgument("prompt of " + std::to_string(req.prompt.size()) + " characters exceeds the limit of " +
                          std::to_string(max_prompt_chars));
  }
  if (req.max_tokens <= 0) throw InvalidArgument("max_tokens must be > 0");
  if (req.temperature < 0.0) throw InvalidArgument("temperature must be >= 0");
  return backend.generate(req);
}

GenResponse generate(const BackendConfig& config, const GenRequest& req) {
  return generate(*make_backend(config), req, config.max_prompt_chars);
}

}  // namespace qacheck::gen
