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

// Text generation behind one interface: a remote chat-completions endpoint
// and a scripted playback backend keyed by the SHA-256 of the exact prompt.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qacheck/error.hpp"

namespace qacheck::gen {

class AuthError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public Error {
 public:
  using Error::Error;
};

// Non-retryable HTTP failure other than authentication (e.g. 400, 404).
class BackendError : public Error {
 public:
  using Error::Error;
};

class ScriptMissError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::size_t kDefaultMaxPromptChars = 16000;
inline constexpr std::string_view kDefaultApiKeyEnv = "QACHECK_API_KEY";
inline constexpr std::string_view kApiBaseEnv = "QACHECK_API_BASE";

struct GenRequest {
  std::string prompt;
  int max_tokens = 256;
  double temperature = 0.0;
  std::vector<std::string> stop_sequences;
};

enum class FinishReason { Stop, Length, Error };

std::string_view to_string(FinishReason r) noexcept;

struct GenResponse {
  std::string text;  // raw completion, never trimmed
  FinishReason finish_reason = FinishReason::Stop;
  std::int64_t latency_ms = 0;
};

enum class BackendKind { Remote, Scripted };

struct BackendConfig {
  BackendKind kind = BackendKind::Remote;
  std::optional<std::string> base_url;
  std::optional<std::string> model_name;
  std::string api_key_env = std::string(kDefaultApiKeyEnv);
  int timeout_ms = 60000;
  int max_retries = 2;
  std::optional<std::filesystem::path> script_path;
  std::size_t max_prompt_chars = kDefaultMaxPromptChars;
  std::chrono::milliseconds backoff_base{500};

  // Throws InvalidArgument when a required field for the kind is missing.
  void validate() const;
};

// Parses one BackendConfig object. Relative script paths resolve against `base_dir`.
BackendConfig backend_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

// Text generation interface. Implementations are immutable after construction
// and safe to call from several threads.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual GenResponse generate(const GenRequest& req) const = 0;
  // Short human-readable description used in config snapshots.
  virtual std::string describe() const = 0;
};

std::string sha256_hex(std::string_view data);

// One line of a script file.
struct ScriptEntry {
  std::string key;
  std::string prompt_prefix;
  std::string response;
};

ScriptEntry make_script_entry(std::string_view prompt, std::string response);
std::string script_entry_line(const ScriptEntry& entry);

// Plays back recorded completions. A prompt is looked up by the SHA-256 hex
// digest of its exact bytes.
class ScriptedBackend final : public Generator {
 public:
  explicit ScriptedBackend(std::unordered_map<std::string, std::string> responses, std::string origin = "inline");

  GenResponse generate(const GenRequest& req) const override;
  std::string describe() const override;

  [[nodiscard]] std::size_t size() const noexcept { return responses_.size(); }
  [[nodiscard]] bool contains_prompt(std::string_view prompt) const;

 private:
  std::unordered_map<std::string, std::string> responses_;
  std::string origin_;
};

// Reads a JSON Lines script. Throws ParseError (with line number) on malformed
// lines and on duplicate keys; IoError when the file cannot be opened.
ScriptedBackend load_script(const std::filesystem::path& path);

// POSTs to {base_url}/v1/chat/completions. Retries transport failures, 429 and
// 5xx with exponential backoff; 401 raises AuthError immediately.
class RemoteBackend final : public Generator {
 public:
  explicit RemoteBackend(BackendConfig config);

  GenResponse generate(const GenRequest& req) const override;
  std::string describe() const override;

  // Request body sent for `req`; exposed for wire-format tests.
  [[nodiscard]] std::string request_body(const GenRequest& req) const;
  [[nodiscard]] const BackendConfig& config() const noexcept { return config_; }

 private:
  BackendConfig config_;
};

// Adapts a callable; used for tests and in-process fakes.
class FunctionBackend final : public Generator {
 public:
  using Fn = std::function<std::string(const GenRequest&)>;
  explicit FunctionBackend(Fn fn, std::string name = "function");

  GenResponse generate(const GenRequest& req) const override;
  std::string describe() const override { return name_; }

 private:
  Fn fn_;
  std::string name_;
};

// Forwards to an inner generator and keeps every (prompt, completion) pair in
// call order, so a live session can be written out as a replay script.
class RecordingBackend final : public Generator {
 public:
  explicit RecordingBackend(std::shared_ptr<const Generator> inner);

  GenResponse generate(const GenRequest& req) const override;
  std::string describe() const override;

  [[nodiscard]] std::vector<ScriptEntry> entries() const;
  // Writes unique entries in first-seen order as a script file.
  void write_script(const std::filesystem::path& path) const;

 private:
  std::shared_ptr<const Generator> inner_;
  mutable std::mutex mu_;
  mutable std::vector<ScriptEntry> entries_;
};

// Builds the backend named by `config`; scripted configs are loaded eagerly.
std::shared_ptr<const Generator> make_backend(const BackendConfig& config);

// Validates `req` against the prompt limit and calls `backend`.
GenResponse generate(const Generator& backend, const GenRequest& req,
                     std::size_t max_prompt_chars = kDefaultMaxPromptChars);
// One-shot form: builds the backend described by `config`, then generates.
GenResponse generate(const BackendConfig& config, const GenRequest& req);

}  // namespace qacheck::gen
