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

// Wires backends, demo bank and optional retrieval index into pipelines.
//
// Backend config file (JSON):
//   {
//     "default":   {BackendConfig},   used for any role not listed
//     "verifier":  {...}, "generator": {...}, "validator": {...},
//     "reasoner":  {...}, "qa": {...},
//     "index": "corpus.qidx", "retrieval_k": 3, "demo_bank": "bank.json"
//   }
// Relative paths resolve against the config file's directory.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "qacheck/genbackend.hpp"
#include "qacheck/pipeline.hpp"
#include "qacheck/prompts.hpp"
#include "qacheck/qa.hpp"
#include "qacheck/retrieval.hpp"

namespace qacheck::pipeline {

inline constexpr std::string_view kDefaultRemoteBase = "https://api.openai.com";
inline constexpr std::string_view kDefaultRemoteModel = "gpt-4o-mini";
inline constexpr std::string_view kModelEnv = "QACHECK_MODEL";

struct EngineConfig {
  gen::BackendConfig verifier;
  gen::BackendConfig generator;
  gen::BackendConfig validator;
  gen::BackendConfig reasoner;
  gen::BackendConfig qa;
  std::optional<std::filesystem::path> index_path;
  std::size_t retrieval_k = qa::kDefaultTopK;
  std::optional<std::filesystem::path> demo_bank_path;
};

// Remote backend for every role, base URL and model taken from the
// environment (QACHECK_API_BASE, QACHECK_MODEL) with built-in fallbacks.
EngineConfig default_engine_config();
EngineConfig engine_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
EngineConfig load_engine_config(const std::filesystem::path& path);

class Engine {
 public:
  // Loads scripts, the index snapshot and the demo bank eagerly.
  explicit Engine(const EngineConfig& config);
  // Pre-built parts; `index` may be null when retrieval is unavailable.
  Engine(RoleBackends roles, std::shared_ptr<const gen::Generator> qa_backend,
         std::shared_ptr<const prompts::DemoBank> bank, std::shared_ptr<const retrieval::Index> index = nullptr,
         std::size_t retrieval_k = qa::kDefaultTopK);

  [[nodiscard]] bool available(QaBackendKind kind) const noexcept;
  // Throws InvalidArgument when the kind is unavailable (no index for retriever_reader).
  [[nodiscard]] Pipeline make_pipeline(const PipelineConfig& config) const;
  [[nodiscard]] nlohmann::json describe() const;

  [[nodiscard]] const std::shared_ptr<const prompts::DemoBank>& bank() const noexcept { return bank_; }

 private:
  RoleBackends roles_;
  std::shared_ptr<const gen::Generator> qa_;
  std::shared_ptr<const prompts::DemoBank> bank_;
  std::shared_ptr<const retrieval::Index> index_;
  std::size_t retrieval_k_;
};

}  // namespace qacheck::pipeline
