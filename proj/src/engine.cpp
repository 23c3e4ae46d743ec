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

#include "qacheck/engine.hpp"

#include <cstdlib>
#include <fstream>

namespace qacheck::pipeline {
namespace {

std::string env_or(std::string_view name, std::string_view fallback) {
  const char* v = std::getenv(std::string(name).c_str());
  return v != nullptr && *v != '\0' ? std::string(v) : std::string(fallback);
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base_dir) {
  return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
}

// Scripted configs naming the same file share one loaded backend.
class BackendCache {
 public:
  std::shared_ptr<const gen::Generator> get(const gen::BackendConfig& cfg) {
    if (cfg.kind != gen::BackendKind::Scripted) return gen::make_backend(cfg);
    const auto key = std::filesystem::weakly_canonical(*cfg.script_path).string();
    auto& slot = scripted_[key];
    if (!slot) slot = gen::make_backend(cfg);
    return slot;
  }

 private:
  std::map<std::string, std::shared_ptr<const gen::Generator>> scripted_;
};

}  // namespace

EngineConfig default_engine_config() {
  gen::BackendConfig remote;
  remote.kind = gen::BackendKind::Remote;
  remote.base_url = env_or(gen::kApiBaseEnv, kDefaultRemoteBase);
  remote.model_name = env_or(kModelEnv, kDefaultRemoteModel);
  return EngineConfig{remote, remote, remote, remote, remote, std::nullopt, qa::kDefaultTopK, std::nullopt};
}

EngineConfig engine_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InvalidArgument("backend config must be a JSON object");
  EngineConfig cfg = default_engine_config();
  std::optional<gen::BackendConfig> fallback;
  if (j.contains("default")) fallback = gen::backend_config_from_json(j.at("default"), base_dir);
  const auto role = [&](const char* name, gen::BackendConfig& slot) {
    if (j.contains(name)) {
      slot = gen::backend_config_from_json(j.at(name), base_dir);
    } else if (fallback) {
      slot = *fallback;
    }
  };
  role("verifier", cfg.verifier);
  role("generator", cfg.generator);
  role("validator", cfg.validator);
  role("reasoner", cfg.reasoner);
  role("qa", cfg.qa);
  if (j.contains("index") && !j["index"].is_null()) cfg.index_path = resolve(j["index"].get<std::string>(), base_dir);
  cfg.retrieval_k = j.value("retrieval_k", cfg.retrieval_k);
  if (j.contains("demo_bank") && !j["demo_bank"].is_null()) {
    cfg.demo_bank_path = resolve(j["demo_bank"].get<std::string>(), base_dir);
  }
  return cfg;
}

EngineConfig load_engine_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open backend config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed backend config: ") + e.what());
  }
  return engine_config_from_json(j, path.parent_path());
}

Engine::Engine(const EngineConfig& config) : retrieval_k_(config.retrieval_k) {
  BackendCache cache;
  roles_ = RoleBackends{cache.get(config.verifier), cache.get(config.generator), cache.get(config.validator),
                        cache.get(config.reasoner)};
  qa_ = cache.get(config.qa);
  bank_ = config.demo_bank_path
              ? std::make_shared<const prompts::DemoBank>(prompts::DemoBank::load(*config.demo_bank_path))
              : std::shared_ptr<const prompts::DemoBank>(&prompts::DemoBank::builtin(), [](const auto*) {});
  if (config.index_path) index_ = std::make_shared<const retrieval::Index>(retrieval::load_snapshot(*config.index_path));
}

Engine::Engine(RoleBackends roles, std::shared_ptr<const gen::Generator> qa_backend,
               std::shared_ptr<const prompts::DemoBank> bank, std::shared_ptr<const retrieval::Index> index,
               std::size_t retrieval_k)
    : roles_(std::move(roles)),
      qa_(std::move(qa_backend)),
      bank_(std::move(bank)),
      index_(std::move(index)),
      retrieval_k_(retrieval_k) {
  if (!bank_) bank_ = std::shared_ptr<const prompts::DemoBank>(&prompts::DemoBank::builtin(), [](const auto*) {});
}

bool Engine::available(QaBackendKind kind) const noexcept {
  return kind != QaBackendKind::RetrieverReader || (index_ && index_->doc_count() > 0);
}

Pipeline Engine::make_pipeline(const PipelineConfig& config) const {
  std::shared_ptr<const qa::QaBackend> qa;
  switch (config.qa_backend) {
    case QaBackendKind::RetrieverReader:
      if (!available(config.qa_backend)) throw InvalidArgument("retriever_reader needs a retrieval index");
      qa = std::make_shared<qa::RetrieverReader>(index_, qa_, retrieval_k_);
      break;
    case QaBackendKind::Seq2Seq:
      qa = std::make_shared<qa::Seq2Seq>(qa_);
      break;
    case QaBackendKind::ReciterReader:
      qa = std::make_shared<qa::ReciterReader>(qa_, qa_, bank_);
      break;
  }
  return Pipeline(config, roles_, std::move(qa), bank_);
}

nlohmann::json Engine::describe() const {
  return nlohmann::json{{"verifier", roles_.verifier->describe()},
                        {"generator", roles_.generator->describe()},
                        {"validator", roles_.validator->describe()},
                        {"reasoner", roles_.reasoner->describe()},
                        {"qa", qa_->describe()},
                        {"index_docs", index_ ? index_->doc_count() : 0},
                        {"retrieval_k", retrieval_k_}};
}

}  // namespace qacheck::pipeline
