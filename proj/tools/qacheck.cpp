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

// qacheck: check a claim, build a retrieval index, run an evaluation, or serve the HTTP API.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qacheck/core.hpp"
#include "qacheck/engine.hpp"
#include "qacheck/evalharness.hpp"
#include "qacheck/genbackend.hpp"
#include "qacheck/json_io.hpp"
#include "qacheck/retrieval.hpp"
#include "qacheck/service.hpp"
#include "qacheck/trace_store.hpp"

namespace fs = std::filesystem;
using namespace qacheck;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitTraceError = 2;

struct EngineFlags {
  std::optional<fs::path> backend_config;
  std::optional<fs::path> demo_bank;
  std::optional<fs::path> index;

  void add_to(CLI::App& app) {
    app.add_option("--backend-config", backend_config, "JSON backend config (per-role BackendConfig)")
        ->check(CLI::ExistingFile);
    app.add_option("--demo-bank", demo_bank, "demo bank JSON overriding the built-in one")->check(CLI::ExistingFile);
    app.add_option("--index", index, "retrieval index snapshot for retriever_reader")->check(CLI::ExistingFile);
  }

  [[nodiscard]] pipeline::EngineConfig config() const {
    auto cfg = backend_config ? pipeline::load_engine_config(*backend_config) : pipeline::default_engine_config();
    if (demo_bank) cfg.demo_bank_path = *demo_bank;
    if (index) cfg.index_path = *index;
    return cfg;
  }
};

QaBackendKind backend_kind(const std::string& name) {
  auto kind = parse_qa_backend(name);
  if (!kind) throw InvalidArgument("unknown qa backend '" + name + "'");
  return *kind;
}

void print_step(const ReasoningStep& s) {
  fmt::print("[depth {}] {}\n", s.depth, s.accepted ? "accepted" : "rejected");
  fmt::print("  Q: {}\n", s.question);
  fmt::print("  A: {}\n", s.answer);
  if (s.rejection_reason) fmt::print("  reason: {}\n", *s.rejection_reason);
  std::fflush(stdout);
}

// Same claim and settings give the same id, so repeated runs write identical traces.
std::string check_trace_id(const std::string& claim, QaBackendKind kind, int max_depth) {
  return gen::sha256_hex(fmt::format("{}\n{}\n{}", claim, to_string(kind), max_depth)).substr(0, 32);
}

int run_check(const std::string& claim_text, const std::string& backend_name, int max_depth,
              const std::optional<fs::path>& trace_out, const EngineFlags& flags) {
  const auto kind = backend_kind(backend_name);
  pipeline::PipelineConfig pcfg;
  pcfg.max_depth = max_depth;
  pcfg.qa_backend = kind;
  pcfg.validate();
  const pipeline::Engine engine(flags.config());
  const auto pipe = engine.make_pipeline(pcfg);

  const auto trace_id = check_trace_id(claim_text, kind, max_depth);
  const auto claim = make_claim("cli-" + trace_id.substr(0, 12), claim_text);
  std::size_t printed = 0;
  const auto trace = pipe.run_check(claim, trace_id, [&](const ReasoningTrace& t) {
    for (; printed < t.steps.size(); ++printed) print_step(t.steps[printed]);
  });

  if (trace_out) store::write_file_atomic(*trace_out, trace_to_json_text(trace));
  if (trace.status != TraceStatus::Done || !trace.verdict) {
    fmt::print(stderr, "error: {}\n", trace.error_detail.value_or("check did not finish"));
    return kExitTraceError;
  }
  fmt::print("RATIONALE:\n{}\n", trace.verdict->rationale);
  fmt::print("VERDICT: {}\n", to_string(trace.verdict->label));
  return kExitOk;
}

int run_index(const fs::path& corpus, const fs::path& out) {
  const auto index = retrieval::build_index(retrieval::load_corpus(corpus));
  retrieval::save_snapshot(index, out);
  fmt::print("N={}\navg_doc_len={:.6f}\n", index.doc_count(), index.avg_doc_len());
  return kExitOk;
}

struct EvalFlags {
  fs::path dataset;
  std::string format = "native";
  std::optional<fs::path> out;
  std::size_t concurrency = 1;
  std::optional<fs::path> trace_dir;
  std::string backend = std::string(to_string(kDefaultQaBackend));
  int max_depth = 5;
};

int run_eval(const EvalFlags& ef, const EngineFlags& flags) {
  const auto format = eval::parse_format(ef.format);
  if (!format) throw InvalidArgument("unknown dataset format '" + ef.format + "'");
  const auto dataset = eval::load_dataset(ef.dataset, *format);
  pipeline::PipelineConfig pcfg;
  pcfg.max_depth = ef.max_depth;
  pcfg.qa_backend = backend_kind(ef.backend);
  pcfg.validate();
  const pipeline::Engine engine(flags.config());
  std::optional<store::TraceStore> traces;
  if (ef.trace_dir) traces.emplace(*ef.trace_dir);
  const auto report = eval::run_eval(dataset, engine, pcfg, ef.concurrency, traces ? &*traces : nullptr);
  if (ef.out) store::write_file_atomic(*ef.out, eval::report_to_json(report).dump(2) + "\n");
  fmt::print("{}", eval::report_to_table(report));
  return kExitOk;
}

int run_serve(service::ServiceConfig scfg, const EngineFlags& flags) {
  // Signals are taken synchronously on a helper thread so stop() never runs in a handler.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  auto engine = std::make_shared<const pipeline::Engine>(flags.config());
  service::Service svc(std::move(scfg), engine);
  if (!svc.bind()) {
    fmt::print(stderr, "error: cannot bind port (already in use?)\n");
    return kExitUsage;
  }
  fmt::print(stderr, "listening on port {}\n", svc.port());
  std::thread waiter([&svc, set] {
    int sig = 0;
    sigwait(&set, &sig);
    svc.stop();
  });
  svc.listen();
  // listen() can return without a signal (e.g. socket failure); wake the waiter.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  svc.wait_idle();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Question-guided claim verification"};
  app.require_subcommand(1);

  EngineFlags engine_flags;

  auto* check = app.add_subcommand("check", "verify one claim");
  std::string claim;
  std::string qa_backend = std::string(to_string(kDefaultQaBackend));
  int max_depth = 5;
  std::optional<fs::path> trace_out;
  check->add_option("--claim", claim, "claim text")->required();
  check->add_option("--qa-backend", qa_backend, "retriever_reader | seq2seq | reciter_reader")
      ->check(CLI::IsMember(qa_backend_names()));
  check->add_option("--max-depth", max_depth, "maximum accepted QA pairs")->check(CLI::PositiveNumber);
  check->add_option("--trace-out", trace_out, "write the trace JSON here");
  engine_flags.add_to(*check);

  auto* index = app.add_subcommand("index", "build a BM25 index snapshot from a JSONL corpus");
  fs::path corpus, index_out;
  index->add_option("--corpus", corpus, "JSONL corpus {id, title?, text}")->required()->check(CLI::ExistingFile);
  index->add_option("--out", index_out, "snapshot path")->required();

  auto* evalcmd = app.add_subcommand("eval", "run a labelled dataset and report macro-F1");
  EvalFlags ef;
  evalcmd->add_option("--dataset", ef.dataset, "dataset file")->required()->check(CLI::ExistingFile);
  evalcmd->add_option("--format", ef.format, "native | hover | feverous")
      ->check(CLI::IsMember({"native", "hover", "feverous"}));
  evalcmd->add_option("--out", ef.out, "write the JSON report here");
  evalcmd->add_option("--concurrency", ef.concurrency, "claims checked in parallel")->check(CLI::PositiveNumber);
  evalcmd->add_option("--trace-dir", ef.trace_dir, "persist every trace under this directory");
  evalcmd->add_option("--qa-backend", ef.backend, "QA backend for every claim")
      ->check(CLI::IsMember(qa_backend_names()));
  evalcmd->add_option("--max-depth", ef.max_depth, "maximum accepted QA pairs")->check(CLI::PositiveNumber);
  engine_flags.add_to(*evalcmd);

  auto* serve = app.add_subcommand("serve", "serve the HTTP API");
  service::ServiceConfig scfg;
  serve->add_option("--port", scfg.port, "TCP port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", scfg.host, "bind address");
  serve->add_option("--store-dir", scfg.store_dir, "trace store directory");
  serve->add_option("--cors-origin", scfg.cors_origin, "Access-Control-Allow-Origin value");
  serve->add_option("--examples", scfg.examples_path, "JSON list of pre-defined claims")->check(CLI::ExistingFile);
  serve->add_option("--static-dir", scfg.static_dir, "serve a built web UI from this directory")
      ->check(CLI::ExistingDirectory);
  engine_flags.add_to(*serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*check) return run_check(claim, qa_backend, max_depth, trace_out, engine_flags);
    if (*index) return run_index(corpus, index_out);
    if (*evalcmd) return run_eval(ef, engine_flags);
    if (*serve) return run_serve(scfg, engine_flags);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
