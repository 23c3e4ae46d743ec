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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "qacheck/engine.hpp"
#include "qacheck/evalharness.hpp"
#include "qacheck/json_io.hpp"
#include "qacheck/prompts.hpp"
#include "qacheck/retrieval.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace qacheck;

namespace {

using PairList = std::vector<std::pair<std::string, std::string>>;

Context context_of(const PairList& pairs) {
  Context ctx;
  for (const auto& [q, a] : pairs) ctx.append(QAPair{0, q, a, {}});
  return ctx;
}

QaBackendKind backend_kind(const std::string& name) {
  auto kind = parse_qa_backend(name);
  if (!kind) throw InvalidArgument("unknown qa backend '" + name + "'");
  return *kind;
}

pipeline::EngineConfig engine_config(const std::optional<fs::path>& backend_config, const std::optional<fs::path>& index) {
  auto cfg = backend_config ? pipeline::load_engine_config(*backend_config) : pipeline::default_engine_config();
  if (index) cfg.index_path = *index;
  return cfg;
}

// Returns the trace as JSON text; the Python wrapper decodes it.
std::string check(const std::string& claim_text, const std::optional<fs::path>& backend_config,
                  const std::string& qa_backend, int max_depth, const std::optional<fs::path>& index,
                  const std::string& trace_id) {
  pipeline::PipelineConfig pcfg;
  pcfg.max_depth = max_depth;
  pcfg.qa_backend = backend_kind(qa_backend);
  pcfg.validate();
  const pipeline::Engine engine(engine_config(backend_config, index));
  const auto pipe = engine.make_pipeline(pcfg);
  const auto id = trace_id.empty() ? pipeline::random_trace_id() : trace_id;
  ReasoningTrace trace;
  {
    py::gil_scoped_release release;
    trace = pipe.run_check(make_claim("py-" + id.substr(0, 12), claim_text), id);
  }
  return trace_to_json_text(trace);
}

std::string render_prompt(const std::string& role_name, const std::string& claim, const PairList& context,
                          const std::optional<std::pair<std::string, std::string>>& new_pair,
                          std::optional<int> question_index, const std::vector<std::string>& avoid,
                          const std::optional<std::string>& question) {
  const auto role = prompts::parse_role(role_name);
  if (!role) throw InvalidArgument("unknown prompt role '" + role_name + "'");
  const auto& bank = prompts::DemoBank::builtin();
  if (*role == prompts::Role::Reciter) {
    if (!question) throw InvalidArgument("the reciter prompt needs a question");
    return prompts::render_recite(bank, *question).text;
  }
  prompts::RenderExtras extra;
  if (new_pair) extra.new_pair = QAPair{0, new_pair->first, new_pair->second, {}};
  extra.question_index = question_index;
  extra.avoid_questions = avoid;
  return prompts::render(bank, *role, make_claim("py", claim), context_of(context), extra).text;
}

std::vector<Label> labels_of(const std::vector<std::string>& names) {
  std::vector<Label> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(label_from_string(n));
  return out;
}

std::string run_eval(const fs::path& dataset, const std::string& format, const std::optional<fs::path>& backend_config,
                     const std::string& qa_backend, int max_depth, std::size_t concurrency,
                     const std::optional<fs::path>& index) {
  const auto fmt = eval::parse_format(format);
  if (!fmt) throw InvalidArgument("unknown dataset format '" + format + "'");
  const auto ds = eval::load_dataset(dataset, *fmt);
  pipeline::PipelineConfig pcfg;
  pcfg.max_depth = max_depth;
  pcfg.qa_backend = backend_kind(qa_backend);
  pcfg.validate();
  const pipeline::Engine engine(engine_config(backend_config, index));
  py::gil_scoped_release release;
  return eval::report_to_json(eval::run_eval(ds, engine, pcfg, concurrency)).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Question-guided claim verification (native core)";

  static py::exception<Error> base(m, "QacheckError", PyExc_RuntimeError);
  static py::exception<ParseError> parse(m, "ParseError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      py::set_error(parse, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.def("check", &check, py::arg("claim"), py::arg("backend_config") = py::none(),
        py::arg("qa_backend") = std::string(to_string(kDefaultQaBackend)), py::arg("max_depth") = 5,
        py::arg("index") = py::none(), py::arg("trace_id") = "",
        "Run one claim through the pipeline and return the trace as JSON text.");
  m.def("render_prompt", &render_prompt, py::arg("role"), py::arg("claim") = "", py::arg("context") = PairList{},
        py::arg("new_pair") = py::none(), py::arg("question_index") = py::none(),
        py::arg("avoid") = std::vector<std::string>{}, py::arg("question") = py::none());
  m.def("prompt_roles", [] {
    std::vector<std::string> out;
    for (auto r : prompts::kAllRoles) out.emplace_back(prompts::to_string(r));
    return out;
  });
  m.def("qa_backends", [] { return qa_backend_names(); });

  m.def("tokenize", [](const std::string& text) { return retrieval::tokenize(text); });

  py::class_<retrieval::Index, std::shared_ptr<retrieval::Index>>(m, "Index")
      .def_static(
          "build",
          [](const std::vector<std::tuple<std::string, std::string, std::string>>& rows, double k1, double b) {
            std::vector<retrieval::CorpusDoc> docs;
            for (const auto& [id, title, text] : rows) docs.push_back({id, title, text});
            return std::make_shared<retrieval::Index>(retrieval::build_index(std::move(docs), {k1, b}));
          },
          py::arg("docs"), py::arg("k1") = retrieval::kDefaultK1, py::arg("b") = retrieval::kDefaultB)
      .def_static("from_corpus",
                  [](const fs::path& p) {
                    return std::make_shared<retrieval::Index>(retrieval::build_index(retrieval::load_corpus(p)));
                  })
      .def_static("load", [](const fs::path& p) { return std::make_shared<retrieval::Index>(retrieval::load_snapshot(p)); })
      .def("save", [](const retrieval::Index& ix, const fs::path& p) { retrieval::save_snapshot(ix, p); })
      .def_property_readonly("doc_count", &retrieval::Index::doc_count)
      .def_property_readonly("avg_doc_len", &retrieval::Index::avg_doc_len)
      .def("idf", [](const retrieval::Index& ix, const std::string& t) { return ix.idf(t); })
      .def(
          "search",
          [](const retrieval::Index& ix, const std::string& query, std::size_t k) {
            std::vector<std::pair<std::string, double>> out;
            for (const auto& h : retrieval::search(ix, query, k)) out.emplace_back(ix.docs()[h.doc].id, h.score);
            return out;
          },
          py::arg("query"), py::arg("k") = 10)
      .def("score", [](const retrieval::Index& ix, const std::string& query, std::uint32_t doc) {
        if (doc >= ix.doc_count()) throw InvalidArgument("document ordinal out of range");
        return retrieval::bm25_score(ix, retrieval::tokenize(query), doc);
      });

  m.def("macro_f1", [](const std::vector<std::string>& golds, const std::vector<std::string>& preds) {
    return eval::macro_f1(labels_of(golds), labels_of(preds));
  });
  m.def("format_percent", &eval::format_percent);
  m.def("run_eval", &run_eval, py::arg("dataset"), py::arg("format") = "native", py::arg("backend_config") = py::none(),
        py::arg("qa_backend") = std::string(to_string(kDefaultQaBackend)), py::arg("max_depth") = 5,
        py::arg("concurrency") = 1, py::arg("index") = py::none());

  m.def("validate_trace", [](const std::string& text) { return validate_trace(trace_from_json_text(text)); },
        "Invariant violations of a trace given as JSON text; empty when valid.");

#ifdef QACHECK_VERSION
  m.attr("__version__") = QACHECK_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
