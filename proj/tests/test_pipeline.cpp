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

#include <doctest.h>

#include <set>
#include <thread>

#include "fixtures.hpp"
#include "qacheck/json_io.hpp"
#include "qacheck/pipeline.hpp"

using namespace qacheck;
using namespace qacheck::pipeline;
using namespace qacheck::testing;

namespace {

// Role-dispatching fake: each role's reply is computed from the prompt.
struct FakeRoles {
  std::function<std::string(std::string_view)> verifier = [](std::string_view) { return "No, we cannot know."; };
  std::function<std::string(std::string_view)> question = [](std::string_view p) {
    return "Question number " + std::to_string(std::count(p.begin(), p.end(), '\n')) + "?";
  };
  std::function<std::string(std::string_view)> validator = [](std::string_view) { return "Yes"; };
  std::function<std::string(std::string_view)> reasoner = [](std::string_view) {
    return "Therefore, the final answer is: True.";
  };
  std::function<std::string(std::string_view)> reader = [](std::string_view) { return "an answer"; };

  std::shared_ptr<gen::FunctionBackend> backend() const {
    return std::make_shared<gen::FunctionBackend>([*this](const gen::GenRequest& req) -> std::string {
      switch (classify_prompt(req.prompt)) {
        case PromptKind::Verifier:
          return verifier(final_block(req.prompt));
        case PromptKind::InitialQuestion:
        case PromptKind::FollowupQuestion:
          return question(final_block(req.prompt));
        case PromptKind::Validator:
          return validator(final_block(req.prompt));
        case PromptKind::Reasoner:
          return reasoner(final_block(req.prompt));
        case PromptKind::Recite:
          return "A recited passage.";
        case PromptKind::Reader:
        case PromptKind::Seq2Seq:
          return reader(final_block(req.prompt));
      }
      return "";
    });
  }
};

Pipeline make(const FakeRoles& roles, PipelineConfig cfg = {}) {
  auto b = roles.backend();
  const Engine engine(RoleBackends::uniform(b), b, nullptr);
  return engine.make_pipeline(cfg);
}

Claim superdrag() { return make_claim("superdrag", std::string(kSuperdragClaim)); }
Claim onsager() { return make_claim("onsager", std::string(kOnsagerClaim)); }

Context one_pair() {
  Context c;
  c.append(qa_pair(kSuperdragQ1, "Yes"));
  return c;
}

std::size_t count_role(const ReasoningTrace& t, std::string_view role) {
  return static_cast<std::size_t>(
      std::count_if(t.raw_exchanges.begin(), t.raw_exchanges.end(), [&](const RawExchange& x) { return x.role == role; }));
}

std::string without_timestamps(const ReasoningTrace& t) {
  auto j = nlohmann::json(t);
  j.erase("started_at");
  j.erase("finished_at");
  return j.dump();
}

}  // namespace

TEST_CASE("parse_yes_no") {
  CHECK(parse_yes_no("Yes, we can know."));
  CHECK(parse_yes_no("The answer: Yes"));
  CHECK_FALSE(parse_yes_no("No, we cannot know."));
  CHECK_FALSE(parse_yes_no("  NO \n"));
  CHECK_FALSE(parse_yes_no("no \xe2\x80\x94 adds nothing"));
  CHECK(parse_yes_no("the answer:yes."));
  CHECK_THROWS_AS(parse_yes_no("certainly"), UnparseableCompletion);
  CHECK_THROWS_AS(parse_yes_no("Maybe."), UnparseableCompletion);
  CHECK_THROWS_AS(parse_yes_no(""), UnparseableCompletion);
}

TEST_CASE("parse_final_answer") {
  CHECK(parse_final_answer(kOnsagerRationale) == Label::Refuted);
  CHECK(parse_final_answer("final answer is TRUE") == Label::Supported);
  CHECK(parse_final_answer("The final answer is false, but the final answer is: true!") == Label::Supported);
  CHECK_THROWS_AS(parse_final_answer("the answer is false"), UnparseableVerdict);
  CHECK_THROWS_AS(parse_final_answer("final answer is unclear, false"), UnparseableVerdict);
  CHECK_THROWS_AS(parse_final_answer("It is unclear."), UnparseableVerdict);
}

TEST_CASE("pipeline config bounds") {
  PipelineConfig cfg;
  CHECK(cfg.max_depth == 5);
  CHECK(cfg.max_regen_attempts == 3);
  cfg.max_depth = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg.max_depth = 1;
  cfg.max_regen_attempts = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("verify_sufficiency on the Superdrag demonstrations") {
  FakeRoles roles;
  roles.verifier = [](std::string_view block) {
    return contains(block, "Question 2 = ") ? "Yes, we can know." : "No, we cannot know.";
  };
  const auto p = make(roles);
  CHECK_FALSE(p.verify_sufficiency(superdrag(), one_pair()));
  auto two = one_pair();
  two.append(qa_pair(kSuperdragQ2, "Yes"));
  CHECK(p.verify_sufficiency(superdrag(), two));
  roles.verifier = [](std::string_view) { return "Maybe."; };
  CHECK_THROWS_AS(make(roles).verify_sufficiency(superdrag(), one_pair()), UnparseableCompletion);
}

TEST_CASE("generate_question picks the template by context") {
  FakeRoles roles;
  roles.question = [](std::string_view block) {
    return ends_with(block, "Question = ") ? "Is Superdrag a rock band?\nextra" : "\n  Is Collective Soul a rock band?  \n";
  };
  const auto p = make(roles);
  std::vector<RawExchange> log;
  CHECK(p.generate_question(superdrag(), Context{}, {}, &log) == "Is Superdrag a rock band?");
  CHECK(p.generate_question(superdrag(), one_pair(), {}, &log) == "Is Collective Soul a rock band?");
  REQUIRE(log.size() == 2);
  CHECK(ends_with(log[1].prompt, "Question 2 = "));
  const std::vector<std::string> rejected = {"Is Superdrag from Tennessee?"};
  (void)p.generate_question(superdrag(), one_pair(), rejected, &log);
  CHECK(ends_with(log[2].prompt, "Do not repeat these questions:\n- Is Superdrag from Tennessee?\nQuestion 2 = "));
  roles.question = [](std::string_view) { return "\n\n"; };
  CHECK_THROWS_AS(make(roles).generate_question(superdrag(), Context{}, {}), EmptyGeneration);
}

TEST_CASE("validate_qa") {
  FakeRoles roles;
  int calls = 0;
  roles.validator = [&](std::string_view) {
    ++calls;
    return "Yes";
  };
  const auto p = make(roles);
  CHECK(p.validate_qa(superdrag(), one_pair(), qa_pair(kSuperdragQ2, "Yes")));
  CHECK(calls == 1);
  CHECK_FALSE(p.validate_qa(superdrag(), one_pair(), qa_pair(kSuperdragQ1, "Yes")));
  CHECK(calls == 1);
  roles.validator = [](std::string_view) { return "no \xe2\x80\x94 adds nothing"; };
  CHECK_FALSE(make(roles).validate_qa(superdrag(), one_pair(), qa_pair(kSuperdragQ2, "Yes")));
}

TEST_CASE("reason maps true/false onto labels") {
  Context ctx;
  ctx.append(qa_pair(kOnsagerQ1, kOnsagerA1));
  ctx.append(qa_pair(kOnsagerQ2, kOnsagerA2));
  FakeRoles roles;
  roles.reasoner = [](std::string_view) { return std::string(kOnsagerRationale); };
  auto v = make(roles).reason(onsager(), ctx);
  CHECK(v.label == Label::Refuted);
  CHECK(contains(v.rationale, "Therefore, the final answer is: False."));
  roles.reasoner = [](std::string_view) { return "Therefore, the final answer is: True."; };
  CHECK(make(roles).reason(onsager(), ctx).label == Label::Supported);
  roles.reasoner = [](std::string_view) { return ": False."; };
  v = make(roles).reason(onsager(), ctx);
  CHECK(v.label == Label::Refuted);
  CHECK(v.rationale == "Therefore, the final answer is: False.");
  roles.reasoner = [](std::string_view) { return "It is unclear."; };
  CHECK_THROWS_AS(make(roles).reason(onsager(), ctx), UnparseableVerdict);
}

TEST_CASE("Onsager transcript: two accepted steps and a Refuted verdict") {
  auto b = std::make_shared<gen::FunctionBackend>(onsager_responder);
  const Engine engine(RoleBackends::uniform(b), b, nullptr);
  const auto t = engine.make_pipeline({}).run_check(onsager(), "aa");
  REQUIRE(t.status == TraceStatus::Done);
  REQUIRE(t.steps.size() == 2);
  CHECK(t.steps[0].question == kOnsagerQ1);
  CHECK(t.steps[0].answer == kOnsagerA1);
  CHECK(t.steps[1].question == kOnsagerQ2);
  CHECK(t.steps[1].answer == kOnsagerA2);
  CHECK(t.verdict->label == Label::Refuted);
  CHECK(contains(t.verdict->rationale, "the final answer is: False"));
  CHECK(validate_trace(t).empty());
  const std::vector<std::string> roles_in_order = {"verifier", "question_generator", "qa_recite", "qa_reader",
                                                   "validator", "verifier", "question_generator", "qa_recite",
                                                   "qa_reader", "validator", "verifier", "reasoner"};
  REQUIRE(t.raw_exchanges.size() == roles_in_order.size());
  for (std::size_t i = 0; i < roles_in_order.size(); ++i) CHECK(t.raw_exchanges[i].role == roles_in_order[i]);
}

TEST_CASE("always-No verifier stops at max_depth accepted steps") {
  for (int depth : {1, 3, 5, 7}) {
    PipelineConfig cfg;
    cfg.max_depth = depth;
    const auto t = make(FakeRoles{}, cfg).run_check(superdrag(), "ab");
    REQUIRE(t.status == TraceStatus::Done);
    CHECK(t.steps.size() == static_cast<std::size_t>(depth));
    CHECK(t.context().size() == static_cast<std::size_t>(depth));
    CHECK(count_role(t, "verifier") == static_cast<std::size_t>(depth));
    CHECK(count_role(t, "reasoner") == 1);
    CHECK(t.raw_exchanges.back().role == "reasoner");
    CHECK(validate_trace(t).empty());
  }
}

TEST_CASE("always-No validator: max_regen_attempts rejections per depth, then a force-accept") {
  FakeRoles roles;
  roles.validator = [](std::string_view) { return "No"; };
  int asked = 0;
  roles.question = [&](std::string_view) { return "Distinct question " + std::to_string(++asked) + "?"; };
  for (int attempts : {1, 3}) {
    PipelineConfig cfg;
    cfg.max_regen_attempts = attempts;
    asked = 0;
    const auto t = make(roles, cfg).run_check(superdrag(), "ab");
    REQUIRE(t.status == TraceStatus::Done);
    REQUIRE(t.steps.size() == static_cast<std::size_t>(5 * (attempts + 1)));
    for (int d = 0; d < 5; ++d) {
      for (int a = 0; a < attempts; ++a) {
        const auto& s = t.steps[static_cast<std::size_t>(d * (attempts + 1) + a)];
        CHECK(s.depth == d + 1);
        CHECK_FALSE(s.accepted);
        CHECK(s.rejection_reason == std::optional<std::string>(std::string(kRejectedByValidator)));
      }
      const auto& forced = t.steps[static_cast<std::size_t>(d * (attempts + 1) + attempts)];
      CHECK(forced.accepted);
      CHECK(forced.depth == d + 1);
      // The forced pair is the last rejected candidate.
      CHECK(forced.question == t.steps[static_cast<std::size_t>(d * (attempts + 1) + attempts - 1)].question);
    }
    CHECK(validate_trace(t).empty());
  }
}

TEST_CASE("a repeated rejected question is recorded without another QA call") {
  FakeRoles roles;
  roles.validator = [](std::string_view) { return "No"; };
  roles.question = [](std::string_view) { return "Always the same?"; };
  PipelineConfig cfg;
  cfg.max_depth = 1;
  const auto t = make(roles, cfg).run_check(superdrag(), "ab");
  REQUIRE(t.status == TraceStatus::Done);
  REQUIRE(t.steps.size() == 4);
  CHECK(t.steps[0].rejection_reason == std::optional<std::string>(std::string(kRejectedByValidator)));
  CHECK(t.steps[1].rejection_reason == std::optional<std::string>(std::string(kRejectedRepeatedQuestion)));
  CHECK(t.steps[2].rejection_reason == std::optional<std::string>(std::string(kRejectedRepeatedQuestion)));
  CHECK(t.steps[3].accepted);
  CHECK(count_role(t, "qa_recite") == 1);
  CHECK(count_role(t, "validator") == 1);
  CHECK(validate_trace(t).empty());
}

TEST_CASE("a depth that only yields duplicates ends the loop") {
  FakeRoles roles;
  roles.question = [](std::string_view) { return "Same question?"; };
  roles.validator = [](std::string_view) { return "Yes"; };
  const auto t = make(roles).run_check(superdrag(), "ab");
  REQUIRE(t.status == TraceStatus::Done);
  CHECK(t.context().size() == 1);
  CHECK(t.steps.size() == 4);
  CHECK(t.steps[1].rejection_reason == std::optional<std::string>(std::string(kRejectedDuplicatePair)));
  CHECK(validate_trace(t).empty());
}

TEST_CASE("a sufficient empty context goes straight to the reasoner") {
  FakeRoles roles;
  roles.verifier = [](std::string_view) { return "Yes, we can know."; };
  const auto t = make(roles).run_check(superdrag(), "ab");
  CHECK(t.steps.empty());
  CHECK(t.raw_exchanges.size() == 2);
  CHECK(t.status == TraceStatus::Done);
}

TEST_CASE("role failures end the trace in error with the partial record kept") {
  FakeRoles roles;
  int n = 0;
  roles.verifier = [&](std::string_view) { return ++n < 3 ? "No" : "Perhaps"; };
  std::vector<ReasoningTrace> snapshots;
  const auto t = make(roles).run_check(superdrag(), "ab", [&](const ReasoningTrace& s) { snapshots.push_back(s); });
  CHECK(t.status == TraceStatus::Error);
  CHECK(contains(*t.error_detail, "Perhaps"));
  CHECK(t.steps.size() == 2);
  CHECK(t.finished_at);
  CHECK(validate_trace(t).empty());
  REQUIRE_FALSE(snapshots.empty());
  CHECK(snapshots.front().status == TraceStatus::Running);
  CHECK(snapshots.back() == t);

  FakeRoles throwing;
  throwing.reader = [](std::string_view) -> std::string { throw gen::TimeoutError("slow"); };
  const auto t2 = make(throwing).run_check(superdrag(), "ab");
  CHECK(t2.status == TraceStatus::Error);
  CHECK(t2.error_detail == std::optional<std::string>("slow"));
  CHECK(t2.raw_exchanges.back().role == "qa_reader");
  CHECK(t2.raw_exchanges.back().completion.empty());
}

TEST_CASE("accepted pairs reappear unchanged in every later prompt") {
  const auto t = make(FakeRoles{}).run_check(superdrag(), "ab");
  const auto ctx = t.context();
  std::size_t verifier_seen = 0;
  for (const auto& x : t.raw_exchanges) {
    if (x.role != "verifier") continue;
    const auto block = final_block(x.prompt);
    for (std::size_t i = 0; i < verifier_seen && i < ctx.size(); ++i) {
      const auto& p = ctx.pairs()[i];
      const auto line = "Question " + std::to_string(p.index) + " = " + p.question + "\nAnswer " +
                        std::to_string(p.index) + " = " + p.answer + "\n";
      CHECK(contains(block, line));
    }
    ++verifier_seen;
  }
  CHECK(verifier_seen == 5);
}

TEST_CASE("every generation call is logged in call order") {
  std::vector<std::string> seen;
  auto inner = FakeRoles{}.backend();
  auto spy = std::make_shared<gen::FunctionBackend>([&](const gen::GenRequest& r) {
    seen.push_back(r.prompt);
    return inner->generate(r).text;
  });
  const Engine engine(RoleBackends::uniform(spy), spy, nullptr);
  const auto t = engine.make_pipeline({}).run_check(superdrag(), "ab");
  REQUIRE(seen.size() == t.raw_exchanges.size());
  for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == t.raw_exchanges[i].prompt);
}

TEST_CASE("scripted runs are deterministic, also when run concurrently") {
  auto b = std::make_shared<gen::FunctionBackend>(onsager_responder);
  const Engine engine(RoleBackends::uniform(b), b, nullptr);
  const auto pipe = engine.make_pipeline({});
  const auto reference = without_timestamps(pipe.run_check(onsager(), "ab"));
  std::vector<std::string> results(8);
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < results.size(); ++i) {
    pool.emplace_back([&, i] { results[i] = without_timestamps(pipe.run_check(onsager(), "ab")); });
  }
  for (auto& th : pool) th.join();
  for (const auto& r : results) CHECK(r == reference);
}

TEST_CASE("trace ids are 32 lowercase hex characters and distinct") {
  std::set<std::string> ids;
  for (int i = 0; i < 1000; ++i) {
    const auto id = random_trace_id();
    CHECK(id.size() == 32);
    CHECK(id.find_first_not_of("0123456789abcdef") == std::string::npos);
    ids.insert(id);
  }
  CHECK(ids.size() == 1000);
}

TEST_CASE("each QA backend runs through the engine") {
  auto b = FakeRoles{}.backend();
  auto index = std::make_shared<const retrieval::Index>(
      retrieval::build_index({{"d1", "Superdrag", "Superdrag is a rock band from Knoxville, Tennessee."}}));
  const Engine engine(RoleBackends::uniform(b), b, nullptr, index);
  for (auto kind : {QaBackendKind::RetrieverReader, QaBackendKind::Seq2Seq, QaBackendKind::ReciterReader}) {
    PipelineConfig cfg;
    cfg.qa_backend = kind;
    cfg.max_depth = 2;
    const auto t = engine.make_pipeline(cfg).run_check(superdrag(), "ab");
    CHECK(t.status == TraceStatus::Done);
    CHECK(t.qa_backend == kind);
    CHECK(validate_trace(t).empty());
  }
  const Engine no_index(RoleBackends::uniform(b), b, nullptr);
  CHECK_FALSE(no_index.available(QaBackendKind::RetrieverReader));
  PipelineConfig cfg;
  cfg.qa_backend = QaBackendKind::RetrieverReader;
  CHECK_THROWS_AS((void)no_index.make_pipeline(cfg), InvalidArgument);
}

TEST_CASE("engine config files") {
  TempDir dir;
  write_file(dir.path() / "s.jsonl", "");
  write_file(dir.path() / "cfg.json",
             R"({"default": {"kind": "scripted", "script_path": "s.jsonl"},
                 "reasoner": {"kind": "remote", "base_url": "http://localhost:1", "model_name": "m"},
                 "retrieval_k": 5})");
  const auto cfg = load_engine_config(dir.path() / "cfg.json");
  CHECK(cfg.verifier.kind == gen::BackendKind::Scripted);
  CHECK(cfg.verifier.script_path == dir.path() / "s.jsonl");
  CHECK(cfg.reasoner.kind == gen::BackendKind::Remote);
  CHECK(cfg.retrieval_k == 5);
  CHECK_NOTHROW(Engine{cfg});
  write_file(dir.path() / "bad.json", R"({"verifier": {"kind": "scripted"}})");
  CHECK_THROWS((void)load_engine_config(dir.path() / "bad.json"));
}
