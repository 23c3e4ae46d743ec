# Copyright 2026 The QACheck Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math
import os
import pathlib

import pytest

import qacheck

SOURCE = pathlib.Path(os.environ.get("QACHECK_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))
FIXTURES = SOURCE / "tests" / "fixtures"
ONSAGER = "Lars Onsager won the Nobel Prize when he was 30 years old."


def test_check_replays_transcript():
    trace = qacheck.check(ONSAGER, backend_config=FIXTURES / "onsager_backends.json", trace_id="ab" * 16)
    assert trace["status"] == "done"
    assert trace["verdict"]["label"] == "Refuted"
    assert [s["accepted"] for s in trace["steps"]] == [True, True]
    assert qacheck.validate_trace(trace) == []


def test_check_errors_are_reported_in_the_trace():
    trace = qacheck.check("Nobody scripted this.", backend_config=FIXTURES / "onsager_backends.json")
    assert trace["status"] == "error"
    assert trace["error_detail"]


def test_bad_arguments_raise():
    with pytest.raises(qacheck.QacheckError):
        qacheck.check(ONSAGER, qa_backend="oracle")
    with pytest.raises(qacheck.QacheckError):
        qacheck.render_prompt("narrator", "x")


def test_render_prompt_matches_golden():
    q1 = "When Lars Onsager won the Nobel Prize?"
    a1 = "1968"
    golden = (SOURCE / "tests" / "golden" / "onsager_verifier.txt").read_text()
    assert qacheck.render_prompt("verifier", ONSAGER, context=[(q1, a1)]) == golden
    assert set(qacheck.prompt_roles()) >= {"verifier", "validator", "reasoner"}


def test_bm25_against_formula():
    docs = [("a", "", "the cat sat"), ("b", "", "the dog sat on the cat"), ("c", "", "birds fly")]
    ix = qacheck.Index.build(docs)
    assert ix.doc_count == 3
    assert ix.avg_doc_len == pytest.approx(11 / 3)
    hits = ix.search("cat", k=10)
    assert [h[0] for h in hits] == ["a", "b"]
    idf = math.log(1 + (3 - 2 + 0.5) / (2 + 0.5))
    expected = idf * 1 * 1.9 / (1 + 0.9 * (1 - 0.4 + 0.4 * 3 / (11 / 3)))
    assert hits[0][1] == pytest.approx(expected, abs=1e-12)
    assert qacheck.tokenize("Hello, World-42!") == ["hello", "world", "42"]


def test_index_snapshot_round_trip(tmp_path):
    ix = qacheck.Index.build([("a", "T", "one two"), ("b", "", "two three")])
    ix.save(tmp_path / "i.bin")
    again = qacheck.Index.load(tmp_path / "i.bin")
    assert again.search("two") == ix.search("two")
    (tmp_path / "bad.bin").write_bytes(b"nope")
    with pytest.raises(qacheck.QacheckError):
        qacheck.Index.load(tmp_path / "bad.bin")


def test_macro_f1():
    assert qacheck.format_percent(
        qacheck.macro_f1(["Supported", "Supported", "Refuted", "Refuted"],
                         ["Supported", "Refuted", "Refuted", "Refuted"])) == "73.33"
    with pytest.raises(qacheck.QacheckError):
        qacheck.macro_f1(["Supported"], [])


def test_run_eval():
    report = qacheck.run_eval(FIXTURES / "eval20.jsonl", backend_config=FIXTURES / "eval20_backends.json",
                              concurrency=2)
    assert report["n_claims"] == 20
    assert report["n_errored"] == 1
    assert report["macro_f1_display"] == "79.80"
