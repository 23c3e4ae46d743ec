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

"""Question-guided claim verification."""

import json
import os

from . import _core
from ._core import (
    Index,
    ParseError,
    QacheckError,
    format_percent,
    macro_f1,
    prompt_roles,
    qa_backends,
    render_prompt,
    tokenize,
)

__all__ = [
    "Index",
    "ParseError",
    "QacheckError",
    "check",
    "format_percent",
    "macro_f1",
    "prompt_roles",
    "qa_backends",
    "render_prompt",
    "run_eval",
    "tokenize",
    "validate_trace",
]

__version__ = _core.__version__


def _path(p):
    return None if p is None else os.fspath(p)


def check(claim, backend_config=None, qa_backend="reciter_reader", max_depth=5, index=None, trace_id=""):
    """Verify one claim; returns the reasoning trace as a dict."""
    text = _core.check(claim, _path(backend_config), qa_backend, max_depth, _path(index), trace_id)
    return json.loads(text)


def run_eval(dataset, format="native", backend_config=None, qa_backend="reciter_reader", max_depth=5,
             concurrency=1, index=None):
    """Evaluate a labelled dataset; returns the report as a dict."""
    text = _core.run_eval(_path(dataset), format, _path(backend_config), qa_backend, max_depth, concurrency,
                          _path(index))
    return json.loads(text)


def validate_trace(trace):
    """List of invariant violations for a trace dict or JSON string."""
    if not isinstance(trace, str):
        trace = json.dumps(trace)
    return _core.validate_trace(trace)
