# Copyright 2026 The Movo Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Python access to the Movo simulation core."""

import json

from ._movo import (
    ContentStore,
    DagLedger,
    KeyPair,
    LedgerError,
    MamChannel,
    MamError,
    StoreError,
    hash,
    mam_fetch,
    verify_signature,
)
from . import _movo

__all__ = [
    "ContentStore",
    "DagLedger",
    "KeyPair",
    "LedgerError",
    "MamChannel",
    "MamError",
    "StoreError",
    "default_config",
    "hash",
    "mam_fetch",
    "run_scenario",
    "verify",
    "verify_signature",
]


def default_config(scenario):
    return json.loads(_movo.default_config(scenario))


def run_scenario(config):
    """Runs a scenario and returns (metrics, events)."""
    metrics, events = _movo.run_scenario_json(json.dumps(config))
    return json.loads(metrics), [json.loads(line) for line in events.splitlines()]


def verify(report, expectations):
    """Returns (exit_code, [(metric, ok, detail)], report_failures)."""
    return _movo.verify_json(json.dumps(report), json.dumps(expectations))
