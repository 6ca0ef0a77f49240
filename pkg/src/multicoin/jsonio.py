"""Canonical JSON serialization shared by CLI and service.

Outputs are pretty-printed with sorted keys so repeated runs and the
CLI/service pair produce byte-identical documents.
"""

from __future__ import annotations

import json
from pathlib import Path


def canonical_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(canonical_json(obj), encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
