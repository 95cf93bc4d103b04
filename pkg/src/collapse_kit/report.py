"""Structured JSON reports: schema collapse-kit/1.

Reports are deterministic functions of (input bytes, config, seed); wall-time
fields live under the single key "timing" so consumers can compare runs by
dropping that key.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

SCHEMA = "collapse-kit/1"
TOOL_VERSION = "0.1.0"


def fingerprint_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


def fingerprint_file(path) -> str:
    with open(path, "rb") as fh:
        return fingerprint_bytes(fh.read())


def to_jsonable(obj: Any):
    """Convert verdicts/fields/dataclasses with to_json() into plain JSON data."""
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    if isinstance(obj, float):
        return obj
    try:
        return float(obj)  # Fractions and numpy scalars
    except (TypeError, ValueError):
        return str(obj)


def build_report(command: str, input_desc: dict, config: dict, results: dict,
                 fields: dict | None = None, timing_s: float | None = None) -> dict:
    report = {
        "schema": SCHEMA,
        "tool_version": TOOL_VERSION,
        "command": command,
        "input": to_jsonable(input_desc),
        "config": to_jsonable(config),
        "results": to_jsonable(results),
    }
    if fields:
        report["fields"] = to_jsonable(fields)
    report["timing"] = {"seconds": timing_s if timing_s is not None else 0.0}
    return report


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_report(report: dict, out_path=None) -> str:
    text = dump_report(report)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
