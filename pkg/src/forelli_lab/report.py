"""Deterministic JSON report assembly.

Reports are plain dicts serialized with sorted keys and no timestamps,
so one seed gives byte-identical output across runs.  Complex numbers
become [re, im] pairs and non-finite floats become the strings "inf",
"-inf", "nan" (strict JSON has no spelling for them).  Wall-clock
timings go to the human-readable text summary only, never into the JSON
payload.
"""

from __future__ import annotations

import json
import math
from importlib import resources
from typing import Any, List, Optional

from . import __version__

TOOL = "forelli-lab"


def sanitize(obj: Any) -> Any:
    """Make a value JSON-ready and deterministic."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, complex):
        return [sanitize(obj.real), sanitize(obj.imag)]
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, (int, str)) or obj is None:
        return obj
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if hasattr(obj, "item"):           # numpy scalars
        return sanitize(obj.item())
    if hasattr(obj, "tolist"):         # numpy arrays
        return sanitize(obj.tolist())
    return str(obj)


def build_report(subcommand: str, config: dict, stages: List[dict],
                 summary: dict, warnings: Optional[List[str]] = None) -> dict:
    """Assemble the canonical report structure."""
    return sanitize({
        "tool": TOOL,
        "version": __version__,
        "subcommand": subcommand,
        "config": config,
        "stages": stages,
        "summary": summary,
        "warnings": warnings or [],
    })


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def schema_text() -> str:
    """The shipped JSON schema for reports."""
    return resources.files("forelli_lab").joinpath(
        "schemas/report.schema.json").read_text(encoding="utf-8")
