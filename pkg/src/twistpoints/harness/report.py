"""Verification reports (JSON) and plot data (CSV).

Everything that can change between two runs of the same scenario (wall
clock, host, runtimes) lives in the single ``volatile`` field; the rest of
the report is byte-identical for identical inputs.
"""
from __future__ import annotations

import csv
import io
import json
import math
import platform
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

REPORT_SCHEMA = 1

CSV_SCHEMAS = {
    "eigenvalue_distance": ("suite", "pair", "t", "eig_dist_to_one"),
    "index_vs_iterate": ("suite", "label", "s", "cz", "expected"),
    "action_intervals": ("p_j", "p_jm", "lo", "hi", "shift", "center", "verdict"),
    "index_path": ("t", "winding", "eig_dist_to_one"),
}

# JSON schema (draft 2020-12) of report.json
REPORT_JSON_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "scenario", "seed", "checks", "errors", "environment", "verdict"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": REPORT_SCHEMA},
        "scenario": {"type": "string"},
        "seed": {"type": "integer"},
        "verdict": {"enum": ["pass", "fail"]},
        "errors": {"type": "array"},
        "environment": {"type": "object", "additionalProperties": {"type": "string"}},
        "checks": {"type": "array", "items": {
            "type": "object",
            "required": ["suite", "check", "anchor", "passed", "value", "tol", "detail"],
            "additionalProperties": False,
            "properties": {"suite": {"type": "string"}, "check": {"type": "string"},
                           "anchor": {"type": "string"}, "passed": {"type": "boolean"},
                           "value": {}, "tol": {}, "detail": {"type": "object"}}}},
        "volatile": {"type": "object", "required": ["timestamp", "host", "runtimes"],
                     "properties": {"runtimes": {"type": "object",
                                                 "additionalProperties": {"type": "number"}}}},
    },
}


def _clean(v):
    """JSON-ready copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


@dataclass
class CheckRecord:
    suite: str
    check: str
    anchor: str
    passed: bool
    value: object
    tol: object
    detail: dict = field(default_factory=dict)

    def as_dict(self):
        return _clean({"suite": self.suite, "check": self.check, "anchor": self.anchor,
                       "passed": self.passed, "value": self.value, "tol": self.tol,
                       "detail": self.detail})


def fingerprint():
    import scipy
    return {"python": ".".join(map(str, sys.version_info[:3])), "numpy": np.__version__,
            "scipy": scipy.__version__, "machine": platform.machine()}


@dataclass
class VerificationReport:
    scenario: str
    records: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    runtimes: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def passed(self):
        return bool(self.records) and not self.errors and all(r.passed for r in self.records)

    def as_dict(self, volatile=True):
        out = {"schema": REPORT_SCHEMA, "scenario": self.scenario, "seed": self.seed,
               "checks": [r.as_dict() for r in self.records],
               "errors": _clean(self.errors),
               "environment": fingerprint(),
               "verdict": "pass" if self.passed else "fail"}
        if volatile:
            out["volatile"] = {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
                               "host": platform.node(),
                               "runtimes": _clean(self.runtimes)}
        return out

    def dumps(self, volatile=True):
        return json.dumps(self.as_dict(volatile), sort_keys=True, indent=2) + "\n"

    @classmethod
    def loads(cls, text):
        d = json.loads(text)
        rep = cls(d["scenario"], seed=d.get("seed", 0))
        for r in d["checks"]:
            rep.records.append(CheckRecord(r["suite"], r["check"], r["anchor"], r["passed"],
                                           r["value"], r["tol"], r.get("detail", {})))
        rep.errors = d.get("errors", [])
        rep.runtimes = d.get("volatile", {}).get("runtimes", {})
        return rep


def strip_volatile(text):
    """Report text without the volatile field, for byte comparisons."""
    d = json.loads(text)
    d.pop("volatile", None)
    return json.dumps(d, sort_keys=True, indent=2) + "\n"


def csv_text(kind, rows):
    header = CSV_SCHEMAS[kind]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _fmt(x):
    x = _clean(x)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_outputs(report: VerificationReport, plots: dict, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "report.json"]
    (out / "report.json").write_text(report.dumps(), encoding="utf-8", newline="\n")
    for kind in sorted(plots):
        p = out / f"{kind}.csv"
        p.write_text(csv_text(kind, plots[kind]), encoding="utf-8", newline="\n")
        paths.append(p)
    return paths
