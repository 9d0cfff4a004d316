"""Comparison reports: one verified inequality instance each."""

from __future__ import annotations

import json
import math
import os
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import Any, Iterator

PASS = "PASS"
FAIL = "FAIL"
INCONCLUSIVE = "INCONCLUSIVE"

CLOSED_FORM_TOL = 1e-6
QUADRATURE_TOL = 5e-2

REPORT_FIELDS = (
    "check_id", "params", "lhs", "rhs", "constant", "ratio", "status", "mesh_level", "runtime_ms",
)

# wall-clock fields break byte-identical reruns, so they are opt-in
RECORD_RUNTIME = os.environ.get("MIXTRACE_RECORD_RUNTIME", "") not in ("", "0")


@dataclass
class ComparisonReport:
    check_id: str
    params: dict[str, Any]
    lhs: float
    rhs: float
    constant: float
    ratio: float
    status: str
    mesh_level: int = 0
    runtime_ms: int = 0

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def check(self) -> dict[str, Any]:
        return self.params.get("check", {})

    def to_dict(self) -> dict[str, Any]:
        return {k: _jsonable(v) for k, v in asdict(self).items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ComparisonReport":
        return cls(**{k: data[k] for k in REPORT_FIELDS})


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def ratio_of(lhs: float, rhs: float, constant: float) -> float:
    """``lhs / (constant * rhs)`` with ``0 / 0 = 0``."""
    denom = constant * rhs
    if denom == 0.0:
        return 0.0 if lhs == 0.0 else math.inf
    return lhs / denom


def compare(
    check_id: str,
    lhs: float,
    rhs: float,
    constant: float,
    *,
    tol: float = QUADRATURE_TOL,
    params: dict[str, Any] | None = None,
    mesh_level: int = 0,
    inconclusive: str | None = None,
    note: str | None = None,
    extras: dict[str, Any] | None = None,
    runtime_ms: int = 0,
) -> ComparisonReport:
    """Build a report; ``inconclusive`` carries the divergence reason if any."""
    lhs, rhs, constant = float(lhs), float(rhs), float(constant)
    ratio = ratio_of(lhs, rhs, constant)
    if inconclusive is not None:
        status = INCONCLUSIVE
    elif math.isfinite(ratio) and ratio <= 1.0 + tol:
        status = PASS
    else:
        status = FAIL
    check: dict[str, Any] = {"tol": tol}
    if note:
        check["note"] = note
    if inconclusive is not None:
        check["reason"] = inconclusive
    if extras:
        check.update(extras)
    full = dict(params or {})
    full["check"] = check
    return ComparisonReport(
        check_id, full, lhs, rhs, constant, ratio, status, mesh_level,
        runtime_ms if RECORD_RUNTIME else 0,
    )


@contextmanager
def stopwatch() -> Iterator[dict[str, int]]:
    box = {"ms": 0}
    t0 = time.perf_counter()
    try:
        yield box
    finally:
        box["ms"] = int(1000 * (time.perf_counter() - t0))


class CampaignFailure(RuntimeError):
    """A check reported FAIL; ``report`` is the offending instance."""

    def __init__(self, report: ComparisonReport):
        super().__init__(f"check {report.check_id} failed: {report.to_json()}")
        self.report = report
