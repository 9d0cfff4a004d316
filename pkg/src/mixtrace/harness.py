"""Verification campaigns over the family registry and the exponent matrix."""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import DomainError, NumericError
from .exponents import ExponentConfig
from .families import FAMILY_KINDS, FunctionHandle, instantiate, ramp_cutoff
from .hardy import HardyParams, hardy_check, hardy_polar_check, polar_diverges, radial_power
from .norms import (
    BesovVariant,
    besov_direct_parts,
    besov_norm,
    besov_seminorm,
    mixed_lebesgue_norm,
    slice_norms,
    sobolev_norm,
    sobolev_parts,
)
from .quadrature import DEFAULT_SPEC, QuadratureSpec
from .reports import (
    CLOSED_FORM_TOL,
    FAIL,
    INCONCLUSIVE,
    PASS,
    QUADRATURE_TOL,
    CampaignFailure,
    ComparisonReport,
    compare,
    stopwatch,
)
from .smoothing import DEFAULT_KMAX, convolution_bounds_check, extend, extension_limit_profile, trace_restrict

DRIFT_LIMIT = 0.02
VANISHING_LEVEL = 20
VANISHING_FRACTION = 0.05


class CheckKind(str, Enum):
    HARDY = "hardy"
    HARDY_POLAR = "hardy-polar"
    CONVOLUTION = "convolution"
    BESOV_EQUIVALENCE = "besov-equivalence"
    LP_TRACE = "lp-trace"
    BESOV_TRACE = "besov-trace"
    EXTENSION_BOUND = "extension-bound"
    EXTENSION_LIMIT = "extension-limit"
    VANISHING_TRACE = "vanishing-trace"

    def __str__(self) -> str:
        return self.value


GRADIENT_KINDS = {CheckKind.LP_TRACE, CheckKind.BESOV_TRACE, CheckKind.EXTENSION_BOUND}
HALFSPACE_KINDS = {CheckKind.LP_TRACE, CheckKind.BESOV_TRACE, CheckKind.VANISHING_TRACE}
EMPIRICAL_KINDS = {
    CheckKind.HARDY_POLAR, CheckKind.BESOV_EQUIVALENCE, CheckKind.LP_TRACE,
    CheckKind.BESOV_TRACE, CheckKind.EXTENSION_BOUND,
}

DEFAULT_CEILINGS = {
    "hardy-polar": 10.0,
    "convolution/derivative": 5.0,
    "besov-equivalence": 50.0,
    "lp-trace": 20.0,
    "besov-trace": 50.0,
    "extension-bound": 50.0,
}


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class Instance:
    """One campaign task; ``family`` is a family spec dict or a Hardy shape name."""

    kind: CheckKind
    family: Any
    cfg: Any
    options: tuple[tuple[str, Any], ...] = ()

    def option(self, name: str, default=None):
        return dict(self.options).get(name, default)

    def key(self) -> str:
        fam = self.family if isinstance(self.family, str) else _spec_key(self.family)
        cfg = self.cfg.key() if isinstance(self.cfg, ExponentConfig) else repr(self.cfg.to_dict())
        return f"{self.kind}|{fam}|{cfg}|{self.options!r}"


def _spec_key(spec) -> str:
    return json.dumps(spec, sort_keys=True)


def _cfg_params(cfg) -> dict:
    return cfg.to_dict()


def _besov_regularity(f: FunctionHandle, cfg: ExponentConfig) -> float:
    if f.jumps:
        return 1.0 / max(cfg.p_vec)
    return 1.0 if f.kind != "zero" else math.inf


def admissibility(kind: CheckKind, f, cfg) -> str | None:
    """Reason an instance cannot be run, or ``None``."""
    if kind == CheckKind.HARDY:
        return None
    if kind == CheckKind.HARDY_POLAR:
        if f.d != cfg.d:
            return f"family dimension {f.d} != polar dimension {cfg.d}"
        if polar_diverges(f, cfg):
            return "weighted norm diverges at 0"
        return None
    if f.d != cfg.d:
        return f"family dimension {f.d} != cfg dimension {cfg.d}"
    halfspace = not f.is_boundary
    if kind in HALFSPACE_KINDS and not halfspace:
        return "needs a half-space family"
    if kind not in HALFSPACE_KINDS and halfspace:
        return "needs a boundary family"
    if kind in GRADIENT_KINDS and not f.has_gradient:
        return "family has no gradient"
    if kind == CheckKind.VANISHING_TRACE:
        if not cfg.vanishing_trace:
            return "vanishing-trace needs alpha in (-q, -1]"
        return None
    if kind is not CheckKind.CONVOLUTION and not cfg.in_trace_window:
        return "alpha outside (-1, q - 1)"
    if kind in (CheckKind.LP_TRACE, CheckKind.BESOV_TRACE):
        if cfg.alpha + cfg.q * f.vertical_order <= -1:
            return "Sobolev norm diverges at y = 0"
        if f.trace is None:
            return "no boundary restriction"
    if kind in (CheckKind.BESOV_EQUIVALENCE, CheckKind.EXTENSION_BOUND, CheckKind.EXTENSION_LIMIT):
        if _besov_regularity(f, cfg) <= cfg.ell:
            return f"not in B^ell for ell = {cfg.ell:g}"
    return None


# ---------------------------------------------------------------------------
# per-kind checks


def _base_params(f, cfg, spec: QuadratureSpec, **extra) -> dict:
    fam = f.spec() if hasattr(f, "spec") else f
    return {"cfg": _cfg_params(cfg), "family": fam, "spec": spec.to_dict(), **extra}


def _ceiling(ceilings: dict, name: str) -> float:
    return float(ceilings.get(name, DEFAULT_CEILINGS[name]))


def besov_equivalence_check(f: FunctionHandle, cfg: ExponentConfig, spec: QuadratureSpec,
                            ceilings: dict, mesh_level: int = 0) -> ComparisonReport:
    """Largest pairwise ratio among the direct, integral (a = 1) and dyadic norms."""
    size = mixed_lebesgue_norm(f, cfg, spec)
    parts = {v: besov_seminorm(f, cfg, BesovVariant.parse(v), spec)
             for v in ("direct", "integral:1", "dyadic")}
    norms = {v: size + p.value for v, p in parts.items()}
    vals = list(norms.values())
    if max(vals) == 0.0:
        worst = 0.0
    else:
        worst = max(a / b for a in vals for b in vals)
    extras = {"norms": norms, "lp_norm": size,
              "diagnostics": {v: {"head": p.head, "tail": p.tail, "tail_bound": p.tail_bound}
                              for v, p in parts.items()}}
    return compare("besov-equivalence", worst, 1.0, _ceiling(ceilings, "besov-equivalence"),
                   params=_base_params(f, cfg, spec), mesh_level=mesh_level, extras=extras)


def _shared_trace(u) -> FunctionHandle:
    """Registry traces map to the shared handle so difference tables are reused."""
    g = trace_restrict(u)
    return _family(g.spec()) if g.kind in FAMILY_KINDS else g


def lp_trace_check(u, cfg, spec, ceilings, mesh_level=0) -> ComparisonReport:
    g = _shared_trace(u)
    lhs = mixed_lebesgue_norm(g, cfg, spec)
    a, b = sobolev_parts(u, cfg, spec)
    return compare("lp-trace", lhs, a + b, _ceiling(ceilings, "lp-trace"),
                   params=_base_params(u, cfg, spec), mesh_level=mesh_level,
                   extras={"lp_part": a, "gradient_part": b})


def besov_trace_check(u, cfg, spec, ceilings, mesh_level=0) -> ComparisonReport:
    g = _shared_trace(u)
    parts = besov_direct_parts(g, cfg, spec)
    _, grad = sobolev_parts(u, cfg, spec)
    return compare("besov-trace", parts.value, grad, _ceiling(ceilings, "besov-trace"),
                   params=_base_params(u, cfg, spec), mesh_level=mesh_level,
                   extras={"head": parts.head, "tail": parts.tail, "ell": cfg.ell})


def extension_bound_check(g, cfg, spec, ceilings, mesh_level=0, k_max=DEFAULT_KMAX) -> ComparisonReport:
    E = extend(g, cfg, k_max, spec)
    a, b = sobolev_parts(E, cfg, spec)
    rhs = besov_norm(g, cfg, BesovVariant("direct"), spec)
    return compare("extension-bound", a + b, rhs, _ceiling(ceilings, "extension-bound"),
                   params=_base_params(g, cfg, spec, k_max=k_max), mesh_level=mesh_level,
                   extras={"lp_part": a, "gradient_part": b, "ell": cfg.ell})


def extension_limit_check(g, cfg, spec, mesh_level=0, k_max=DEFAULT_KMAX,
                          s_range: Sequence[int] = range(4, 10)) -> ComparisonReport:
    """Lipschitz ``g``: ``L_s`` decreasing with ``L_last < 0.2 L_first``;
    constant ``g``: every ``L_s <= 1e-8``; otherwise ``L_s`` must stay bounded.
    """
    profile = extension_limit_profile(g, cfg, list(s_range), spec, k_max)
    params = _base_params(g, cfg, spec, k_max=k_max, s_range=list(s_range))
    extras = {"profile": profile}
    if g.kind in ("constant", "zero"):
        return compare("extension-limit", max(profile), 1e-8, 1.0, tol=0.0, params=params,
                       mesh_level=mesh_level, extras=extras, note="constant g")
    decreasing = all(b < a for a, b in zip(profile, profile[1:]))
    extras["decreasing"] = decreasing
    if g.has_gradient:
        rep = compare("extension-limit", profile[-1], profile[0], 0.2, tol=0.0, params=params,
                      mesh_level=mesh_level, extras=extras, note="Lipschitz g")
    else:
        rep = compare("extension-limit", max(profile), profile[0], 1.0, tol=QUADRATURE_TOL,
                      params=params, mesh_level=mesh_level, extras=extras, note="bounded profile")
        return rep
    if not decreasing and rep.status == PASS:
        rep.status = FAIL
        rep.params["check"]["reason"] = "profile not decreasing"
    return rep


def vanishing_trace_check(u, cfg, spec, mesh_level=0, level: int = VANISHING_LEVEL) -> ComparisonReport:
    """Slice norms at ``y = 2^-j`` decrease and fall below ``0.05 ||eta||`` at ``j = level``.

    The log-decay family has the closed form ``||eta|| / (1 + j)``.
    """
    if u.kind != "log-decay":
        raise DomainError("vanishing-trace is defined for the log-decay family")
    ys = 2.0 ** -np.arange(level + 1, dtype=float)
    slices = np.concatenate([slice_norms(u, [y], cfg, spec) for y in ys])
    eta = mixed_lebesgue_norm(u.eta, cfg, spec)
    closed = eta / (1.0 + np.arange(level + 1))
    err = float(np.max(np.abs(slices - closed)) / eta) if eta else 0.0
    decreasing = bool(np.all(np.diff(slices) < 0))
    params = _base_params(u, cfg, spec, level=level)
    extras = {"slices": slices.tolist(), "closed_form_error": err, "decreasing": decreasing}
    rep = compare("vanishing-trace", float(slices[-1]), eta, VANISHING_FRACTION, tol=0.0,
                  params=params, mesh_level=mesh_level, extras=extras)
    if rep.status == PASS and not (decreasing and err <= CLOSED_FORM_TOL):
        rep.status = FAIL
        rep.params["check"]["reason"] = "slices not decreasing or off the closed form"
    return rep


_HANDLES: dict[str, FunctionHandle] = {}


def _family(spec) -> FunctionHandle:
    """Handles are shared across instances so difference tables are reused.

    Specs that spell out default parameters map to the same handle.
    """
    if isinstance(spec, FunctionHandle):
        return spec
    key = json.dumps(spec, sort_keys=True)
    handle = _HANDLES.get(key)
    if handle is None:
        fresh = instantiate(spec)
        handle = _HANDLES.setdefault(json.dumps(fresh.spec(), sort_keys=True), fresh)
        _HANDLES[key] = handle
    return handle


def _polar_family(spec):
    if isinstance(spec, dict) and spec.get("kind") == "radial-power":
        p = spec.get("params", {})
        return radial_power(int(p.get("d", 2)), float(p.get("exponent", -0.5)), float(p.get("radius", 1.0)))
    return _family(spec)


def run_instance(inst: Instance, spec: QuadratureSpec = DEFAULT_SPEC, ceilings: dict | None = None,
                 mesh_level: int = 0) -> list[ComparisonReport]:
    ceilings = ceilings or {}
    kind = CheckKind(inst.kind)
    with stopwatch() as sw:
        reports = _dispatch(kind, inst, spec, ceilings, mesh_level)
    for r in reports:
        if r.runtime_ms == 0 and sw["ms"] and _record_runtime():
            r.runtime_ms = sw["ms"]
    return reports


def _record_runtime() -> bool:
    from . import reports as _r

    return _r.RECORD_RUNTIME


def _dispatch(kind, inst, spec, ceilings, mesh_level):
    if kind == CheckKind.HARDY:
        return [hardy_check(inst.family, inst.cfg, spec, eps=inst.option("eps", 0.1),
                            mesh_level=mesh_level)]
    if kind == CheckKind.HARDY_POLAR:
        return [hardy_polar_check(_polar_family(inst.family), inst.cfg, spec,
                                  ceiling=_ceiling(ceilings, "hardy-polar"), mesh_level=mesh_level)]
    f = _family(inst.family)
    cfg = inst.cfg
    if kind == CheckKind.CONVOLUTION:
        return list(convolution_bounds_check(
            f, inst.option("delta", 0.25), cfg, spec,
            derivative_ceiling=_ceiling(ceilings, "convolution/derivative"), mesh_level=mesh_level))
    if kind == CheckKind.BESOV_EQUIVALENCE:
        return [besov_equivalence_check(f, cfg, spec, ceilings, mesh_level)]
    if kind == CheckKind.LP_TRACE:
        return [lp_trace_check(f, cfg, spec, ceilings, mesh_level)]
    if kind == CheckKind.BESOV_TRACE:
        return [besov_trace_check(f, cfg, spec, ceilings, mesh_level)]
    if kind == CheckKind.EXTENSION_BOUND:
        return [extension_bound_check(f, cfg, spec, ceilings, mesh_level,
                                      inst.option("k_max", DEFAULT_KMAX))]
    if kind == CheckKind.EXTENSION_LIMIT:
        return [extension_limit_check(f, cfg, spec, mesh_level, inst.option("k_max", DEFAULT_KMAX),
                                      inst.option("s_range", range(4, 10)))]
    if kind == CheckKind.VANISHING_TRACE:
        return [vanishing_trace_check(f, cfg, spec, mesh_level)]
    raise DomainError(f"unknown check kind {kind!r}")


# ---------------------------------------------------------------------------
# campaigns


@dataclass
class CampaignSummary:
    kind: str
    total: int
    passed: int
    failed: int
    inconclusive: int
    excluded: int
    empirical_constant: float
    ceiling: float | None
    by_alpha: dict[str, float] = field(default_factory=dict)
    by_check: dict[str, float] = field(default_factory=dict)

    def to_row(self) -> dict:
        return {
            "kind": self.kind, "total": self.total, "passed": self.passed, "failed": self.failed,
            "inconclusive": self.inconclusive, "excluded": self.excluded,
            "empirical_constant": f"{self.empirical_constant:.12g}",
            "ceiling": "" if self.ceiling is None else f"{self.ceiling:g}",
        }


@dataclass
class CampaignResult:
    kind: CheckKind
    reports: list[ComparisonReport]
    excluded: list[tuple[str, str]]
    summary: CampaignSummary

    def __iter__(self):
        return iter(self.reports)

    def __len__(self) -> int:
        return len(self.reports)

    def __getitem__(self, i):
        return self.reports[i]


def empirical_constant(reports: Iterable[ComparisonReport]) -> float:
    """``max lhs / rhs`` over conclusive instances (0 when every side vanishes)."""
    best = 0.0
    for r in reports:
        if r.status == INCONCLUSIVE:
            continue
        if r.rhs > 0:
            best = max(best, r.lhs / r.rhs)
        elif r.lhs > 0:
            return math.inf
    return best


def summarize(kind: CheckKind, reports: list[ComparisonReport], excluded, ceilings=None) -> CampaignSummary:
    ceilings = ceilings or {}
    counts = {s: sum(r.status == s for r in reports) for s in (PASS, FAIL, INCONCLUSIVE)}
    by_check = {cid: empirical_constant(r for r in reports if r.check_id == cid)
                for cid in sorted({r.check_id for r in reports})}
    headline = "convolution/derivative" if kind == CheckKind.CONVOLUTION else str(kind)
    c_emp = by_check.get(headline, 0.0)
    if not math.isfinite(c_emp):
        raise NumericError(f"{kind}: empirical constant is not finite")
    ceiling = None
    if kind in EMPIRICAL_KINDS:
        ceiling = _ceiling(ceilings, str(kind))
    elif kind == CheckKind.CONVOLUTION:
        ceiling = _ceiling(ceilings, "convolution/derivative")
    by_alpha: dict[str, float] = {}
    for r in reports:
        a = r.params.get("cfg", {}).get("alpha")
        if a is not None and r.rhs > 0 and r.status != INCONCLUSIVE:
            k = f"{a:g}"
            by_alpha[k] = max(by_alpha.get(k, 0.0), r.lhs / r.rhs)
    return CampaignSummary(str(kind), len(reports), counts[PASS], counts[FAIL],
                           counts[INCONCLUSIVE], len(excluded), c_emp, ceiling, by_alpha, by_check)


def _workers() -> int:
    env = os.environ.get("MIXTRACE_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_one(args):
    inst, spec, ceilings, level = args
    return run_instance(inst, spec, ceilings, level)


def build_instances(kind: CheckKind, family_set: Sequence, cfg_matrix: Sequence,
                    options: dict | None = None) -> tuple[list[Instance], list[tuple[str, str]]]:
    kind = CheckKind(kind)
    opts = options or {}
    sweep = opts.get("deltas") if kind == CheckKind.CONVOLUTION else None
    fixed = tuple(sorted((k, tuple(v) if isinstance(v, (list, range)) else v)
                         for k, v in opts.items() if k != "deltas"))
    instances, excluded = [], []
    for fam in family_set:
        if isinstance(fam, FunctionHandle):
            fam = fam.spec()
        if kind == CheckKind.HARDY:
            handle = None
        elif kind == CheckKind.HARDY_POLAR:
            handle = _polar_family(fam)
        else:
            handle = _family(fam)
        for cfg in cfg_matrix:
            inst = Instance(kind, fam, cfg, fixed)
            if handle is not None:
                reason = admissibility(kind, handle, cfg)
                if reason is not None:
                    if handle.d == cfg.d:
                        excluded.append((inst.key(), reason))
                    continue
            if sweep:
                for delta in sweep:
                    instances.append(Instance(kind, fam, cfg, fixed + (("delta", float(delta)),)))
            else:
                instances.append(inst)
    return instances, excluded


def run_campaign(
    kind: CheckKind | str,
    family_set: Sequence,
    cfg_matrix: Sequence,
    spec: QuadratureSpec = DEFAULT_SPEC,
    ceilings: dict | None = None,
    options: dict | None = None,
    mesh_level: int = 0,
    strict: bool = True,
) -> CampaignResult:
    """Run every admissible (family, cfg) pair; any FAIL raises when ``strict``."""
    kind = CheckKind(kind)
    if not family_set or not cfg_matrix:
        raise DomainError("run_campaign needs a non-empty family set and cfg matrix")
    instances, excluded = build_instances(kind, family_set, cfg_matrix, options)
    instances.sort(key=Instance.key)
    tasks = [(inst, spec, ceilings or {}, mesh_level) for inst in instances]
    workers = min(_workers(), len(tasks)) if tasks else 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(_run_one, tasks))
    else:
        batches = [_run_one(t) for t in tasks]
    reports = [r for batch in batches for r in batch]
    summary = summarize(kind, reports, excluded, ceilings)
    result = CampaignResult(kind, reports, excluded, summary)
    if strict:
        for r in reports:
            if r.status == FAIL:
                raise CampaignFailure(r)
    return result


# ---------------------------------------------------------------------------
# refinement and ell independence


def _rel_drift(values: Sequence[float]) -> float:
    base = values[0]
    worst = 0.0
    for v in values[1:]:
        if base == 0.0:
            worst = max(worst, 0.0 if v == 0.0 else math.inf)
        else:
            worst = max(worst, abs(v - base) / abs(base))
    return worst


def refinement_study(kind: CheckKind | str, instance: Instance, levels: int = 2,
                     spec: QuadratureSpec = DEFAULT_SPEC, ceilings: dict | None = None) -> ComparisonReport:
    """Re-run at meshes refined ``x2`` per level; PASS iff every drift is at most 2%."""
    if not 2 <= levels <= 4:
        raise DomainError("levels must be between 2 and 4")
    kind = CheckKind(kind)
    if CheckKind(instance.kind) != kind:
        raise DomainError("instance kind does not match")
    runs = [run_instance(instance, spec.refined(level), ceilings, level) for level in range(levels)]
    drifts: dict[str, float] = {}
    for idx in range(len(runs[0])):
        rows = [run[idx] for run in runs]
        tag = rows[0].check_id
        for name in ("lhs", "rhs", "ratio"):
            drifts[f"{tag}:{name}"] = _rel_drift([getattr(r, name) for r in rows])
    worst = max(drifts.values())
    statuses = sorted({r.status for run in runs for r in run})
    params = {"instance": instance.key(), "levels": levels, "spec": spec.to_dict()}
    rep = compare(f"refine/{kind}", worst, DRIFT_LIMIT, 1.0, tol=0.0, params=params,
                  mesh_level=levels - 1, extras={"drifts": drifts, "statuses": statuses})
    if rep.status == PASS and FAIL in statuses:
        rep.status = FAIL
        rep.params["check"]["reason"] = "a refined run failed"
    return rep


def ell_independence_check(g, q: float, alpha: float, p_list: Sequence, spec: QuadratureSpec = DEFAULT_SPEC,
                           ceilings: dict | None = None) -> ComparisonReport:
    """besov-trace and extension-bound at the one ``ell(q, alpha)`` for every ``p`` in ``p_list``.

    The half-space function for the trace check is ``g(x) (1 - y)``, whose
    boundary restriction is ``g``.
    """
    g = instantiate(g)
    cfgs = []
    for p in p_list:
        if isinstance(p, ExponentConfig):
            if (p.q, p.alpha) != (q, alpha):
                raise DomainError("every entry must share (q, alpha)")
            cfgs.append(p)
        else:
            pv = tuple(float(x) for x in np.atleast_1d(p))
            cfgs.append(ExponentConfig(len(pv), pv, q, alpha))
    if any(c.d != g.d for c in cfgs):
        raise DomainError("p vectors must match the dimension of g")
    ceilings = ceilings or {}
    u = ramp_cutoff(g)
    subs = []
    for cfg in cfgs:
        subs.append(besov_trace_check(u, cfg, spec, ceilings))
        subs.append(extension_bound_check(g, cfg, spec, ceilings))
    worst = max(r.ratio for r in subs)
    ell = cfgs[0].ell
    params = {"family": g.spec(), "q": q, "alpha": alpha,
              "p_list": [list(c.p_vec) for c in cfgs], "spec": spec.to_dict()}
    extras = {"ell": ell, "runs": [{"check_id": r.check_id, "p_vec": r.params["cfg"]["p_vec"],
                                    "lhs": r.lhs, "rhs": r.rhs, "ratio": r.ratio, "status": r.status}
                                   for r in subs]}
    rep = compare("ell-independence", worst, 1.0, 1.0, tol=QUADRATURE_TOL, params=params, extras=extras)
    if rep.status == PASS and any(r.status != PASS for r in subs):
        rep.status = FAIL
    return rep


# ---------------------------------------------------------------------------
# output


def write_jsonl(reports: Iterable[ComparisonReport], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in reports:
            fh.write(r.to_json() + "\n")


def read_jsonl(path: str | Path) -> list[ComparisonReport]:
    with open(path, encoding="utf-8") as fh:
        return [ComparisonReport.from_dict(json.loads(line)) for line in fh if line.strip()]


def write_summary_csv(summaries: Iterable[CampaignSummary], path: str | Path) -> None:
    rows = [s.to_row() for s in summaries]
    fields = ["kind", "total", "passed", "failed", "inconclusive", "excluded",
              "empirical_constant", "ceiling"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
