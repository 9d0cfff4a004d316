"""Declarative run configuration, read from and written to TOML."""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import tomli_w

from .errors import ConfigError, MixtraceError
from .exponents import ExponentConfig
from .hardy import CAMPAIGN_SHAPES, HardyParams
from .quadrature import QuadratureSpec

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ALL_KINDS = (
    "hardy", "hardy-polar", "convolution", "besov-equivalence", "lp-trace",
    "besov-trace", "extension-bound", "extension-limit", "vanishing-trace",
)


def _floats(xs) -> tuple[float, ...]:
    return tuple(float(x) for x in xs)


@dataclass(frozen=True)
class MatrixBlock:
    """Exponent grid ``q x alpha x p_vecs``; ``edge_gap`` adds ``alpha = q - 1 - gap``."""

    q: tuple[float, ...] = (1.5, 2.0, 3.0)
    alpha: tuple[float, ...] = (-0.5, 0.0)
    edge_gap: float | None = 0.1
    p_vecs: tuple[tuple[float, ...], ...] = ((2.0,),)

    def configs(self) -> list[ExponentConfig]:
        out = []
        for q in self.q:
            alphas = list(self.alpha)
            if self.edge_gap is not None:
                alphas.append(round(q - 1.0 - self.edge_gap, 12))
            for a in dict.fromkeys(alphas):
                for p in self.p_vecs:
                    out.append(ExponentConfig(len(p), p, q, a))
        return out


DEFAULT_MATRIX = (
    MatrixBlock(),
    MatrixBlock(q=(2.0,), p_vecs=((1.0, 2.0), (2.0, 3.0), (3.0, 1.5))),
)


@dataclass(frozen=True)
class HardySettings:
    q: tuple[float, ...] = (1.0, 1.5, 2.0, 3.0)
    sigma: tuple[float, ...] = (-0.5, 0.0)
    sigma_edge_gap: float | None = 0.1
    a: tuple[float, ...] = (1.0, math.inf)
    shapes: tuple[str, ...] = CAMPAIGN_SHAPES
    eps: float = 0.1

    def params(self) -> list[HardyParams]:
        out = []
        for q in self.q:
            sigmas = list(self.sigma)
            if self.sigma_edge_gap is not None:
                sigmas.append(round(1.0 - 1.0 / q - self.sigma_edge_gap, 12))
            for s in dict.fromkeys(sigmas):
                if s < 1.0 - 1.0 / q:
                    out.extend(HardyParams(q, s, a) for a in self.a)
        return out


@dataclass(frozen=True)
class PolarSettings:
    theta: tuple[float, ...] = (1.0, 2.0, 3.0)
    beta: tuple[float, ...] = (0.0, 0.5)
    beta_edge_gap: float | None = 0.2
    d: tuple[int, ...] = (2,)
    a: tuple[float, ...] = (1.0, math.inf)

    def params(self) -> list[HardyParams]:
        out = []
        for d in self.d:
            for th in self.theta:
                betas = list(self.beta)
                if self.beta_edge_gap is not None:
                    betas.append(round(d - 1.0 / th - self.beta_edge_gap, 12))
                for b in dict.fromkeys(betas):
                    if b < d - 1.0 / th:
                        out.extend(HardyParams.polar(th, b, d, a) for a in self.a)
        return out


@dataclass(frozen=True)
class VanishingSettings:
    q: tuple[float, ...] = (2.0,)
    alpha: tuple[float, ...] = (-1.0, -1.5)
    p_vecs: tuple[tuple[float, ...], ...] = ((2.0,), (1.0,))
    level: int = 20

    def configs(self) -> list[ExponentConfig]:
        return [ExponentConfig(len(p), p, q, a) for q in self.q for a in self.alpha for p in self.p_vecs]


def _fam(kind: str, **params) -> dict:
    return {"kind": kind, "params": params} if params else {"kind": kind}


GAUSS2 = _fam("gaussian-bump", d=2)


@dataclass(frozen=True)
class FamilySets:
    boundary: tuple = (_fam("hat"), _fam("gaussian-bump"), _fam("bump"), _fam("indicator"), GAUSS2)
    limit: tuple = (_fam("hat"), _fam("gaussian-bump"), _fam("bump"), _fam("constant"))
    halfspace: tuple = (
        _fam("ramp-cutoff", eta=_fam("hat")),
        _fam("ramp-cutoff", eta=_fam("gaussian-bump")),
        _fam("vertical-power", eta=_fam("hat"), m=0.0),
        _fam("vertical-power", eta=_fam("bump"), m=1.0),
        _fam("ramp-cutoff", eta=GAUSS2),
    )
    polar: tuple = (
        _fam("radial-power", d=2, exponent=-0.5, radius=1.0),
        _fam("bump", d=2),
        GAUSS2,
    )
    vanishing: tuple = (_fam("log-decay", eta=_fam("hat")), _fam("log-decay", eta=_fam("bump")))


@dataclass(frozen=True)
class Tolerances:
    closed_form: float = 1e-6
    quadrature: float = 5e-2
    drift: float = 0.02


@dataclass(frozen=True)
class OutputPaths:
    jsonl: str = "report.jsonl"
    summary: str = "summary.csv"


DEFAULT_CEILINGS = (
    ("besov-equivalence", 50.0),
    ("besov-trace", 50.0),
    ("convolution/derivative", 5.0),
    ("extension-bound", 50.0),
    ("hardy-polar", 10.0),
    ("lp-trace", 20.0),
)


@dataclass(frozen=True)
class RunConfig:
    checks: tuple[str, ...] = ALL_KINDS
    matrix: tuple[MatrixBlock, ...] = DEFAULT_MATRIX
    families: FamilySets = FamilySets()
    hardy: HardySettings = HardySettings()
    hardy_polar: PolarSettings = PolarSettings()
    vanishing: VanishingSettings = VanishingSettings()
    deltas: tuple[float, ...] = tuple(2.0**-k for k in range(1, 9))
    k_max: int = 12
    s_range: tuple[int, ...] = (4, 5, 6, 7, 8, 9)
    ceilings: tuple[tuple[str, float], ...] = DEFAULT_CEILINGS
    tolerance: Tolerances = Tolerances()
    quadrature: QuadratureSpec = QuadratureSpec()
    output: OutputPaths = OutputPaths()

    def exponent_matrix(self) -> list[ExponentConfig]:
        seen: dict[str, ExponentConfig] = {}
        for block in self.matrix:
            for cfg in block.configs():
                seen.setdefault(cfg.key(), cfg)
        return list(seen.values())

    def ceiling_map(self) -> dict[str, float]:
        return dict(self.ceilings)

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, quadrature=replace(self.quadrature, seed=int(seed)))

    def to_dict(self) -> dict:
        return to_document(self)

    def dumps(self) -> str:
        return tomli_w.dumps(to_document(self))


# ---------------------------------------------------------------------------
# conversion


def _plain(v):
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


def _section(obj) -> dict:
    return {k: _plain(v) for k, v in asdict(obj).items() if v is not None}


def to_document(cfg: RunConfig) -> dict:
    q = cfg.quadrature
    quad = {f.name: getattr(q, f.name) for f in fields(q) if getattr(q, f.name) is not None}
    return {
        "checks": list(cfg.checks),
        "matrix": [_section(b) for b in cfg.matrix],
        "families": _section(cfg.families),
        "hardy": _section(cfg.hardy),
        "hardy_polar": _section(cfg.hardy_polar),
        "vanishing": _section(cfg.vanishing),
        "convolution": {"deltas": list(cfg.deltas)},
        "extension": {"k_max": cfg.k_max, "s_range": list(cfg.s_range)},
        "ceilings": dict(cfg.ceilings),
        "tolerance": _section(cfg.tolerance),
        "quadrature": quad,
        "output": _section(cfg.output),
    }


def _expect_table(doc, name) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError(f"[{name}] must be a table")
    return doc


def _known(doc: dict, allowed, where: str) -> None:
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _build(cls, doc, where: str, converters: dict[str, Any] | None = None):
    doc = _expect_table(doc, where)
    names = {f.name for f in fields(cls)}
    _known(doc, names, f"[{where}]")
    conv = converters or {}
    kwargs = {}
    for k, v in doc.items():
        fn = conv.get(k)
        try:
            kwargs[k] = fn(v) if fn else v
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {where}.{k}: {exc}") from exc
    try:
        return cls(**kwargs)
    except (TypeError, ValueError, MixtraceError) as exc:
        raise ConfigError(f"invalid [{where}]: {exc}") from exc


def _p_vecs(v):
    return tuple(_floats(p) for p in v)


def _specs(v):
    if not isinstance(v, list):
        raise ValueError("family sets must be arrays of tables")
    for item in v:
        if not isinstance(item, dict) or "kind" not in item:
            raise ValueError("each family needs a 'kind'")
    return tuple(v)


def _validate_families(sets: FamilySets) -> None:
    from .families import instantiate

    for f in fields(sets):
        for spec in getattr(sets, f.name):
            if spec.get("kind") == "radial-power":
                _known(spec.get("params", {}), {"d", "exponent", "radius"}, "radial-power params")
                continue
            try:
                instantiate(spec)
            except MixtraceError as exc:
                raise ConfigError(f"families.{f.name}: {exc}") from exc


def from_document(doc: dict) -> RunConfig:
    _known(doc, {f.name for f in fields(RunConfig)} - {"deltas", "k_max", "s_range"}
           | {"convolution", "extension"}, "the config root")
    kw: dict[str, Any] = {}
    if "checks" in doc:
        bad = sorted(set(doc["checks"]) - set(ALL_KINDS))
        if bad:
            raise ConfigError(f"unknown check kind(s): {', '.join(bad)}")
        kw["checks"] = tuple(doc["checks"])
    if "matrix" in doc:
        blocks = doc["matrix"]
        if not isinstance(blocks, list) or not blocks:
            raise ConfigError("[[matrix]] must be a non-empty array of tables")
        kw["matrix"] = tuple(
            _build(MatrixBlock, b, "matrix", {"q": _floats, "alpha": _floats, "p_vecs": _p_vecs})
            for b in blocks
        )
    if "families" in doc:
        kw["families"] = _build(FamilySets, doc["families"], "families",
                                {f.name: _specs for f in fields(FamilySets)})
        _validate_families(kw["families"])
    if "hardy" in doc:
        kw["hardy"] = _build(HardySettings, doc["hardy"], "hardy",
                             {"q": _floats, "sigma": _floats, "a": _floats, "shapes": tuple})
    if "hardy_polar" in doc:
        kw["hardy_polar"] = _build(PolarSettings, doc["hardy_polar"], "hardy_polar",
                                   {"theta": _floats, "beta": _floats, "a": _floats,
                                    "d": lambda v: tuple(int(x) for x in v)})
    if "vanishing" in doc:
        kw["vanishing"] = _build(VanishingSettings, doc["vanishing"], "vanishing",
                                 {"q": _floats, "alpha": _floats, "p_vecs": _p_vecs})
    if "convolution" in doc:
        conv = _expect_table(doc["convolution"], "convolution")
        _known(conv, {"deltas"}, "[convolution]")
        if "deltas" in conv:
            kw["deltas"] = _floats(conv["deltas"])
    if "extension" in doc:
        ext = _expect_table(doc["extension"], "extension")
        _known(ext, {"k_max", "s_range"}, "[extension]")
        if "k_max" in ext:
            kw["k_max"] = int(ext["k_max"])
        if "s_range" in ext:
            kw["s_range"] = tuple(int(s) for s in ext["s_range"])
    if "ceilings" in doc:
        ceil = _expect_table(doc["ceilings"], "ceilings")
        _known(ceil, dict(DEFAULT_CEILINGS), "[ceilings]")
        kw["ceilings"] = tuple(sorted({**dict(DEFAULT_CEILINGS), **{k: float(v) for k, v in ceil.items()}}.items()))
    if "tolerance" in doc:
        kw["tolerance"] = _build(Tolerances, doc["tolerance"], "tolerance")
    if "quadrature" in doc:
        kw["quadrature"] = _build(QuadratureSpec, doc["quadrature"], "quadrature")
    if "output" in doc:
        kw["output"] = _build(OutputPaths, doc["output"], "output")
    return RunConfig(**kw)


def loads(text: str) -> RunConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    return from_document(doc)


def load(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text)


def default_config_path() -> Path:
    return Path(__file__).with_name("default.toml")
