"""Registry of analytic test functions on R^d and on the upper half-space.

Boundary functions take points of shape ``(..., d)``; half-space functions
take ``(x, y)`` with ``x`` of shape ``(..., d)`` and ``y`` broadcastable to
``x.shape[:-1]``.  Gradients are hand-coded closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping

import numpy as np

from .errors import DomainError
from .exponents import MAX_DIM
from .quadrature import tensor_grid

BOUNDARY = "boundary"
HALFSPACE = "halfspace"
LN2 = math.log(2.0)
INF = float("inf")


@dataclass(frozen=True, eq=False)
class FunctionHandle:
    """An evaluable test function with the metadata quadrature needs.

    ``breakpoints[i]`` lists coordinates on axis ``i`` where the function or
    its gradient may jump; rules split panels there.  ``support_box[i]`` is
    the closed interval outside which the function vanishes on axis ``i``
    (infinite ends mean "truncate to the quadrature box").
    """

    kind: str
    params: Mapping[str, Any]
    domain_tag: str
    d: int
    value: Callable[..., np.ndarray]
    gradient: Callable[..., np.ndarray] | None = None
    support_radius: float = INF
    breakpoints: tuple[tuple[float, ...], ...] = ()
    support_box: tuple[tuple[float, float], ...] = ()
    factors: tuple["FunctionHandle", ...] | None = None
    jumps: bool = False
    # half-space product structure u(x, y) = eta(x) * profile(y)
    eta: "FunctionHandle | None" = None
    profile: Callable[[np.ndarray], np.ndarray] | None = None
    profile_derivative: Callable[[np.ndarray], np.ndarray] | None = None
    profile_at_zero: float | None = None
    y_breakpoints: tuple[float, ...] = ()
    vertical_order: float = 0.0
    lipschitz_in_y: bool = True
    extra: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.breakpoints:
            object.__setattr__(self, "breakpoints", ((),) * self.d)
        if not self.support_box:
            object.__setattr__(self, "support_box", ((-INF, INF),) * self.d)

    @property
    def has_gradient(self) -> bool:
        return self.gradient is not None

    @property
    def is_boundary(self) -> bool:
        return self.domain_tag == BOUNDARY

    def __call__(self, x, y=None):
        x = np.asarray(x, dtype=float)
        if self.is_boundary:
            return self.value(x)
        return self.value(x, np.asarray(y, dtype=float))

    def grad(self, x, y=None):
        if self.gradient is None:
            raise DomainError(f"family {self.kind!r} has no gradient")
        x = np.asarray(x, dtype=float)
        if self.is_boundary:
            return self.gradient(x)
        return self.gradient(x, np.asarray(y, dtype=float))

    def spec(self) -> dict:
        return {"kind": self.kind, "params": _plain(self.params)}

    # grid evaluation -------------------------------------------------------

    def values_on(self, axes, ys=None) -> np.ndarray:
        """Values on the tensor grid of ``axes``; half-space adds a leading y axis."""
        if self.is_boundary:
            if self.factors is not None:
                out = np.asarray(self.factors[0].value(axes[0][:, None]))
                for fac, ax in zip(self.factors[1:], axes[1:]):
                    out = np.multiply.outer(out, fac.value(ax[:, None]))
                return out
            return self.value(tensor_grid(axes))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        if self.eta is not None:
            base = self.eta.values_on(axes)
            return np.multiply.outer(self.profile(ys), base)
        pts = tensor_grid(axes)
        return self.value(pts[None], ys.reshape((-1,) + (1,) * self.d))

    def gradient_on(self, axes, ys=None) -> np.ndarray:
        """Gradient on the grid; last axis has length d (boundary) or d+1."""
        if self.gradient is None:
            raise DomainError(f"family {self.kind!r} has no gradient")
        if self.is_boundary:
            if self.factors is not None:
                vals = [f.value(ax[:, None]) for f, ax in zip(self.factors, axes)]
                ders = [f.gradient(ax[:, None])[..., 0] for f, ax in zip(self.factors, axes)]
                comps = []
                for i in range(self.d):
                    parts = [ders[j] if j == i else vals[j] for j in range(self.d)]
                    out = np.asarray(parts[0])
                    for p in parts[1:]:
                        out = np.multiply.outer(out, p)
                    comps.append(out)
                return np.stack(comps, axis=-1)
            return self.gradient(tensor_grid(axes))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        if self.eta is not None:
            base = self.eta.values_on(axes)
            gbase = self.eta.gradient_on(axes)
            v = self.profile(ys)
            dv = self.profile_derivative(ys)
            gx = np.multiply.outer(v, gbase)
            gy = np.multiply.outer(dv, base)[..., None]
            return np.concatenate([gx, gy], axis=-1)
        pts = tensor_grid(axes)
        return self.gradient(pts[None], ys.reshape((-1,) + (1,) * self.d))

    def x_breakpoints(self, y=None) -> tuple[tuple[float, ...], ...]:
        return self.breakpoints

    def x_support(self, y=None) -> tuple[tuple[float, float], ...]:
        return self.support_box

    @property
    def trace(self) -> "FunctionHandle | None":
        """Boundary restriction ``u(., 0)`` for half-space product families."""
        if self.is_boundary or self.eta is None or self.profile_at_zero is None:
            return None
        if self.profile_at_zero == 0.0:
            return zero(self.d)
        if self.profile_at_zero == 1.0:
            return self.eta
        return scaled(self.eta, self.profile_at_zero)


def _plain(obj):
    if isinstance(obj, Mapping):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


# ---------------------------------------------------------------------------
# boundary families


def _norm2(x):
    return np.sum(x * x, axis=-1)


def gaussian(d: int = 1, scale: float = 1.0) -> FunctionHandle:
    s2 = scale * scale

    def value(x):
        return np.exp(-_norm2(x) / (2.0 * s2))

    def gradient(x):
        return -(x / s2) * value(x)[..., None]

    factors = None
    if d > 1:
        one = gaussian(1, scale)
        factors = (one,) * d
    return FunctionHandle(
        "gaussian-bump", {"d": d, "scale": scale}, BOUNDARY, d, value, gradient,
        factors=factors,
    )


def bump(d: int = 1, radius: float = 1.0, amplitude: float = 1.0) -> FunctionHandle:
    R2 = radius * radius

    def value(x):
        r2 = _norm2(x) / R2
        out = np.zeros(r2.shape)
        inside = r2 < 1.0
        out[inside] = amplitude * np.exp(-1.0 / (1.0 - r2[inside]))
        return out

    def gradient(x):
        r2 = _norm2(x) / R2
        out = np.zeros(x.shape)
        inside = r2 < 1.0
        ri = r2[inside]
        coef = amplitude * np.exp(-1.0 / (1.0 - ri)) * (-2.0 / (R2 * (1.0 - ri) ** 2))
        out[inside] = coef[:, None] * x[inside]
        return out

    return FunctionHandle(
        "bump", {"d": d, "radius": radius, "amplitude": amplitude}, BOUNDARY, d,
        value, gradient, support_radius=radius,
        support_box=((-radius, radius),) * d,
    )


def hat(d: int = 1) -> FunctionHandle:
    if d != 1:
        raise DomainError("hat is defined for d = 1; use tensor for products")

    def value(x):
        return np.maximum(0.0, 1.0 - np.abs(x[..., 0]))

    def gradient(x):
        t = x[..., 0]
        return np.where(np.abs(t) < 1.0, -np.sign(t), 0.0)[..., None]

    return FunctionHandle(
        "hat", {"d": 1}, BOUNDARY, 1, value, gradient, support_radius=1.0,
        breakpoints=((-1.0, 0.0, 1.0),), support_box=((-1.0, 1.0),),
    )


def indicator(d: int = 1) -> FunctionHandle:
    def value(x):
        inside = np.all((x >= 0.0) & (x <= 1.0), axis=-1)
        return inside.astype(float)

    factors = (indicator(1),) * d if d > 1 else None
    return FunctionHandle(
        "indicator", {"d": d}, BOUNDARY, d, value, None,
        support_radius=math.sqrt(d), breakpoints=((0.0, 1.0),) * d,
        support_box=((0.0, 1.0),) * d, factors=factors, jumps=True,
    )


def constant(d: int = 1, value: float = 1.0) -> FunctionHandle:
    c = float(value)

    def f(x):
        return np.full(x.shape[:-1], c)

    def g(x):
        return np.zeros(x.shape)

    kind = "zero" if c == 0.0 else "constant"
    params = {"d": d} if kind == "zero" else {"d": d, "value": c}
    factors = None
    if d > 1:
        factors = (constant(1, c),) + (constant(1, 1.0),) * (d - 1)
    return FunctionHandle(kind, params, BOUNDARY, d, f, g, factors=factors)


def zero(d: int = 1) -> FunctionHandle:
    return constant(d, 0.0)


def tensor(factors) -> FunctionHandle:
    """Separable product ``f_1(x_1) ... f_d(x_d)`` of 1-D family members."""
    facs = tuple(f if isinstance(f, FunctionHandle) else instantiate(f) for f in factors)
    if not facs or len(facs) > MAX_DIM:
        raise DomainError(f"tensor needs between 1 and {MAX_DIM} factors")
    for f in facs:
        if not f.is_boundary or f.d != 1:
            raise DomainError("tensor factors must be 1-D boundary families")
    d = len(facs)

    def value(x):
        out = facs[0].value(x[..., 0:1])
        for i in range(1, d):
            out = out * facs[i].value(x[..., i : i + 1])
        return out

    gradient = None
    if all(f.has_gradient for f in facs):

        def gradient(x):
            vals = [f.value(x[..., i : i + 1]) for i, f in enumerate(facs)]
            comps = []
            for i, f in enumerate(facs):
                c = f.gradient(x[..., i : i + 1])[..., 0]
                for j in range(d):
                    if j != i:
                        c = c * vals[j]
                comps.append(c)
            return np.stack(comps, axis=-1)

    radius = math.sqrt(sum(f.support_radius**2 for f in facs))
    return FunctionHandle(
        "tensor", {"factors": [f.spec() for f in facs]}, BOUNDARY, d, value, gradient,
        support_radius=radius,
        breakpoints=tuple(f.breakpoints[0] for f in facs),
        support_box=tuple(f.support_box[0] for f in facs),
        factors=facs, jumps=any(f.jumps for f in facs),
    )


def scaled(f: FunctionHandle, c: float) -> FunctionHandle:
    """``c * f`` for a boundary handle."""
    gradient = None
    if f.gradient is not None:
        gradient = lambda x: c * f.gradient(x)  # noqa: E731
    factors = None
    if f.factors is not None:
        factors = (scaled(f.factors[0], c),) + tuple(f.factors[1:])
    return replace(
        f, kind=f.kind, params={**f.params}, value=lambda x: c * f.value(x),
        gradient=gradient, factors=factors,
        extra={**f.extra, "scale_factor": c * f.extra.get("scale_factor", 1.0)},
    )


def dilate(f: FunctionHandle, lam: float) -> FunctionHandle:
    """``x -> f(lam * x)`` for a boundary handle."""
    if lam <= 0:
        raise DomainError("dilation factor must be positive")
    gradient = None
    if f.gradient is not None:
        gradient = lambda x: lam * f.gradient(lam * x)  # noqa: E731
    factors = None
    if f.factors is not None:
        factors = tuple(dilate(g, lam) for g in f.factors)
    return replace(
        f, value=lambda x: f.value(lam * x), gradient=gradient, factors=factors,
        support_radius=f.support_radius / lam,
        breakpoints=tuple(tuple(b / lam for b in bp) for bp in f.breakpoints),
        support_box=tuple((lo / lam, hi / lam) for lo, hi in f.support_box),
        extra={**f.extra, "dilation": lam * f.extra.get("dilation", 1.0)},
    )


# ---------------------------------------------------------------------------
# half-space families u(x, y) = eta(x) * v(y)


def _product(kind, params, eta, v, dv, v0, *, y_breakpoints=(), vertical_order=0.0,
             lipschitz_in_y=True) -> FunctionHandle:
    d = eta.d

    def value(x, y):
        return eta.value(x) * v(y)

    gradient = None
    if eta.has_gradient:

        def gradient(x, y):
            e = eta.value(x)
            ge = eta.gradient(x)
            vy = np.asarray(v(y))
            return np.concatenate(
                [ge * vy[..., None], (e * dv(y))[..., None]], axis=-1
            )

    return FunctionHandle(
        kind, params, HALFSPACE, d, value, gradient,
        support_radius=eta.support_radius, breakpoints=eta.breakpoints,
        support_box=eta.support_box, jumps=eta.jumps, eta=eta, profile=v,
        profile_derivative=dv, profile_at_zero=v0, y_breakpoints=y_breakpoints,
        vertical_order=vertical_order, lipschitz_in_y=lipschitz_in_y,
    )


def _eta_of(eta) -> FunctionHandle:
    h = eta if isinstance(eta, FunctionHandle) else instantiate(eta or {"kind": "bump"})
    if not h.is_boundary:
        raise DomainError("eta must be a boundary family")
    return h


def vertical_power(eta=None, m: float = 1.0) -> FunctionHandle:
    """``eta(x) * y**m`` with ``m >= 0``."""
    if not m >= 0:
        raise DomainError(f"vertical-power needs m >= 0, got {m}")
    h = _eta_of(eta)

    def v(y):
        return np.power(y, m) if m else np.ones_like(y)

    def dv(y):
        if m == 0:
            return np.zeros_like(y)
        return m * np.power(y, m - 1.0)

    return _product(
        "vertical-power", {"eta": h.spec(), "m": m}, h, v, dv, 1.0 if m == 0 else 0.0,
        vertical_order=min(0.0, m - 1.0) if m else 0.0, lipschitz_in_y=(m == 0 or m >= 1),
    )


def log_decay(eta=None) -> FunctionHandle:
    """``eta(x) / (1 + |log2 y|)``: continuous at ``y = 0`` with zero trace."""
    h = _eta_of(eta)

    def v(y):
        return 1.0 / (1.0 + np.abs(np.log2(y)))

    def dv(y):
        L = np.log2(y)
        return -np.sign(L) / (y * LN2 * (1.0 + np.abs(L)) ** 2)

    return _product(
        "log-decay", {"eta": h.spec()}, h, v, dv, 0.0,
        y_breakpoints=(1.0,), vertical_order=-1.0, lipschitz_in_y=False,
    )


def ramp_cutoff(eta=None) -> FunctionHandle:
    """``eta(x) * (1 - y)`` on ``[0, 1]``, zero above."""
    h = _eta_of(eta)

    def v(y):
        return np.clip(1.0 - y, 0.0, None)

    def dv(y):
        return np.where(y < 1.0, -1.0, 0.0)

    return _product("ramp-cutoff", {"eta": h.spec()}, h, v, dv, 1.0, y_breakpoints=(1.0,))


# ---------------------------------------------------------------------------
# registry

_BUILDERS: dict[str, tuple[Callable[..., FunctionHandle], dict[str, Any]]] = {
    "gaussian-bump": (gaussian, {"d": 1, "scale": 1.0}),
    "bump": (bump, {"d": 1, "radius": 1.0, "amplitude": 1.0}),
    "hat": (hat, {"d": 1}),
    "indicator": (indicator, {"d": 1}),
    "constant": (constant, {"d": 1, "value": 1.0}),
    "zero": (zero, {"d": 1}),
    "tensor": (tensor, {"factors": None}),
    "vertical-power": (vertical_power, {"eta": None, "m": 1.0}),
    "log-decay": (log_decay, {"eta": None}),
    "ramp-cutoff": (ramp_cutoff, {"eta": None}),
}

FAMILY_KINDS = tuple(_BUILDERS)
BOUNDARY_KINDS = ("gaussian-bump", "bump", "hat", "indicator", "constant", "zero", "tensor")
HALFSPACE_KINDS = ("vertical-power", "log-decay", "ramp-cutoff")


def family_defaults(kind: str) -> dict[str, Any]:
    if kind not in _BUILDERS:
        raise DomainError(f"unknown family {kind!r}; known: {', '.join(FAMILY_KINDS)}")
    return dict(_BUILDERS[kind][1])


def _check_params(kind: str, params: Mapping[str, Any]) -> dict[str, Any]:
    defaults = _BUILDERS[kind][1]
    unknown = set(params) - set(defaults)
    if unknown:
        raise DomainError(f"unknown parameter(s) for {kind!r}: {sorted(unknown)}")
    merged = {**defaults, **params}
    if "d" in merged and (not isinstance(merged["d"], int) or not 1 <= merged["d"] <= MAX_DIM):
        raise DomainError(f"d must be an integer in [1, {MAX_DIM}]")
    for key in ("scale", "radius"):
        if key in merged and not float(merged[key]) > 0:
            raise DomainError(f"{key} must be positive for {kind!r}")
    if kind == "tensor" and not merged["factors"]:
        raise DomainError("tensor needs a non-empty 'factors' list")
    return merged


def instantiate(spec) -> FunctionHandle:
    """Build a handle from ``{"kind": ..., "params": {...}}`` or a bare kind name."""
    if isinstance(spec, FunctionHandle):
        return spec
    if isinstance(spec, str):
        kind, params = spec, {}
    elif isinstance(spec, Mapping):
        kind = spec.get("kind")
        params = dict(spec.get("params") or {})
        extra = set(spec) - {"kind", "params"}
        if extra:
            raise DomainError(f"unknown family spec keys: {sorted(extra)}")
    else:
        kind, params = spec
        params = dict(params)
    if kind not in _BUILDERS:
        raise DomainError(f"unknown family {kind!r}; known: {', '.join(FAMILY_KINDS)}")
    merged = _check_params(kind, params)
    return _BUILDERS[kind][0](**merged)


family_instantiate = instantiate
