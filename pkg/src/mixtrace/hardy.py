"""Weighted Hardy inequality for running averages, on the half-line and in polar form."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .families import FunctionHandle
from .quadrature import (
    DEFAULT_SPEC,
    QuadratureSpec,
    gauss_legendre,
    partial_integration_matrix,
    sphere_directions,
    sphere_measure,
)
from .reports import CLOSED_FORM_TOL, QUADRATURE_TOL, ComparisonReport, compare

TAIL_FRACTION = 1e-10


@dataclass(frozen=True)
class HardyParams:
    """Exponents of the half-line inequality; ``theta``/``beta``/``d`` feed the polar form."""

    q: float
    sigma: float
    a: float = 1.0
    theta: float | None = None
    beta: float | None = None
    d: int = 1

    def __post_init__(self) -> None:
        if not (math.isfinite(self.q) and self.q >= 1):
            raise DomainError(f"q must be finite and >= 1, got {self.q}")
        if self.theta is None and not self.sigma < 1.0 - 1.0 / self.q:
            raise DomainError(
                f"sigma must be < 1 - 1/q = {1 - 1 / self.q:g}, got {self.sigma}"
            )
        if not self.a > 0:
            raise DomainError("a must be positive (inf allowed)")
        if self.theta is not None:
            if not (math.isfinite(self.theta) and self.theta >= 1):
                raise DomainError("theta must be finite and >= 1")
            beta = 0.0 if self.beta is None else self.beta
            if not beta < self.d - 1.0 / self.theta:
                raise DomainError(
                    f"beta must be < d - 1/theta = {self.d - 1 / self.theta:g}, got {beta}"
                )

    @classmethod
    def polar(cls, theta: float, beta: float = 0.0, d: int = 2, a: float = 1.0) -> "HardyParams":
        """Parameters for the ball-average form only; ``q`` mirrors ``theta``."""
        return cls(q=theta, sigma=0.0, a=a, theta=theta, beta=beta, d=d)

    @property
    def constant(self) -> float:
        return 1.0 / (1.0 - 1.0 / self.q - self.sigma)

    @property
    def polar_constant(self) -> float:
        """``|S^{d-1}|^(1 - 1/theta) / (d - beta - 1/theta)``, from Hoelder on the sphere."""
        theta, beta = self.theta or self.q, self.beta or 0.0
        return sphere_measure(self.d) ** (1 - 1 / theta) / (self.d - beta - 1 / theta)

    def to_dict(self) -> dict:
        a = "inf" if math.isinf(self.a) else self.a
        if self.theta is not None:
            return {"a": a, "theta": self.theta, "beta": self.beta or 0.0, "d": self.d}
        return {"q": self.q, "sigma": self.sigma, "a": a}


# ---------------------------------------------------------------------------
# test shapes on (0, a)


@dataclass(frozen=True)
class HardyShape:
    """A function on the half-line with its behavior ``t**kappa`` at zero.

    ``power = (kappa, c)`` marks ``t**kappa`` on ``(0, c]`` (zero beyond),
    for which both sides have closed forms.
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    kappa: float
    breaks: tuple[float, ...] = ()
    power: tuple[float, float] | None = None
    eps: float | None = None

    def __call__(self, t):
        return self.func(np.asarray(t, dtype=float))

    def to_dict(self) -> dict:
        out = {"name": self.name}
        if self.eps is not None:
            out["eps"] = self.eps
        return out


def _power_on(kappa: float, c: float):
    def f(t):
        return np.where((t > 0) & (t <= c), np.power(np.where(t > 0, t, 1.0), kappa), 0.0)

    return f


def hardy_shape(name: str, q: float = 2.0, sigma: float = 0.0, eps: float = 0.1) -> HardyShape:
    """Shapes by name; ``near-extremal`` is ``t^(-sigma - 1/q + eps)`` on ``(0, 1]``."""
    if name == "near-extremal":
        if not eps > 0:
            raise DomainError("near-extremal needs eps > 0")
        k = -sigma - 1.0 / q + eps
        return HardyShape(name, _power_on(k, 1.0), k, (1.0,), (k, 1.0), eps)
    if name == "sqrt":
        return HardyShape(name, _power_on(0.5, 1.0), 0.5, (1.0,), (0.5, 1.0))
    if name == "half-ramp":
        return HardyShape(name, _power_on(1.0, 0.5), 1.0, (0.5,), (1.0, 0.5))
    if name == "constant":
        return HardyShape(name, lambda t: np.ones_like(t), 0.0, (), None)
    if name == "unit-step":
        return HardyShape(name, _power_on(0.0, 1.0), 0.0, (1.0,), (0.0, 1.0))
    if name == "zero":
        return HardyShape(name, lambda t: np.zeros_like(t), 0.0, (), (0.0, 0.0))
    if name == "linear-exp":
        return HardyShape(name, lambda t: t * np.exp(-t), 1.0)
    if name == "damped-sine":
        return HardyShape(name, lambda t: np.sin(2 * np.pi * t) * np.exp(-t), 1.0)
    if name == "log-ramp":

        def f(t):
            inside = (t > 0) & (t <= 1.0)
            safe = np.where(inside, t, 1.0)
            return np.where(inside, -safe * np.log(safe), 0.0)

        return HardyShape(name, f, 1.0, (1.0,))
    raise DomainError(f"unknown Hardy shape {name!r}; known: {', '.join(HARDY_SHAPES)}")


HARDY_SHAPES = (
    "near-extremal", "sqrt", "linear-exp", "damped-sine", "half-ramp", "log-ramp",
    "constant", "unit-step", "zero",
)
CAMPAIGN_SHAPES = HARDY_SHAPES[:6]


def power_closed_form(kappa: float, c: float, q: float, sigma: float, a: float) -> tuple[float, float]:
    """Both sides for ``f = t^kappa 1_(0,c]`` on ``(0, a)``."""
    e = q * (kappa + sigma)
    if e <= -1:
        return math.inf, math.inf
    if c == 0.0:
        return 0.0, 0.0
    top = min(a, c)
    rhs_q = top ** (e + 1) / (e + 1)
    lhs_q = rhs_q / (kappa + 1) ** q
    if a > c:
        mass = c ** (kappa + 1) / (kappa + 1)
        g = q * sigma - q + 1
        far = 0.0 if math.isinf(a) else a**g
        lhs_q += mass**q * (far - c**g) / g
    return lhs_q ** (1 / q), rhs_q ** (1 / q)


# ---------------------------------------------------------------------------
# meshes with running integrals


@dataclass(frozen=True)
class RunningRule:
    """Composite rule on ``(0, T)`` that also yields ``int_0^t`` at every node.

    Node 0 is the head point ``t0``; below it the integrand is taken to be a
    pure power ``t**p`` with ``p`` declared by the caller, which is exact for
    power-law shapes and a relative ``O(t0)`` perturbation otherwise.
    """

    t0: float
    t: np.ndarray  # (panels, m)
    w: np.ndarray
    half: np.ndarray  # (panels, 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.concatenate([[self.t0], self.t.ravel()])

    def _split(self, vals):
        vals = np.asarray(vals, dtype=float)
        return vals[0], vals[1:].reshape(self.t.shape)

    def head(self, vals, exponent: float) -> float:
        v0, _ = self._split(vals)
        return float(self.t0 * v0 / (exponent + 1.0)) if v0 else 0.0

    def integrate(self, vals, exponent: float) -> float:
        _, v = self._split(vals)
        return self.head(vals, exponent) + float(np.sum(self.w * v))

    def running(self, vals, exponent: float) -> np.ndarray:
        _, v = self._split(vals)
        S = partial_integration_matrix(self.t.shape[1])
        inner = (v * self.half) @ S.T
        totals = np.sum(self.w * v, axis=1)
        start = self.head(vals, exponent)
        before = start + np.concatenate([[0.0], np.cumsum(totals)[:-1]])
        return np.concatenate([[start], (before[:, None] + inner).ravel()])

    def panel_contributions(self, vals) -> np.ndarray:
        _, v = self._split(vals)
        return np.sum(self.w * v, axis=1)


def running_rule(top: float, breaks: Sequence[float], spec: QuadratureSpec = DEFAULT_SPEC,
                 far: bool = False) -> RunningRule:
    """Octave panels toward 0, uniform panels between breaks, octaves beyond 1.

    The mesh is geometrically graded: ``H = vertical_panels // 2`` halvings
    below the first break, each a single panel with ``2 * points_per_panel``
    Gauss points, then a power-law head below ``t0``.
    """
    m = 2 * spec.points_per_panel
    cuts = sorted({b for b in breaks if 0 < b < top} | ({1.0} if far and top > 1 else set()))
    edges = [0.0, *cuts, top]
    first = edges[1]
    H = max(8, spec.vertical_panels // 2)
    panel_edges = list(first * 2.0 ** -np.arange(H, -1, -1, dtype=float))
    for lo, hi in zip(edges[1:-1], edges[2:]):
        if far and lo >= 1.0:
            k0, k1 = math.floor(math.log2(lo)), math.ceil(math.log2(hi))
            octs = [2.0**k for k in range(k0, k1 + 1)]
            octs = sorted({min(max(o, lo), hi) for o in octs})
            sub = []
            for a, b in zip(octs[:-1], octs[1:]):
                sub += [a, 0.5 * (a + b)]
            panel_edges += sub[1:] + [hi]
        else:
            panel_edges += list(np.linspace(lo, hi, max(4, spec.vertical_panels // 4) + 1)[1:])
    e = np.asarray(panel_edges)
    x, wx = gauss_legendre(m)
    half = 0.5 * np.diff(e)[:, None]
    t = 0.5 * (e[:-1] + e[1:])[:, None] + half * x
    return RunningRule(float(e[0]), t, half * wx, half)


# ---------------------------------------------------------------------------
# the checks


def _shape_of(f, params: HardyParams, eps: float) -> HardyShape:
    if isinstance(f, HardyShape):
        return f
    if isinstance(f, str):
        return hardy_shape(f, params.q, params.sigma, eps)
    if callable(f):
        return HardyShape("custom", lambda t: np.asarray(f(t), dtype=float), 0.0)
    raise DomainError("f must be a shape name, a HardyShape or a callable")


def hardy_sides(shape: HardyShape, params: HardyParams, spec: QuadratureSpec = DEFAULT_SPEC):
    """``(lhs, rhs, tail_fraction)`` by quadrature; ``tail_fraction`` is the last
    octave's share of the right side when ``a = inf``.
    """
    q, sigma = params.q, params.sigma
    infinite = math.isinf(params.a)
    top = 2.0**spec.radial_octaves if infinite else params.a
    rule = running_rule(top, shape.breaks, spec, far=top > 1)
    t = rule.nodes
    f = shape(t)
    e = q * (shape.kappa + sigma)
    weight = t ** (q * sigma)
    rhs_vals = np.abs(f) ** q * weight
    rhs_q = rule.integrate(rhs_vals, e)
    run = rule.running(f, shape.kappa)
    lhs_q = rule.integrate(weight * np.abs(run / t) ** q, e)
    tail_fraction = 0.0
    if infinite:
        g = q * sigma - q + 1
        lhs_q += abs(run[-1]) ** q * top**g / (-g)
        contrib = rule.panel_contributions(rhs_vals)
        last = contrib[rule.t[:, 0] >= top / 2].sum()
        tail_fraction = abs(last) / rhs_q if rhs_q > 0 else 0.0
    return lhs_q ** (1 / q), rhs_q ** (1 / q), tail_fraction


def hardy_check(f, params: HardyParams, spec: QuadratureSpec = DEFAULT_SPEC,
                eps: float = 0.1, mesh_level: int = 0) -> ComparisonReport:
    """Running-average side against ``(1 - 1/q - sigma)^-1`` times the weighted norm."""
    shape = _shape_of(f, params, eps)
    q, sigma = params.q, params.sigma
    base = {"hardy": params.to_dict(), "shape": shape.to_dict(), "spec": spec.to_dict()}
    C = params.constant
    if q * (shape.kappa + sigma) <= -1:
        return compare("hardy", math.nan, math.inf, C, params=base, mesh_level=mesh_level,
                       inconclusive="weighted norm of f diverges at t = 0")
    lhs, rhs, tail = hardy_sides(shape, params, spec)
    extras = {"tail_fraction": tail}
    tol = QUADRATURE_TOL
    if shape.power is not None:
        cl, cr = power_closed_form(*shape.power, q, sigma, params.a)
        extras.update(closed_lhs=cl, closed_rhs=cr,
                      closed_error=max(_rel(lhs, cl), _rel(rhs, cr)))
        tol = CLOSED_FORM_TOL
    reason = None
    if math.isinf(params.a) and tail > TAIL_FRACTION:
        reason = f"last octave carries {tail:.3g} of the right side; a = inf not resolved"
    return compare("hardy", lhs, rhs, C, tol=tol, params=base, mesh_level=mesh_level,
                   inconclusive=reason, extras=extras)


def _rel(x: float, y: float) -> float:
    return abs(x - y) / abs(y) if y else abs(x)


def _radial_support(f) -> tuple[float, tuple[float, ...]]:
    if isinstance(f, FunctionHandle):
        return f.support_radius, ()
    return getattr(f, "support_radius", math.inf), tuple(getattr(f, "radial_breaks", ()))


def radial_power(d: int, exponent: float, radius: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    """``|x|^exponent`` on the ball of given radius, as a callable of points."""

    def f(x):
        r = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
        inside = (r > 0) & (r <= radius)
        return np.where(inside, np.power(np.where(inside, r, 1.0), exponent), 0.0)

    f.spec = {"kind": "radial-power", "params": {"d": d, "exponent": exponent, "radius": radius}}
    f.support_radius = radius
    f.radial_breaks = (radius,)
    f.kappa = exponent
    f.d = d
    return f


def hardy_polar_sides(f, params: HardyParams, spec: QuadratureSpec = DEFAULT_SPEC):
    """Ball-average side and weighted norm side of the polar inequality."""
    d = params.d
    theta = params.theta if params.theta is not None else params.q
    beta = params.beta or 0.0
    radius, breaks = _radial_support(f)
    kappa = getattr(f, "kappa", 0.0)
    infinite = math.isinf(params.a)
    top = 2.0**spec.radial_octaves if infinite else params.a
    cuts = tuple(b for b in (*breaks, radius) if math.isfinite(b))
    exponent = theta * (beta + kappa)
    rule = running_rule(top, cuts, spec, far=top > 1)
    r = rule.nodes
    dirs, wd = sphere_directions(d, spec.direction_count(d), spec.seed)
    vals = np.abs(np.asarray(f(r[:, None, None] * dirs[None, :, :]), dtype=float))
    sphere_l1 = vals @ wd
    sphere_lt = vals**theta @ wd
    ball = rule.running(r ** (d - 1) * sphere_l1, d - 1 + kappa)
    lhs_t = rule.integrate(np.abs(r ** (beta - d) * ball) ** theta, exponent)
    rhs_t = rule.integrate(r ** (theta * beta) * sphere_lt, exponent)
    if infinite:
        g = theta * (beta - d) + 1
        lhs_t += abs(ball[-1]) ** theta * top**g / (-g) if g < 0 else math.inf
    return lhs_t ** (1 / theta), rhs_t ** (1 / theta)


def polar_diverges(f, params: HardyParams) -> bool:
    kappa = getattr(f, "kappa", 0.0)
    return params.theta * ((params.beta or 0.0) + kappa) <= -1


def hardy_polar_check(f, params: HardyParams, spec: QuadratureSpec = DEFAULT_SPEC,
                      ceiling: float | None = None, mesh_level: int = 0) -> ComparisonReport:
    """Ball averages against the weighted norm; constant is the campaign ceiling.

    ``ceiling=None`` uses the explicit constant ``polar_constant``.
    """
    if params.theta is None:
        params = HardyParams(params.q, params.sigma, params.a, params.q, params.beta, params.d)
    n = params.polar_constant
    C = n if ceiling is None else ceiling
    name = f.spec() if isinstance(f, FunctionHandle) else getattr(f, "spec", {"kind": "custom"})
    base = {"hardy": params.to_dict(), "family": name, "spec": spec.to_dict()}
    if polar_diverges(f, params):
        return compare("hardy-polar", math.nan, math.inf, C, params=base, mesh_level=mesh_level,
                       inconclusive="weighted norm of f diverges at 0")
    lhs, rhs = hardy_polar_sides(f, params, spec)
    extras = {"explicit_constant": n, "explicit_ratio": lhs / (n * rhs) if rhs else 0.0,
              "empirical_constant": lhs / rhs if rhs else 0.0}
    return compare("hardy-polar", lhs, rhs, C, tol=QUADRATURE_TOL, params=base,
                   mesh_level=mesh_level, extras=extras)


def hardy_matrix(a_values: Sequence[float] | None = None, shapes: Sequence[str] = CAMPAIGN_SHAPES,
                 eps: float = 0.1, octaves: int = 12) -> list[tuple[HardyParams, str]]:
    """The default campaign: q in {1, 1.5, 2, 3}, three sigmas, two ``a`` values."""
    a_values = a_values or (1.0, math.inf)
    out = []
    for q in (1.0, 1.5, 2.0, 3.0):
        for sigma in (-0.5, 0.0, round(1.0 - 1.0 / q - 0.1, 12)):
            if not sigma < 1.0 - 1.0 / q:
                continue
            for a in a_values:
                for name in shapes:
                    out.append((HardyParams(q, sigma, a), name))
    return out
