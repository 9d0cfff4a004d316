"""Composite Gauss-Legendre rules on boxes, graded vertical meshes and spheres.

Every rule here is deterministic: nodes and weights depend only on the
arguments, and sums are taken in a fixed order.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import legendre

from .errors import DomainError, NumericError

DEFAULT_DIRECTIONS = {1: 2, 2: 32, 3: 64}


@dataclass(frozen=True)
class QuadratureSpec:
    """Discretization parameters shared by every integral in the package.

    ``grading_exponent=None`` selects ``max(1, 3 / (1 + alpha))`` at the
    use site; ``directions=None`` selects 2, 32 or 64 for d = 1, 2, 3.
    """

    box_radius: float = 8.0
    panels_per_axis: int = 32
    points_per_panel: int = 4
    vertical_cap: float = 1.0
    vertical_panels: int = 64
    grading_exponent: float | None = None
    radial_octaves: int = 12
    radial_panels: int = 1
    directions: int | None = None
    direction_factor: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.box_radius > 0:
            raise DomainError(f"box_radius must be positive, got {self.box_radius}")
        for name in ("panels_per_axis", "points_per_panel", "vertical_panels"):
            if int(getattr(self, name)) < 1:
                raise DomainError(f"{name} must be a positive integer")
        if not self.vertical_cap > 0:
            raise DomainError("vertical_cap must be positive")
        if self.grading_exponent is not None and self.grading_exponent < 1:
            raise DomainError("grading_exponent must be >= 1")
        if self.radial_panels < 1:
            raise DomainError("radial_panels must be a positive integer")
        if self.radial_octaves < 1:
            raise DomainError("radial_octaves must be >= 1")
        if self.directions is not None and self.directions < 1:
            raise DomainError("directions must be a positive integer")
        if self.direction_factor < 1:
            raise DomainError("direction_factor must be a positive integer")

    @property
    def panel_width(self) -> float:
        return 2.0 * self.box_radius / self.panels_per_axis

    def direction_count(self, d: int) -> int:
        if d == 1:
            return 2
        base = self.directions if self.directions is not None else DEFAULT_DIRECTIONS[d]
        return base * self.direction_factor

    def grading(self, alpha: float) -> float:
        if self.grading_exponent is not None:
            return float(self.grading_exponent)
        return max(1.0, 3.0 / (1.0 + alpha))

    def refined(self, level: int = 1) -> "QuadratureSpec":
        """Panels, vertical and radial panels and direction counts scaled by ``2**level``."""
        f = 2**level
        return replace(
            self,
            panels_per_axis=self.panels_per_axis * f,
            vertical_panels=self.vertical_panels * f,
            radial_panels=self.radial_panels * f,
            direction_factor=self.direction_factor * f,
        )

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_SPEC = QuadratureSpec()


@lru_cache(maxsize=None)
def gauss_legendre(m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = legendre.leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def partial_integration_matrix(m: int) -> np.ndarray:
    """``S[i, j] = int_{-1}^{x_i} L_j(s) ds`` for the Lagrange basis on Gauss nodes.

    Multiplying panel samples by ``S`` integrates the interpolant from the
    left panel edge up to each node.
    """
    x, _ = gauss_legendre(m)
    V = legendre.legvander(x, m - 1)
    # antiderivatives of P_k from -1, evaluated at the nodes
    A = np.empty((m, m))
    for k in range(m):
        c = np.zeros(m)
        c[k] = 1.0
        ci = legendre.legint(c, lbnd=-1.0)
        A[:, k] = legendre.legval(x, ci)
    S = A @ np.linalg.inv(V)
    S.setflags(write=False)
    return S


def composite_rule(edges: Sequence[float], m: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre with ``m`` points on every panel ``[edges[i], edges[i+1]]``."""
    e = np.asarray(edges, dtype=float)
    a, b = e[:-1], e[1:]
    x, w = gauss_legendre(m)
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def _merge_intervals(intervals) -> list[tuple[float, float]]:
    ivs = sorted((float(lo), float(hi)) for lo, hi in intervals if hi > lo)
    out: list[list[float]] = []
    for lo, hi in ivs:
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(lo, hi) for lo, hi in out]


@lru_cache(maxsize=4096)
def _axis_rule_cached(intervals, breakpoints, R, P, m):
    w = 2.0 * R / P
    edges_all: list[np.ndarray] = []
    for lo, hi in _merge_intervals(intervals):
        j0 = math.ceil((lo + R) / w)
        j1 = math.floor((hi + R) / w)
        lattice = -R + w * np.arange(j0, j1 + 1)
        bps = [b for b in breakpoints if lo < b < hi]
        e = np.unique(np.concatenate([[lo, hi], lattice, bps]))
        e = e[(e >= lo) & (e <= hi)]
        # drop slivers created by round-off next to lattice points
        keep = np.concatenate([[True], np.diff(e) > 1e-13 * max(1.0, w)])
        e = e[keep]
        if e[-1] < hi:
            e[-1] = hi
        edges_all.append(e)
    if not edges_all:
        empty = np.zeros(0)
        return empty, empty
    parts = [composite_rule(e, m) for e in edges_all]
    nodes = np.concatenate([p[0] for p in parts])
    weights = np.concatenate([p[1] for p in parts])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def axis_rule(
    intervals: Sequence[tuple[float, float]],
    breakpoints: Sequence[float],
    spec: QuadratureSpec,
) -> tuple[np.ndarray, np.ndarray]:
    """1-D rule over a union of intervals on the lattice of box panels.

    Panel edges sit on the lattice ``-R + j * w`` (``w = 2R/panels``) so
    shifted domains reuse the same panel width; breakpoints split panels.
    """
    iv = tuple((round(float(lo), 15), round(float(hi), 15)) for lo, hi in intervals)
    bp = tuple(sorted({round(float(b), 15) for b in breakpoints}))
    return _axis_rule_cached(
        iv, bp, float(spec.box_radius), int(spec.panels_per_axis), int(spec.points_per_panel)
    )


def tensor_grid(axes: Sequence[np.ndarray]) -> np.ndarray:
    """Points of the tensor grid, shape ``(n1, ..., nd, d)`` in ``ij`` order."""
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1)


def _check_finite(values: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise NumericError(f"non-finite sample in {what}")


def integrate_box(
    f: Callable[[np.ndarray], np.ndarray],
    spec: QuadratureSpec = DEFAULT_SPEC,
    d: int = 1,
    breakpoints: Sequence[Sequence[float]] | None = None,
) -> float:
    """Composite tensor Gauss-Legendre over ``[-R, R]^d``."""
    R = spec.box_radius
    bps = breakpoints or [()] * d
    rules = [axis_rule([(-R, R)], bps[i], spec) for i in range(d)]
    pts = tensor_grid([r[0] for r in rules])
    vals = np.asarray(f(pts), dtype=float)
    _check_finite(vals, "integrate_box")
    for i in range(d):
        vals = np.tensordot(rules[i][1], vals, axes=([0], [0]))
    return float(vals)


def graded_rule(
    y_end: float, alpha: float, panels: int, m: int, gamma: float
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on ``(0, y_end)`` and weights including ``y**alpha``.

    Uses ``y = y_end * t**gamma``; the weight becomes
    ``gamma * y_end**(1+alpha) * t**(gamma*(1+alpha) - 1)``.
    """
    t, wt = composite_rule(np.linspace(0.0, 1.0, panels + 1), m)
    y = y_end * t**gamma
    w = wt * gamma * y_end ** (1.0 + alpha) * t ** (gamma * (1.0 + alpha) - 1.0)
    return y, w


def vertical_rule(
    alpha: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    breakpoints: Sequence[float] = (),
    cap: float | None = None,
    singular_order: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Rule for ``int_0^cap F(y) y**alpha dy`` split at ``breakpoints``.

    The first piece ``(0, b_1)`` is graded; later pieces are plain composite
    Gauss.  ``singular_order`` s < 0 declares ``F ~ y**s`` near zero and is
    folded into the grading.
    """
    if alpha <= -1.0:
        raise DomainError(f"alpha must exceed -1 for the weighted integral, got {alpha}")
    cap = spec.vertical_cap if cap is None else cap
    eff = alpha + min(0.0, singular_order)
    if eff <= -1.0:
        raise DomainError("integrand times weight is not integrable at y = 0")
    gamma = spec.grading(eff)
    if gamma * (1.0 + eff) < 1.0 - 1e-12:
        raise DomainError(
            f"grading exponent {gamma} too small for effective weight power {eff}"
        )
    cuts = sorted(b for b in breakpoints if 0.0 < b < cap)
    edges = [0.0, *cuts, cap]
    m = spec.points_per_panel
    ys, ws = [], []
    y, w = graded_rule(edges[1], alpha, spec.vertical_panels, m, gamma)
    ys.append(y)
    ws.append(w)
    if len(edges) > 2:
        sub = max(1, spec.vertical_panels // 16)
        for a, b in zip(edges[1:-1], edges[2:]):
            yy, ww = composite_rule(np.linspace(a, b, sub + 1), m)
            ys.append(yy)
            ws.append(ww * yy**alpha)
    return np.concatenate(ys), np.concatenate(ws)


def integrate_weighted_vertical(
    F: Callable[[np.ndarray], np.ndarray],
    alpha: float,
    interval: tuple[float, float] | None = None,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> float:
    """Approximate ``int_0^Y F(y) y**alpha dy`` for bounded ``F``."""
    if interval is not None:
        lo, Y = interval
        if lo != 0.0:
            raise DomainError("the weighted vertical integral starts at y = 0")
    else:
        Y = spec.vertical_cap
    y, w = vertical_rule(alpha, spec, cap=Y)
    vals = np.asarray(F(y), dtype=float)
    _check_finite(vals, "integrate_weighted_vertical")
    return float(np.dot(w, vals))


def sphere_directions(d: int, n: int | None = None, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Fixed direction set on ``S^{d-1}`` with equal weights summing to its measure.

    d=1 is ``{+1, -1}`` with counting measure; d=2 uses equally spaced
    angles starting on the x-axis; d=3 uses a Fibonacci lattice rotated by
    a seeded random rotation.
    """
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d == 2:
        n = n or DEFAULT_DIRECTIONS[2]
        th = 2.0 * np.pi * np.arange(n) / n
        dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
        return dirs, np.full(n, 2.0 * np.pi / n)
    if d == 3:
        n = n or DEFAULT_DIRECTIONS[3]
        i = np.arange(n) + 0.5
        z = 1.0 - 2.0 * i / n
        phi = np.pi * (1.0 + 5.0**0.5) * i
        rho = np.sqrt(1.0 - z * z)
        dirs = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
        rng = np.random.default_rng(seed)
        Q, Rm = np.linalg.qr(rng.standard_normal((3, 3)))
        Q = Q * np.sign(np.diag(Rm))
        return dirs @ Q.T, np.full(n, 4.0 * np.pi / n)
    raise DomainError(f"d must be 1, 2 or 3, got {d}")


def sphere_measure(d: int) -> float:
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def octave_edges(r0: float, r1: float, spec: QuadratureSpec) -> np.ndarray:
    """Dyadic panel edges on ``[r0, r1]``; ``r0 = 0`` gets one head panel below ``r1 2**-J``."""
    if not r1 > r0 >= 0.0:
        raise DomainError(f"empty radial range ({r0}, {r1})")
    if r0 == 0.0:
        J = spec.radial_octaves
        edges = r1 * 2.0 ** -np.arange(J, -1, -1, dtype=float)
    else:
        k0 = math.floor(math.log2(r0))
        k1 = math.ceil(math.log2(r1))
        inner = [2.0**k for k in range(k0, k1 + 1) if r0 < 2.0**k < r1]
        edges = np.array([r0, *inner, r1], dtype=float)
    n = spec.radial_panels
    if n > 1:
        # geometric split of each octave keeps panels scale-invariant
        frac = np.arange(n) / n
        lo, hi = edges[:-1, None], edges[1:, None]
        edges = np.append((lo * (hi / lo) ** frac).ravel(), r1)
    return np.concatenate([[0.0], edges]) if r0 == 0.0 else edges


def radial_rule(r0: float, r1: float, spec: QuadratureSpec) -> tuple[np.ndarray, np.ndarray]:
    return composite_rule(octave_edges(r0, r1, spec), spec.points_per_panel)


def integrate_polar(
    F: Callable[[np.ndarray, np.ndarray], np.ndarray],
    d: int,
    radial_range: tuple[float, float],
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> float:
    """Approximate ``int_{S^{d-1}} int F(r, xi) r**(d-1) dr dxi``.

    ``F`` receives ``r`` of shape ``(nr, 1)`` and directions of shape
    ``(1, nd, d)`` and returns an ``(nr, nd)`` array.
    """
    r, wr = radial_rule(radial_range[0], radial_range[1], spec)
    dirs, wd = sphere_directions(d, spec.direction_count(d), spec.seed)
    vals = np.asarray(F(r[:, None], dirs[None, :, :]), dtype=float)
    vals = np.broadcast_to(vals, (r.size, dirs.shape[0]))
    _check_finite(vals, "integrate_polar")
    return float(np.dot(wr * r ** (d - 1), vals @ wd))
