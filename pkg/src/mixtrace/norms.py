"""Mixed Lebesgue, weighted, Sobolev and Besov norms of registry functions."""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, NumericError
from .exponents import ExponentConfig, smoothness_order
from .families import FunctionHandle
from .quadrature import (
    DEFAULT_SPEC,
    QuadratureSpec,
    _check_finite,
    axis_rule,
    integrate_polar,
    sphere_directions,
    sphere_measure,
    tensor_grid,
    vertical_rule,
)

MODULUS_RADII = 16
DYADIC_KMAX = 14
INTEGRAL_STEPS_PER_OCTAVE = 4
# fitted decay exponents this close to ell mean the seminorm diverges
HEAD_MARGIN = 1e-3


# ---------------------------------------------------------------------------
# nested norms on tensor grids


def nested_norm(values: np.ndarray, weights: Sequence[np.ndarray], p_vec: Sequence[float],
                overwrite: bool = False) -> np.ndarray:
    """Iterated norm over the trailing ``len(p_vec)`` axes, innermost first.

    Axis ``-d`` carries ``x_1`` and is reduced with ``p_1``; leading axes
    are batch dimensions and survive.  ``overwrite`` lets a float array
    owned by the caller serve as scratch space.
    """
    d = len(p_vec)
    # powers are taken in place: fresh grid-sized temporaries dominate the cost
    if overwrite and isinstance(values, np.ndarray) and values.dtype == np.float64:
        a = np.abs(values, out=values)
    else:
        a = np.abs(values, dtype=float)
    for i, (w, p) in enumerate(zip(weights, p_vec)):
        if p == 2:
            np.multiply(a, a, out=a)
        elif p == 3:
            np.multiply(a, np.multiply(a, a), out=a)
        elif p != 1:
            np.power(a, p, out=a)
        a = np.moveaxis(a, a.ndim - (d - i), -1) @ w
        if p == 2:
            a = np.sqrt(a)
        elif p != 1:
            a = np.power(a, 1.0 / p)
    return a


def _length(g: np.ndarray) -> np.ndarray:
    """Euclidean length over the last axis."""
    return np.sqrt(np.einsum("...i,...i->...", g, g))


def _clip_box(lo: float, hi: float, R: float) -> tuple[float, float]:
    if not math.isfinite(lo) or not math.isfinite(hi):
        return -R, R
    return lo, hi


def horizontal_rules(f, spec: QuadratureSpec, shift=None, y=None):
    """Per-axis rules covering the support of ``f`` (and of ``f(. + shift)``)."""
    R = spec.box_radius
    box = f.x_support(y)
    kinks = f.x_breakpoints(y)
    rules = []
    for i, ((lo, hi), bps) in enumerate(zip(box, kinks)):
        lo, hi = _clip_box(lo, hi, R)
        intervals = [(lo, hi)]
        points = list(bps)
        if shift is not None and shift[i] != 0.0:
            s = float(shift[i])
            intervals.append((lo - s, hi - s))
            points += [b - s for b in bps]
        rules.append(axis_rule(intervals, points, spec))
    return rules


def _p_vec(cfg: ExponentConfig | Sequence[float]) -> tuple[float, ...]:
    return cfg.p_vec if isinstance(cfg, ExponentConfig) else tuple(float(p) for p in cfg)


def mixed_lebesgue_norm(f: FunctionHandle, cfg, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``||f||_{L_p}`` with ``p = (p_1, ..., p_d)``, integrating ``x_1`` first."""
    if not f.is_boundary:
        raise DomainError("mixed_lebesgue_norm expects a boundary function")
    p = _p_vec(cfg)
    if len(p) != f.d:
        raise DomainError(f"exponent vector has length {len(p)} but f lives in d={f.d}")
    rules = horizontal_rules(f, spec)
    vals = f.values_on([r[0] for r in rules])
    _check_finite(vals, "mixed_lebesgue_norm")
    return float(nested_norm(vals, [r[1] for r in rules], p))


def gradient_norm(f: FunctionHandle, cfg, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``|| |grad f| ||_{L_p}``: a Lipschitz bound for ``||f(. + h) - f||`` per unit ``|h|``."""
    p = _p_vec(cfg)
    rules = horizontal_rules(f, spec)
    g = f.gradient_on([r[0] for r in rules])
    return float(nested_norm(_length(g), [r[1] for r in rules], p))


# ---------------------------------------------------------------------------
# half-space norms


def _vertical_groups(u, alpha: float, spec: QuadratureSpec, singular_order: float):
    ys, ws = vertical_rule(
        alpha, spec, breakpoints=u.y_breakpoints, singular_order=singular_order
    )
    cuts = np.array(sorted(b for b in u.y_breakpoints if 0.0 < b < spec.vertical_cap))
    piece = np.searchsorted(cuts, ys)
    return [(ys[piece == k], ws[piece == k]) for k in np.unique(piece)]


def slice_norms(u, ys, cfg: ExponentConfig, spec: QuadratureSpec = DEFAULT_SPEC,
                gradient: bool = False) -> np.ndarray:
    """``||u(., y)||_{L_p}`` (or of ``|Du(., y)|``) for each ``y`` in ``ys``.

    All ``ys`` must share one horizontal grid, so they should lie in a
    single vertical piece of ``u``.
    """
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    rules = horizontal_rules(u, spec, y=float(np.median(ys)))
    axes = [r[0] for r in rules]
    if gradient and hasattr(u, "gradient_length_on"):
        vals = u.gradient_length_on(axes, ys)
    elif gradient:
        vals = _length(u.gradient_on(axes, ys))
    else:
        vals = u.values_on(axes, ys)
    _check_finite(vals, "slice_norms")
    return nested_norm(vals, [r[1] for r in rules], cfg.p_vec, overwrite=True)


def slice_norm(u, y: float, cfg: ExponentConfig, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    return float(slice_norms(u, [y], cfg, spec)[0])


def _weighted(u, cfg: ExponentConfig, spec: QuadratureSpec, gradient: bool) -> float:
    if cfg.alpha <= -1.0:
        raise DomainError(
            f"weighted norms need alpha > -1 (got {cfg.alpha}); use slice_norms instead"
        )
    if u.is_boundary:
        raise DomainError("weighted norms expect a half-space function")
    q = cfg.q
    order = q * u.vertical_order if gradient else 0.0
    total = 0.0
    for ys, ws in _vertical_groups(u, cfg.alpha, spec, order):
        s = slice_norms(u, ys, cfg, spec, gradient=gradient)
        total += float(np.dot(ws, s**q))
    return total ** (1.0 / q)


def weighted_mixed_norm(u, cfg: ExponentConfig, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``(int_0^Y ||u(., y)||_{L_p}^q y^alpha dy)^(1/q)``."""
    return _weighted(u, cfg, spec, gradient=False)


def sobolev_parts(u, cfg: ExponentConfig, spec: QuadratureSpec = DEFAULT_SPEC) -> tuple[float, float]:
    if not u.has_gradient:
        raise DomainError(f"{u.kind!r} has no gradient; the Sobolev norm is undefined")
    return _weighted(u, cfg, spec, False), _weighted(u, cfg, spec, True)


def sobolev_norm(u, cfg: ExponentConfig, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Weighted norm of ``u`` plus that of the Euclidean length ``|(D_x u, D_y u)|``."""
    a, b = sobolev_parts(u, cfg, spec)
    return a + b


# ---------------------------------------------------------------------------
# differences and the modulus of continuity


def _canonical(h: np.ndarray) -> tuple[float, ...]:
    key = tuple(float(f"{x:.13g}") + 0.0 for x in h)
    for x in key:
        if x != 0.0:
            return key if x > 0 else tuple(-v + 0.0 for v in key)
    return key


def _tensor(vectors) -> np.ndarray:
    out = np.ones(1)
    for v in vectors:
        out = np.multiply.outer(out, v).ravel()
    return out


def _separable_difference(factors, axes, h, scratch: np.ndarray | None = None) -> np.ndarray:
    """``f(x + h) - f(x)`` for a tensor product, as one rank-2 matrix product.

    The product is written into ``scratch`` when it is large enough.
    """
    shifted = [fac.value((ax + s)[:, None]) for fac, ax, s in zip(factors, axes, h)]
    base = [fac.value(ax[:, None]) for fac, ax in zip(factors, axes)]
    left = np.stack([shifted[0], -base[0]], axis=1)
    right = np.stack([_tensor(shifted[1:]), _tensor(base[1:])])
    shape = (left.shape[0], right.shape[1])
    out = None
    if scratch is not None and scratch.size >= shape[0] * shape[1]:
        out = scratch[: shape[0] * shape[1]].reshape(shape)
    return np.matmul(left, right, out=out).reshape(tuple(len(ax) for ax in axes))


class DifferenceTable:
    """Memoized ``||f(. + h) - f||_{L_p}``; ``h`` and ``-h`` share an entry."""

    def __init__(self, f: FunctionHandle, p_vec: tuple[float, ...], spec: QuadratureSpec):
        self.f = f
        self.p_vec = p_vec
        self.spec = spec
        self._values: dict[tuple[float, ...], float] = {}
        self._raw: dict[tuple[float, ...], float] = {}  # exact shifts, skips canonicalization
        self._scratch = np.empty(0)

    def __len__(self) -> int:
        return len(self._values)

    def _compute(self, h: tuple[float, ...]) -> float:
        f = self.f
        if not any(h):
            return 0.0
        rules = horizontal_rules(f, self.spec, shift=h)
        axes = [r[0] for r in rules]
        if f.factors is not None:
            size = math.prod(len(ax) for ax in axes)
            if self._scratch.size < size:
                self._scratch = np.empty(2 * size)
            vals = _separable_difference(f.factors, axes, h, self._scratch)
        else:
            pts = tensor_grid(axes)
            vals = f.value(pts + np.asarray(h)) - f.value(pts)
        # weights are positive, so a bad sample surfaces in the result
        out = float(nested_norm(vals, [r[1] for r in rules], self.p_vec, overwrite=True))
        if not math.isfinite(out):
            raise NumericError("non-finite sample in difference norm")
        return out

    def norm(self, h) -> float:
        key = _canonical(np.asarray(h, dtype=float).ravel())
        val = self._values.get(key)
        if val is None:
            val = self._values[key] = self._compute(key)
        return val

    def norms(self, hs: np.ndarray) -> np.ndarray:
        hs = np.asarray(hs, dtype=float)
        flat = hs.reshape(-1, hs.shape[-1])
        raw = self._raw
        out = np.empty(flat.shape[0])
        for i, row in enumerate(map(tuple, flat.tolist())):
            val = raw.get(row)
            if val is None:
                val = raw[row] = self.norm(row)
            out[i] = val
        return out.reshape(hs.shape[:-1])


_TABLES: "weakref.WeakKeyDictionary[FunctionHandle, dict]" = weakref.WeakKeyDictionary()


def difference_table(f: FunctionHandle, cfg, spec: QuadratureSpec = DEFAULT_SPEC) -> DifferenceTable:
    p = _p_vec(cfg)
    per_f = _TABLES.setdefault(f, {})
    key = (p, spec)
    if key not in per_f:
        per_f[key] = DifferenceTable(f, p, spec)
    return per_f[key]


def difference_norm(f: FunctionHandle, h, cfg, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``||f(. + h) - f||_{L_p}`` on the union of both supports."""
    return difference_table(f, cfg, spec).norm(h)


def _directions(d: int, spec: QuadratureSpec, density: int = 1) -> tuple[np.ndarray, np.ndarray]:
    return sphere_directions(d, spec.direction_count(d) * density, spec.seed)


def modulus_radii(delta: float, density: int = 1) -> np.ndarray:
    n = MODULUS_RADII * density
    return delta * 2.0 ** (-np.arange(n) / (2.0 * density))


def modulus(f: FunctionHandle, delta: float, cfg, spec: QuadratureSpec = DEFAULT_SPEC,
            density: int = 1) -> float:
    """``sup_{|h| <= delta} ||f(. + h) - f||`` over geometric radii times directions.

    ``density = 4`` quadruples both the radii and the direction count; it is
    the stability probe for the default sampling.
    """
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    table = difference_table(f, cfg, spec)
    dirs, _ = _directions(f.d, spec, density)
    radii = modulus_radii(delta, density)
    hs = radii[:, None, None] * dirs[None, :, :]
    return float(table.norms(hs).max())


# ---------------------------------------------------------------------------
# Besov seminorms


@dataclass(frozen=True)
class BesovVariant:
    """``direct`` (difference integral), ``integral`` (modulus integral up to ``a``) or ``dyadic``."""

    tag: str = "direct"
    a: float = 1.0

    def __post_init__(self) -> None:
        if self.tag not in ("direct", "integral", "dyadic"):
            raise DomainError(f"unknown Besov variant {self.tag!r}")
        if self.tag == "integral" and not self.a > 0:
            raise DomainError("the integral variant needs a > 0")

    @classmethod
    def parse(cls, text: str) -> "BesovVariant":
        """``direct``, ``dyadic``, ``integral`` or ``integral:<a>`` (``inf`` allowed)."""
        tag, _, a = text.partition(":")
        return cls(tag, float(a) if a else 1.0)

    def label(self) -> str:
        return f"integral:{self.a:g}" if self.tag == "integral" else self.tag


@dataclass(frozen=True)
class SeminormParts:
    value: float
    body: float
    head: float
    tail: float
    head_bound: float = float("nan")
    tail_bound: float = float("nan")


def _trace_ell(cfg: ExponentConfig) -> float:
    return smoothness_order(cfg.q, cfg.alpha)


def _head_power_law(v1, v2, r1, r2, q, ell) -> np.ndarray:
    """``int_0^{r1} (V(r) / r^ell)^q dr / r`` for ``V = A r^beta`` fitted at ``r1, r2``."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    out = np.zeros(v1.shape)
    live = (v1 > 0) & (v2 > 0)
    if not np.any(live):
        return out
    beta = np.minimum(np.log(v2[live] / v1[live]) / math.log(r2 / r1), 1.0)
    if np.any(beta <= ell + HEAD_MARGIN):
        raise NumericError(
            "difference norms decay no faster than |h|^ell near 0; the seminorm is not resolved"
        )
    out[live] = v1[live] ** q * r1 ** (-q * ell) / (q * (beta - ell))
    return out


def _support_reach(f: FunctionHandle, dirs: np.ndarray, cap: float) -> float:
    """Radius past which shifts along every direction separate the supports axis by axis."""
    widths = np.array([hi - lo for lo, hi in f.support_box])
    if not np.all(np.isfinite(widths)):
        return cap
    reach = 0.0
    for xi in dirs:
        mask = np.abs(xi) > 1e-9
        reach = max(reach, float(np.max(widths[mask] / np.abs(xi[mask]))))
    return min(cap, reach)


def besov_direct_parts(f: FunctionHandle, cfg: ExponentConfig,
                       spec: QuadratureSpec = DEFAULT_SPEC) -> SeminormParts:
    """Seminorm ``(int ||D_h f||^q |h|^(-ell q - d) dh)^(1/q)`` with diagnostics.

    The body covers ``2^-J <= |h| <= r_top`` in polar coordinates.  Below
    ``2^-J`` a power law fitted to the two smallest shifts is integrated
    exactly; above ``r_top`` the difference norm is frozen at its last
    value, which is exact once the shifted supports have separated.
    """
    ell = _trace_ell(cfg)
    q, d = cfg.q, f.d
    table = difference_table(f, cfg, spec)
    dirs, wd = _directions(d, spec)
    J = spec.radial_octaves
    r_min = 2.0**-J
    r_top = max(_support_reach(f, dirs, 2.0**J), 4.0 * r_min)

    def integrand(r, xi):
        v = table.norms(r[..., None] * xi)
        return (v / r**ell) ** q * r ** (-float(d))

    body = integrate_polar(integrand, d, (r_min, r_top), spec)
    v1 = table.norms(r_min * dirs)
    v2 = table.norms(2.0 * r_min * dirs)
    head = float(np.dot(wd, _head_power_law(v1, v2, r_min, 2.0 * r_min, q, ell)))
    vt = table.norms(r_top * dirs)
    tail = float(np.dot(wd, vt**q)) * r_top ** (-q * ell) / (q * ell)

    size = mixed_lebesgue_norm(f, cfg, spec)
    tail_bound = sphere_measure(d) * (2.0 * size) ** q * r_top ** (-q * ell) / (q * ell)
    head_bound = float("nan")
    if f.has_gradient:
        L = gradient_norm(f, cfg, spec)
        head_bound = sphere_measure(d) * L**q * r_min ** (q * (1 - ell)) / (q * (1 - ell))
    value = (body + head + tail) ** (1.0 / q)
    return SeminormParts(value, body, head, tail, head_bound, tail_bound)


def besov_seminorm_direct(f: FunctionHandle, cfg: ExponentConfig,
                          spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    return besov_direct_parts(f, cfg, spec).value


def _lattice_modulus(f, cfg, spec, ts: np.ndarray) -> np.ndarray:
    return np.array([modulus(f, t, cfg, spec) for t in ts])


def besov_integral_parts(f: FunctionHandle, cfg: ExponentConfig, a: float = 1.0,
                         spec: QuadratureSpec = DEFAULT_SPEC) -> SeminormParts:
    """``(int_0^a (omega(t) / t^ell)^q dt / t)^(1/q)``; ``a = inf`` means ``2^J``.

    Trapezoid in ``log t`` on ``t_j = a 2^(-j/4)`` so that every modulus
    radius falls on one shared lattice.
    """
    ell = _trace_ell(cfg)
    q = cfg.q
    J = spec.radial_octaves
    top = 2.0**J if math.isinf(a) else float(a)
    r_min = 2.0**-J
    n = max(2, int(math.ceil(INTEGRAL_STEPS_PER_OCTAVE * math.log2(top / r_min))))
    ts = top * 2.0 ** (-np.arange(n + 1) / INTEGRAL_STEPS_PER_OCTAVE)
    om = _lattice_modulus(f, cfg, spec, ts)
    g = (om / ts**ell) ** q
    step = math.log(2.0) / INTEGRAL_STEPS_PER_OCTAVE
    body = step * (g.sum() - 0.5 * (g[0] + g[-1]))
    head = float(_head_power_law(om[-1], om[-1 - INTEGRAL_STEPS_PER_OCTAVE], ts[-1],
                                 ts[-1 - INTEGRAL_STEPS_PER_OCTAVE], q, ell))
    tail = 0.0
    if math.isinf(a):
        tail = om[0] ** q * top ** (-q * ell) / (q * ell)
    value = float((body + head + tail) ** (1.0 / q))
    return SeminormParts(value, float(body), head, float(tail))


def besov_dyadic_parts(f: FunctionHandle, cfg: ExponentConfig,
                       spec: QuadratureSpec = DEFAULT_SPEC, kmax: int = DYADIC_KMAX) -> SeminormParts:
    """``(sum_{k=1}^{kmax} (2^(k ell) omega(2^-k))^q)^(1/q)`` with a Lipschitz tail bound."""
    ell = _trace_ell(cfg)
    q = cfg.q
    ks = np.arange(1, kmax + 1)
    om = _lattice_modulus(f, cfg, spec, 2.0 ** -ks.astype(float))
    terms = (2.0 ** (ks * ell) * om) ** q
    body = float(terms.sum())
    # omega(2^-k) <= L 2^-k with L read off the finest level
    L = om[-1] * 2.0**kmax
    r = 2.0 ** (-(1.0 - ell) * q)
    tail_bound = L**q * 2.0 ** (-(kmax + 1) * (1.0 - ell) * q) / (1.0 - r)
    return SeminormParts(body ** (1.0 / q), body, 0.0, 0.0, tail_bound=float(tail_bound))


def besov_seminorm(f: FunctionHandle, cfg: ExponentConfig, variant: BesovVariant,
                   spec: QuadratureSpec = DEFAULT_SPEC) -> SeminormParts:
    if variant.tag == "direct":
        return besov_direct_parts(f, cfg, spec)
    if variant.tag == "integral":
        return besov_integral_parts(f, cfg, variant.a, spec)
    return besov_dyadic_parts(f, cfg, spec)


def besov_norm(f: FunctionHandle, cfg: ExponentConfig, variant: BesovVariant = BesovVariant(),
               spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``||f||_{L_p}`` plus the chosen seminorm."""
    return mixed_lebesgue_norm(f, cfg, spec) + besov_seminorm(f, cfg, variant, spec).value
