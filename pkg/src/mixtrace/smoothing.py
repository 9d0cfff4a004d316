"""Mollifiers, the dyadic vertical partition of unity and the extension map.

The extension of a boundary function ``g`` is

    E(g)(x, y) = sum_{k=1}^{K} psi_k(y) A_k g(x) + chi(2^(K+1) y) g(x)

where ``A_k`` is convolution with the mollifier at scale ``2^-k``.  The
last term replaces ``A_k g`` by its limit ``g`` for every ``k > K``, so
the truncated map still reproduces ``g`` as ``y -> 0``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DomainError
from .exponents import ExponentConfig, smoothness_order
from .families import BOUNDARY, HALFSPACE, FunctionHandle
from .norms import horizontal_rules, modulus, nested_norm
from .quadrature import DEFAULT_SPEC, QuadratureSpec, composite_rule, sphere_measure, tensor_grid
from .reports import CLOSED_FORM_TOL, QUADRATURE_TOL, ComparisonReport, compare

CHI_LOW = 7.0 / 8.0
CHI_HIGH = 9.0 / 8.0
CHI_BAND = 0.25
DEFAULT_KMAX = 12

# per-axis rule for the mollifier on [-1, 1]; panels shrink toward the flat edges
KERNEL_EDGES = (-1.0, -0.85, -0.7, -0.4, 0.0, 0.4, 0.7, 0.85, 1.0)
KERNEL_ORDER = 6
POINT_BUDGET = 1 << 21  # kernel evaluations per vectorized batch


def _bump(s: np.ndarray) -> np.ndarray:
    """``exp(-1/s)`` for ``s > 0``, zero otherwise."""
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def _bump_derivative(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos]) / s[pos] ** 2
    return out


def _radial_profile(r2: np.ndarray) -> np.ndarray:
    out = np.zeros(np.shape(r2))
    inside = r2 < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out


@lru_cache(maxsize=None)
def _normalization(d: int) -> float:
    r, w = composite_rule(np.linspace(0.0, 1.0, 257), 16)
    radial = float(np.dot(w, _radial_profile(r * r) * r ** (d - 1)))
    return 1.0 / (sphere_measure(d) * radial)


# ---------------------------------------------------------------------------
# mollifier


@dataclass(frozen=True)
class Mollifier:
    """``phi(z) = c_d exp(-1 / (1 - |z|^2))`` on the unit ball."""

    d: int
    normalization: float

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return self.normalization * _radial_profile(np.sum(z * z, axis=-1))

    def gradient(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        r2 = np.sum(z * z, axis=-1)
        out = np.zeros(z.shape)
        inside = r2 < 1.0
        ri = r2[inside]
        coef = self.normalization * np.exp(-1.0 / (1.0 - ri)) * (-2.0 / (1.0 - ri) ** 2)
        out[inside] = coef[:, None] * z[inside]
        return out

    def scaled(self, delta: float):
        """``phi_delta(x) = delta^-d phi(x / delta)``."""
        return lambda x: self(np.asarray(x) / delta) / delta**self.d

    def derivative_l1(self, spec_panels: int = 64) -> float:
        """``int |D_1 phi|``: the constant of the derivative convolution bound."""
        axes = [composite_rule(np.linspace(-1.0, 1.0, spec_panels + 1), 8)] * self.d
        pts = tensor_grid([a[0] for a in axes])
        w = axes[0][1]
        for a in axes[1:]:
            w = np.multiply.outer(w, a[1])
        return float(np.sum(w * np.abs(self.gradient(pts)[..., 0])))

    # kernel rule ---------------------------------------------------------

    def _base_axis(self):
        return composite_rule(KERNEL_EDGES, KERNEL_ORDER)

    def _split_axis_rules(self, x: np.ndarray, kinks: Sequence[float], delta: float):
        """Per-point rules on ``[-1, 1]`` split where ``g(x - delta z)`` has kinks."""
        n = x.shape[0]
        cuts = np.clip((x[:, None] - np.asarray(kinks)[None, :]) / delta, -1.0, 1.0)
        edges = np.sort(np.concatenate([np.tile(KERNEL_EDGES, (n, 1)), cuts], axis=1), axis=1)
        t, wt = np.polynomial.legendre.leggauss(KERNEL_ORDER)
        a, b = edges[:, :-1], edges[:, 1:]
        half = 0.5 * (b - a)
        nodes = (0.5 * (a + b))[..., None] + half[..., None] * t
        weights = half[..., None] * wt
        return nodes.reshape(n, -1), weights.reshape(n, -1)

    # convolution ---------------------------------------------------------

    def convolve_points(self, g: FunctionHandle, delta: float, pts: np.ndarray,
                        derivative: bool = False) -> np.ndarray:
        """``A g`` (or ``delta * D A g`` stacked on the last axis) at points ``(..., d)``."""
        pts = np.asarray(pts, dtype=float)
        shape = pts.shape[:-1]
        flat = pts.reshape(-1, self.d)
        if self.d == 1 and len(g.breakpoints[0]) > 0:
            out = self._convolve_split_1d(g, delta, flat[:, 0], derivative)
        else:
            out = self._convolve_tensor(g, delta, flat, derivative)
        return out.reshape(shape + ((self.d,) if derivative else ()))

    def _convolve_split_1d(self, g, delta, x, derivative):
        z, w = self._split_axis_rules(x, g.breakpoints[0], delta)
        phi = w * self(z[..., None])
        mass = phi.sum(axis=1)
        vals = g.value((x[:, None] - delta * z)[..., None])
        if not derivative:
            return (phi * vals).sum(axis=1) / mass
        dphi = w * self.gradient(z[..., None])[..., 0]
        gx = g.value(x[:, None])[:, None]
        return ((dphi * (vals - gx)).sum(axis=1) / mass)[:, None]

    def _kernel_tensor(self):
        zs, ws = self._base_axis()
        z = tensor_grid([zs] * self.d).reshape(-1, self.d)
        w = ws
        for _ in range(self.d - 1):
            w = np.multiply.outer(w, ws)
        w = w.ravel()
        return z, w

    def _convolve_tensor(self, g, delta, x, derivative):
        z, w = self._kernel_tensor()
        phi = w * self(z)
        mass = phi.sum()
        dphi = w[:, None] * self.gradient(z) if derivative else None
        outs = []
        chunk = max(1, POINT_BUDGET // z.shape[0])
        for s in range(0, x.shape[0], chunk):
            xs = x[s : s + chunk]
            vals = g.value(xs[:, None, :] - delta * z[None, :, :])
            if derivative:
                gx = g.value(xs)
                outs.append(((vals - gx[:, None]) @ dphi) / mass)
            else:
                outs.append((vals @ phi) / mass)
        return np.concatenate(outs, axis=0)

    def convolve_grid(self, g: FunctionHandle, delta: float, axes: Sequence[np.ndarray],
                      derivative: bool = False) -> np.ndarray:
        """``A g`` on a tensor grid; separable ``g`` uses factor matrices."""
        if g.factors is None or self.d == 1:
            return self.convolve_points(g, delta, tensor_grid(axes), derivative)
        zs, ws = self._base_axis()
        z = tensor_grid([zs] * self.d)
        w = ws
        for _ in range(self.d - 1):
            w = np.multiply.outer(w, ws)
        phi = w * self(z)
        mass = phi.sum()
        mats = [f.value((ax[:, None] - delta * zs[None, :])[..., None])
                for f, ax in zip(g.factors, axes)]
        letters = "abc"[: self.d]
        spec = ",".join(f"{o}{l}" for o, l in zip("ijk", letters))
        spec = f"{letters},{spec}->{'ijk'[: self.d]}"
        if not derivative:
            return np.einsum(spec, phi, *mats, optimize=True) / mass
        grad = w[..., None] * self.gradient(z)
        base = g.values_on(axes)
        comps = []
        for i in range(self.d):
            kern = grad[..., i]
            comps.append(
                (np.einsum(spec, kern, *mats, optimize=True) - base * kern.sum()) / mass
            )
        return np.stack(comps, axis=-1)


@lru_cache(maxsize=None)
def build_mollifier(d: int) -> Mollifier:
    if d not in (1, 2, 3):
        raise DomainError(f"mollifier dimension must be 1, 2 or 3, got {d}")
    return Mollifier(d, _normalization(d))


def mollify(g: FunctionHandle, k: int, mollifier: Mollifier | None = None,
            spec: QuadratureSpec = DEFAULT_SPEC) -> FunctionHandle:
    """``A_k g = g * phi_k`` with ``phi_k(x) = 2^(kd) phi(2^k x)``, as a boundary handle."""
    if k < 0:
        raise DomainError("mollification level k must be >= 0")
    if not g.is_boundary:
        raise DomainError("mollify expects a boundary function")
    mol = mollifier or build_mollifier(g.d)
    delta = 2.0**-k
    value = lambda x: mol.convolve_points(g, delta, x)  # noqa: E731
    gradient = lambda x: mol.convolve_points(g, delta, x, derivative=True) / delta  # noqa: E731
    box = tuple((lo - delta, hi + delta) for lo, hi in g.support_box)
    return FunctionHandle(
        "mollified", {"source": g.spec(), "k": k}, BOUNDARY, g.d, value, gradient,
        support_radius=g.support_radius + delta, support_box=box,
        breakpoints=tuple(tuple(c + delta * o for c in bp for o in (-1, -0.5, 0, 0.5, 1))
                          for bp in g.breakpoints),
    )


# ---------------------------------------------------------------------------
# partition of unity


@dataclass(frozen=True)
class PartitionOfUnity:
    """``psi_k(y) = chi(2^k y) - chi(2^(k+1) y)`` with a smooth step ``chi``."""

    low: float = CHI_LOW
    high: float = CHI_HIGH
    band: float = CHI_BAND

    def chi(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        u = _bump((self.high - t) / self.band)
        v = _bump((t - self.low) / self.band)
        return np.where(t <= self.low, 1.0, np.where(t >= self.high, 0.0, u / np.where(u + v > 0, u + v, 1.0)))

    def chi_derivative(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        su, sv = (self.high - t) / self.band, (t - self.low) / self.band
        u, v = _bump(su), _bump(sv)
        du, dv = _bump_derivative(su), _bump_derivative(sv)
        s = u + v
        inside = (t > self.low) & (t < self.high)
        out = np.zeros(t.shape)
        out[inside] = -(du * v + u * dv)[inside] / (self.band * s[inside] ** 2)
        return out

    def psi(self, k: int, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return self.chi(2.0**k * y) - self.chi(2.0 ** (k + 1) * y)

    def psi_derivative(self, k: int, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return 2.0**k * self.chi_derivative(2.0**k * y) - 2.0 ** (k + 1) * self.chi_derivative(
            2.0 ** (k + 1) * y
        )

    def support(self, k: int) -> tuple[float, float]:
        """Open interval outside which ``psi_k`` vanishes."""
        return self.low / 2.0 ** (k + 1), self.high / 2.0**k

    @property
    def derivative_bound(self) -> float:
        """``N_0 = 2 sup |chi'|``, measured on a fine grid of the transition band."""
        t = np.linspace(self.low, self.high, 20001)
        return 2.0 * float(np.max(np.abs(self.chi_derivative(t))))

    def scaled_derivative_sup(self, k: int, samples: int = 4001) -> float:
        """``max_y |psi_k'(y)| 2^-k`` over ``y = 2^-k s`` with ``s`` on a fixed grid."""
        s = np.linspace(self.low / 2.0, self.high, samples)
        return float(np.max(np.abs(self.psi_derivative(k, s * 2.0**-k)))) * 2.0**-k

    def active(self, y: float) -> list[int]:
        """All ``k`` with ``psi_k(y) != 0``."""
        lo = math.floor(math.log2(self.low / 2.0 / y)) - 1
        hi = math.ceil(math.log2(self.high / y)) + 1
        return [k for k in range(lo, hi + 1) if self.psi(k, y) != 0.0]

    def transition_points(self, m_range: Sequence[int]) -> list[float]:
        """Ends of the bands where ``chi(2^m y)`` is strictly between 0 and 1."""
        pts = []
        for m in m_range:
            pts += [self.low / 2.0**m, self.high / 2.0**m]
        return sorted(set(pts))


PARTITION = PartitionOfUnity()


# ---------------------------------------------------------------------------
# convolution lemma check


def _report_params(f: FunctionHandle, cfg: ExponentConfig, spec: QuadratureSpec, **extra):
    return {"cfg": cfg.to_dict(), "family": f.spec(), "spec": spec.to_dict(), **extra}


def smoothing_error_norms(f: FunctionHandle, delta: float, cfg: ExponentConfig,
                          spec: QuadratureSpec = DEFAULT_SPEC) -> tuple[float, float]:
    """``||phi_delta * f - f||`` and ``max_i ||(D_i phi)_delta * f||``.

    ``(D_i phi)_delta * f = delta D_i (phi_delta * f)``.
    """
    mol = build_mollifier(f.d)
    grown = _grown(f, delta)
    rules = horizontal_rules(grown, _support_resolved(spec, f))
    axes = [r[0] for r in rules]
    ws = [r[1] for r in rules]
    smooth = mol.convolve_grid(f, delta, axes)
    err = float(nested_norm(smooth - f.values_on(axes), ws, cfg.p_vec))
    deriv = mol.convolve_grid(f, delta, axes, derivative=True)
    dnorm = max(float(nested_norm(deriv[..., i], ws, cfg.p_vec)) for i in range(f.d))
    return err, dnorm


def _support_resolved(spec: QuadratureSpec, f: FunctionHandle) -> QuadratureSpec:
    """Give a bounded support ``panels_per_axis`` panels of its own.

    ``phi_delta * f - f`` follows ``f''``, which the box lattice under-resolves
    when the support is a small part of the box.
    """
    widths = [hi - lo for lo, hi in f.support_box if math.isfinite(hi - lo)]
    if not widths:
        return spec
    boost = 2 ** max(0, math.ceil(math.log2(2.0 * spec.box_radius / min(widths))))
    return replace(spec, panels_per_axis=spec.panels_per_axis * boost)


def _grown(f: FunctionHandle, delta: float) -> FunctionHandle:
    """Same function with support and kink metadata widened by ``delta``."""
    box = tuple((lo - delta, hi + delta) for lo, hi in f.support_box)
    kinks = tuple(tuple(sorted({c + delta * o for c in bp for o in (-1, -0.5, 0, 0.5, 1)}))
                  for bp in f.breakpoints)
    return replace(f, support_box=box, breakpoints=kinks)


def convolution_bounds_check(
    f: FunctionHandle,
    delta: float,
    cfg: ExponentConfig,
    spec: QuadratureSpec = DEFAULT_SPEC,
    derivative_ceiling: float | None = None,
    mesh_level: int = 0,
) -> tuple[ComparisonReport, ComparisonReport]:
    """Smoothing error against ``omega(delta)`` (constant 1) and the derivative bound.

    The derivative report uses ``derivative_ceiling`` as its constant when
    given (empirical policy) and always records the explicit constant
    ``int |D_1 phi|`` from the Minkowski argument.
    """
    if not delta > 0:
        raise DomainError("delta must be positive")
    err, dnorm = smoothing_error_norms(f, delta, cfg, spec)
    om = modulus(f, delta, cfg, spec)
    om_dense = modulus(f, delta, cfg, spec, density=4)
    drift = 0.0 if om == 0 else abs(om_dense - om) / om
    params = _report_params(f, cfg, spec, delta=delta)
    extras = {"omega_dense": om_dense, "omega_drift": drift}
    first = compare("convolution/smoothing", err, om, 1.0, tol=CLOSED_FORM_TOL,
                    params=params, mesh_level=mesh_level, extras=extras)
    n_proof = build_mollifier(f.d).derivative_l1()
    ceiling = n_proof if derivative_ceiling is None else derivative_ceiling
    second = compare(
        "convolution/derivative", dnorm, om, ceiling, tol=QUADRATURE_TOL,
        params=params, mesh_level=mesh_level,
        extras={**extras, "explicit_constant": n_proof,
                "explicit_ratio": dnorm / (n_proof * om) if om else 0.0},
    )
    return first, second


# ---------------------------------------------------------------------------
# extension


def _grid_key(axes: Sequence[np.ndarray]) -> str:
    h = hashlib.sha1()
    for ax in axes:
        h.update(np.ascontiguousarray(ax).tobytes())
        h.update(b"|")
    return h.hexdigest()


@dataclass(eq=False)
class ExtensionHandle:
    """``E(g)`` on the half-space; quacks like a half-space :class:`FunctionHandle`."""

    source: FunctionHandle
    cfg: ExponentConfig
    k_max: int = DEFAULT_KMAX
    partition: PartitionOfUnity = PARTITION
    _cache: dict = field(default_factory=dict, repr=False)

    kind = "extension"
    domain_tag = HALFSPACE
    is_boundary = False
    vertical_order = 0.0
    lipschitz_in_y = True

    @property
    def d(self) -> int:
        return self.source.d

    @property
    def has_gradient(self) -> bool:
        return self.source.has_gradient

    @property
    def params(self) -> dict:
        return {"source": self.source.spec(), "k_max": self.k_max}

    def spec(self) -> dict:
        return {"kind": self.kind, "params": self.params}

    @property
    def mollifier(self) -> Mollifier:
        return build_mollifier(self.d)

    @property
    def y_breakpoints(self) -> tuple[float, ...]:
        return tuple(self.partition.transition_points(range(1, self.k_max + 2)))

    @property
    def support_box(self):
        return tuple((lo - 0.5, hi + 0.5) for lo, hi in self.source.support_box)

    def x_support(self, y=None):
        return self.support_box

    def _tail_weight(self, y):
        return self.partition.chi(2.0 ** (self.k_max + 1) * np.asarray(y, dtype=float))

    def active_levels(self, ys) -> list[int]:
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        lo, hi = float(ys.min()), float(ys.max())
        out = []
        for k in range(1, self.k_max + 1):
            a, b = self.partition.support(k)
            if hi > a and lo < b and np.any((ys > a) & (ys < b)):
                out.append(k)
        return out

    def x_breakpoints(self, y=None):
        kinks = self.source.breakpoints
        if y is None:
            return kinks
        levels = self.active_levels([y])
        out = []
        for bp in kinks:
            pts = set(bp) if float(self._tail_weight(y)) > 0 else set()
            for k in levels:
                pts |= {c + 2.0**-k * o for c in bp for o in (-1.0, -0.5, 0.0, 0.5, 1.0)}
            out.append(tuple(sorted(pts)))
        return tuple(out)

    @property
    def breakpoints(self):
        return self.source.breakpoints

    # cached mollifications on grids --------------------------------------

    def mollified_on(self, k: int, axes, derivative: bool = False) -> np.ndarray:
        key = (k, derivative, _grid_key(axes))
        if key not in self._cache:
            delta = 2.0**-k
            vals = self.mollifier.convolve_grid(self.source, delta, axes, derivative)
            if derivative:
                vals = vals / delta
            vals.setflags(write=False)
            self._cache[key] = vals
        return self._cache[key]

    def values_on(self, axes, ys) -> np.ndarray:
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        base = self.source.values_on(axes)
        out = np.multiply.outer(self._tail_weight(ys), base)
        for k in self.active_levels(ys):
            out += np.multiply.outer(self.partition.psi(k, ys), self.mollified_on(k, axes))
        return out

    def gradient_on(self, axes, ys) -> np.ndarray:
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        base = self.source.values_on(axes)
        tail = self._tail_weight(ys)
        gx = np.multiply.outer(tail, self.source.gradient_on(axes))
        # D_y E = sum_k psi_k' (A_k g - g) + 2 chi'(2y) g
        gy = np.multiply.outer(2.0 * self.partition.chi_derivative(2.0 * ys), base)
        for k in self.active_levels(ys):
            psi = self.partition.psi(k, ys)
            gx += np.multiply.outer(psi, self.mollified_on(k, axes, derivative=True))
            gy += np.multiply.outer(self.partition.psi_derivative(k, ys),
                                    self.mollified_on(k, axes) - base)
        return np.concatenate([gx, gy[..., None]], axis=-1)

    def gradient_length_on(self, axes, ys) -> np.ndarray:
        """``|D E|`` on the grid, one component at a time without the full gradient array."""
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        base = self.source.values_on(axes)
        levels = self.active_levels(ys)
        shape = (len(ys),) + base.shape
        total = np.zeros(shape)
        comp = np.empty(shape)
        term = np.empty(shape)

        def accumulate(first_w, first_v, pairs):
            np.multiply.outer(first_w, first_v, out=comp)
            for w, v in pairs:
                np.multiply.outer(w, v, out=term)
                np.add(comp, term, out=comp)
            np.multiply(comp, comp, out=comp)
            np.add(total, comp, out=total)

        psis = {k: self.partition.psi(k, ys) for k in levels}
        source_grad = self.source.gradient_on(axes)
        for i in range(self.d):
            accumulate(self._tail_weight(ys), source_grad[..., i],
                       [(psis[k], self.mollified_on(k, axes, derivative=True)[..., i]) for k in levels])
        accumulate(2.0 * self.partition.chi_derivative(2.0 * ys), base,
                   [(self.partition.psi_derivative(k, ys), self.mollified_on(k, axes) - base)
                    for k in levels])
        return np.sqrt(total, out=total)

    # pointwise evaluation ------------------------------------------------

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.broadcast_to(np.asarray(y, dtype=float), x.shape[:-1])
        out = self._tail_weight(y) * self.source.value(x)
        for k in self.active_levels(np.unique(y)):
            w = self.partition.psi(k, y)
            if np.any(w != 0):
                out = out + w * self.mollifier.convolve_points(self.source, 2.0**-k, x)
        return out

    @property
    def trace(self) -> FunctionHandle:
        """Limit ``y -> 0``: below ``7 2^-(K+5)`` only the tail term is active."""
        y0 = self.partition.low * 2.0 ** -(self.k_max + 2)
        g = self.source
        return FunctionHandle(
            "extension-trace", {"source": g.spec(), "k_max": self.k_max}, BOUNDARY, g.d,
            lambda x: self(x, y0), None, support_radius=g.support_radius,
            breakpoints=g.breakpoints, support_box=g.support_box, factors=None,
        )


def extend(g: FunctionHandle, cfg: ExponentConfig, k_max: int = DEFAULT_KMAX,
           spec: QuadratureSpec = DEFAULT_SPEC) -> ExtensionHandle:
    """The dyadic extension ``E(g)`` of a boundary function."""
    if not g.is_boundary:
        raise DomainError("extend expects a boundary function")
    if k_max < 3:
        raise DomainError(f"k_max must be >= 3, got {k_max}")
    if g.d != cfg.d:
        raise DomainError(f"g lives in d={g.d} but cfg has d={cfg.d}")
    smoothness_order(cfg.q, cfg.alpha)
    return ExtensionHandle(g, cfg, k_max)


def extension_gap(E: ExtensionHandle, y: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``||E(g)(., y) - g||_{L_p}``."""
    rules = horizontal_rules(E, spec, y=y)
    axes = [r[0] for r in rules]
    diff = E.values_on(axes, [y])[0] - E.source.values_on(axes)
    return float(nested_norm(diff, [r[1] for r in rules], E.cfg.p_vec))


def extension_limit_profile(g: FunctionHandle, cfg: ExponentConfig, s_range: Sequence[int],
                            spec: QuadratureSpec = DEFAULT_SPEC,
                            k_max: int = DEFAULT_KMAX) -> list[float]:
    """``L_s = 2^(s ell) ||E(g)(., 2^-s) - g||`` for ``s`` in ``s_range``."""
    E = extend(g, cfg, k_max, spec)
    bad = [s for s in s_range if not 3 <= s <= k_max - 2]
    if bad:
        raise DomainError(f"s values {bad} outside [3, k_max - 2] = [3, {k_max - 2}]")
    ell = cfg.ell
    return [2.0 ** (s * ell) * extension_gap(E, 2.0**-s, spec) for s in s_range]


def trace_restrict(u) -> FunctionHandle:
    """Boundary restriction ``u(., 0)`` from the family's closed form."""
    if getattr(u, "is_boundary", True):
        raise DomainError("trace_restrict expects a half-space function")
    tr = u.trace
    if tr is None:
        raise DomainError(f"{u.kind!r} carries no boundary continuity metadata")
    return tr
