"""Exponent configuration and the derived smoothness order of traces."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

MAX_DIM = 3


def smoothness_order(q: float, alpha: float) -> float:
    """Return ``1 - (1 + alpha) / q``, the Besov order of boundary traces.

    Only the vertical integrability ``q`` and the weight power ``alpha``
    enter; the horizontal exponents play no role.
    """
    q = float(q)
    alpha = float(alpha)
    if not (math.isfinite(q) and q >= 1.0):
        raise DomainError(f"q must be a finite real >= 1, got {q}")
    if not (-1.0 < alpha < q - 1.0):
        raise DomainError(
            f"alpha must lie in (-1, q-1) = (-1, {q - 1.0:g}), got {alpha}"
        )
    return 1.0 - (1.0 + alpha) / q


@dataclass(frozen=True)
class ExponentConfig:
    """The tuple ``(d, p_vec, q, alpha)`` governing every norm.

    ``alpha`` may lie anywhere in ``(-q, inf)`` at construction; operations
    that need the trace window ``(-1, q-1)`` validate it themselves.
    """

    d: int
    p_vec: tuple[float, ...]
    q: float
    alpha: float = 0.0

    def __post_init__(self) -> None:
        if isinstance(self.p_vec, (int, float)):
            object.__setattr__(self, "p_vec", (float(self.p_vec),) * int(self.d))
        object.__setattr__(self, "p_vec", tuple(float(p) for p in self.p_vec))
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "alpha", float(self.alpha))
        if not isinstance(self.d, int) or not 1 <= self.d <= MAX_DIM:
            raise DomainError(f"d must be an integer in [1, {MAX_DIM}], got {self.d!r}")
        if len(self.p_vec) != self.d:
            raise DomainError(
                f"p_vec has {len(self.p_vec)} entries but d = {self.d}"
            )
        for p in self.p_vec:
            if not (math.isfinite(p) and p >= 1.0):
                raise DomainError(f"every p_i must be a finite real >= 1, got {p}")
        if not (math.isfinite(self.q) and self.q >= 1.0):
            raise DomainError(f"q must be a finite real >= 1, got {self.q}")
        if not math.isfinite(self.alpha) or self.alpha <= -self.q:
            raise DomainError(f"alpha must be finite and > -q, got {self.alpha}")

    @property
    def ell(self) -> float:
        return smoothness_order(self.q, self.alpha)

    @property
    def in_trace_window(self) -> bool:
        return -1.0 < self.alpha < self.q - 1.0

    @property
    def vanishing_trace(self) -> bool:
        """True when ``alpha`` lies in ``(-q, -1]``, where traces vanish."""
        return -self.q < self.alpha <= -1.0

    def weight(self, y):
        return y**self.alpha

    def to_dict(self) -> dict:
        return {"d": self.d, "p_vec": list(self.p_vec), "q": self.q, "alpha": self.alpha}

    @classmethod
    def from_dict(cls, data: dict) -> "ExponentConfig":
        p = data["p_vec"]
        d = int(data.get("d", 1 if isinstance(p, (int, float)) else len(p)))
        return cls(d=d, p_vec=p, q=data["q"], alpha=data.get("alpha", 0.0))

    def key(self) -> str:
        p = ",".join(f"{x:g}" for x in self.p_vec)
        return f"d={self.d};p=({p});q={self.q:g};alpha={self.alpha:g}"
