"""Complete orthonormal systems on ``L2([t0, t1])``.

Two systems are supported:

``legendre``
    ``phi_j(s) = sqrt((2j+1)/h) P_j(y)`` with ``y = 2(s - t0)/h - 1`` and
    ``h = t1 - t0``. Evaluated by the three-term recurrence.
``trigonometric``
    ``phi_0 = 1/sqrt(h)``; with ``u = (s - t0)/h`` and ``r >= 1``,
    ``phi_{2r-1} = sqrt(2/h) sin(2 pi r u)`` and
    ``phi_{2r} = sqrt(2/h) cos(2 pi r u)``.

The trigonometric ordering (odd index = sine, even index = cosine, paired by
frequency) is a convention of this package and is recorded with every
coefficient table.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .model import Interval

TRIG_CONVENTION = "phi_0=1/sqrt(h); phi_{2r-1}=sqrt(2/h)sin(2pi r u); phi_{2r}=sqrt(2/h)cos(2pi r u)"


class BasisKind(str, enum.Enum):
    LEGENDRE = "legendre"
    TRIGONOMETRIC = "trigonometric"


def legendre_table(jmax: int, y: np.ndarray) -> np.ndarray:
    """Standard Legendre polynomials ``P_0..P_jmax`` at ``y``.

    Returns an array of shape ``(jmax + 1,) + y.shape``.
    """
    y = np.asarray(y, dtype=float)
    out = np.empty((jmax + 1,) + y.shape)
    out[0] = 1.0
    if jmax >= 1:
        out[1] = y
    for k in range(1, jmax):
        out[k + 1] = ((2 * k + 1) * y * out[k] - k * out[k - 1]) / (k + 1)
    return out


@dataclass(frozen=True)
class BasisSystem:
    kind: BasisKind
    iv: Interval

    def __post_init__(self):
        object.__setattr__(self, "kind", BasisKind(self.kind))

    @property
    def convention(self) -> str:
        if self.kind is BasisKind.LEGENDRE:
            return "phi_j=sqrt((2j+1)/h)P_j(2(s-t0)/h-1)"
        return TRIG_CONVENTION

    def max_frequency(self, jmax: int) -> int:
        """Largest angular frequency index r present among ``phi_0..phi_jmax``."""
        if self.kind is BasisKind.LEGENDRE:
            return 0
        return (jmax + 1) // 2

    def table(self, jmax: int, s) -> np.ndarray:
        """``phi_0..phi_jmax`` at ``s``; shape ``(jmax + 1,) + s.shape``.

        No domain check; callers are responsible (quadrature nodes are inside
        by construction).
        """
        s = np.asarray(s, dtype=float)
        h = self.iv.length
        if self.kind is BasisKind.LEGENDRE:
            y = 2.0 * (s - self.iv.t0) / h - 1.0
            tab = legendre_table(jmax, y)
            scale = np.sqrt((2.0 * np.arange(jmax + 1) + 1.0) / h)
            return tab * scale.reshape((-1,) + (1,) * s.ndim)
        u = (s - self.iv.t0) / h
        out = np.empty((jmax + 1,) + s.shape)
        out[0] = 1.0 / math.sqrt(h)
        c = math.sqrt(2.0 / h)
        for j in range(1, jmax + 1):
            r = (j + 1) // 2
            arg = 2.0 * math.pi * r * u
            out[j] = c * (np.sin(arg) if j % 2 else np.cos(arg))
        return out

    def antiderivative_table(self, jmax: int, s) -> np.ndarray:
        """``int_{t0}^{s} phi_j`` for ``j = 0..jmax`` in closed form."""
        s = np.asarray(s, dtype=float)
        h = self.iv.length
        out = np.empty((jmax + 1,) + s.shape)
        if self.kind is BasisKind.LEGENDRE:
            y = 2.0 * (s - self.iv.t0) / h - 1.0
            tab = legendre_table(jmax + 1, y)
            # int_{-1}^{y} P_j = (P_{j+1} - P_{j-1}) / (2j + 1), P_{-1} := 1
            out[0] = y + 1.0
            for j in range(1, jmax + 1):
                out[j] = (tab[j + 1] - tab[j - 1]) / (2 * j + 1)
            scale = 0.5 * h * np.sqrt((2.0 * np.arange(jmax + 1) + 1.0) / h)
            return out * scale.reshape((-1,) + (1,) * s.ndim)
        u = (s - self.iv.t0) / h
        out[0] = (s - self.iv.t0) / math.sqrt(h)
        c = math.sqrt(2.0 / h)
        for j in range(1, jmax + 1):
            r = (j + 1) // 2
            w = 2.0 * math.pi * r
            if j % 2:
                out[j] = c * h * (1.0 - np.cos(w * u)) / w
            else:
                out[j] = c * h * np.sin(w * u) / w
        return out


def phi(b: BasisSystem, j: int, s):
    """Value of ``phi_j`` at ``s``."""
    if j < 0:
        raise ValueError(f"basis index must be >= 0, got {j}")
    b.iv.check(s)
    val = b.table(j, s)[j]
    return float(val) if np.ndim(s) == 0 else val


def phi_integral(b: BasisSystem, j: int, a: float, c: float) -> float:
    """``int_a^c phi_j(s) ds`` in closed form."""
    if j < 0:
        raise ValueError(f"basis index must be >= 0, got {j}")
    b.iv.check(a, "a")
    b.iv.check(c, "c")
    if a > c:
        raise ValueError(f"need a <= c, got a={a}, c={c}")
    a = min(max(a, b.iv.t0), b.iv.t1)
    c = min(max(c, b.iv.t0), b.iv.t1)
    if j == 0:
        return (c - a) / math.sqrt(b.iv.length)
    if a == b.iv.t0 and c == b.iv.t1:
        return 0.0
    anti = b.antiderivative_table(j, np.array([a, c]))[j]
    return float(anti[1] - anti[0])


def full_integrals(b: BasisSystem, jmax: int) -> np.ndarray:
    """``int_{t0}^{t1} phi_j`` for ``j = 0..jmax``; exact zeros for ``j >= 1``.

    Both systems integrate to zero over the full interval for every ``j >= 1``
    (orthogonality to ``phi_0``), so the structural zeros are written
    directly rather than inheriting rounding from the antiderivative.
    """
    out = np.zeros(jmax + 1)
    out[0] = b.iv.length / math.sqrt(b.iv.length)
    return out
