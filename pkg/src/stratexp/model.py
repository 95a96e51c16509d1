"""Problem definition: time interval, weight functions, noise indices and the
kernels ``K`` and ``K*`` of a double iterated stochastic integral.

Weights are given either as polynomials in ``u = s - t0`` (``Constant`` and
``Polynomial``) or as an arbitrary vectorised callable (``CallableWeight``).
Only the polynomial forms qualify for the exact Fourier-Legendre coefficient
path; callables always go through composite quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple, Union

import numpy as np

DOMAIN_TOL = 1e-12

ArrayLike = Union[float, np.ndarray]


class DomainError(ValueError):
    """Raised when an evaluation point lies outside the interval or square."""


@dataclass(frozen=True)
class Interval:
    """Closed time interval ``[t0, t1]`` with ``t0 < t1``."""

    t0: float
    t1: float

    def __post_init__(self):
        t0, t1 = float(self.t0), float(self.t1)
        if not (math.isfinite(t0) and math.isfinite(t1)):
            raise ValueError(f"interval endpoints must be finite, got [{t0}, {t1}]")
        if not t0 < t1:
            raise ValueError(f"interval needs t0 < t1, got [{t0}, {t1}]")
        object.__setattr__(self, "t0", t0)
        object.__setattr__(self, "t1", t1)

    @property
    def length(self) -> float:
        return self.t1 - self.t0

    def check(self, s: ArrayLike, what: str = "s") -> None:
        """Raise :class:`DomainError` unless every ``s`` lies in the interval."""
        s = np.asarray(s, dtype=float)
        if s.size == 0:
            return
        if not np.all(np.isfinite(s)):
            raise DomainError(f"{what} must be finite")
        lo, hi = float(s.min()), float(s.max())
        if lo < self.t0 - DOMAIN_TOL or hi > self.t1 + DOMAIN_TOL:
            raise DomainError(
                f"{what} outside [{self.t0}, {self.t1}] (range {lo}..{hi})"
            )


class WeightFunction:
    """Base class for the nonrandom weights psi_1, psi_2.

    Subclasses implement :meth:`evaluate` on numpy arrays. ``poly_coeffs``
    returns the coefficients in powers of ``s - t0`` or ``None`` when the weight
    is not a polynomial.
    """

    def evaluate(self, s: np.ndarray, t0: float) -> np.ndarray:
        raise NotImplementedError

    @property
    def poly_coeffs(self) -> Optional[Tuple[float, ...]]:
        return None

    @property
    def is_polynomial(self) -> bool:
        return self.poly_coeffs is not None

    def descriptor(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(WeightFunction):
    c: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "c", float(self.c))
        if not math.isfinite(self.c):
            raise ValueError("constant weight must be finite")

    def evaluate(self, s, t0):
        return np.full(np.shape(s), self.c, dtype=float)

    @property
    def poly_coeffs(self):
        return (self.c,)

    def descriptor(self):
        return f"const:{self.c!r}"


@dataclass(frozen=True)
class Polynomial(WeightFunction):
    """``psi(s) = sum_k coeffs[k] * (s - t0)**k``."""

    coeffs: Tuple[float, ...] = (1.0,)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            raise ValueError("polynomial weight needs at least one coefficient")
        if not all(math.isfinite(c) for c in coeffs):
            raise ValueError("polynomial coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    def evaluate(self, s, t0):
        u = np.asarray(s, dtype=float) - t0
        out = np.full(u.shape, self.coeffs[-1])
        for c in reversed(self.coeffs[:-1]):
            out = out * u + c
        return out

    @property
    def poly_coeffs(self):
        return self.coeffs

    def descriptor(self):
        return "poly:" + ",".join(repr(c) for c in self.coeffs)


@dataclass(frozen=True)
class CallableWeight(WeightFunction):
    """Opaque C^1 weight given by a vectorised callable ``func(s)``.

    ``derivative_bound`` is a declared bound on ``|psi'|`` over the interval;
    it is recorded in coefficient metadata and used to pick initial panel
    counts, nothing more.
    """

    func: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    derivative_bound: float = 1.0
    name: str = "callable"

    def evaluate(self, s, t0):
        s = np.asarray(s, dtype=float)
        out = np.asarray(self.func(s), dtype=float)
        return np.broadcast_to(out, s.shape).copy()

    def descriptor(self):
        return f"callable:{self.name}"


def parse_weight(text: str) -> WeightFunction:
    """Parse ``const:<c>`` or ``poly:<c0>,<c1>,...``."""
    kind, sep, body = text.strip().partition(":")
    if not sep or not body.strip():
        raise ValueError(f"weight descriptor {text!r}: expected 'const:<c>' or 'poly:<c0>,...'")
    kind = kind.strip().lower()
    try:
        values = [float(v) for v in body.split(",")]
    except ValueError:
        raise ValueError(f"weight descriptor {text!r}: non-numeric coefficient") from None
    if kind == "const":
        if len(values) != 1:
            raise ValueError(f"weight descriptor {text!r}: const takes one value")
        return Constant(values[0])
    if kind == "poly":
        return Polynomial(tuple(values))
    raise ValueError(f"weight descriptor {text!r}: unknown kind {kind!r}")


def format_weight(w: WeightFunction) -> str:
    return w.descriptor()


@dataclass(frozen=True)
class NoisePair:
    """Component indices ``(i1, i2)`` of an ``m``-dimensional Wiener process.

    Index 0 is the time component ``w^(0)_s = s``.
    """

    i1: int
    i2: int
    m: int

    def __post_init__(self):
        for name in ("i1", "i2", "m"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise ValueError(f"{name} must be an integer")
            object.__setattr__(self, name, int(v))
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        for name in ("i1", "i2"):
            v = getattr(self, name)
            if not 0 <= v <= self.m:
                raise ValueError(f"{name}={v} outside [0, {self.m}]")

    @property
    def same_noise(self) -> bool:
        """True when ``i1 == i2 != 0`` (the Ito correction is active)."""
        return self.i1 == self.i2 and self.i1 != 0


def eval_weight(w: WeightFunction, s: ArrayLike, iv: Interval) -> ArrayLike:
    iv.check(s)
    out = w.evaluate(np.asarray(s, dtype=float), iv.t0)
    return float(out) if np.ndim(s) == 0 else out


def kernel_K(psi1, psi2, x1, x2, iv: Interval):
    """``psi1(x1) psi2(x2)`` on ``x1 < x2``, zero elsewhere."""
    iv.check(x1, "x1")
    iv.check(x2, "x2")
    x1a, x2a = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
    val = np.where(
        x1a < x2a, psi1.evaluate(x1a, iv.t0) * psi2.evaluate(x2a, iv.t0), 0.0
    )
    return float(val) if val.ndim == 0 else val


def kernel_Kstar(psi1, psi2, x1, x2, iv: Interval):
    """``K`` plus half of ``psi1 psi2`` on the exact diagonal ``x1 == x2``."""
    k = np.asarray(kernel_K(psi1, psi2, x1, x2, iv))
    x1a, x2a = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
    diag = 0.5 * psi1.evaluate(x1a, iv.t0) * psi2.evaluate(x1a, iv.t0)
    val = np.where(x1a == x2a, k + diag, k)
    return float(val) if val.ndim == 0 else val
