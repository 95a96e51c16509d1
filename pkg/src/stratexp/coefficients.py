"""Fourier coefficients of the kernel ``K*`` in a tensor orthonormal basis.

``C[j1, j2]`` stores the coefficient usually written ``C_{j2 j1}``::

    C_{j2 j1} = int_t^T psi2(t2) phi_{j2}(t2) int_t^{t2} psi1(t1) phi_{j1}(t1) dt1 dt2

Two computational routes exist:

* ``exact``: polynomial weights with the Legendre basis. Everything is carried
  out in Legendre-series arithmetic on ``[-1, 1]`` (product, antiderivative,
  projection), so the only error is floating point rounding.
* ``quadrature``: composite Gauss panels; the inner integral is a cumulative
  spectral antiderivative evaluated at the outer nodes, one pass per ``j1``.
  Panels are doubled until two successive matrices agree to ``tol``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial as _NpPoly
from numpy.polynomial import legendre as L

from . import _quad
from .basis import BasisKind, BasisSystem
from .model import Interval, WeightFunction

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CoeffMatrix:
    """Coefficient block ``values[j1, j2] = C_{j2 j1}``, ``j1 <= p1``, ``j2 <= p2``."""

    values: np.ndarray
    psi1: WeightFunction
    psi2: WeightFunction
    basis: BasisSystem
    tol: float = DEFAULT_TOL
    panels: int = 0
    method: str = "exact"

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("coefficient values must be a 2-D array")
        if not np.all(np.isfinite(v)):
            raise ValueError("coefficient matrix has non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def p1(self) -> int:
        return self.values.shape[0] - 1

    @property
    def p2(self) -> int:
        return self.values.shape[1] - 1

    @property
    def iv(self) -> Interval:
        return self.basis.iv

    def sub(self, p1: int, p2: int) -> "CoeffMatrix":
        """Leading ``(p1+1) x (p2+1)`` block, sharing metadata."""
        if not (0 <= p1 <= self.p1 and 0 <= p2 <= self.p2):
            raise IndexError(f"block ({p1}, {p2}) exceeds ({self.p1}, {self.p2})")
        return CoeffMatrix(self.values[: p1 + 1, : p2 + 1], self.psi1, self.psi2,
                           self.basis, self.tol, self.panels, self.method)

    @property
    def meta(self) -> dict:
        return {
            "interval": [self.iv.t0, self.iv.t1],
            "basis": self.basis.kind.value,
            "basis_convention": self.basis.convention,
            "psi1": self.psi1.descriptor(),
            "psi2": self.psi2.descriptor(),
            "p1": self.p1,
            "p2": self.p2,
            "tol": self.tol,
            "panels": self.panels,
            "method": self.method,
            "layout": "values[j1][j2] = C_{j2 j1}",
        }


def _exact_ok(psi1, psi2, b: BasisSystem) -> bool:
    return b.kind is BasisKind.LEGENDRE and psi1.is_polynomial and psi2.is_polynomial


def _leg_series(w: WeightFunction, h: float) -> np.ndarray:
    """Legendre series in ``y`` of ``psi(t0 + h (y + 1) / 2)``."""
    poly_y = _NpPoly(w.poly_coeffs)(_NpPoly([0.5 * h, 0.5 * h]))
    return L.poly2leg(poly_y.coef)


def _inner_series(psi1_leg, j1: int, h: float) -> np.ndarray:
    """Legendre series of ``int_{t0}^{s} psi1 phi_{j1}`` as a function of ``y``."""
    unit = np.zeros(j1 + 1)
    unit[j1] = 1.0
    f = L.legmul(psi1_leg, unit)
    return L.legint(f, lbnd=-1) * (0.5 * h * math.sqrt((2 * j1 + 1) / h))


def _exact_block(psi1, psi2, b: BasisSystem, j1s, p2: int) -> np.ndarray:
    h = b.iv.length
    a1 = _leg_series(psi1, h)
    a2 = _leg_series(psi2, h)
    out = np.zeros((len(j1s), p2 + 1))
    scale = np.sqrt(h / (2.0 * np.arange(p2 + 1) + 1.0))
    for row, j1 in enumerate(j1s):
        g = L.legmul(a2, _inner_series(a1, j1, h))
        n = min(len(g), p2 + 1)
        out[row, :n] = g[:n] * scale[:n]
    return out


def _initial_panels(psi1, psi2, b: BasisSystem, jmax: int, q: int) -> int:
    if b.kind is BasisKind.TRIGONOMETRIC:
        panels = max(2, 4 * b.max_frequency(jmax))
    else:
        panels = max(1, math.ceil(2 * (jmax + 1) / q))
    for w in (psi1, psi2):
        bound = getattr(w, "derivative_bound", None)
        if bound is not None:
            panels = max(panels, math.ceil(abs(bound) * b.iv.length))
    return panels


def _quadrature_block(psi1, psi2, b: BasisSystem, j1s, p2: int, panels: int,
                      q: int = _quad.NODES_PER_PANEL) -> np.ndarray:
    iv = b.iv
    x, w, half = _quad.panel_nodes(iv.t0, iv.t1, panels, q)
    j1s = np.asarray(j1s)
    tab1 = b.table(int(j1s.max()), x)[j1s]
    inner = _quad.cumulative(tab1 * psi1.evaluate(x, iv.t0), half, q)
    outer = b.table(p2, x) * (psi2.evaluate(x, iv.t0) * w)
    inner = inner.reshape(len(j1s), -1)
    outer = outer.reshape(p2 + 1, -1)
    # one matrix-vector product per row keeps every row independent of how
    # rows are grouped into chunks (BLAS blocking would otherwise leak in)
    return np.stack([outer @ row for row in inner])


def _chunks(n: int, threads: int):
    if threads <= 1 or n < 2 * threads:
        return [np.arange(n)]
    return np.array_split(np.arange(n), threads)


def _assemble(fn, p1: int, threads: int) -> np.ndarray:
    parts = _chunks(p1 + 1, threads)
    if len(parts) == 1:
        return fn(parts[0])
    with ThreadPoolExecutor(max_workers=threads) as ex:
        blocks = list(ex.map(fn, parts))
    return np.vstack(blocks)


def coeff_matrix(psi1: WeightFunction, psi2: WeightFunction, b: BasisSystem,
                 p1: int, p2: int, tol: float = DEFAULT_TOL, method: str = "auto",
                 threads: int = 1) -> CoeffMatrix:
    """All coefficients ``C_{j2 j1}`` with ``j1 <= p1`` and ``j2 <= p2``.

    Parameters
    ----------
    method : {"auto", "exact", "quadrature"}
        ``auto`` picks the exact route whenever both weights are polynomial
        and the basis is Legendre.
    threads : int
        Rows are split into contiguous chunks computed concurrently; assembly
        order is fixed, so the result does not depend on this value.

    Raises
    ------
    QuadratureError
        When panel doubling cannot reach ``tol``; the message names the worst
        entry.
    """
    if p1 < 0 or p2 < 0:
        raise ValueError(f"truncation orders must be >= 0, got ({p1}, {p2})")
    if method == "auto":
        method = "exact" if _exact_ok(psi1, psi2, b) else "quadrature"
    if method == "exact":
        if not _exact_ok(psi1, psi2, b):
            raise ValueError("exact coefficients need polynomial weights and the Legendre basis")
        vals = _assemble(lambda rows: _exact_block(psi1, psi2, b, rows, p2), p1, threads)
        return CoeffMatrix(vals, psi1, psi2, b, tol, 0, "exact")
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")

    q = _quad.NODES_PER_PANEL
    panels = _initial_panels(psi1, psi2, b, max(p1, p2), q)

    def build(n):
        return _assemble(lambda rows: _quadrature_block(psi1, psi2, b, rows, p2, n), p1, threads)

    prev = build(panels)
    diff = np.full(prev.shape, np.inf)
    while True:
        if panels * 2 > _quad.MAX_PANELS:
            j1, j2 = np.unravel_index(np.argmax(diff), diff.shape)
            raise _quad.QuadratureError(
                f"coefficient (j1={j1}, j2={j2}) did not reach tol={tol} "
                f"within {_quad.MAX_PANELS} panels"
            )
        panels *= 2
        cur = build(panels)
        diff = np.abs(cur - prev)
        if np.max(diff) <= tol:
            break
        prev = cur
    logger.debug("quadrature coefficients converged with %d panels", panels)
    return CoeffMatrix(cur, psi1, psi2, b, tol, panels, "quadrature")


def fourier_coeff(psi1, psi2, b: BasisSystem, j1: int, j2: int,
                  tol: float = DEFAULT_TOL, method: str = "auto") -> float:
    """Single coefficient ``C_{j2 j1}``."""
    if j1 < 0 or j2 < 0:
        raise ValueError(f"indices must be >= 0, got ({j1}, {j2})")
    if method == "auto":
        method = "exact" if _exact_ok(psi1, psi2, b) else "quadrature"
    if method == "exact":
        if not _exact_ok(psi1, psi2, b):
            raise ValueError("exact coefficients need polynomial weights and the Legendre basis")
        return float(_exact_block(psi1, psi2, b, [j1], j2)[0, j2])
    return float(coeff_matrix(psi1, psi2, b, j1, j2, tol, "quadrature").values[j1, j2])


def inner_antiderivative(psi1: WeightFunction, b: BasisSystem, j1: int, x,
                         tol: float = DEFAULT_TOL):
    """``int_{t0}^{x} psi1(s) phi_{j1}(s) ds``.

    Multiplying by ``psi2(x)`` gives the inner coefficient function of the
    repeated series in ``t2``.
    """
    if j1 < 0:
        raise ValueError(f"basis index must be >= 0, got {j1}")
    iv = b.iv
    iv.check(x, "x")
    xa = np.clip(np.asarray(x, dtype=float), iv.t0, iv.t1)
    if b.kind is BasisKind.LEGENDRE and psi1.is_polynomial:
        series = _inner_series(_leg_series(psi1, iv.length), j1, iv.length)
        y = 2.0 * (xa - iv.t0) / iv.length - 1.0
        val = L.legval(y, series)
    else:
        def f(s):
            return psi1.evaluate(s, iv.t0) * b.table(j1, s)[j1]
        panels = _initial_panels(psi1, psi1, b, j1, _quad.NODES_PER_PANEL)
        val = np.array([
            _quad.integrate(f, iv.t0, float(xi), tol=tol, panels=panels) if xi > iv.t0 else 0.0
            for xi in np.atleast_1d(xa)
        ]).reshape(xa.shape)
    return float(val) if np.ndim(x) == 0 else val


def trace_partial_sum(mat: CoeffMatrix, p: int) -> float:
    """``sum_{j <= p} C_{jj}``."""
    if p < 0 or p > min(mat.p1, mat.p2):
        raise IndexError(f"p={p} outside [0, {min(mat.p1, mat.p2)}]")
    return float(math.fsum(np.diagonal(mat.values)[: p + 1]))


def trace_partial_sums(mat: CoeffMatrix) -> np.ndarray:
    """Running diagonal sums for ``p = 0..min(p1, p2)``."""
    d = np.diagonal(mat.values)
    return np.array([math.fsum(d[: k + 1]) for k in range(d.size)])


def _poly(w: WeightFunction) -> Optional[_NpPoly]:
    return _NpPoly(w.poly_coeffs) if w.is_polynomial else None


def weight_product_integral(psi1: WeightFunction, psi2: WeightFunction, iv: Interval,
                            tol: float = 1e-13) -> float:
    """``int_{t0}^{t1} psi1 psi2``; exact for polynomial weights."""
    P1, P2 = _poly(psi1), _poly(psi2)
    if P1 is not None and P2 is not None:
        return float((P1 * P2).integ()(iv.length))
    return _quad.integrate(lambda s: psi1.evaluate(s, iv.t0) * psi2.evaluate(s, iv.t0),
                           iv.t0, iv.t1, tol=tol, panels=4)


def k_norm_sq(psi1: WeightFunction, psi2: WeightFunction, iv: Interval,
              tol: float = DEFAULT_TOL) -> float:
    """Squared ``L2`` norm of ``K`` over the square: ``int int_{t1<t2} psi1^2 psi2^2``."""
    P1, P2 = _poly(psi1), _poly(psi2)
    if P1 is not None and P2 is not None:
        inner = (P1 * P1).integ()
        return float((P2 * P2 * inner).integ()(iv.length))

    def at(panels):
        x, w, half = _quad.panel_nodes(iv.t0, iv.t1, panels)
        inner = _quad.cumulative(psi1.evaluate(x, iv.t0) ** 2, half)
        return float(np.sum(w * psi2.evaluate(x, iv.t0) ** 2 * inner))

    return _refine_scalar(at, tol)


def _refine_scalar(at, tol: float, panels: int = 2) -> float:
    prev = at(panels)
    while panels < _quad.MAX_PANELS:
        panels *= 2
        cur = at(panels)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise _quad.QuadratureError(f"no convergence to {tol} within {_quad.MAX_PANELS} panels")
