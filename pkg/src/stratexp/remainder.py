"""Remainder of the truncated double Fourier sum and mean-square error functionals.

``R(t1, t2) = K*(t1, t2) - sum_{j1 <= p1, j2 <= p2} C_{j2 j1} phi_{j1}(t1) phi_{j2}(t2)``

Functionals reported for a truncation ``(p1, p2)``:

proj_error_sq
    ``int int R^2`` over the square, computed as ``||K||^2 - sum C^2``.
diag_integral
    ``int R(s, s) ds = (1/2) int psi1 psi2 - sum_{j <= min(p1, p2)} C_{jj}``.
ms_exact_offdiag
    Second moment of the expansion error when ``i1 != i2`` (both nonzero).
    The two off-diagonal iterated integrals of ``R`` are orthogonal, so the
    moment equals ``proj_error_sq`` exactly. Derived here and checked against
    the path oracle, not part of the original bound.
ms_bound_equal
    ``2 proj_error_sq + diag_integral^2``, an upper bound on the second
    moment when ``i1 == i2 != 0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial as _NpPoly

from . import _quad
from .coefficients import (CoeffMatrix, _refine_scalar, k_norm_sq,
                           trace_partial_sum, weight_product_integral)
from .model import NoisePair, kernel_Kstar

NEGATIVE_WARN = 1e-10


class NegativeErrorWarning(RuntimeWarning):
    """A projection error came out negative beyond quadrature noise."""


def remainder_eval(mat: CoeffMatrix, x1, x2):
    """Pointwise remainder ``R_{p1 p2}(x1, x2)``; broadcasts over arrays."""
    iv = mat.iv
    iv.check(x1, "x1")
    iv.check(x2, "x2")
    x1a, x2a = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
    kstar = np.asarray(kernel_Kstar(mat.psi1, mat.psi2, x1a, x2a, iv))
    f1 = mat.basis.table(mat.p1, x1a)
    f2 = mat.basis.table(mat.p2, x2a)
    series = np.einsum("a...,ab,b...->...", f1, mat.values, f2)
    out = kstar - series
    return float(out) if out.ndim == 0 else out


def diag_remainder_integral(mat: CoeffMatrix) -> float:
    """``int R(s, s) ds`` from the orthonormality collapse (no quadrature of R)."""
    half = 0.5 * weight_product_integral(mat.psi1, mat.psi2, mat.iv)
    return half - trace_partial_sum(mat, min(mat.p1, mat.p2))


def _clamp(val: float) -> float:
    if val < 0.0:
        if val < -NEGATIVE_WARN:
            warnings.warn(f"projection error {val:.3e} < 0 clamped to 0", NegativeErrorWarning,
                          stacklevel=3)
        return 0.0
    return val


def ms_projection_error(mat: CoeffMatrix) -> float:
    """``int int R^2`` over the square, clamped at zero."""
    knorm = k_norm_sq(mat.psi1, mat.psi2, mat.iv)
    return _clamp(knorm - math.fsum(mat.values.ravel() ** 2))


def projection_error_grid(mat: CoeffMatrix) -> np.ndarray:
    """``out[a, b]`` = projection error of the leading ``(a+1) x (b+1)`` block."""
    knorm = k_norm_sq(mat.psi1, mat.psi2, mat.iv)
    energy = np.cumsum(np.cumsum(mat.values ** 2, axis=0), axis=1)
    raw = knorm - energy
    if np.any(raw < -NEGATIVE_WARN):
        warnings.warn(f"projection error {raw.min():.3e} < 0 clamped to 0", NegativeErrorWarning,
                      stacklevel=2)
    return np.maximum(raw, 0.0)


def _time_norm_sq(mat: CoeffMatrix, outer_first: bool) -> float:
    """Squared norm of ``psi2(s) int_t^s psi1`` or ``psi1(s) int_s^T psi2``."""
    iv = mat.iv
    h = iv.length
    if mat.psi1.is_polynomial and mat.psi2.is_polynomial:
        P1, P2 = _NpPoly(mat.psi1.poly_coeffs), _NpPoly(mat.psi2.poly_coeffs)
        if outer_first:
            a = P2 * P1.integ()
        else:
            I2 = P2.integ()
            a = P1 * (I2(h) - I2)
        return float((a * a).integ()(h))

    def at(panels):
        x, w, half = _quad.panel_nodes(iv.t0, iv.t1, panels)
        if outer_first:
            g = mat.psi2.evaluate(x, iv.t0) * _quad.cumulative(mat.psi1.evaluate(x, iv.t0), half)
        else:
            cum = _quad.cumulative(mat.psi2.evaluate(x, iv.t0), half)
            total = float(np.sum(w * mat.psi2.evaluate(x, iv.t0)))
            g = mat.psi1.evaluate(x, iv.t0) * (total - cum)
        return float(np.sum(w * g * g))

    return _refine_scalar(at, 1e-12)


def ms_time_component(mat: CoeffMatrix, pair: NoisePair) -> Optional[float]:
    """Exact second moment of the expansion error when a component is time.

    With ``i1 = 0`` the error is a single Ito integral in ``w^(i2)`` of
    ``g(s) = psi2(s) int_t^s psi1 - sum_{j2} sqrt(h) C_{j2 0} phi_{j2}(s)``,
    whose second moment is ``||g||^2``; symmetrically for ``i2 = 0``.
    Returns ``None`` when neither component is time.
    """
    if pair.i1 != 0 and pair.i2 != 0:
        return None
    if pair.i1 == 0 and pair.i2 == 0:
        return 0.0
    h = mat.iv.length
    if pair.i1 == 0:
        tail = h * math.fsum(mat.values[0, :] ** 2)
        return _clamp(_time_norm_sq(mat, outer_first=True) - tail)
    tail = h * math.fsum(mat.values[:, 0] ** 2)
    return _clamp(_time_norm_sq(mat, outer_first=False) - tail)


@dataclass(frozen=True)
class ErrorReport:
    p1: int
    p2: int
    proj_error_sq: float
    diag_integral: float
    ms_exact_offdiag: float
    ms_bound_equal: float
    pair: Optional[NoisePair] = None
    ms_exact_time: Optional[float] = None

    @property
    def theory(self) -> float:
        """Value the Monte Carlo oracle is compared with for ``pair``.

        Exact for distinct components, an upper bound for ``i1 == i2 != 0``.
        """
        if self.pair is None:
            raise ValueError("report built without a noise pair")
        if self.ms_exact_time is not None:
            return self.ms_exact_time
        if self.pair.same_noise:
            return self.ms_bound_equal
        return self.ms_exact_offdiag

    @property
    def theory_is_bound(self) -> bool:
        return self.pair is not None and self.pair.same_noise

    def as_row(self):
        return (self.p1, self.p2, self.proj_error_sq, self.diag_integral,
                self.ms_exact_offdiag, self.ms_bound_equal)


def ms_error_bound(mat: CoeffMatrix, pair: Optional[NoisePair] = None) -> ErrorReport:
    proj = ms_projection_error(mat)
    diag = diag_remainder_integral(mat)
    time_val = ms_time_component(mat, pair) if pair is not None else None
    return ErrorReport(mat.p1, mat.p2, proj, diag, proj, 2.0 * proj + diag * diag, pair, time_val)


def error_curve(mat: CoeffMatrix, diagonal_only: bool = False):
    """ErrorReports for every leading sub-block of ``mat`` (or ``p1 == p2`` only)."""
    grid = projection_error_grid(mat)
    half = 0.5 * weight_product_integral(mat.psi1, mat.psi2, mat.iv)
    d = np.diagonal(mat.values)
    traces = [math.fsum(d[: k + 1]) for k in range(d.size)]
    out = []
    for a in range(mat.p1 + 1):
        for b in range(mat.p2 + 1):
            if diagonal_only and a != b:
                continue
            proj = float(grid[a, b])
            diag = half - traces[min(a, b)]
            out.append(ErrorReport(a, b, proj, diag, proj, 2.0 * proj + diag * diag))
    return out
