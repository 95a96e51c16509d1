"""Inner loops used by the sampler and the discretised-path oracle.

Every kernel exists twice: a pure numpy version and a numba ``@njit``
version performing the same floating point operations in the same order.
The numba versions are used when numba imports and ``STRATEXP_NO_NUMBA`` is
unset (or ``0``); set ``STRATEXP_NO_NUMBA=1`` to force the numpy path.

Kernels
-------
bridge_values(z, h)
    Dyadic Brownian bridge. ``z`` has shape ``(B, n)`` with ``n`` a power of
    two and is consumed level by level: ``z[:, 0]`` fixes the endpoint,
    ``z[:, 1]`` the midpoint, ``z[:, 2:4]`` the quarter points, and so on.
    Returns the path values ``W`` of shape ``(B, n + 1)`` with ``W[:, 0] = 0``.
    Point values shared with a coarser grid are bit-identical.
iterated_sums(a1, a2)
    ``sum_{k2} a2[k2] * sum_{k1 < k2} a1[k1]`` row-wise.
bilinear_compensated(C, z1, z2)
    ``sum_{j1, j2} C[j1, j2] z1[j1] z2[j2]`` row-wise, ``j1``-major order,
    Neumaier-compensated.
quadratic_form(Phi, x, y)
    ``sum_{a, b} Phi[a, b] x[a] y[b]`` row-wise.
"""

from __future__ import annotations

import math
import os
from types import SimpleNamespace

import numpy as np


def _np_bridge_values(z, h):
    B, n = z.shape
    W = np.zeros((B, n + 1))
    W[:, n] = math.sqrt(h) * z[:, 0]
    stride, level, idx = n, 1, 1
    while stride > 1:
        half = stride // 2
        k = n // stride
        sd = 0.5 * math.sqrt(h * 0.5 ** (level - 1))
        left = W[:, 0:n:stride]
        right = W[:, stride::stride]
        W[:, half::stride] = 0.5 * (left + right) + sd * z[:, idx:idx + k]
        idx += k
        stride = half
        level += 1
    return W


def _np_iterated_sums(a1, a2):
    before = np.cumsum(a1, axis=1) - a1
    return np.sum(a2 * before, axis=1)


def _np_bilinear_compensated(C, z1, z2):
    B = z1.shape[0]
    s = np.zeros(B)
    c = np.zeros(B)
    for j1 in range(C.shape[0]):
        for j2 in range(C.shape[1]):
            t = C[j1, j2] * z1[:, j1] * z2[:, j2]
            tmp = s + t
            c += np.where(np.abs(s) >= np.abs(t), (s - tmp) + t, (t - tmp) + s)
            s = tmp
    return s + c


def _np_quadratic_form(Phi, x, y):
    return np.einsum("ka,ka->k", x @ Phi, y)


numpy_kernels = SimpleNamespace(
    bridge_values=_np_bridge_values,
    iterated_sums=_np_iterated_sums,
    bilinear_compensated=_np_bilinear_compensated,
    quadratic_form=_np_quadratic_form,
)


def _build_numba():
    from numba import njit

    @njit(cache=True, nogil=True)
    def bridge_values(z, h):
        B, n = z.shape
        W = np.zeros((B, n + 1))
        root = math.sqrt(h)
        for b in range(B):
            W[b, n] = root * z[b, 0]
            stride, level, idx = n, 1, 1
            while stride > 1:
                half = stride // 2
                sd = 0.5 * math.sqrt(h * 0.5 ** (level - 1))
                for k in range(n // stride):
                    left = k * stride
                    W[b, left + half] = 0.5 * (W[b, left] + W[b, left + stride]) + sd * z[b, idx + k]
                idx += n // stride
                stride = half
                level += 1
        return W

    @njit(cache=True, nogil=True)
    def iterated_sums(a1, a2):
        B, n = a1.shape
        out = np.zeros(B)
        for b in range(B):
            run = 0.0
            acc = 0.0
            for k in range(n):
                acc += a2[b, k] * run
                run += a1[b, k]
            out[b] = acc
        return out

    @njit(cache=True, nogil=True)
    def bilinear_compensated(C, z1, z2):
        B = z1.shape[0]
        out = np.zeros(B)
        for b in range(B):
            s = 0.0
            c = 0.0
            for j1 in range(C.shape[0]):
                for j2 in range(C.shape[1]):
                    t = C[j1, j2] * z1[b, j1] * z2[b, j2]
                    tmp = s + t
                    if abs(s) >= abs(t):
                        c += (s - tmp) + t
                    else:
                        c += (t - tmp) + s
                    s = tmp
            out[b] = s + c
        return out

    @njit(cache=True, nogil=True)
    def quadratic_form(Phi, x, y):
        B, n = x.shape
        out = np.zeros(B)
        xP = np.dot(x, Phi)  # one GEMM, as in the numpy version
        for b in range(B):
            acc = 0.0
            for a in range(n):
                acc += xP[b, a] * y[b, a]
            out[b] = acc
        return out

    return SimpleNamespace(
        bridge_values=bridge_values,
        iterated_sums=iterated_sums,
        bilinear_compensated=bilinear_compensated,
        quadratic_form=quadratic_form,
    )


def _numba_wanted() -> bool:
    return os.environ.get("STRATEXP_NO_NUMBA", "0").strip().lower() in ("", "0", "false", "no")


try:
    numba_kernels = _build_numba()
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_kernels = None

USING_NUMBA = numba_kernels is not None and _numba_wanted()
active = numba_kernels if USING_NUMBA else numpy_kernels
