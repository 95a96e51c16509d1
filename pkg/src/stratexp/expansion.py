"""Sampling truncated double series for the Stratonovich integral.

The truncated approximation is the bilinear form

    sum_{j1 <= p1} sum_{j2 <= p2} C_{j2 j1} zeta_{j1}^(i1) zeta_{j2}^(i2)

where ``zeta^(i)`` are i.i.d. standard normals for ``i >= 1`` and the
deterministic integrals of the basis functions for the time component
``i = 0``. The Ito value follows by subtracting half the weight product
integral when ``i1 == i2 != 0``.

Random streams: row ``i`` of a draw matrix is the prefix of a stream keyed by
``(seed, i)``, so enlarging ``jmax`` or ``m`` never changes earlier values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .basis import BasisSystem, phi_integral
from .coefficients import CoeffMatrix, trace_partial_sum, weight_product_integral
from .model import NoisePair

_DRAW_TAG = 0


def component_stream(seed: int, i: int, tag: int = _DRAW_TAG) -> np.random.Generator:
    """Independent Philox stream for ``(seed, component i)``."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(tag, i))))


def deterministic_zeta0(b: BasisSystem, jmax: int) -> np.ndarray:
    """``int_{t0}^{t1} phi_j ds`` for ``j = 0..jmax``."""
    if jmax < 0:
        raise ValueError(f"jmax must be >= 0, got {jmax}")
    return np.array([phi_integral(b, j, b.iv.t0, b.iv.t1) for j in range(jmax + 1)])


@dataclass(frozen=True, eq=False)
class GaussianDraws:
    """``z[i, j]``: row 0 deterministic, rows ``1..m`` standard normal."""

    z: np.ndarray
    seed: int
    basis: BasisSystem

    @property
    def m(self) -> int:
        return self.z.shape[0] - 1

    @property
    def jmax(self) -> int:
        return self.z.shape[1] - 1


def draw_gaussians(b: BasisSystem, m: int, jmax: int, seed: int) -> GaussianDraws:
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    z = np.empty((m + 1, jmax + 1))
    z[0] = deterministic_zeta0(b, jmax)
    for i in range(1, m + 1):
        z[i] = component_stream(seed, i).standard_normal(jmax + 1)
    z.setflags(write=False)
    return GaussianDraws(z, int(seed), b)


@dataclass(frozen=True)
class ExpansionSample:
    stratonovich: float
    ito: float
    p1: int
    p2: int
    pair: NoisePair
    seed: int


def ito_correction(mat: CoeffMatrix, pair: NoisePair) -> float:
    """Amount subtracted from the Stratonovich value to get the Ito value."""
    if not pair.same_noise:
        return 0.0
    return 0.5 * weight_product_integral(mat.psi1, mat.psi2, mat.iv)


def sample_truncated(mat: CoeffMatrix, draws: GaussianDraws, pair: NoisePair) -> ExpansionSample:
    if draws.jmax < max(mat.p1, mat.p2):
        raise ValueError(
            f"draws cover j <= {draws.jmax}, matrix needs {max(mat.p1, mat.p2)}"
        )
    if max(pair.i1, pair.i2) > draws.m:
        raise ValueError(f"pair {pair.i1, pair.i2} exceeds draw components m={draws.m}")
    if draws.basis != mat.basis:
        raise ValueError("draws and coefficient matrix use different bases")
    z1 = np.ascontiguousarray(draws.z[pair.i1, : mat.p1 + 1])[None, :]
    z2 = np.ascontiguousarray(draws.z[pair.i2, : mat.p2 + 1])[None, :]
    strat = float(_kernels.active.bilinear_compensated(mat.values, z1, z2)[0])
    return ExpansionSample(strat, strat - ito_correction(mat, pair), mat.p1, mat.p2, pair, draws.seed)


@dataclass(frozen=True, eq=False)
class SampleBatch:
    seeds: np.ndarray
    stratonovich: np.ndarray
    ito: np.ndarray
    p1: int
    p2: int
    pair: NoisePair

    def rows(self):
        for s, a, b in zip(self.seeds, self.stratonovich, self.ito):
            yield int(s), self.pair.i1, self.pair.i2, self.p1, self.p2, float(a), float(b)


def _rows_for(seeds, i: int, n: int, zeta0: np.ndarray) -> np.ndarray:
    if i == 0:
        return np.broadcast_to(zeta0[:n], (len(seeds), n)).copy()
    return np.stack([component_stream(s, i).standard_normal(n) for s in seeds])


def sample_batch(mat: CoeffMatrix, pair: NoisePair, seeds: Sequence[int]) -> SampleBatch:
    """``sample_truncated`` over many seeds; identical values, vectorised.

    Only the rows named by ``pair`` are drawn; since rows are independent
    streams this does not change any value.
    """
    seeds = np.asarray([int(s) for s in seeds], dtype=np.int64)
    n = max(mat.p1, mat.p2) + 1
    zeta0 = deterministic_zeta0(mat.basis, n - 1)
    rows = {i: _rows_for(seeds, i, n, zeta0) for i in {pair.i1, pair.i2}}
    z1 = np.ascontiguousarray(rows[pair.i1][:, : mat.p1 + 1])
    z2 = np.ascontiguousarray(rows[pair.i2][:, : mat.p2 + 1])
    strat = _kernels.active.bilinear_compensated(mat.values, z1, z2)
    return SampleBatch(seeds, strat, strat - ito_correction(mat, pair), mat.p1, mat.p2, pair)


def expected_value(mat: CoeffMatrix, pair: NoisePair) -> float:
    """Mean of the truncated Stratonovich approximation.

    Zero unless ``i1 == i2``; for ``i1 == i2 != 0`` it is the diagonal
    partial sum, and for ``i1 == i2 == 0`` the (deterministic) value itself.
    """
    if pair.same_noise:
        return trace_partial_sum(mat, min(mat.p1, mat.p2))
    if pair.i1 == 0 and pair.i2 == 0:
        z0 = deterministic_zeta0(mat.basis, max(mat.p1, mat.p2))
        return float(z0[: mat.p1 + 1] @ mat.values @ z0[: mat.p2 + 1])
    return 0.0


def exact_expected_value(mat: CoeffMatrix, pair: NoisePair) -> float:
    """Mean of the untruncated Stratonovich integral."""
    if pair.same_noise:
        return 0.5 * weight_product_integral(mat.psi1, mat.psi2, mat.iv)
    if pair.i1 == 0 and pair.i2 == 0:
        # int int_{t1<t2} psi1 psi2 is carried exactly by the (0, 0) coefficient
        return float(mat.values[0, 0] * mat.iv.length)
    return 0.0
