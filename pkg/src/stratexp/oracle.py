"""Discretised-path oracle for iterated stochastic integrals.

Paths live on uniform dyadic grids ``tau_k = t0 + k * dt``, ``dt = h / n``.
They are built by a Brownian bridge consuming normals level by level, so the
first ``n`` normals of a stream determine the path on ``n`` subintervals and
finer paths from the same seed refine coarser ones.

All sums use left endpoints ``tau_k`` of the subintervals. The time component
``i = 0`` has increments ``dt``.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .basis import BasisSystem
from .coefficients import DEFAULT_TOL, CoeffMatrix, coeff_matrix, weight_product_integral
from .expansion import component_stream
from .model import Interval, NoisePair, WeightFunction, kernel_K, kernel_Kstar
from .remainder import ms_error_bound

logger = logging.getLogger(__name__)

_PATH_TAG = 1
_PATH_SEED_TAG = 2


class BiasWarning(RuntimeWarning):
    """Halving the grid moved the Monte Carlo estimate by more than 2 stderr."""


def _check_grid(n: int) -> None:
    if n < 2 or n & (n - 1):
        raise ValueError(f"grid size must be a power of two >= 2, got {n}")


@dataclass(frozen=True, eq=False)
class DiscretePath:
    """Increments ``dW[i - 1, k]`` of components ``i = 1..m`` over ``[tau_k, tau_{k+1}]``."""

    n: int
    iv: Interval
    dW: np.ndarray
    seed: int
    W: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.dW.shape[0]

    @property
    def dt(self) -> float:
        return self.iv.length / self.n

    @property
    def tau(self) -> np.ndarray:
        """Left endpoints ``tau_0..tau_{n-1}``."""
        return self.iv.t0 + np.arange(self.n) * self.dt

    def increments(self, i: int) -> np.ndarray:
        if i == 0:
            return np.full(self.n, self.dt)
        if not 1 <= i <= self.m:
            raise ValueError(f"component {i} outside [0, {self.m}]")
        return self.dW[i - 1]

    def coarsen(self) -> "DiscretePath":
        """Same path on ``n / 2`` subintervals (pairwise sums)."""
        if self.n < 4:
            raise ValueError("cannot coarsen below n = 2")
        dW = self.dW[:, 0::2] + self.dW[:, 1::2]
        W = None if self.W is None else self.W[:, ::2]
        return DiscretePath(self.n // 2, self.iv, dW, self.seed, W)


def _path_values(iv: Interval, m: int, n: int, seeds: Sequence[int]) -> np.ndarray:
    """Path values, shape ``(B, m, n + 1)``."""
    _check_grid(n)
    B = len(seeds)
    out = np.empty((B, m, n + 1))
    z = np.empty((B, n))
    for i in range(1, m + 1):
        for row, s in enumerate(seeds):
            component_stream(int(s), i, _PATH_TAG).standard_normal(out=z[row])
        out[:, i - 1] = _kernels.active.bridge_values(z, iv.length)
    return out


def sample_path(iv: Interval, m: int, n: int, seed: int) -> DiscretePath:
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    W = _path_values(iv, m, n, [seed])[0]
    W.setflags(write=False)
    return DiscretePath(n, iv, np.diff(W, axis=1), int(seed), W)


def path_seeds(seed: int, paths: int) -> np.ndarray:
    """Per-path seeds derived from one master seed."""
    return np.random.SeedSequence(int(seed), spawn_key=(_PATH_SEED_TAG,)).generate_state(
        paths, dtype=np.uint64
    )


@dataclass(frozen=True)
class Kernel2D:
    """Bounded function on the square, vectorised over ``(x1, x2)`` arrays."""

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = "kernel"

    def __call__(self, x1, x2):
        return np.asarray(self.func(x1, x2), dtype=float)


def product_kernel(f1: Callable, f2: Callable, name: str = "product") -> Kernel2D:
    return Kernel2D(lambda x1, x2: f1(x1) * f2(x2), name)


def kernel_k(psi1: WeightFunction, psi2: WeightFunction, iv: Interval) -> Kernel2D:
    return Kernel2D(lambda x1, x2: kernel_K(psi1, psi2, x1, x2, iv), "K")


def kernel_kstar(psi1: WeightFunction, psi2: WeightFunction, iv: Interval) -> Kernel2D:
    return Kernel2D(lambda x1, x2: kernel_Kstar(psi1, psi2, x1, x2, iv), "K*")


def zero_kernel() -> Kernel2D:
    return Kernel2D(lambda x1, x2: np.zeros(np.broadcast(x1, x2).shape), "zero")


def prelimit_iterated(path: DiscretePath, psi1: WeightFunction, psi2: WeightFunction,
                      pair: NoisePair) -> float:
    """``sum_{k2} sum_{k1 < k2} psi1(tau_k1) psi2(tau_k2) dw1_k1 dw2_k2``."""
    tau = path.tau
    a1 = psi1.evaluate(tau, path.iv.t0) * path.increments(pair.i1)
    a2 = psi2.evaluate(tau, path.iv.t0) * path.increments(pair.i2)
    return float(_kernels.active.iterated_sums(a1[None, :], a2[None, :])[0])


def prelimit_multiple(path: DiscretePath, kern: Kernel2D, pair: NoisePair) -> float:
    """``sum_{k1, k2} Phi(tau_k1, tau_k2) dw1_k1 dw2_k2`` over the whole square."""
    tau = path.tau
    Phi = np.ascontiguousarray(kern(tau[:, None], tau[None, :]))
    x = np.ascontiguousarray(path.increments(pair.i1))[None, :]
    y = np.ascontiguousarray(path.increments(pair.i2))[None, :]
    return float(_kernels.active.quadratic_form(Phi, x, y)[0])


def zeta_from_path(path: DiscretePath, b: BasisSystem, j: int, i: int) -> float:
    """``sum_k phi_j(tau_k) dw^(i)_k``."""
    if j < 0:
        raise ValueError(f"basis index must be >= 0, got {j}")
    return float(b.table(j, path.tau)[j] @ path.increments(i))


# ---------------------------------------------------------------- experiment


@dataclass(frozen=True)
class ExperimentConfig:
    psi1: WeightFunction
    psi2: WeightFunction
    basis: BasisSystem
    p1: int
    p2: int
    pair: NoisePair
    n: int = 4096
    paths: int = 100_000
    seed: int = 0
    batch: int = 2000
    threads: int = 1
    tol: float = DEFAULT_TOL

    def echo(self) -> dict:
        return {
            "psi1": self.psi1.descriptor(),
            "psi2": self.psi2.descriptor(),
            "basis": self.basis.kind.value,
            "basis_convention": self.basis.convention,
            "interval": [self.basis.iv.t0, self.basis.iv.t1],
            "p1": self.p1,
            "p2": self.p2,
            "i1": self.pair.i1,
            "i2": self.pair.i2,
            "m": self.pair.m,
            "n": self.n,
            "paths": self.paths,
            "seed": self.seed,
            "batch": self.batch,
            "tol": self.tol,
            "coupling": "path",
            "evaluation": "left endpoint",
        }


@dataclass(frozen=True)
class ExperimentResult:
    p1: int
    p2: int
    pair: NoisePair
    mean_sq_diff: float
    stderr: float
    theory: float
    theory_is_bound: bool
    mean_sq_diff_half: float
    bias_shift: float
    bias_flag: bool

    def z_score(self) -> float:
        return (self.mean_sq_diff - self.theory) / self.stderr if self.stderr > 0 else 0.0

    @property
    def bias_check(self) -> dict:
        return {
            "n_half_estimate": self.mean_sq_diff_half,
            "shift": self.bias_shift,
            "limit": 2.0 * self.stderr,
            "flagged": self.bias_flag,
        }

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pair"] = [self.pair.i1, self.pair.i2, self.pair.m]
        return d


def _zetas(tau: np.ndarray, dt: float, dW: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Path zetas for all components, shape ``(B, m + 1, jmax + 1)``; row 0 is time."""
    B, m, _ = dW.shape
    out = np.empty((B, m + 1, table.shape[0]))
    out[:, 0] = (table @ np.full(tau.shape, dt))[None, :]
    out[:, 1:] = dW @ table.T
    return out


def _batch_sq_diffs(cfg_psi, mat: CoeffMatrix, orders, pairs, corrections, dW, iv):
    """Squared pathwise differences for one batch at one grid resolution."""
    psi1, psi2 = cfg_psi
    B, m, n = dW.shape
    dt = iv.length / n
    tau = iv.t0 + np.arange(n) * dt
    table = mat.basis.table(max(mat.p1, mat.p2), tau)
    zeta = _zetas(tau, dt, dW, table)
    w1 = psi1.evaluate(tau, iv.t0)
    w2 = psi2.evaluate(tau, iv.t0)
    time_incr = np.full((B, n), dt)
    res = {}
    for pair in pairs:
        inc1 = time_incr if pair.i1 == 0 else dW[:, pair.i1 - 1]
        inc2 = time_incr if pair.i2 == 0 else dW[:, pair.i2 - 1]
        strat = _kernels.active.iterated_sums(
            np.ascontiguousarray(inc1 * w1), np.ascontiguousarray(inc2 * w2)
        ) + corrections[pair]
        for p1, p2 in orders:
            z1 = np.ascontiguousarray(zeta[:, pair.i1, : p1 + 1])
            z2 = np.ascontiguousarray(zeta[:, pair.i2, : p2 + 1])
            C = np.ascontiguousarray(mat.values[: p1 + 1, : p2 + 1])
            approx = _kernels.active.bilinear_compensated(C, z1, z2)
            res[(pair, p1, p2)] = (strat - approx) ** 2
    return res


def coupled_error_sweep(psi1: WeightFunction, psi2: WeightFunction, b: BasisSystem,
                        orders: Sequence[Tuple[int, int]], pairs: Sequence[NoisePair],
                        n: int = 4096, paths: int = 100_000, seed: int = 0,
                        batch: int = 2000, threads: int = 1,
                        tol: float = DEFAULT_TOL) -> List[ExperimentResult]:
    """Coupled experiments for several truncations and pairs on shared paths.

    For every path the Stratonovich integral is approximated by the Ito
    prelimit sum plus the deterministic correction, the truncated series is
    evaluated with zetas projected from the same path, and the squared
    difference is averaged. The same statistics on the grid of ``n / 2``
    subintervals (same paths, pairwise-summed increments) give the bias check.
    """
    _check_grid(n)
    if n < 4:
        raise ValueError("need n >= 4 for the halving bias check")
    if paths < 2:
        raise ValueError("need at least 2 paths")
    orders = [(int(a), int(c)) for a, c in orders]
    pairs = list(pairs)
    iv = b.iv
    m = max(p.m for p in pairs)
    pmax1 = max(a for a, _ in orders)
    pmax2 = max(c for _, c in orders)
    mat = coeff_matrix(psi1, psi2, b, pmax1, pmax2, tol=tol)
    wpi = weight_product_integral(psi1, psi2, iv)
    corrections = {p: (0.5 * wpi if p.same_noise else 0.0) for p in pairs}
    seeds = path_seeds(seed, paths)
    chunks = [seeds[k:k + batch] for k in range(0, paths, batch)]

    def work(chunk):
        dW = np.diff(_path_values(iv, m, n, chunk), axis=2)
        fine = _batch_sq_diffs((psi1, psi2), mat, orders, pairs, corrections, dW, iv)
        coarse_dW = dW[:, :, 0::2] + dW[:, :, 1::2]
        coarse = _batch_sq_diffs((psi1, psi2), mat, orders, pairs, corrections, coarse_dW, iv)
        return fine, coarse

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]

    results = []
    for pair in pairs:
        for p1, p2 in orders:
            key = (pair, p1, p2)
            fine = np.concatenate([f[key] for f, _ in parts])
            coarse = np.concatenate([c[key] for _, c in parts])
            est = float(np.mean(fine))
            est_half = float(np.mean(coarse))
            stderr = float(np.std(fine, ddof=1) / math.sqrt(paths))
            report = ms_error_bound(mat.sub(p1, p2), pair)
            shift = abs(est - est_half)
            flag = shift > 2.0 * stderr
            if flag:
                warnings.warn(
                    f"pair ({pair.i1},{pair.i2}) p=({p1},{p2}): halving n shifts the "
                    f"estimate by {shift:.3e} > 2*stderr={2 * stderr:.3e}",
                    BiasWarning, stacklevel=2,
                )
            results.append(ExperimentResult(p1, p2, pair, est, stderr, report.theory,
                                            report.theory_is_bound, est_half, shift, flag))
    return results


def coupled_error_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Monte Carlo estimate of the mean-square truncation error for one setting."""
    (res,) = coupled_error_sweep(config.psi1, config.psi2, config.basis,
                                 [(config.p1, config.p2)], [config.pair], config.n,
                                 config.paths, config.seed, config.batch, config.threads,
                                 config.tol)
    return res


def stratonovich_from_paths(psi1: WeightFunction, psi2: WeightFunction, iv: Interval,
                            pair: NoisePair, n: int, seeds: Sequence[int]) -> np.ndarray:
    """Oracle Stratonovich values (Ito prelimit sum + correction) for many paths."""
    W = _path_values(iv, pair.m, n, seeds)
    dW = np.diff(W, axis=2)
    dt = iv.length / n
    tau = iv.t0 + np.arange(n) * dt
    B = len(seeds)
    inc = {0: np.full((B, n), dt)}
    for i in range(1, pair.m + 1):
        inc[i] = dW[:, i - 1]
    a1 = np.ascontiguousarray(inc[pair.i1] * psi1.evaluate(tau, iv.t0))
    a2 = np.ascontiguousarray(inc[pair.i2] * psi2.evaluate(tau, iv.t0))
    corr = 0.5 * weight_product_integral(psi1, psi2, iv) if pair.same_noise else 0.0
    return _kernels.active.iterated_sums(a1, a2) + corr
