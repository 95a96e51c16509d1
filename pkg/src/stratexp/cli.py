"""Command line front end.

Exit codes: 0 success, 1 configuration error, 2 numerical failure
(quadrature did not converge, or the Monte Carlo bias check fired).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import logging
import sys
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from . import __version__, _kernels
from . import io as sio
from ._quad import QuadratureError
from .basis import BasisKind, BasisSystem
from .coefficients import DEFAULT_TOL, coeff_matrix, trace_partial_sums, weight_product_integral
from .expansion import sample_batch
from .model import Interval, NoisePair, parse_weight
from .oracle import BiasWarning, coupled_error_sweep
from .remainder import error_curve, remainder_eval

logger = logging.getLogger("stratexp")

COMMANDS = ("coeffs", "trace", "error-curve", "sample", "mc-validate", "remainder-grid")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class JobConfig:
    command: str
    t0: float = 0.0
    t1: float = 1.0
    basis: str = "legendre"
    w1: str = "const:1"
    w2: str = "const:1"
    p1: int = 0
    p2: int = 0
    p: Optional[int] = None
    i1: int = 1
    i2: int = 2
    m: Optional[int] = None
    samples: int = 1000
    paths: int = 100_000
    grid: int = 4096
    grid_n: int = 64
    seed: int = 0
    batch: int = 2000
    sweep: Optional[List[int]] = None
    diagonal: bool = False
    tol: float = DEFAULT_TOL
    threads: int = 1
    out: Optional[str] = None
    format: str = "csv"
    timestamp: bool = True

    def validate(self) -> "JobConfig":
        if self.command not in COMMANDS:
            raise ConfigError("command", f"unknown command {self.command!r}")
        try:
            self.interval = Interval(self.t0, self.t1)
        except ValueError as exc:
            raise ConfigError("interval", str(exc)) from None
        try:
            self.basis_system = BasisSystem(BasisKind(self.basis), self.interval)
        except ValueError:
            raise ConfigError("basis", f"expected legendre or trigonometric, got {self.basis!r}") from None
        for name in ("w1", "w2"):
            try:
                setattr(self, f"psi{name[1]}", parse_weight(getattr(self, name)))
            except ValueError as exc:
                raise ConfigError(name, str(exc)) from None
        for name in ("p1", "p2"):
            if getattr(self, name) < 0:
                raise ConfigError(name, "must be >= 0")
        if self.p is not None and self.p < 0:
            raise ConfigError("p", "must be >= 0")
        if self.m is None:
            self.m = max(1, self.i1, self.i2)
        try:
            self.pair = NoisePair(self.i1, self.i2, self.m)
        except ValueError as exc:
            raise ConfigError("pair", str(exc)) from None
        positive = {"samples": self.samples, "grid_n": self.grid_n, "batch": self.batch,
                    "threads": self.threads}
        for name, v in positive.items():
            if v < 1:
                raise ConfigError(name, "must be >= 1")
        if self.paths < 2:
            raise ConfigError("paths", "must be >= 2")
        if self.grid < 4 or self.grid & (self.grid - 1):
            raise ConfigError("grid", "must be a power of two >= 4")
        if self.seed < 0:
            raise ConfigError("seed", "must be >= 0")
        if not 0 < self.tol < 1:
            raise ConfigError("tol", "must lie in (0, 1)")
        if self.format not in ("csv", "json"):
            raise ConfigError("format", "must be csv or json")
        if self.sweep is not None and any(v < 0 for v in self.sweep):
            raise ConfigError("sweep", "orders must be >= 0")
        return self

    def echo(self) -> dict:
        keys = [f.name for f in self.__dataclass_fields__.values()]
        d = {k: getattr(self, k) for k in keys}
        d["m"] = self.m
        d["psi1"] = self.psi1.descriptor()
        d["psi2"] = self.psi2.descriptor()
        d["basis_convention"] = self.basis_system.convention
        d["numba"] = _kernels.USING_NUMBA
        return d


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


class _Parser(argparse.ArgumentParser):
    """Argument errors are configuration errors: exit status 1, not argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: config error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stratexp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = _Parser(add_help=False)
    common.add_argument("--basis", default="legendre", help="legendre | trigonometric")
    common.add_argument("--t0", type=float, default=0.0)
    common.add_argument("--t1", type=float, default=1.0)
    common.add_argument("--w1", default="const:1", help="weight psi1: const:<c> or poly:<c0>,<c1>,...")
    common.add_argument("--w2", default="const:1", help="weight psi2")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="coefficient tolerance")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--format", default="csv", choices=("csv", "json"))
    common.add_argument("--no-timestamp", dest="timestamp", action="store_false",
                        help="omit the generation time from metadata")
    common.add_argument("-v", "--verbose", action="store_true")

    orders = _Parser(add_help=False)
    orders.add_argument("--p1", type=int, default=0)
    orders.add_argument("--p2", type=int, default=0)

    pair = _Parser(add_help=False)
    pair.add_argument("--i1", type=int, default=1)
    pair.add_argument("--i2", type=int, default=2)
    pair.add_argument("--m", type=int, default=None, help="Wiener dimension (default max(i1, i2))")
    pair.add_argument("--seed", type=int, default=0)

    sub.add_parser("coeffs", parents=[common, orders], help="coefficient table j1,j2,c")
    p = sub.add_parser("trace", parents=[common, orders], help="diagonal partial sums vs target")
    p.add_argument("--p", type=int, default=None, help="largest order (default min(p1, p2))")
    p = sub.add_parser("error-curve", parents=[common, orders], help="error functionals per block")
    p.add_argument("--diagonal", action="store_true", help="only p1 == p2 rows")
    p = sub.add_parser("sample", parents=[common, orders, pair], help="sample truncated series")
    p.add_argument("--samples", type=int, default=1000)
    p = sub.add_parser("mc-validate", parents=[common, orders, pair],
                       help="coupled Monte Carlo check against theory")
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--grid", type=int, default=4096, help="subintervals, power of two")
    p.add_argument("--batch", type=int, default=2000)
    p.add_argument("--sweep", type=_int_list, default=None,
                   help="comma-separated orders p (p1 = p2 = p); emits one row per order")
    p = sub.add_parser("remainder-grid", parents=[common, orders], help="R on a midpoint grid")
    p.add_argument("--grid-n", type=int, default=64)
    return parser


def config_from_args(ns: argparse.Namespace) -> JobConfig:
    fields = JobConfig.__dataclass_fields__
    kwargs = {k: v for k, v in vars(ns).items() if k in fields}
    return JobConfig(**kwargs).validate()


def _meta(cfg: JobConfig, extra: Optional[dict] = None) -> dict:
    meta = {"schema_version": sio.SCHEMA_VERSION, "command": cfg.command, "config": cfg.echo(),
            "version": __version__}
    if cfg.timestamp:
        meta["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    if extra:
        meta.update(extra)
    return meta


def _emit(cfg: JobConfig, header, rows, extra_meta=None, json_body=None) -> None:
    rows = list(rows)
    meta = _meta(cfg, extra_meta)
    if cfg.format == "json":
        body = dict(meta)
        body["columns"] = list(header)
        body["rows"] = rows
        if json_body:
            body.update(json_body)
        sio.write_output(cfg.out, sio.json_text(body))
    else:
        sio.write_output(cfg.out, sio.csv_text(header, rows), meta)


def _matrix(cfg: JobConfig, p1=None, p2=None):
    return coeff_matrix(cfg.psi1, cfg.psi2, cfg.basis_system,
                        cfg.p1 if p1 is None else p1, cfg.p2 if p2 is None else p2,
                        tol=cfg.tol, threads=cfg.threads)


def cmd_coeffs(cfg):
    mat = _matrix(cfg)
    _emit(cfg, sio.COEFF_HEADER, sio.coeff_rows(mat.values), {"coefficients": mat.meta})
    return 0


def cmd_trace(cfg):
    p = min(cfg.p1, cfg.p2) if cfg.p is None else cfg.p
    mat = _matrix(cfg, max(cfg.p1, p), max(cfg.p2, p))
    target = 0.5 * weight_product_integral(cfg.psi1, cfg.psi2, cfg.interval)
    sums = trace_partial_sums(mat)[: p + 1]
    rows = [(k, s, target, target - s) for k, s in enumerate(sums)]
    _emit(cfg, sio.TRACE_HEADER, rows, {"coefficients": mat.meta})
    return 0


def cmd_error_curve(cfg):
    mat = _matrix(cfg)
    rows = [r.as_row() for r in error_curve(mat, diagonal_only=cfg.diagonal)]
    _emit(cfg, sio.ERROR_HEADER, rows, {"coefficients": mat.meta,
                                        "ms_exact_offdiag": "derived, oracle-validated"})
    return 0


def cmd_sample(cfg):
    mat = _matrix(cfg)
    seeds = range(cfg.seed, cfg.seed + cfg.samples)
    batch = sample_batch(mat, cfg.pair, seeds)
    _emit(cfg, sio.SAMPLE_HEADER, batch.rows(), {"coefficients": mat.meta,
                                                 "seeds": "seed, seed+1, ..., seed+samples-1"})
    return 0


def cmd_mc_validate(cfg):
    orders = [(cfg.p1, cfg.p2)] if cfg.sweep is None else [(p, p) for p in cfg.sweep]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BiasWarning)
        results = coupled_error_sweep(cfg.psi1, cfg.psi2, cfg.basis_system, orders, [cfg.pair],
                                      n=cfg.grid, paths=cfg.paths, seed=cfg.seed,
                                      batch=cfg.batch, threads=cfg.threads, tol=cfg.tol)
    for w in caught:
        logger.warning("%s", w.message)
    flagged = any(r.bias_flag for r in results)
    if cfg.sweep is None and cfg.format == "json":
        r = results[0]
        body = _meta(cfg, {
            "mean_sq_diff": r.mean_sq_diff,
            "stderr": r.stderr,
            "theory": r.theory,
            "theory_kind": "bound" if r.theory_is_bound else "exact",
            "z_score": r.z_score(),
            "bias_check": r.bias_check,
        })
        sio.write_output(cfg.out, sio.json_text(body))
    else:
        rows = [(r.p1, r.p2, r.pair.i1, r.pair.i2, r.mean_sq_diff, r.stderr, r.theory,
                 r.theory_is_bound, r.mean_sq_diff_half, r.bias_shift, r.bias_flag)
                for r in results]
        _emit(cfg, sio.SWEEP_HEADER, rows)
    return 2 if flagged else 0


def cmd_remainder_grid(cfg):
    mat = _matrix(cfg)
    iv = cfg.interval
    h = iv.length / cfg.grid_n
    x = iv.t0 + (np.arange(cfg.grid_n) + 0.5) * h
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    R = remainder_eval(mat, X1, X2)
    rows = ((X1[a, b], X2[a, b], R[a, b]) for a in range(cfg.grid_n) for b in range(cfg.grid_n))
    _emit(cfg, sio.GRID_HEADER, rows, {"coefficients": mat.meta,
                                       "grid": "cell midpoints; x1 == x2 rows lie on the diagonal"})
    return 0


HANDLERS = {
    "coeffs": cmd_coeffs,
    "trace": cmd_trace,
    "error-curve": cmd_error_curve,
    "sample": cmd_sample,
    "mc-validate": cmd_mc_validate,
    "remainder-grid": cmd_remainder_grid,
}


def run(cfg: JobConfig) -> int:
    try:
        return HANDLERS[cfg.command](cfg)
    except QuadratureError as exc:
        logger.error("numerical failure: %s", exc)
        return 2


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if getattr(ns, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(ns)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
