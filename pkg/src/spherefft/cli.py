"""Command-line front end: ``spherefft <command> [options]``.

Exit codes: 0 success, 1 validation or contract failure, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import importlib
import json
import logging
import math
import statistics
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import cubature, hypothesis, norms
from .grid import (
    BUILTIN_NAMES,
    SampleFileError,
    SphericalSamples,
    TestFunction,
    builtin,
    read_samples,
    sample,
    write_samples,
)
from .interpolant import build, evaluate_grid

logger = logging.getLogger("spherefft")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    fn: str | None = None
    infile: Path | None = None
    N: list[int] = field(default_factory=list)
    kappa: list[float] = field(default_factory=list)
    quad: tuple[int, int] | None = None
    out: Path | None = None
    fmt: str = "csv"
    strict_poles: bool = False
    seed: int = 0

    def __post_init__(self):
        if any(n < 2 for n in self.N):
            raise UsageError(f"every N must be >= 2, got {self.N}")
        if any(not math.isfinite(k) for k in self.kappa):
            raise UsageError("kappa values must be finite")
        if self.fmt not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.fmt!r}")


# -- argument parsing ---------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _quad(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    try:
        sizes = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"quadrature must be 'n' or 'n_theta x n_phi', got {text!r}") from None
    if len(sizes) == 1:
        sizes *= 2
    if len(sizes) != 2 or min(sizes) < 1:
        raise argparse.ArgumentTypeError(f"bad quadrature size {text!r}")
    return sizes[0], sizes[1]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spherefft", description="FFT-based interpolation and cubature on the sphere.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, fmt=True):
        sp.add_argument("--out", type=Path, help="output path (default: stdout)")
        if fmt:
            sp.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")

    def source(sp, allow_file=True):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--fn", help=f"built-in ({', '.join(BUILTIN_NAMES)}) or 'module:attr'")
        if allow_file:
            g.add_argument("--in", dest="infile", type=Path, help="sample file (text or SPH1 binary)")
            sp.add_argument("--strict-poles", action="store_true", help="reject inconsistent pole rows")

    sp = sub.add_parser("interpolate", help="coefficients of Q_N F")
    source(sp)
    sp.add_argument("--N", type=_int_list, default=[16])
    sp.add_argument("--refine", type=int, metavar="M", help="also evaluate on the M-times refined grid")
    sp.add_argument("--grid-out", type=Path, help="refined-grid output (default: <out>.refined.sph)")
    common(sp, fmt=False)

    sp = sub.add_parser("convergence", help="H0/H1 errors and EoC over a doubling N list")
    source(sp, allow_file=False)
    sp.add_argument("--N", type=_int_list, default=[8, 16, 32, 64, 128])
    sp.add_argument("--quad", type=_quad, help="n or n_theta x n_phi (default 2048x2048)")
    sp.add_argument("--no-h1", action="store_true", help="skip the H1 column")
    common(sp)

    sp = sub.add_parser("cubature", help="oscillatory cubature error table (or values for a sample file)")
    source(sp)
    sp.add_argument("--N", type=_int_list, default=[8, 16, 32, 64])
    sp.add_argument("--kappa", type=_float_list, default=[1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6])
    sp.add_argument("--N-ref", type=int, help="reference resolution (default 4 * max N)")
    common(sp)

    sp = sub.add_parser("verify-hypothesis", help="c_H(N; alpha) for N = 2..N_max")
    sp.add_argument("--N-max", type=int, default=128)
    sp.add_argument("--alpha", type=_int_list, default=[0, 1, 2])
    sp.add_argument("--extended", action="store_true", help=f"allow N_max > {hypothesis.DESK_N_MAX}")
    sp.add_argument("--no-fail-fast", action="store_true")
    common(sp)

    sp = sub.add_parser("bench", help="median wall-clock of build per N")
    sp.add_argument("--N", type=_int_list, default=[256, 512, 1024])
    sp.add_argument("--repeat", type=int, default=15)
    sp.add_argument("--warmup", type=int, default=2)
    sp.add_argument("--seed", type=int, default=0)
    common(sp, fmt=False)
    return p


# -- helpers ------------------------------------------------------------------


def resolve_function(spec: str) -> TestFunction:
    """Built-in name, or ``module:attr`` naming a TestFunction or plain callable."""
    if ":" not in spec:
        return builtin(spec)
    mod_name, attr = spec.split(":", 1)
    obj = getattr(importlib.import_module(mod_name), attr)
    if isinstance(obj, TestFunction):
        return obj
    if not callable(obj):
        raise UsageError(f"{spec} is not callable")
    return TestFunction(spec, obj)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _load_samples(cfg: RunConfig, N: int) -> SphericalSamples:
    if cfg.infile is not None:
        s = read_samples(cfg.infile, strict=cfg.strict_poles)
        return s
    return sample(resolve_function(cfg.fn), N)


def random_samples(N: int, rng: np.random.Generator) -> SphericalSamples:
    """Random complex samples with constant pole rows."""
    v = rng.standard_normal((N + 1, 2 * N)) + 1j * rng.standard_normal((N + 1, 2 * N))
    v[0] = v[0, 0]
    v[-1] = v[-1, 0]
    return SphericalSamples(N, v)


# -- commands -----------------------------------------------------------------


def cmd_interpolate(cfg: RunConfig, refine: int | None = None, grid_out: Path | None = None) -> int:
    if cfg.infile is None and len(cfg.N) != 1:
        raise UsageError("interpolate takes a single N")
    if refine is not None and refine < 1:
        raise UsageError(f"--refine must be >= 1, got {refine}")
    samples = _load_samples(cfg, cfg.N[0] if cfg.N else 16)
    coeffs = build(samples)
    _emit(json.dumps(coeffs.to_json()) + "\n", cfg.out)
    if refine is not None:
        if grid_out is None:
            if cfg.out is None:
                raise UsageError("--refine with stdout output needs --grid-out")
            grid_out = cfg.out.with_suffix(".refined.sph")
        fine = evaluate_grid(coeffs, refine)
        write_samples(SphericalSamples(coeffs.N * refine, fine, strict=False), grid_out)
    return EXIT_OK


def cmd_convergence(cfg: RunConfig, h1: bool = True) -> int:
    fn = resolve_function(cfg.fn)
    quad = norms.NormQuadrature(*cfg.quad) if cfg.quad else norms.NormQuadrature()
    if h1 and not fn.has_partials:
        logger.warning("%s has no analytic partials; reporting H0 only", fn.name)
        h1 = False
    records = norms.convergence_table(fn, cfg.N, quad, h1=h1)
    text = norms.records_to_csv(records) if cfg.fmt == "csv" else norms.records_to_json(records) + "\n"
    _emit(text, cfg.out)
    return EXIT_OK


def cmd_cubature(cfg: RunConfig, N_ref: int | None = None) -> int:
    if cfg.infile is not None:
        s = read_samples(cfg.infile, strict=cfg.strict_poles)
        vals = [cubature.integrate(s, k).value for k in cfg.kappa]
        if cfg.fmt == "json":
            text = json.dumps([{"kappa": k, "real": v.real, "imag": v.imag} for k, v in zip(cfg.kappa, vals)])
            text += "\n"
        else:
            text = "kappa,real,imag\n" + "".join(f"{k:g},{v.real!r},{v.imag!r}\n" for k, v in zip(cfg.kappa, vals))
        _emit(text, cfg.out)
        return EXIT_OK
    fn = resolve_function(cfg.fn)
    errors = cubature.rate_table(fn, cfg.N, cfg.kappa, N_ref=N_ref)
    if cfg.fmt == "json":
        text = json.dumps({"N": cfg.N, "kappa": cfg.kappa, "errors": errors.tolist()}) + "\n"
    else:
        text = cubature.write_rate_table(None, cfg.N, cfg.kappa, errors)
    _emit(text, cfg.out)
    return EXIT_OK


def cmd_verify_hypothesis(cfg: RunConfig, N_max: int, alphas: Sequence[int], extended: bool, fail_fast: bool) -> int:
    report = hypothesis.verify_range(N_max, alphas, fail_fast=fail_fast, extended=extended)
    _emit(report.to_csv() if cfg.fmt == "csv" else report.to_json() + "\n", cfg.out)
    if not report.passed:
        bad = report.failures[0]
        logger.error("hypothesis fails at N=%d, alpha=%d: c_H=%.6f", bad.N, bad.alpha, bad.c_H)
        return EXIT_INVALID
    return EXIT_OK


def time_builds(
    samples: Sequence[SphericalSamples],
    repeat: int = 15,
    warmup: int = 2,
    clock: Callable[[], float] = time.perf_counter,
) -> list[float]:
    """Median wall-clock seconds of :func:`build` for each sample set.

    Sizes are timed round-robin, so slow drift in machine load hits every
    size alike and cancels in the ratios between them.
    """
    for s in samples:
        for _ in range(warmup):
            build(s)
    times: list[list[float]] = [[] for _ in samples]
    for _ in range(repeat):
        for i, s in enumerate(samples):
            t0 = clock()
            build(s)
            times[i].append(clock() - t0)
    return [statistics.median(t) for t in times]


def cmd_bench(cfg: RunConfig, repeat: int, warmup: int) -> int:
    if repeat < 1 or warmup < 0:
        raise UsageError("--repeat must be >= 1 and --warmup >= 0")
    rng = np.random.default_rng(cfg.seed)
    samples = [random_samples(N, rng) for N in cfg.N]
    lines = ["N,build_seconds"]
    for N, t in zip(cfg.N, time_builds(samples, repeat, warmup)):
        lines.append(f"{N},{t:.6e}")
    _emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_OK


def _dispatch(args) -> int:
    cfg = RunConfig(
        command=args.command,
        fn=getattr(args, "fn", None),
        infile=getattr(args, "infile", None),
        N=getattr(args, "N", []) or [],
        kappa=getattr(args, "kappa", []) or [],
        quad=getattr(args, "quad", None),
        out=args.out,
        fmt=getattr(args, "fmt", "csv"),
        strict_poles=getattr(args, "strict_poles", False),
        seed=getattr(args, "seed", 0),
    )
    if args.command == "interpolate":
        return cmd_interpolate(cfg, args.refine, args.grid_out)
    if args.command == "convergence":
        return cmd_convergence(cfg, h1=not args.no_h1)
    if args.command == "cubature":
        return cmd_cubature(cfg, args.N_ref)
    if args.command == "verify-hypothesis":
        return cmd_verify_hypothesis(cfg, args.N_max, args.alpha, args.extended, not args.no_fail_fast)
    return cmd_bench(cfg, args.repeat, args.warmup)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return _dispatch(args)
    except (SampleFileError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_IO
    except (ValueError, KeyError, ArithmeticError, ImportError, AttributeError) as exc:
        logger.error("%s", exc.args[0] if isinstance(exc, KeyError) and exc.args else exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
