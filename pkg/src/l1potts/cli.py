"""Command line interface.

Exit codes: 0 ok, 1 usage, 2 bad input data, 3 deconvolution did not stall.
``POTTS_SEED`` overrides ``--seed`` when set.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import WeightedSignal, potts_energy_l1, potts_energy_l2
from .deconvolution import (DeconvBounds, InfeasibleBounds, SplitParams, convolve_same,
                            deconv_gamma_range, min_kl1potts_split)
from .experiments import (BENCH_COLUMNS, COMPARE_COLUMNS, CONVERGENCE_COLUMNS, DEFAULT_SUITE,
                          ConvergenceConfig, convergence_study, method_comparison,
                          runtime_scaling, write_csv)
from .oracle import default_fixture_cases, write_fixtures
from .signals import NoiseSpec, add_noise, canonical_step_signal, make_kernel
from .solver import min_l1_potts, min_l2_potts

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NOCONV = 0, 1, 2, 3

NOISE_KINDS = {"gauss": "gaussian", "laplace": "laplacian", "saltpepper": "salt_pepper"}


class DataError(Exception):
    pass


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def fmt(x: float) -> str:
    return repr(float(x))


def read_signal(path: str | Path) -> tuple[np.ndarray, WeightedSignal]:
    """Parse an ``x,f`` or ``x,f,w`` CSV file; raises DataError."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise DataError(f"cannot read {path}: {e.strerror}") from None
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise DataError(f"{path}: empty file")
    rows = list(csv.reader(lines))
    header = [h.strip() for h in rows[0]]
    if header not in (["x", "f"], ["x", "f", "w"]):
        raise DataError(f"{path}: header must be 'x,f' or 'x,f,w', got {','.join(header)!r}")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=np.float64)
    except ValueError as e:
        raise DataError(f"{path}: {e}") from None
    if data.size == 0:
        raise DataError(f"{path}: no samples")
    if data.ndim != 2 or data.shape[1] != len(header):
        raise DataError(f"{path}: every row needs {len(header)} columns")
    if not np.all(np.isfinite(data)):
        raise DataError(f"{path}: NaN or infinite entries")
    x = data[:, 0]
    if np.any(np.diff(x) <= 0):
        raise DataError(f"{path}: x must be strictly increasing")
    w = data[:, 2] if len(header) == 3 else None
    if w is not None and np.any(w <= 0):
        raise DataError(f"{path}: weights must be positive")
    return x, WeightedSignal(data[:, 1], w)


def write_columns(path: str | Path, names: Sequence[str], *cols) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(names) + "\n")
        for row in zip(*cols):
            fh.write(",".join(fmt(v) for v in row) + "\n")


def _seed(args) -> int:
    env = os.environ.get("POTTS_SEED")
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"POTTS_SEED must be an integer, got {env!r}") from None
    return args.seed


def _kernel(spec: str):
    try:
        return make_kernel(spec)
    except OSError as e:
        raise DataError(f"cannot read kernel: {e}") from None
    except ValueError as e:
        raise DataError(str(e)) from None


def cmd_generate(args) -> int:
    if args.noise is None and (args.sigma is not None or args.frac is not None):
        raise UsageError("--sigma/--frac need --noise")
    if args.noise in ("gauss", "laplace") and args.sigma is None:
        raise UsageError(f"--noise {args.noise} needs --sigma")
    if args.noise == "saltpepper" and args.frac is None:
        raise UsageError("--noise saltpepper needs --frac")
    if args.n < 16:
        raise UsageError("--n must be at least 16")
    seed = _seed(args)
    g = canonical_step_signal(args.n).to_array()
    f = g
    if args.blur:
        try:
            f = convolve_same(f, make_kernel(args.blur))
        except ValueError as e:
            raise UsageError(str(e)) from None
    if args.noise:
        spec = NoiseSpec(NOISE_KINDS[args.noise], sigma=args.sigma or 0.0,
                         frac=args.frac or 0.0, seed=seed)
        f = add_noise(f, spec)
    x = (np.arange(args.n) + 0.5) / args.n
    out = Path(args.out)
    write_columns(out.with_name(out.name + ".truth.csv"), ("x", "f"), x, g)
    write_columns(out, ("x", "f"), x, f)
    return EXIT_OK


def cmd_denoise(args) -> int:
    x, f = read_signal(args.inp)
    if args.method == "l1potts":
        u = min_l1_potts(f, args.gamma)
        energy = potts_energy_l1(u, f, args.gamma)
    else:
        u = min_l2_potts(f, args.gamma)
        energy = potts_energy_l2(u, f, args.gamma)
    write_columns(args.out, ("x", "u"), x, u.to_array())
    print(f"energy={fmt(energy)} jumps={u.jumps}")
    return EXIT_OK


def cmd_deconvolve(args) -> int:
    x, f = read_signal(args.inp)
    if not np.all(f.weights == f.weights[0]):
        raise DataError("deconvolution expects equally weighted samples")
    K = _kernel(args.kernel)
    try:
        params = SplitParams(args.gamma, mu0=args.mu0, max_outer=args.max_outer)
    except ValueError as e:
        raise UsageError(str(e)) from None
    try:
        rep = min_kl1potts_split(f.values, K, params)
    except ValueError as e:
        raise DataError(str(e)) from None
    write_columns(args.out, ("x", "u"), x, rep.u.to_array())
    print(f"outer={rep.outer_iterations} objective={fmt(rep.objective)} jumps={rep.u.jumps} "
          f"stalled={'yes' if rep.stalled else 'no'}")
    return EXIT_OK if rep.stalled else EXIT_NOCONV


def cmd_bounds(args) -> int:
    try:
        b = DeconvBounds(args.hmin, args.hmax, args.lmin, args.kappa, args.eta)
    except ValueError as e:
        raise UsageError(str(e)) from None
    try:
        lo, hi = deconv_gamma_range(b)
    except InfeasibleBounds as e:
        print(f"infeasible max_kappa_eta={e.max_kappa_eta:.12g}")
        return EXIT_OK
    print(f"gamma_lo={lo:.12g} gamma_hi={hi:.12g}")
    return EXIT_OK


def _int_list(s: str) -> list[int]:
    try:
        out = [int(t) for t in s.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def cmd_bench(args) -> int:
    sizes = sorted(args.sizes)
    if sizes[0] < 16:
        raise UsageError("sizes must be at least 16")
    recs = runtime_scaling(sizes, reps=args.reps, seed=_seed(args))
    write_csv(recs, BENCH_COLUMNS, args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    seed = _seed(args)
    gammas = {"l1potts": (args.gamma_l1,), "l2potts": (args.gamma_l2,)}
    rows = method_comparison(DEFAULT_SUITE, gammas, range(seed, seed + args.seeds), n=args.n)
    write_csv(rows, COMPARE_COLUMNS, args.out)
    return EXIT_OK


def cmd_converge(args) -> int:
    cfg = ConvergenceConfig(levels=args.levels, gamma=args.gamma)
    res = convergence_study(args.levels, _seed(args), cfg)
    write_csv(res.rows, CONVERGENCE_COLUMNS, args.out)
    return EXIT_OK


def cmd_fixtures(args) -> int:
    n = write_fixtures(args.out, default_fixture_cases())
    print(f"wrote {n} fixtures to {args.out}")
    return EXIT_OK


def _positive(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be positive: {s!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="l1potts", description="Exact L1-Potts segmentation and deconvolution.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a canonical test signal and its truth")
    g.add_argument("--kind", choices=["steps"], default="steps")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--noise", choices=sorted(NOISE_KINDS))
    g.add_argument("--sigma", type=float)
    g.add_argument("--frac", type=float)
    g.add_argument("--blur", help="box:M or gauss:A:M")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    d = sub.add_parser("denoise", help="exact L1- or L2-Potts minimizer")
    d.add_argument("--method", choices=["l1potts", "l2potts"], default="l1potts")
    d.add_argument("--gamma", type=_positive, required=True)
    d.add_argument("--in", dest="inp", required=True)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_denoise)

    c = sub.add_parser("deconvolve", help="known-kernel deconvolution by splitting")
    c.add_argument("--kernel", required=True, help="box:M, gauss:A:M or file:PATH")
    c.add_argument("--gamma", type=_positive, required=True)
    c.add_argument("--mu0", type=_positive)
    c.add_argument("--max-outer", type=int, default=50)
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_deconvolve)

    b = sub.add_parser("bounds", help="admissible gamma range for blind recovery")
    for name in ("hmin", "hmax", "lmin", "kappa", "eta"):
        b.add_argument(f"--{name}", type=float, required=True)
    b.set_defaults(func=cmd_bounds)

    be = sub.add_parser("bench", help="runtime scaling of both solvers (sequential)")
    be.add_argument("--sizes", type=_int_list, default=[1024, 2048, 4096, 8192, 16384])
    be.add_argument("--reps", type=int, default=5)
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--out")
    be.set_defaults(func=cmd_bench)

    co = sub.add_parser("compare", help="L1 vs L2 Potts under the three noise models")
    co.add_argument("--seeds", type=int, default=50, help="number of consecutive seeds")
    co.add_argument("--seed", type=int, default=0, help="first seed")
    co.add_argument("--n", type=int, default=256)
    co.add_argument("--gamma-l1", type=_positive, default=1.0)
    co.add_argument("--gamma-l2", type=_positive, default=0.25)
    co.add_argument("--out")
    co.set_defaults(func=cmd_compare)

    cv = sub.add_parser("converge", help="nested-grid refinement study")
    cv.add_argument("--levels", type=int, default=5)
    cv.add_argument("--seed", type=int, default=0)
    cv.add_argument("--gamma", type=_positive, default=ConvergenceConfig.gamma)
    cv.add_argument("--out")
    cv.set_defaults(func=cmd_converge)

    fx = sub.add_parser("fixtures", help="regenerate oracle regression fixtures")
    fx.add_argument("--out", required=True)
    fx.set_defaults(func=cmd_fixtures)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # --help exits 0, parse errors exit 1
        return int(e.code or 0)
    try:
        if getattr(args, "reps", 1) < 1 or getattr(args, "seeds", 1) < 1:
            raise UsageError("counts must be positive")
        if getattr(args, "max_outer", 1) < 1 or getattr(args, "levels", 1) < 1:
            raise UsageError("counts must be positive")
        return args.func(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"l1potts: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(f"l1potts: error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
