"""Scripted studies: runtime scaling, noise robustness and grid refinement.

Every study is deterministic given its seed and configuration, and returns
plain row dicts that ``write_csv`` serializes with a fixed column order.
"""

from __future__ import annotations

import csv
import statistics
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import StepSignal, WeightedSignal, jump_set_distance, l1_distance, potts_energy_l1
from .signals import (CANONICAL_H_MIN, NoiseSpec, add_noise, canonical_step_signal,
                      nested_grids, sample_integral)
from .solver import min_l1_potts, min_l2_potts

BENCH_COLUMNS = ("n", "method", "seconds", "reps")
COMPARE_COLUMNS = ("noise", "sigma", "frac", "method", "gamma", "seed",
                   "jump_err", "max_offset", "l1_err")
CONVERGENCE_COLUMNS = ("level", "n", "potts_value", "l1_dist_to_finest")

SOLVERS = {"l1potts": min_l1_potts, "l2potts": min_l2_potts}

# Jump penalties for the noise study. The L2 data term squares deviations,
# so a jump of height h is worth h^2 rather than h; scaling the penalty by
# the smallest jump height puts both methods on the same footing.
DEFAULT_GAMMAS = {"l1potts": (1.0,), "l2potts": (CANONICAL_H_MIN,)}


@dataclass(frozen=True)
class BenchRecord:
    n: int
    method: str
    seconds: float
    reps: int


def _bench_signal(n: int, seed: int) -> WeightedSignal:
    g = canonical_step_signal(n).to_array()
    return WeightedSignal(add_noise(g, NoiseSpec("laplacian", sigma=0.1, seed=seed)))


def runtime_scaling(sizes: Sequence[int], reps: int = 5, seed: int = 0,
                    methods: Sequence[str] = ("l1potts", "l2potts"),
                    gamma: float = 1.0) -> list[BenchRecord]:
    """Median wall time of ``reps`` timed solves after one discarded warm-up."""
    if list(sizes) != sorted(sizes):
        raise ValueError("sizes must be ascending")
    if reps < 1:
        raise ValueError("reps must be positive")
    out = []
    for n in sizes:
        f = _bench_signal(n, seed)
        for method in methods:
            solve = SOLVERS[method]
            solve(f, gamma)
            times = []
            for _ in range(reps):
                t0 = time.perf_counter()
                solve(f, gamma)
                times.append(time.perf_counter() - t0)
            out.append(BenchRecord(n, method, statistics.median(times), reps))
    return out


def loglog_slope(records: Iterable[BenchRecord], method: str = "l1potts") -> float:
    pts = [(r.n, r.seconds) for r in records if r.method == method]
    if len(pts) < 2:
        raise ValueError("need at least two sizes to fit a slope")
    x, y = np.log([p[0] for p in pts]), np.log([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])


@dataclass(frozen=True)
class NoiseCase:
    kind: str
    sigma: float = 0.0
    frac: float = 0.0

    def spec(self, seed: int) -> NoiseSpec:
        return NoiseSpec(self.kind, self.sigma, self.frac, seed)


DEFAULT_SUITE = (
    NoiseCase("laplacian", sigma=0.1),
    NoiseCase("salt_pepper", frac=0.25),
    NoiseCase("gaussian", sigma=0.1),
)


def method_comparison(suite: Sequence[NoiseCase] = DEFAULT_SUITE,
                      gamma_grid: Mapping[str, Sequence[float]] = DEFAULT_GAMMAS,
                      seeds: Iterable[int] = range(50), n: int = 256) -> list[dict]:
    """One row per (noise case, method, gamma, seed) on the canonical signal."""
    g = canonical_step_signal(n)
    ga = g.to_array()
    seeds = list(seeds)
    rows = []
    for case in suite:
        for method, gammas in gamma_grid.items():
            solve = SOLVERS[method]
            for gamma in gammas:
                for seed in seeds:
                    f = WeightedSignal(add_noise(ga, case.spec(seed)))
                    u = solve(f, gamma)
                    jerr, off = jump_set_distance(u, g)
                    rows.append({
                        "noise": case.kind, "sigma": case.sigma, "frac": case.frac,
                        "method": method, "gamma": gamma, "seed": seed,
                        "jump_err": jerr, "max_offset": off,
                        "l1_err": l1_distance(u, g) / n,
                    })
    return rows


def success_rates(rows: Iterable[dict]) -> dict[tuple, float]:
    """(noise, sigma, frac, method, gamma) -> share of seeds with exact jump count."""
    hits: dict[tuple, list[int]] = {}
    for r in rows:
        key = (r["noise"], r["sigma"], r["frac"], r["method"], r["gamma"])
        hits.setdefault(key, []).append(int(r["jump_err"]) == 0)
    return {k: sum(v) / len(v) for k, v in hits.items()}


@dataclass(frozen=True)
class ConvergenceConfig:
    """Nested-grid study on the canonical truth.

    The base grid has ``base`` cells alternating in length a, 2a; each level
    bisects the previous one. Data live on a uniform fine grid of
    ``fine_n`` cells and are integral-sampled onto each level, with weights
    equal to the interval lengths, so ``gamma`` is in continuous units.
    """

    levels: int = 5
    base: int = 16
    fine_n: int = 6144
    gamma: float = 0.01
    sigma: float = 0.1


@dataclass
class ConvergenceResult:
    rows: list[dict]
    fine_optimum: float
    minimizers: list[StepSignal]


def _lift(u: StepSignal, cells: np.ndarray, fine_n: int) -> StepSignal:
    return StepSignal(cells[u.boundaries], u.levels)


def convergence_study(levels: int = 5, seed: int = 0,
                      config: ConvergenceConfig | None = None) -> ConvergenceResult:
    """Per level: the minimizer's fine-grid Potts value and its L1 distance
    to the finest level's minimizer (both in continuous units)."""
    cfg = config or ConvergenceConfig(levels=levels)
    if levels != cfg.levels:
        cfg = ConvergenceConfig(levels, cfg.base, cfg.fine_n, cfg.gamma, cfg.sigma)
    N = cfg.fine_n
    truth = canonical_step_signal(N).to_array()
    data = add_noise(truth, NoiseSpec("laplacian", sigma=cfg.sigma, seed=seed))
    fine = WeightedSignal(data, np.full(N, 1.0 / N))

    lifted = []
    sizes = []
    for grid in nested_grids(cfg.base, cfg.levels):
        f = sample_integral(data, grid)
        u = min_l1_potts(f, cfg.gamma)
        cells = np.rint(grid.points * N).astype(np.int64)
        lifted.append(_lift(u, cells, N))
        sizes.append(grid.n)
    fine_opt = potts_energy_l1(min_l1_potts(fine, cfg.gamma), fine, cfg.gamma)

    w = fine.weights
    rows = [{
        "level": k,
        "n": sizes[k],
        "potts_value": potts_energy_l1(u.canonical(), fine, cfg.gamma),
        "l1_dist_to_finest": l1_distance(u, lifted[-1], w),
    } for k, u in enumerate(lifted)]
    return ConvergenceResult(rows, fine_opt, lifted)


def write_csv(rows: Iterable, columns: Sequence[str], path: str | Path | None = None) -> None:
    """Write rows (dicts or dataclasses) to ``path``, or stdout when None."""
    fh = sys.stdout if path is None else open(path, "w", newline="")
    try:
        wr = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        wr.writeheader()
        for r in rows:
            wr.writerow(asdict(r) if not isinstance(r, dict) else r)
    finally:
        if path is not None:
            fh.close()
