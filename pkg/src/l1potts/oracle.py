"""Slow, independent references for certifying the fast solver.

``enumerate_exact`` tries every partition; ``naive_dp`` runs the same
Bellman recursion as the fast solver but recomputes each segment cost by
sorting. Neither shares code with the histogram.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Literal

import numpy as np
from numba import njit

from .core import GammaLike, StepSignal, WeightedSignal, as_gamma
from .solver import Partition

MAX_ENUM_N = 16
TIE_RTOL = 1e-12

Norm = Literal["L1", "L2"]


def _lower_median(v: np.ndarray, w: np.ndarray) -> float:
    order = np.argsort(v, kind="stable")
    cw = np.cumsum(w[order])
    k = int(np.argmax(2.0 * cw >= cw[-1]))
    return float(v[order[k]])


def _segment_fit(v: np.ndarray, w: np.ndarray, norm: Norm) -> tuple[float, float]:
    if norm == "L1":
        mu = _lower_median(v, w)
        return mu, float(np.dot(w, np.abs(v - mu)))
    mu = float(np.dot(w, v) / w.sum())
    return mu, float(np.dot(w, (v - mu) ** 2))


def enumerate_exact(f: WeightedSignal, gamma: GammaLike,
                    norm: Norm = "L1") -> tuple[StepSignal, float]:
    """Global optimum over all 2^(n-1) partitions.

    Among optimal partitions (relative tolerance 1e-12) the one with the
    lexicographically smallest sorted boundary tuple is returned.
    """
    if norm not in ("L1", "L2"):
        raise ValueError(f"unknown norm {norm!r}")
    if not isinstance(f, WeightedSignal):
        f = WeightedSignal(f)
    n = f.n
    if n > MAX_ENUM_N:
        raise ValueError(f"enumeration limited to n <= {MAX_ENUM_N}, got {n}")
    g = as_gamma(gamma)
    # cost[l, r]: best constant fit of samples l..r inclusive
    cost = np.zeros((n, n))
    level = np.zeros((n, n))
    for l in range(n):
        for r in range(l, n):
            level[l, r], cost[l, r] = _segment_fit(f.values[l:r + 1], f.weights[l:r + 1], norm)

    masks = np.arange(1 << (n - 1), dtype=np.int64)
    # bit k set <=> a segment boundary between samples k and k + 1
    cut = ((masks[:, None] >> np.arange(n - 1)) & 1).astype(bool)
    starts = np.zeros((masks.size, n), dtype=np.int64)
    starts[:, 1:] = np.where(cut, np.arange(1, n), 0)
    starts = np.maximum.accumulate(starts, axis=1)
    ends = np.ones((masks.size, n), dtype=bool)
    ends[:, :-1] = cut
    seg_cost = np.where(ends, cost[starts, np.arange(n)], 0.0)
    energy = seg_cost.sum(axis=1) + g * cut.sum(axis=1)

    best = energy.min()
    tied = np.flatnonzero(energy <= best + TIE_RTOL * max(1.0, abs(best)))

    def bset(m: int) -> tuple[int, ...]:
        return tuple(k + 1 for k in range(n - 1) if m >> k & 1)

    inner = min((bset(int(m)) for m in tied))
    b = np.array((0,) + inner + (n,))
    levels = [level[lo, hi - 1] for lo, hi in zip(b[:-1], b[1:])]
    return StepSignal(b, levels).canonical(), float(best)


@njit(cache=True)
def _naive_tables(f, w, gamma):
    # For each right end r the window grows leftwards and is kept sorted by
    # insertion; each cell then scans it for the lower weighted median and
    # sums the deviation from scratch.
    n = f.size
    B = np.empty(n + 1)
    B[0] = -gamma
    p = np.zeros(n, dtype=np.int64)
    sv = np.empty(n)
    sw = np.empty(n)
    for r in range(1, n + 1):
        Br = np.inf
        best = 0
        size = 0
        tot = 0.0
        for l in range(r, 0, -1):
            x, wx = f[l - 1], w[l - 1]
            k = size
            while k > 0 and sv[k - 1] > x:
                sv[k] = sv[k - 1]
                sw[k] = sw[k - 1]
                k -= 1
            sv[k] = x
            sw[k] = wx
            size += 1
            tot += wx
            cum = 0.0
            mu = sv[size - 1]
            for k in range(size):
                cum += sw[k]
                if 2.0 * cum >= tot:
                    mu = sv[k]
                    break
            d = 0.0
            for k in range(size):
                d += sw[k] * abs(sv[k] - mu)
            b = B[l - 1] + gamma + d
            # ties go to the larger l; l runs downwards, so keep the first
            if b < Br:
                Br = b
                best = l - 1
        B[r] = Br
        p[r - 1] = best
    return B[1:], p


def naive_dp(f: WeightedSignal, gamma: GammaLike) -> tuple[Partition, float]:
    """Bellman recursion with sort-based segment costs, O(n^3)."""
    if not isinstance(f, WeightedSignal):
        f = WeightedSignal(f)
    B, p = _naive_tables(np.ascontiguousarray(f.values), np.ascontiguousarray(f.weights),
                         as_gamma(gamma))
    part = Partition(p, B)
    return part, part.energy


FIXTURE_COLUMNS = ("name", "gamma", "values", "weights", "energy", "boundaries", "B")


def _join(xs: Iterable) -> str:
    return " ".join(repr(float(x)) if not isinstance(x, (int, np.integer)) else str(int(x))
                    for x in xs)


def fixture_row(name: str, f: WeightedSignal, gamma: float) -> dict[str, str]:
    part, energy = naive_dp(f, gamma)
    return {
        "name": name,
        "gamma": repr(float(gamma)),
        "values": _join(f.values),
        "weights": _join(f.weights),
        "energy": repr(energy),
        "boundaries": _join(part.boundaries()),
        "B": _join(part.B),
    }


def write_fixtures(path: str | Path, cases: Iterable[tuple[str, WeightedSignal, float]]) -> int:
    """Write (instance, energy, partition) rows computed by ``naive_dp``."""
    rows = [fixture_row(name, f, g) for name, f, g in cases]
    with open(path, "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=FIXTURE_COLUMNS)
        wr.writeheader()
        wr.writerows(rows)
    return len(rows)


def read_fixtures(path: str | Path) -> list[dict]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append({
                "name": row["name"],
                "gamma": float(row["gamma"]),
                "signal": WeightedSignal([float(x) for x in row["values"].split()],
                                         [float(x) for x in row["weights"].split()]),
                "energy": float(row["energy"]),
                "boundaries": [int(x) for x in row["boundaries"].split()],
                "B": np.array([float(x) for x in row["B"].split()]),
            })
    return out


def default_fixture_cases() -> list[tuple[str, WeightedSignal, float]]:
    rng = np.random.default_rng(20240611)
    cases = [
        ("worked_example", WeightedSignal([2, 1, 3, 1, 3], [0.15, 0.25, 0.3, 0.2, 0.1]), 0.05),
        ("two_steps", WeightedSignal([0, 0, 1, 1]), 0.1),
        ("outlier_triplet", WeightedSignal([1, 2, 9]), 10.0),
        ("constant", WeightedSignal([0.5] * 8), 0.3),
    ]
    for k in range(6):
        n = int(rng.integers(8, 40))
        vals = np.round(rng.normal(0, 1, n) + np.repeat(rng.normal(0, 2, 3), -(-n // 3))[:n], 3)
        w = np.round(rng.uniform(0.2, 2.0, n), 3)
        cases.append((f"random_{k}", WeightedSignal(vals, w), float(np.round(rng.uniform(0.2, 3), 2))))
    return cases
