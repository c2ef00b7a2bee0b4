"""Exact dynamic programs for the weighted L1- and L2-Potts problems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import GammaLike, StepSignal, WeightedSignal, as_gamma
from .histogram import D, IndexedLinkedHistogram, _insert, _remove


@dataclass(frozen=True, eq=False)
class Partition:
    """Right-to-left boundary table of a Potts solve.

    ``p[r - 1]`` is the sample count before the last segment of the optimal
    prefix of length ``r``; ``B[r - 1]`` is that prefix's optimal energy.
    The implicit ``B_0`` is ``-gamma``.
    """

    p: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.int64)
        B = np.asarray(self.B, dtype=np.float64)
        if p.ndim != 1 or p.shape != B.shape or p.size == 0:
            raise ValueError("p and B must be nonempty 1-D arrays of equal length")
        if np.any(p < 0) or np.any(p >= np.arange(1, p.size + 1)):
            raise ValueError("invalid partition: need 0 <= p_r < r")
        p.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.p.size

    @property
    def energy(self) -> float:
        return float(self.B[-1])

    def boundaries(self) -> np.ndarray:
        """Segment boundaries ``0 = b_0 < ... < b_m = n`` recovered from p."""
        out = [self.n]
        r = self.n
        while r > 0:
            r = int(self.p[r - 1])
            out.append(r)
        return np.array(out[::-1], dtype=np.int64)


@dataclass
class SolveStats:
    max_shifts: int = 0
    total_shifts: int = 0
    peak_nodes: int = 0


@dataclass(frozen=True, eq=False)
class MomentTables:
    """Cumulative sums of w, w*f and w*f^2 (entry 0 is zero)."""

    s0: np.ndarray
    s1: np.ndarray
    s2: np.ndarray

    @classmethod
    def of(cls, f: WeightedSignal) -> "MomentTables":
        w, x = f.weights, f.values
        z = np.zeros(1)
        return cls(np.concatenate((z, np.cumsum(w))),
                   np.concatenate((z, np.cumsum(w * x))),
                   np.concatenate((z, np.cumsum(w * x * x))))

    def deviation(self, l: int, r: int) -> float:
        """Weighted squared deviation from the mean on samples l..r (1-based)."""
        s0 = self.s0[r] - self.s0[l - 1]
        s1 = self.s1[r] - self.s1[l - 1]
        s2 = self.s2[r] - self.s2[l - 1]
        return max(s2 - s1 * s1 / s0, 0.0)


@njit(cache=True, _nrt=False)
def _partition_l1(f, w, gamma, B, p, nf, ni, A, sample_weight, present, sf, si):
    n = f.size
    B[0] = -gamma
    for r in range(1, n + 1):
        _insert(f[r - 1], w[r - 1], nf, ni, A, sample_weight, present, sf, si)
        # seeded with d_[1,r]: the l = 1 candidate is the single-segment fit
        d = sf[D]
        Br = np.inf
        for l in range(1, r + 1):
            b = B[l - 1] + gamma + d
            if b <= Br:
                Br = b
                p[r - 1] = l - 1
            if l < r:
                _remove(l - 1, w[l - 1], nf, ni, A, sample_weight, present, sf, si)
                d = sf[D]
        B[r] = Br


@njit(cache=True)
def _partition_l2(s0, s1, s2, gamma):
    n = s0.size - 1
    B = np.empty(n + 1)
    B[0] = -gamma
    p = np.zeros(n, dtype=np.int64)
    for r in range(1, n + 1):
        Br = np.inf
        for l in range(1, r + 1):
            m0 = s0[r] - s0[l - 1]
            m1 = s1[r] - s1[l - 1]
            m2 = s2[r] - s2[l - 1]
            d = m2 - m1 * m1 / m0
            if d < 0.0:
                d = 0.0
            b = B[l - 1] + gamma + d
            if b <= Br:
                Br = b
                p[r - 1] = l - 1
        B[r] = Br
    return B[1:], p


def _as_signal(f) -> WeightedSignal:
    return f if isinstance(f, WeightedSignal) else WeightedSignal(f)


def find_best_partition_l1(f, gamma: GammaLike, stats: SolveStats | None = None) -> Partition:
    """Optimal L1-Potts partition via the indexed linked histogram.

    O(n^2) time and O(n) space when the weight ratio is bounded.
    """
    f = _as_signal(f)
    g = as_gamma(gamma)
    h = IndexedLinkedHistogram(f.n)
    B = np.empty(f.n + 1)
    p = np.zeros(f.n, dtype=np.int64)
    _partition_l1(np.ascontiguousarray(f.values), np.ascontiguousarray(f.weights), g, B, p,
                  h.nf, h.ni, h.A, h.sample_weight, h.present, h.sf, h.si)
    if stats is not None:
        stats.max_shifts = int(h.max_shifts)
        stats.total_shifts = int(h.total_shifts)
        stats.peak_nodes = int(h.n_nodes)
    return Partition(p, B[1:])


def weighted_median(values: np.ndarray, weights: np.ndarray) -> float:
    """Lower weighted median: smallest value whose cumulative weight reaches half."""
    order = np.argsort(values, kind="stable")
    cw = np.cumsum(weights[order])
    k = int(np.searchsorted(cw, 0.5 * cw[-1], side="left"))
    return float(values[order[min(k, order.size - 1)]])


def _check_partition(p: Partition, n: int) -> None:
    if p.n != n:
        raise ValueError(f"partition covers {p.n} samples, data has {n}")


def reconstruct_from_partition_l1(p: Partition, f) -> StepSignal:
    f = _as_signal(f)
    _check_partition(p, f.n)
    b = p.boundaries()
    levels = [weighted_median(f.values[lo:hi], f.weights[lo:hi]) for lo, hi in zip(b[:-1], b[1:])]
    return StepSignal(b, levels).canonical()


def reconstruct_from_partition_l2(p: Partition, f) -> StepSignal:
    f = _as_signal(f)
    _check_partition(p, f.n)
    b = p.boundaries()
    levels = [np.average(f.values[lo:hi], weights=f.weights[lo:hi]) for lo, hi in zip(b[:-1], b[1:])]
    return StepSignal(b, levels).canonical()


def min_l1_potts(f, gamma: GammaLike, stats: SolveStats | None = None) -> StepSignal:
    """Exact minimizer of gamma*J(u) + sum_i w_i |u_i - f_i|."""
    f = _as_signal(f)
    return reconstruct_from_partition_l1(find_best_partition_l1(f, gamma, stats), f)


def find_best_partition_l2(f, gamma: GammaLike) -> Partition:
    f = _as_signal(f)
    t = MomentTables.of(f)
    B, p = _partition_l2(t.s0, t.s1, t.s2, as_gamma(gamma))
    return Partition(p, B)


def min_l2_potts(f, gamma: GammaLike) -> StepSignal:
    """Exact minimizer of gamma*J(u) + sum_i w_i (u_i - f_i)^2."""
    f = _as_signal(f)
    return reconstruct_from_partition_l2(find_best_partition_l2(f, gamma), f)
