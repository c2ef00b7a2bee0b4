"""Ground truths, noise models, kernels and sampling operators.

Randomness comes from numpy's PCG64 generator seeded through a
``SeedSequence``; the same (seed, spec) always yields the same bytes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from .core import StepSignal, WeightedSignal
from .deconvolution import DeconvBounds, Kernel, NORM_TOL

log = logging.getLogger(__name__)

# Canonical truth: six plateaus, lengths in 1/256 units, all jumps 0.25.
PLATEAU_UNITS = (40, 48, 40, 44, 40, 44)
CANONICAL_LEVELS = (0.25, 0.5, 0.75, 0.5, 0.25, 0.5)
CANONICAL_H_MIN = 0.25
CANONICAL_H_MAX = 0.25
MIN_FINE_FACTOR = 16


def canonical_step_signal(n: int) -> StepSignal:
    """The repo's reference 6-plateau signal on ``n >= 16`` samples.

    Values lie in [0, 1], every jump has height 0.25 and every plateau
    has at least n/8 samples.
    """
    if n < 16:
        raise ValueError(f"canonical signal needs n >= 16, got {n}")
    cum = np.cumsum((0,) + PLATEAU_UNITS)
    b = np.floor(n * cum / cum[-1] + 0.5).astype(np.int64)
    return StepSignal(b, CANONICAL_LEVELS)


def canonical_l_min(n: int) -> float:
    """Shortest plateau of the sampled canonical signal, in continuous units."""
    return float(np.diff(canonical_step_signal(n).boundaries).min()) / n


def canonical_bounds(n: int, K: Kernel) -> DeconvBounds:
    """Blind-recovery bounds for the canonical signal on a uniform n-grid."""
    h = 1.0 / n
    return DeconvBounds(CANONICAL_H_MIN, CANONICAL_H_MAX, canonical_l_min(n), K.kappa(h), h)


NoiseKind = Literal["none", "gaussian", "laplacian", "salt_pepper"]


@dataclass(frozen=True)
class NoiseSpec:
    kind: NoiseKind = "none"
    sigma: float = 0.0
    frac: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "laplacian", "salt_pepper"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not self.sigma >= 0:
            raise ValueError("sigma must be nonnegative")
        if not 0 <= self.frac <= 1:
            raise ValueError("frac must lie in [0, 1]")


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def laplacian(rng: np.random.Generator, sigma: float, size: int) -> np.ndarray:
    """Inverse-CDF samples of the density exp(-sqrt(2)|x|/sigma) / (sqrt(2) sigma)."""
    u = rng.random(size) - 0.5
    return -(sigma / math.sqrt(2.0)) * np.sign(u) * np.log1p(-2.0 * np.abs(u))


def add_noise(g, spec: NoiseSpec) -> np.ndarray:
    g = np.asarray(g, dtype=np.float64).ravel()
    if spec.kind == "none":
        return g.copy()
    rng = rng_for(spec.seed)
    if spec.kind == "gaussian":
        return g + rng.normal(0.0, spec.sigma, g.size)
    if spec.kind == "laplacian":
        return g + laplacian(rng, spec.sigma, g.size)
    hit = rng.random(g.size) < spec.frac
    junk = rng.random(g.size)
    return np.where(hit, junk, g)


def load_kernel_file(path: str | Path) -> Kernel:
    taps = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip().rstrip(",")
        if line:
            taps.append(float(line))
    t = np.asarray(taps)
    if t.size == 0:
        raise ValueError(f"kernel file {path} holds no taps")
    s = t.sum()
    if not s > 0:
        raise ValueError("kernel taps must have a positive sum")
    if abs(s - 1.0) > NORM_TOL:
        log.warning("kernel file %s sums to %g; normalizing", path, s)
        t = t / s
    return Kernel(t)


def make_kernel(spec: str) -> Kernel:
    """Parse ``box:m``, ``gauss:a:m`` or ``file:path``."""
    kind, _, rest = spec.partition(":")
    if kind == "file":
        return load_kernel_file(rest)
    parts = rest.split(":") if rest else []
    if kind == "box" and len(parts) == 1:
        m = int(parts[0])
        _check_odd(m)
        return Kernel(np.full(m, 1.0 / m))
    if kind == "gauss" and len(parts) == 2:
        a, m = float(parts[0]), int(parts[1])
        _check_odd(m)
        x = np.arange(m) - m // 2
        t = np.exp(-(a * x) ** 2)
        return Kernel(t / t.sum())
    raise ValueError(f"bad kernel spec {spec!r}; expected box:M, gauss:A:M or file:PATH")


def _check_odd(m: int) -> None:
    if m < 1 or m % 2 == 0:
        raise ValueError(f"kernel length must be a positive odd integer, got {m}")


@dataclass(frozen=True, eq=False)
class Grid:
    """Partition points 0 <= x_0 < ... < x_n <= 1 of the unit interval."""

    points: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.points, dtype=np.float64).ravel()
        if x.size < 2:
            raise ValueError("a grid needs at least two points")
        if np.any(np.diff(x) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if x[0] < 0 or x[-1] > 1:
            raise ValueError("grid points must lie in [0, 1]")
        x = x.copy()
        x.setflags(write=False)
        object.__setattr__(self, "points", x)

    @classmethod
    def uniform(cls, n: int) -> "Grid":
        return cls(np.linspace(0.0, 1.0, n + 1))

    @property
    def n(self) -> int:
        return self.points.size - 1

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.points)

    @property
    def eta(self) -> float:
        return float(self.lengths.max())

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.points[:-1] + self.points[1:])

    def refine(self) -> "Grid":
        """Bisect every interval."""
        x = self.points
        return Grid(np.sort(np.concatenate((x, 0.5 * (x[:-1] + x[1:])))))


def alternating_grid(n: int) -> Grid:
    """Unit-interval grid of n cells whose lengths alternate a, 2a, a, ..."""
    rel = np.where(np.arange(n) % 2 == 0, 1.0, 2.0)
    x = np.concatenate(([0.0], np.cumsum(rel)))
    return Grid(x / x[-1])


def nested_grids(base: int, levels: int) -> list[Grid]:
    """Refinement schedule: an alternating base grid bisected level by level.

    Every grid has a weight ratio of 2 and contains its predecessors.
    """
    grids = [alternating_grid(base)]
    for _ in range(levels - 1):
        grids.append(grids[-1].refine())
    return grids


def _fine_cells(f_fine: np.ndarray, grid: Grid) -> np.ndarray:
    N = f_fine.size
    pos = grid.points * N
    cells = np.rint(pos).astype(np.int64)
    if not np.allclose(pos, cells, rtol=0, atol=1e-9 * N) or cells[0] != 0 or cells[-1] != N:
        raise ValueError("grid points do not align with the fine grid")
    if np.diff(cells).min() < MIN_FINE_FACTOR:
        raise ValueError(f"fine grid must be at least {MIN_FINE_FACTOR}x finer than the target")
    return cells


def sample_integral(f_fine, grid: Grid) -> WeightedSignal:
    """Mean of f over each interval, from samples on a uniform fine grid."""
    f_fine = np.asarray(f_fine, dtype=np.float64).ravel()
    cells = _fine_cells(f_fine, grid)
    s = np.concatenate(([0.0], np.cumsum(f_fine)))
    means = (s[cells[1:]] - s[cells[:-1]]) / np.diff(cells)
    return WeightedSignal(means, grid.lengths)


def sample_point(f_fine, grid: Grid) -> WeightedSignal:
    """Value of f at each interval midpoint (the fine cell containing it)."""
    f_fine = np.asarray(f_fine, dtype=np.float64).ravel()
    _fine_cells(f_fine, grid)
    idx = np.minimum((grid.midpoints * f_fine.size).astype(np.int64), f_fine.size - 1)
    return WeightedSignal(f_fine[idx], grid.lengths)
