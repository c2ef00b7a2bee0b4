"""Shared domain types, Potts energies and segmentation metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

NO_OFFSET = -1  # sentinel returned by jump_set_distance when jump counts differ


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class WeightedSignal:
    """Samples ``values`` with strictly positive per-sample ``weights``."""

    values: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if self.weights is None:
            weights = np.ones_like(values)
        else:
            weights = np.asarray(self.weights, dtype=np.float64).ravel()
        if values.size < 1:
            raise ValueError("signal must contain at least one sample")
        if weights.shape != values.shape:
            raise ValueError(
                f"values and weights differ in length ({values.size} vs {weights.size})")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise ValueError("weights must be finite and strictly positive")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "weights", _frozen(weights))

    def __len__(self) -> int:
        return self.values.size

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def weight_ratio(self) -> float:
        return float(self.weights.max() / self.weights.min())


@dataclass(frozen=True)
class PottsParams:
    gamma: float

    def __post_init__(self):
        g = float(self.gamma)
        if not np.isfinite(g) or g <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        object.__setattr__(self, "gamma", g)


GammaLike = Union[float, PottsParams]


def as_gamma(gamma: GammaLike) -> float:
    if isinstance(gamma, PottsParams):
        return gamma.gamma
    return PottsParams(gamma).gamma


@dataclass(frozen=True, eq=False)
class StepSignal:
    """Piecewise constant signal on ``n`` samples.

    Segment ``i`` covers the half-open sample range
    ``boundaries[i]:boundaries[i + 1]`` and carries ``levels[i]``.
    """

    boundaries: np.ndarray
    levels: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=np.int64).ravel()
        lv = np.asarray(self.levels, dtype=np.float64).ravel()
        if b.size < 2 or b[0] != 0:
            raise ValueError("boundaries must start at 0 and contain at least two entries")
        if np.any(np.diff(b) <= 0):
            raise ValueError("boundaries must be strictly increasing")
        if lv.size != b.size - 1:
            raise ValueError("need exactly one level per segment")
        object.__setattr__(self, "boundaries", _frozen(b))
        object.__setattr__(self, "levels", _frozen(lv))

    @classmethod
    def from_array(cls, u: Sequence[float]) -> "StepSignal":
        """Canonical step signal (equal neighbours merged) of a dense array."""
        u = np.asarray(u, dtype=np.float64).ravel()
        if u.size == 0:
            raise ValueError("empty signal")
        starts = np.flatnonzero(u[1:] != u[:-1]) + 1
        b = np.concatenate(([0], starts, [u.size]))
        return cls(b, u[b[:-1]])

    @property
    def n(self) -> int:
        return int(self.boundaries[-1])

    @property
    def segments(self) -> int:
        return self.levels.size

    @property
    def jumps(self) -> int:
        """J(u): number of adjacent segment pairs with different levels."""
        return int(np.count_nonzero(self.levels[1:] != self.levels[:-1]))

    def jump_locations(self) -> np.ndarray:
        """Sample indices ``i`` such that ``u[i - 1] != u[i]``."""
        inner = self.boundaries[1:-1]
        return inner[self.levels[1:] != self.levels[:-1]]

    def canonical(self) -> "StepSignal":
        keep = np.concatenate(([True], self.levels[1:] != self.levels[:-1]))
        b = np.concatenate((self.boundaries[:-1][keep], [self.n]))
        return StepSignal(b, self.levels[keep])

    def to_array(self) -> np.ndarray:
        return np.repeat(self.levels, np.diff(self.boundaries))

    def __len__(self) -> int:
        return self.n


def _check_cover(u: StepSignal, n: int) -> None:
    if u.n != n:
        raise ValueError(f"step signal covers {u.n} samples, data has {n}")


def potts_energy_l1(u: StepSignal, f: WeightedSignal, gamma: GammaLike) -> float:
    """gamma * J(u) + sum_i w_i |u_i - f_i|."""
    _check_cover(u, f.n)
    dev = np.abs(u.to_array() - f.values)
    return as_gamma(gamma) * u.jumps + float(np.dot(f.weights, dev))


def potts_energy_l2(u: StepSignal, f: WeightedSignal, gamma: GammaLike) -> float:
    """gamma * J(u) + sum_i w_i (u_i - f_i)^2."""
    _check_cover(u, f.n)
    dev = u.to_array() - f.values
    return as_gamma(gamma) * u.jumps + float(np.dot(f.weights, dev * dev))


def l1_distance(u: StepSignal, v: StepSignal,
                weights: Optional[Sequence[float]] = None) -> float:
    if u.n != v.n:
        raise ValueError(f"coverage mismatch ({u.n} vs {v.n})")
    diff = np.abs(u.to_array() - v.to_array())
    if weights is None:
        return float(diff.sum())
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != diff.shape:
        raise ValueError("weights do not match the signal length")
    return float(np.dot(w, diff))


def jump_set_distance(u: StepSignal, v: StepSignal) -> tuple[int, int]:
    """Compare jump sets.

    Returns ``(|J(u) - J(v)|, max offset)`` where the offset pairs the
    sorted jump locations; it is ``NO_OFFSET`` when the counts differ.
    """
    ju, jv = u.jump_locations(), v.jump_locations()
    if ju.size != jv.size:
        return abs(ju.size - jv.size), NO_OFFSET
    if ju.size == 0:
        return 0, 0
    return 0, int(np.max(np.abs(ju - jv)))
