"""Known-kernel deconvolution and the blind-recovery parameter bounds.

``min_kl1potts_split`` minimizes gamma*J(u) + ||K*u - f||_1 by alternating
an exact L1-Potts solve with a convex K-L1-L1 solve while the coupling
weight grows geometrically. Convolutions use replicate (edge-value)
boundary extension.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import StepSignal, WeightedSignal
from .solver import min_l1_potts

log = logging.getLogger(__name__)

NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Kernel:
    """Odd-length, symmetric, nonnegative convolution mask."""

    taps: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        t = np.asarray(self.taps, dtype=np.float64).ravel()
        if t.size % 2 == 0:
            raise ValueError(f"kernel length must be odd, got {t.size}")
        if not np.all(np.isfinite(t)) or np.any(t < 0):
            raise ValueError("kernel taps must be finite and nonnegative")
        if not np.allclose(t, t[::-1], rtol=0, atol=1e-12 * max(1.0, t.max())):
            raise ValueError("kernel must be symmetric")
        if t[t.size // 2] <= 0:
            raise ValueError("center tap must be positive")
        if self.normalized and abs(t.sum() - 1.0) > NORM_TOL:
            raise ValueError(f"normalized kernel sums to {t.sum()!r}")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "taps", t)

    @classmethod
    def identity(cls) -> "Kernel":
        return cls(np.ones(1))

    @property
    def m(self) -> int:
        return self.taps.size

    @property
    def half_width(self) -> int:
        return self.taps.size // 2

    def kappa(self, h: float) -> float:
        """Half-support in continuous units on grid spacing ``h``."""
        return self.half_width * h


def convolve_same(u, K: Kernel) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64).ravel()
    n = u.size
    if K.m > 2 * n + 1:
        raise ValueError(f"kernel of length {K.m} exceeds 2n+1 = {2 * n + 1}")
    c = K.half_width
    idx = np.clip(np.arange(-c, n + c), 0, n - 1)
    return np.convolve(u[idx], K.taps, mode="valid")


def convolve_adjoint(y, K: Kernel) -> np.ndarray:
    """Exact adjoint of ``convolve_same`` (edge taps fold onto the end samples)."""
    y = np.asarray(y, dtype=np.float64).ravel()
    n = y.size
    c = K.half_width
    full = np.convolve(y, K.taps[::-1], mode="full")
    out = full[c:c + n].copy()
    out[0] += full[:c].sum()
    out[-1] += full[c + n:].sum()
    return out


def operator_norm_bound(K: Kernel, n: int) -> float:
    """sqrt(max row sum * max column sum) of |K| on n samples.

    The tap sum alone bounds the rows but not the edge columns, which
    collect the replicated taps.
    """
    a = np.abs(K.taps)
    cols = convolve_adjoint(np.ones(n), Kernel(a, normalized=False))
    return float(np.sqrt(a.sum() * cols.max()))


@dataclass(frozen=True)
class KL1L1Result:
    w: np.ndarray
    objective: float
    iterations: int
    converged: bool


def kl1l1_objective(w, g, K: Kernel, mu: float) -> float:
    w = np.asarray(w, dtype=np.float64)
    return float(mu * np.abs(w).sum() + np.abs(convolve_same(w, K) - g).sum())


def solve_kl1l1(g, K: Kernel, mu: float, iters: int = 2000, tol: float = 1e-8) -> KL1L1Result:
    """First-order primal-dual scheme for mu*||w||_1 + ||K*w - g||_1.

    Starts at w = 0 and returns the best iterate seen, so the objective
    never exceeds its value at zero. ``converged`` reports whether the
    relative primal-dual change fell below ``tol``.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    g = np.asarray(g, dtype=np.float64).ravel()
    n = g.size
    step = 0.95 / operator_norm_bound(K, n)
    tau = sigma = step
    w = np.zeros(n)
    wbar = w.copy()
    y = np.zeros(n)
    best_w, best = w.copy(), kl1l1_objective(w, g, K, mu)
    converged = False
    it = 0
    for it in range(1, iters + 1):
        y_new = np.clip(y + sigma * (convolve_same(wbar, K) - g), -1.0, 1.0)
        z = w - tau * convolve_adjoint(y_new, K)
        w_new = np.sign(z) * np.maximum(np.abs(z) - tau * mu, 0.0)
        wbar = 2.0 * w_new - w
        change = np.linalg.norm(w_new - w) + np.linalg.norm(y_new - y)
        scale = max(1.0, np.linalg.norm(w_new) + np.linalg.norm(y_new))
        w, y = w_new, y_new
        obj = kl1l1_objective(w, g, K, mu)
        if obj < best:
            best, best_w = obj, w.copy()
        if change <= tol * scale:
            converged = True
            break
    return KL1L1Result(best_w, best, it, converged)


@dataclass(frozen=True)
class SplitParams:
    gamma: float
    mu0: float | None = None
    mu_growth: float = 1.5
    max_outer: int = 50
    inner_iters: int = 2000
    inner_tol: float = 1e-8
    stall_tol: float = 1e-6

    def __post_init__(self):
        if self.mu0 is None:
            object.__setattr__(self, "mu0", 0.01 * self.gamma)
        for name in ("gamma", "mu0", "inner_tol", "stall_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.mu_growth > 1:
            raise ValueError("mu_growth must exceed 1")
        if self.max_outer < 1 or self.inner_iters < 1:
            raise ValueError("iteration limits must be positive")


@dataclass(frozen=True)
class SplitReport:
    u: StepSignal
    outer_iterations: int
    objective: float
    stalled: bool
    mu: float


def kl1potts_objective(u: StepSignal, f, K: Kernel, gamma: float) -> float:
    f = np.asarray(f, dtype=np.float64).ravel()
    return float(gamma * u.jumps + np.abs(convolve_same(u.to_array(), K) - f).sum())


def _same_step(a: StepSignal, b: StepSignal, tol: float) -> bool:
    return (a.boundaries.size == b.boundaries.size
            and np.array_equal(a.boundaries, b.boundaries)
            and float(np.max(np.abs(a.levels - b.levels))) <= tol)


def min_kl1potts_split(f, K: Kernel, params: SplitParams) -> SplitReport:
    """Splitting heuristic for gamma*J(u) + ||K*u - f||_1 (unweighted samples)."""
    f = np.asarray(f, dtype=np.float64).ravel()
    v = f.copy()
    mu = params.mu0
    u_prev = None
    stalled = False
    k = 0
    u = None
    for k in range(1, params.max_outer + 1):
        u = min_l1_potts(WeightedSignal(v), params.gamma / mu)
        ua = u.to_array()
        res = solve_kl1l1(convolve_same(ua, K) - f, K, mu, params.inner_iters, params.inner_tol)
        v = ua - res.w
        mu *= params.mu_growth
        # A repeated u alone is not enough: while mu is small, gamma/mu is
        # huge and u stays constant for several rounds. Stop only at the
        # coupled fixed point, where w vanishes and v = u.
        tight = float(np.max(np.abs(res.w))) <= params.stall_tol
        if tight and u_prev is not None and _same_step(u, u_prev, params.stall_tol):
            stalled = True
            break
        u_prev = u
    if not stalled:
        log.warning("splitting stopped after %d outer iterations without stalling", k)
    return SplitReport(u, k, kl1potts_objective(u, f, K, params.gamma), stalled, mu)


@dataclass(frozen=True)
class DeconvBounds:
    """Jump heights, minimal plateau length, kernel half-support and mesh size."""

    h_min: float
    h_max: float
    l_min: float
    kappa: float
    eta: float

    def __post_init__(self):
        if not (0 < self.h_min <= self.h_max):
            raise ValueError("need 0 < h_min <= h_max")
        if not self.l_min > 0:
            raise ValueError("l_min must be positive")
        if self.kappa < 0 or self.eta < 0:
            raise ValueError("kappa and eta must be nonnegative")

    @property
    def max_kappa_eta(self) -> float:
        return self.h_min * self.l_min / (2.0 * (8.0 * self.h_max + self.h_min))


class InfeasibleBounds(ValueError):
    def __init__(self, max_kappa_eta: float):
        super().__init__(f"kernel too wide: kappa + eta must be <= {max_kappa_eta!r}")
        self.max_kappa_eta = max_kappa_eta


def deconv_gamma_range(b: DeconvBounds) -> tuple[float, float]:
    """Admissible jump penalties (continuous units) for blind recovery."""
    s = b.kappa + b.eta
    if s > b.max_kappa_eta:
        raise InfeasibleBounds(b.max_kappa_eta)
    lo = 2.0 * s * b.h_max
    hi = 0.5 * b.h_min * b.l_min - (b.h_min + 6.0 * b.h_max) * s
    if hi < lo:
        raise InfeasibleBounds(b.max_kappa_eta)
    return lo, hi
