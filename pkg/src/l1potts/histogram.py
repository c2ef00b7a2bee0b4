"""Indexed linked histogram.

A sorted doubly linked list of value nodes with a second, temporary link
layer. Samples are inserted permanently and then removed from the left one
by one on the temporary layer, each removal updating the weighted median
cursor and the absolute deviation in amortized constant time.
``reset_temporary`` restores the temporary layer from the permanent one.

Nodes live in a preallocated arena (one row per node) and are addressed by
integer handles; ``NIL`` (-1) plays the role of a null pointer. Sample
indices are 0-based.

The median cursor always rests on the *lower* weighted median: the
smallest value whose cumulative weight reaches half of the total.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import boolean, float64, int64, njit
from numba.experimental import jitclass

NIL = -1

# node arena columns
VALUE, WEIGHT, WEIGHT_TEMP = 0, 1, 2                            # nf
COUNT, COUNT_TEMP, PREV, NEXT, PREV_TEMP, NEXT_TEMP = range(6)  # ni

# scalar state slots
D, WA, WB, PD, PWA, PWB = range(6)                                # sf
M_, PM, NPRES, NSAMP, NNODES, HEAD, LAST, MAXS, TOTS = range(9)  # si

# Kernels are compiled without the numba runtime (_nrt=False). They never
# allocate, and skipping reference counting on array arguments makes each
# call about 30x cheaper inside the DP loop.


@njit(cache=True, _nrt=False)
def _rebalance(nf, ni, M, d, W_a, W_b, wcol, pcol, ncol):
    # Up while the weight above exceeds half the total, down while the
    # weight below reaches half. Each crossing lowers d by gap * imbalance.
    half = 0.5 * (W_a + W_b + nf[M, wcol])
    shifts = 0
    while W_a > half and ni[M, ncol] != NIL:
        mu = nf[M, VALUE]
        W_b += nf[M, wcol]
        M = ni[M, ncol]
        d -= abs(mu - nf[M, VALUE]) * abs(W_a - W_b)
        W_a -= nf[M, wcol]
        shifts += 1
    while W_b >= half and ni[M, pcol] != NIL:
        mu = nf[M, VALUE]
        W_a += nf[M, wcol]
        M = ni[M, pcol]
        d -= abs(mu - nf[M, VALUE]) * abs(W_b - W_a)
        W_b -= nf[M, wcol]
        shifts += 1
    return M, d, W_a, W_b, shifts


@njit(cache=True, _nrt=False)
def _reset(nf, ni, present, sf, si):
    # sequential arena sweep; link order does not matter here
    for k in range(si[NNODES]):
        nf[k, WEIGHT_TEMP] = nf[k, WEIGHT]
        ni[k, COUNT_TEMP] = ni[k, COUNT]
        ni[k, PREV_TEMP] = ni[k, PREV]
        ni[k, NEXT_TEMP] = ni[k, NEXT]
    for i in range(si[NSAMP]):
        present[i] = True
    si[NPRES] = si[NSAMP]
    si[M_] = si[PM]
    sf[D] = sf[PD]
    sf[WA] = sf[PWA]
    sf[WB] = sf[PWB]


@njit(cache=True, _nrt=False)
def _insert(f_r, w_r, nf, ni, A, sample_weight, present, sf, si):
    if not (w_r > 0.0):
        raise ValueError("weight must be positive")
    if si[NSAMP] >= A.shape[0]:
        raise ValueError("histogram capacity exhausted")
    before = NIL
    node = NIL
    best = 0.0
    for k in range(si[NNODES]):
        v = nf[k, VALUE]
        if v == f_r:
            node = k
            break
        if v < f_r and (before == NIL or v > best):
            before = k
            best = v
    if node != NIL:
        ni[node, COUNT] += 1
        nf[node, WEIGHT] += w_r
    else:
        node = si[NNODES]
        si[NNODES] += 1
        after = si[HEAD] if before == NIL else ni[before, NEXT]
        nf[node, VALUE] = f_r
        nf[node, WEIGHT] = w_r
        ni[node, COUNT] = 1
        ni[node, PREV] = before
        ni[node, NEXT] = after
        if before == NIL:
            si[HEAD] = node
        else:
            ni[before, NEXT] = node
        if after != NIL:
            ni[after, PREV] = node
    i = si[NSAMP]
    A[i] = node
    sample_weight[i] = w_r
    si[NSAMP] += 1

    M = si[PM]
    if M == NIL:
        si[PM] = node
        sf[PD] = 0.0
        sf[PWA] = 0.0
        sf[PWB] = 0.0
    else:
        mu = nf[M, VALUE]
        W_a = sf[PWA]
        W_b = sf[PWB]
        if f_r > mu:
            W_a += w_r
        elif f_r < mu:
            W_b += w_r
        M, d, W_a, W_b, _ = _rebalance(nf, ni, M, sf[PD] + w_r * abs(f_r - mu), W_a, W_b,
                                       WEIGHT, PREV, NEXT)
        si[PM] = M
        sf[PD] = d
        sf[PWA] = W_a
        sf[PWB] = W_b
    _reset(nf, ni, present, sf, si)


@njit(cache=True, _nrt=False)
def _update(nf, ni, sf, si):
    M = si[M_]
    if M == NIL:
        si[LAST] = 0
        return
    M, d, W_a, W_b, shifts = _rebalance(nf, ni, M, sf[D], sf[WA], sf[WB],
                                        WEIGHT_TEMP, PREV_TEMP, NEXT_TEMP)
    si[M_] = M
    sf[D] = d
    sf[WA] = W_a
    sf[WB] = W_b
    si[LAST] = shifts
    si[TOTS] += shifts
    if shifts > si[MAXS]:
        si[MAXS] = shifts


@njit(cache=True, _nrt=False)
def _unlink(ni, R):
    p = ni[R, PREV_TEMP]
    q = ni[R, NEXT_TEMP]
    if p != NIL:
        ni[p, NEXT_TEMP] = q
    if q != NIL:
        ni[q, PREV_TEMP] = p


@njit(cache=True, _nrt=False)
def _remove(i, w, nf, ni, A, sample_weight, present, sf, si):
    if i < 0 or i >= si[NSAMP] or not present[i]:
        raise ValueError("sample is not temporarily present")
    sw = sample_weight[i]
    if abs(w - sw) > 1e-12 * max(1.0, abs(sw)):
        raise ValueError("removal weight differs from the inserted weight")
    present[i] = False
    si[NPRES] -= 1
    R = A[i]
    ni[R, COUNT_TEMP] -= 1
    emptied = ni[R, COUNT_TEMP] == 0
    if emptied:
        nf[R, WEIGHT_TEMP] = 0.0
    else:
        nf[R, WEIGHT_TEMP] -= w
    if si[NPRES] == 0:
        _unlink(ni, R)
        si[M_] = NIL
        sf[D] = 0.0
        sf[WA] = 0.0
        sf[WB] = 0.0
        si[LAST] = 0
        return
    mu = nf[si[M_], VALUE]
    rv = nf[R, VALUE]
    if rv > mu:
        sf[WA] -= w
    elif rv < mu:
        sf[WB] -= w
    sf[D] -= w * abs(mu - rv)
    _update(nf, ni, sf, si)
    if emptied:
        if si[M_] == R:
            # only reachable through rounding: the cursor rests on an
            # emptied node. Step towards the heavier side, then rebalance.
            up = ni[R, NEXT_TEMP]
            down = ni[R, PREV_TEMP]
            last = si[LAST]
            if up != NIL and (sf[WA] >= sf[WB] or down == NIL):
                sf[D] += (nf[up, VALUE] - nf[R, VALUE]) * (sf[WB] - sf[WA])
                sf[WA] -= nf[up, WEIGHT_TEMP]
                si[M_] = up
            elif down != NIL:
                sf[D] += (nf[R, VALUE] - nf[down, VALUE]) * (sf[WA] - sf[WB])
                sf[WB] -= nf[down, WEIGHT_TEMP]
                si[M_] = down
            _update(nf, ni, sf, si)
            si[LAST] += last + 1
        _unlink(ni, R)


_spec = [
    ("nf", float64[:, :]),
    ("ni", int64[:, :]),
    ("A", int64[:]),
    ("sample_weight", float64[:]),
    ("present", boolean[:]),
    ("sf", float64[:]),
    ("si", int64[:]),
]


@jitclass(_spec)
class IndexedLinkedHistogram:
    """Sorted value histogram with a temporary-removal layer.

    ``nf`` rows hold (value, weight, weightTemp), ``ni`` rows hold
    (count, countTemp, prev, next, prevTemp, nextTemp). ``A`` maps sample
    indices to node handles.
    """

    def __init__(self, capacity):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.nf = np.zeros((capacity, 3))
        self.ni = np.full((capacity, 6), NIL, dtype=np.int64)
        self.ni[:, COUNT] = 0
        self.ni[:, COUNT_TEMP] = 0
        self.A = np.full(capacity, NIL, dtype=np.int64)
        self.sample_weight = np.zeros(capacity)
        self.present = np.zeros(capacity, dtype=np.bool_)
        self.sf = np.zeros(6)
        self.si = np.zeros(9, dtype=np.int64)
        self.si[M_] = NIL
        self.si[PM] = NIL
        self.si[HEAD] = NIL

    def insert_element(self, f_r, w_r):
        """Add sample ``f_r`` with weight ``w_r`` to the permanent layer.

        Updates the permanent median, deviation and weights above/below,
        then resets the temporary layer. Linear time.
        """
        _insert(f_r, w_r, self.nf, self.ni, self.A, self.sample_weight, self.present,
                self.sf, self.si)

    def reset_temporary(self):
        _reset(self.nf, self.ni, self.present, self.sf, self.si)

    def remove_element_temp(self, i, w):
        """Temporarily remove sample ``i`` (inserted with weight ``w``)."""
        _remove(i, w, self.nf, self.ni, self.A, self.sample_weight, self.present,
                self.sf, self.si)

    def update_median_deviation_temp(self):
        _update(self.nf, self.ni, self.sf, self.si)

    def current_median(self):
        if self.si[M_] == NIL:
            raise ValueError("temporary layer is empty")
        return self.nf[self.si[M_], VALUE]

    def current_deviation(self):
        return self.sf[D]

    @property
    def capacity(self):
        return self.A.shape[0]

    @property
    def M(self):
        return self.si[M_]

    @property
    def d(self):
        return self.sf[D]

    @property
    def W_a(self):
        return self.sf[WA]

    @property
    def W_b(self):
        return self.sf[WB]

    @property
    def head(self):
        return self.si[HEAD]

    @property
    def n_nodes(self):
        return self.si[NNODES]

    @property
    def n_samples(self):
        return self.si[NSAMP]

    @property
    def n_present(self):
        return self.si[NPRES]

    @property
    def last_shifts(self):
        return self.si[LAST]

    @property
    def max_shifts(self):
        return self.si[MAXS]

    @property
    def total_shifts(self):
        return self.si[TOTS]


@dataclass(frozen=True)
class HistNode:
    """Python-side snapshot of one arena node."""

    handle: int
    value: float
    weight: float
    weight_temp: float
    count: int
    count_temp: int
    prev: Optional[int]
    next: Optional[int]
    prev_temp: Optional[int]
    next_temp: Optional[int]


def _opt(h) -> Optional[int]:
    return None if h == NIL else int(h)


def node(h: IndexedLinkedHistogram, handle: int) -> HistNode:
    f, i = h.nf[handle], h.ni[handle]
    return HistNode(int(handle), float(f[VALUE]), float(f[WEIGHT]), float(f[WEIGHT_TEMP]),
                    int(i[COUNT]), int(i[COUNT_TEMP]), _opt(i[PREV]), _opt(i[NEXT]),
                    _opt(i[PREV_TEMP]), _opt(i[NEXT_TEMP]))


def permanent_nodes(h: IndexedLinkedHistogram) -> list[HistNode]:
    out = []
    cur = h.head
    while cur != NIL:
        out.append(node(h, cur))
        cur = h.ni[cur, NEXT]
    return out


def temporary_nodes(h: IndexedLinkedHistogram) -> list[HistNode]:
    """Nodes reachable on the temporary layer, in sorted order."""
    if h.M == NIL:
        return []
    ni = h.ni
    cur = h.M
    while ni[cur, PREV_TEMP] != NIL:
        cur = ni[cur, PREV_TEMP]
    out = []
    while cur != NIL:
        out.append(node(h, cur))
        cur = ni[cur, NEXT_TEMP]
    return out


def histogram_table(h: IndexedLinkedHistogram, temporary: bool = False) -> dict[float, float]:
    """value -> total weight of the live nodes on the chosen layer."""
    if temporary:
        return {nd.value: nd.weight_temp for nd in temporary_nodes(h)}
    return {nd.value: nd.weight for nd in permanent_nodes(h)}


def build(values, weights=None) -> IndexedLinkedHistogram:
    values = np.asarray(values, dtype=np.float64)
    weights = np.ones_like(values) if weights is None else np.asarray(weights, dtype=np.float64)
    h = IndexedLinkedHistogram(max(1, values.size))
    for v, w in zip(values, weights):
        h.insert_element(float(v), float(w))
    return h
