"""Arikan polar transform and the successive-cancellation soft demapper.

Index order is natural throughout (no bit reversal). With x = u F^{(x)n}, the
first polarization step pairs channel positions (j, j + N/2); the upper half of
u sees the "minus" channel f(a, b) and the lower half the "plus" channel
g(a, b, s) = b + (1 - 2 s) a. Hence the most significant bit of an index
selects the first step (0 = minus).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

_BATCH = 8192


def log2_exact(n: int) -> int:
    """Return log2(n) for a power of two n >= 1, else raise."""
    if n < 1 or n & (n - 1):
        raise ValueError(f"length {n} is not a power of two")
    return n.bit_length() - 1


@dataclass(frozen=True)
class PolarCode:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("block length must be at least 2")

    @property
    def N(self) -> int:
        return 1 << self.n

    @classmethod
    def from_length(cls, N: int) -> "PolarCode":
        return cls(log2_exact(N))


def polar_transform(u) -> np.ndarray:
    """x = u F^{(x)n} over GF(2) along the last axis; involutive."""
    x = np.array(u, dtype=np.uint8, copy=True)
    N = x.shape[-1]
    log2_exact(N)
    lead = x.shape[:-1]
    h = 1
    while h < N:
        v = x.reshape(*lead, N // (2 * h), 2, h)
        v[..., 0, :] ^= v[..., 1, :]
        h *= 2
    return x


def kron_power_matrix(n: int) -> np.ndarray:
    """Explicit F^{(x)n} by repeated Kronecker products (test oracle helper)."""
    f = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    g = np.ones((1, 1), dtype=np.uint8)
    for _ in range(n):
        g = np.kron(g, f)
    return g


def f_llr(a, b):
    """Exact check-node combine 2 atanh(tanh(a/2) tanh(b/2)), stable and inf-safe."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    sign = np.sign(a) * np.sign(b)
    mag = np.minimum(np.abs(a), np.abs(b))
    with np.errstate(invalid="ignore"):
        corr = np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))
    corr = np.where(np.isinf(a) | np.isinf(b), 0.0, corr)
    return sign * mag + corr


def g_llr(a, b, s):
    """Variable-node combine b + (1 - 2 s) a."""
    return np.asarray(b, dtype=float) + (1.0 - 2.0 * np.asarray(s, dtype=float)) * a


def _node_span(i: int, t: int) -> tuple[int, int]:
    """(node start, parent start) of the level-t node holding leaf i."""
    return (i >> t) << t, (i >> (t + 1)) << (t + 1)


def _top_level(i: int, n: int) -> int:
    if i == 0:
        return n - 1
    return (i & -i).bit_length() - 1


class DemapState:
    """Incremental SC demapper over natural-order indices.

    Level t holds, for every level-t node, its 2^t LLRs at the node's own
    positions in a full-width array. Nodes of one level never overlap, so
    entries written for later leaves never clobber nodes an earlier prefix
    still needs. Rewinding to any prefix length is therefore O(1): the next
    ``sc_llr_next`` call recomputes exactly the nodes that start at that leaf.
    """

    def __init__(self, channel_llrs):
        llrs = np.asarray(channel_llrs, dtype=float)
        self.n = log2_exact(llrs.size)
        if self.n < 1:
            raise ValueError("block length must be at least 2")
        self.N = llrs.size
        self._levels = np.zeros((self.n + 1, self.N))
        self._levels[self.n] = llrs
        self._u = np.zeros(self.N, dtype=np.uint8)
        self._len = 0

    @property
    def channel_llrs(self) -> np.ndarray:
        return self._levels[self.n].copy()

    @property
    def decided(self) -> np.ndarray:
        return self._u[: self._len].copy()

    def __len__(self) -> int:
        return self._len

    def decide(self, u_bit: int) -> None:
        if self._len >= self.N:
            raise IndexError("all bits already decided")
        self._u[self._len] = u_bit
        self._len += 1

    def rewind(self, prefix_len: int) -> None:
        if not 0 <= prefix_len <= self._len:
            raise ValueError(f"cannot rewind to {prefix_len} from {self._len}")
        self._len = prefix_len

    def next_llr(self) -> float:
        i = self._len
        if i >= self.N:
            raise IndexError("demapper state exhausted")
        lv = self._levels
        for t in range(_top_level(i, self.n), -1, -1):
            half = 1 << t
            a, p = _node_span(i, t)
            left = lv[t + 1, p : p + half]
            right = lv[t + 1, p + half : p + 2 * half]
            if a == p:
                lv[t, a : a + half] = f_llr(left, right)
            else:
                s = polar_transform(self._u[p : p + half])
                lv[t, a : a + half] = g_llr(left, right, s)
        return float(lv[0, i])


def sc_llr_next(state: DemapState) -> float:
    """Bit-channel LLR of the next undecided bit given the decided prefix."""
    return state.next_llr()


# numba kernels shared by the sequential and list decoders


@numba.njit(cache=True, inline="always")
def f_scalar(a, b):
    if a == 0.0 or b == 0.0:
        return 0.0
    sign = 1.0 if (a > 0.0) == (b > 0.0) else -1.0
    aa = abs(a)
    ab = abs(b)
    mag = aa if aa < ab else ab
    if math.isinf(aa) or math.isinf(ab):
        return sign * mag
    # same association as f_llr so both demappers round identically
    return sign * mag + (math.log1p(math.exp(-abs(a + b))) - math.log1p(math.exp(-abs(a - b))))


@numba.njit(cache=True)
def sc_leaf_llr(i, n, levels, u, scratch):
    """Numba twin of ``DemapState.next_llr`` for leaf ``i``; returns the leaf LLR."""
    top = n - 1
    if i > 0:
        top = 0
        while (i >> top) & 1 == 0:
            top += 1
    for t in range(top, -1, -1):
        half = 1 << t
        a = (i >> t) << t
        p = (i >> (t + 1)) << (t + 1)
        if a == p:
            for j in range(half):
                levels[t, a + j] = f_scalar(levels[t + 1, p + j], levels[t + 1, p + half + j])
        else:
            for j in range(half):
                scratch[j] = u[p + j]
            h = 1
            while h < half:
                for blk in range(0, half, 2 * h):
                    for j in range(blk, blk + h):
                        scratch[j] ^= scratch[j + h]
                h *= 2
            for j in range(half):
                sgn = 1.0 - 2.0 * scratch[j]
                levels[t, a + j] = levels[t + 1, p + half + j] + sgn * levels[t + 1, p + j]
    return levels[0, i]


@numba.njit(cache=True)
def _genie_inplace(llrs):
    """Genie SC under the all-zero input, row-wise and in place (natural order)."""
    rows, N = llrs.shape
    for r in range(rows):
        h = N // 2
        while h >= 1:
            for blk in range(0, N, 2 * h):
                for j in range(blk, blk + h):
                    a = llrs[r, j]
                    b = llrs[r, j + h]
                    llrs[r, j] = f_scalar(a, b)
                    llrs[r, j + h] = a + b
            h //= 2


@numba.njit(cache=True)
def _bhattacharyya_sums(llrs, s1, s2):
    rows, N = llrs.shape
    for r in range(rows):
        for j in range(N):
            z = math.exp(-0.5 * llrs[r, j])
            s1[j] += z
            s2[j] += z * z


def genie_transform(llrs) -> np.ndarray:
    """Genie-aided bit-channel LLRs for a batch of all-zero-input channel LLR rows."""
    out = np.array(llrs, dtype=np.float64, copy=True, ndmin=2)
    log2_exact(out.shape[1])
    _genie_inplace(out)
    return out


def awgn_zero_source(es_n0: float):
    """LLR source for the all-zero codeword over BI-AWGN."""
    sigma = math.sqrt(1.0 / (2.0 * es_n0))

    def draw(rng: np.random.Generator, shape) -> np.ndarray:
        return 4.0 * es_n0 * (1.0 + sigma * rng.standard_normal(shape))

    return draw


def bec_zero_source(erasure: float):
    """LLR source mimicking BEC(erasure) under the all-zero input: +inf or 0."""

    def draw(rng: np.random.Generator, shape) -> np.ndarray:
        return np.where(rng.random(shape) < erasure, 0.0, np.inf)

    return draw


def _batch_rng(seed: int, batch: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, batch]))


def genie_sc_llr_samples(n: int, es_n0: float, trials: int, seed: int, source=None) -> np.ndarray:
    """trials x 2^n matrix of genie-aided bit-channel LLRs (row b of batch j keyed by (seed, j))."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    N = 1 << n
    draw = source or awgn_zero_source(es_n0)
    out = np.empty((trials, N))
    for j, start in enumerate(range(0, trials, _BATCH)):
        stop = min(trials, start + _BATCH)
        out[start:stop] = draw(_batch_rng(seed, j), (stop - start, N))
    _genie_inplace(out)
    return out


def genie_bhattacharyya(n: int, es_n0: float, trials: int, seed: int, source=None):
    """Streaming MC of per-index Z = E[exp(-L/2)]; returns (Z, stderr) arrays.

    Batches are keyed by (seed, batch index) and summed in batch order, so the
    result is deterministic and independent of how batches are scheduled.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    N = 1 << n
    draw = source or awgn_zero_source(es_n0)
    s1 = np.zeros(N)
    s2 = np.zeros(N)
    for j, start in enumerate(range(0, trials, _BATCH)):
        rows = min(trials, start + _BATCH) - start
        block = np.ascontiguousarray(draw(_batch_rng(seed, j), (rows, N)), dtype=np.float64)
        _genie_inplace(block)
        _bhattacharyya_sums(block, s1, s2)
    z = s1 / trials
    var = np.maximum(s2 / trials - z * z, 0.0)
    stderr = np.sqrt(var / max(trials - 1, 1))
    return np.clip(z, 0.0, 1.0), stderr
