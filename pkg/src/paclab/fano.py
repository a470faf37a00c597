"""Fano sequential decoding over the irregular PAC tree.

Two implementations share one algorithm:

* ``fano_decode`` runs a numba kernel and is what simulations use.
* ``fano_search`` is a plain-Python engine over any tree exposing
  ``depth``, ``branches(d)`` and ``take(d, label)``. ``fano_trace`` drives it
  on the PAC tree and records every move, which makes the kernel checkable
  against hand-built trees and invariants.

Visits are counted per forward move: ``visits_per_bit[i]`` is how many times
the search stepped from depth i to depth i+1, so a search that never backs up
reports 1 for every bit.

Trace format, one move per line, whitespace separated::

    KIND DEPTH T GAMMA

KIND is FWD (moved forward to DEPTH, T before tightening), TIGHT (T raised
after a first visit), BACK (moved back to DEPTH), LOWER (T reduced while at
DEPTH), END (reached the stop depth) or EXHAUSTED (visit budget hit). GAMMA is
the path metric of the node at DEPTH. Numbers use ``repr`` formatting.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numba
import numpy as np

from .cutoff import ChunkRates
from .polar import DemapState, sc_leaf_llr
from .precoder import CodeSpec

LN2 = math.log(2.0)
LLR_CLIP = 1000.0
THRESHOLD_FLOOR = -1e15

SUCCESS, EXHAUSTED, DIVERGED = 0, 1, 2


def _softplus(x: float) -> float:
    if x == math.inf:
        return math.inf
    if x == -math.inf:
        return 0.0
    return max(x, 0.0) + math.log1p(math.exp(-abs(x)))


def branch_metric(llr: float, u: int, bias: float = 0.0) -> float:
    """gamma = 1 - log2(1 + exp(-(1 - 2u) L)) - b, in bits."""
    return 1.0 - _softplus(-(1.0 - 2.0 * u) * llr) / LN2 - bias


@numba.njit(cache=True, inline="always")
def _metric(llr, u, bias):
    x = -(1.0 - 2.0 * u) * llr
    sp = (x if x > 0.0 else 0.0) + math.log1p(math.exp(-abs(x)))
    return 1.0 - sp / 0.6931471805599453 - bias


@numba.njit(cache=True, inline="always")
def _conv_bit(v, d, poly, offset):
    acc = offset[d]
    for j in range(poly.size):
        if poly[j] and d - j >= 0:
            acc ^= v[d - j]
    return acc


@numba.njit(cache=True)
def _fano_kernel(llr, info, poly, offset, bias, delta, max_visits, start, stop, truth, visits, v):
    N = llr.size
    n = 0
    while (1 << n) < N:
        n += 1
    levels = np.zeros((n + 1, N))
    for j in range(N):
        x = llr[j]
        levels[n, j] = LLR_CLIP if x > LLR_CLIP else (-LLR_CLIP if x < -LLR_CLIP else x)
    u = np.zeros(N, dtype=np.uint8)
    scratch = np.zeros(N, dtype=np.uint8)
    gamma = np.zeros(N + 1)
    cm = np.zeros((N, 2))
    cv = np.zeros((N, 2), dtype=np.uint8)
    nch = np.zeros(N, dtype=np.int64)
    took = np.zeros(N, dtype=np.int64)

    for d in range(start):
        sc_leaf_llr(d, n, levels, u, scratch)
        v[d] = truth[d]
        u[d] = _conv_bit(v, d, poly, offset)

    d = start
    T = 0.0
    t_min = 0.0
    g_min = 0.0
    total = 0
    status = SUCCESS
    prepare = True
    nxt = 0
    while True:
        if prepare:
            L = sc_leaf_llr(d, n, levels, u, scratch)
            v[d] = 0
            u0 = _conv_bit(v, d, poly, offset)
            m0 = _metric(L, u0, bias[d])
            if info[d]:
                m1 = _metric(L, 1 - u0, bias[d])
                # tie goes to the u = 0 child
                first_v0 = m0 > m1 or (m0 == m1 and u0 == 0)
                if first_v0:
                    cm[d, 0], cm[d, 1], cv[d, 0], cv[d, 1] = m0, m1, 0, 1
                else:
                    cm[d, 0], cm[d, 1], cv[d, 0], cv[d, 1] = m1, m0, 1, 0
                nch[d] = 2
            else:
                cm[d, 0] = m0
                cv[d, 0] = 0
                nch[d] = 1
            prepare = False
            nxt = 0

        m_f = gamma[d] + cm[d, nxt]
        if m_f >= T:
            if max_visits > 0 and total >= max_visits:
                status = EXHAUSTED
                break
            took[d] = nxt
            v[d] = cv[d, nxt]
            u[d] = _conv_bit(v, d, poly, offset)
            gamma[d + 1] = m_f
            visits[d] += 1
            total += 1
            if m_f < g_min:
                g_min = m_f
            d += 1
            if d == stop:
                break
            if gamma[d - 1] < T + delta:
                while gamma[d] >= T + delta:
                    T += delta
            prepare = True
        else:
            while True:
                if d > start and gamma[d - 1] >= T:
                    d -= 1
                    if took[d] + 1 < nch[d]:
                        nxt = took[d] + 1
                        break
                else:
                    T -= delta
                    if T < t_min:
                        t_min = T
                    nxt = 0
                    break
            if T < THRESHOLD_FLOOR:
                status = DIVERGED
                break
    for j in range(d, N):
        v[j] = 0
    return status, total, t_min, g_min, T


@numba.njit(cache=True)
def _fano_batch(llrs, info, poly, offset, bias, delta, max_visits, visits, v, status, g_min):
    truth = np.zeros(0, dtype=np.uint8)
    N = llrs.shape[1]
    for f in range(llrs.shape[0]):
        st, _, _, gm, _ = _fano_kernel(
            llrs[f], info, poly, offset, bias, delta, max_visits, 0, N, truth, visits[f], v[f]
        )
        status[f] = st
        g_min[f] = gm


def make_bias(spec: CodeSpec, bit_r0=None, mode: str = "bit", chunk_rates: ChunkRates | None = None) -> np.ndarray:
    """Per-position bias: the bit-channel (or chunk) cutoff rate on info positions, 0 elsewhere."""
    mask = spec.info_mask()
    if mode == "bit":
        if bit_r0 is None:
            raise ValueError("per-bit bias needs bit-channel cutoff rates")
        vals = np.asarray(bit_r0, dtype=float)
    elif mode == "chunk":
        if chunk_rates is None:
            raise ValueError("per-chunk bias needs chunk rates")
        vals = np.repeat(chunk_rates.rates, spec.N >> chunk_rates.k)
    elif mode == "zero":
        vals = np.zeros(spec.N)
    else:
        raise ValueError(f"unknown bias mode {mode!r}")
    if vals.shape != (spec.N,):
        raise ValueError("bias source has the wrong length")
    return np.where(mask, vals, 0.0)


@dataclass(frozen=True)
class FanoConfig:
    spec: CodeSpec
    bias: np.ndarray
    delta: float = 2.0
    max_visits: int | None = None
    k_steps: int = 1

    def __post_init__(self):
        bias = np.asarray(self.bias, dtype=float)
        if bias.shape != (self.spec.N,):
            raise ValueError("bias must have one entry per position")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.max_visits is not None and self.max_visits < 1:
            raise ValueError("max_visits must be positive")
        if not 0 <= self.k_steps <= self.spec.n:
            raise ValueError("k_steps out of range")
        object.__setattr__(self, "bias", bias)

    @classmethod
    def bounded(cls, spec: CodeSpec, bias) -> "FanoConfig":
        """Bounded-search preset: delta 6.5 and a budget of 10 N forward moves."""
        return cls(spec, bias, delta=6.5, max_visits=10 * spec.N)

    def kernel_args(self):
        spec = self.spec
        return (
            spec.info_mask(),
            np.asarray(spec.poly, dtype=np.uint8),
            np.asarray(spec.offset, dtype=np.uint8),
            self.bias,
            float(self.delta),
            int(self.max_visits or 0),
        )


@dataclass
class DecodeOutcome:
    v_hat: np.ndarray
    d_hat: np.ndarray
    success: bool
    visits_total: int
    visits_per_bit: np.ndarray
    min_metric: float
    budget_exhausted: bool
    min_threshold: float = 0.0


def _check_llrs(llrs, N: int) -> np.ndarray:
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    if llrs.shape != (N,):
        raise ValueError(f"expected {N} channel LLRs, got shape {llrs.shape}")
    return llrs


def fano_decode(llrs, config: FanoConfig) -> DecodeOutcome:
    spec = config.spec
    llrs = _check_llrs(llrs, spec.N)
    visits = np.zeros(spec.N, dtype=np.int64)
    v = np.zeros(spec.N, dtype=np.uint8)
    status, total, t_min, g_min, _ = _fano_kernel(
        llrs, *config.kernel_args()[:3], config.bias, float(config.delta),
        int(config.max_visits or 0), 0, spec.N, np.zeros(0, dtype=np.uint8), visits, v,
    )
    return DecodeOutcome(
        v_hat=v,
        d_hat=v[list(spec.profile)],
        success=status == SUCCESS,
        visits_total=int(total),
        visits_per_bit=visits,
        min_metric=float(g_min),
        budget_exhausted=status == EXHAUSTED,
        min_threshold=float(t_min),
    )


def fano_decode_batch(llrs, config: FanoConfig):
    """Decode a (frames, N) LLR array; returns (v_hat, visits, status, min_metric) arrays."""
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    F, N = llrs.shape
    if N != config.spec.N:
        raise ValueError("LLR width does not match the code length")
    visits = np.zeros((F, N), dtype=np.int64)
    v = np.zeros((F, N), dtype=np.uint8)
    status = np.zeros(F, dtype=np.int64)
    g_min = np.zeros(F)
    _fano_batch(llrs, *config.kernel_args(), visits, v, status, g_min)
    return v, visits, status, g_min


def chunk_genie_decode(llrs, config: FanoConfig, chunk: int, truth_v) -> np.ndarray:
    """Per-bit visit counts of chunk ``chunk`` when every earlier bit is supplied by a genie.

    Chunks have length N / 2^k with k = ``config.k_steps``. The search may not
    back up past the chunk start and stops once it first steps past the
    chunk's last bit.
    """
    spec = config.spec
    n_chunks = 1 << config.k_steps
    if not 0 <= chunk < n_chunks:
        raise IndexError(f"chunk {chunk} out of range for {n_chunks} chunks")
    llrs = _check_llrs(llrs, spec.N)
    cl = spec.N // n_chunks
    truth = np.ascontiguousarray(truth_v, dtype=np.uint8)
    visits = np.zeros(spec.N, dtype=np.int64)
    v = np.zeros(spec.N, dtype=np.uint8)
    info, poly, offset, bias, delta, budget = config.kernel_args()
    _fano_kernel(llrs, info, poly, offset, bias, delta, budget, chunk * cl, (chunk + 1) * cl, truth, visits, v)
    return visits[chunk * cl : (chunk + 1) * cl].copy()


# reference engine


@dataclass
class SearchResult:
    path: list
    success: bool
    exhausted: bool
    visits_per_depth: np.ndarray
    min_threshold: float
    min_metric: float
    trace: list[str] = field(default_factory=list)
    node_visits: Counter = field(default_factory=Counter)
    node_metric: dict = field(default_factory=dict)
    threshold_violations: list[str] = field(default_factory=list)

    @property
    def visits_total(self) -> int:
        return int(self.visits_per_depth.sum())

    def visit_bound_violations(self, delta: float) -> list[tuple]:
        """Nodes whose visit count exceeds ceil((Gamma - T_min)/delta) + 1."""
        bad = []
        for node, count in self.node_visits.items():
            bound = math.ceil((self.node_metric[node] - self.min_threshold) / delta) + 1
            if count > bound:
                bad.append((node, count, bound))
        return bad


def fano_search(tree, delta: float, max_visits: int | None = None, trace: bool = False) -> SearchResult:
    """Classic Fano search; ``tree.branches(d)`` lists (label, metric) with ties in preference order."""
    depth = tree.depth
    gamma = [0.0] * (depth + 1)
    children: list = [None] * depth
    took = [0] * depth
    path: list = [None] * depth
    visits = np.zeros(depth, dtype=np.int64)
    res = SearchResult([], False, False, visits, 0.0, 0.0)
    log = res.trace.append if trace else (lambda line: None)

    def emit(kind, d, T):
        log(f"{kind} {d} {T!r} {gamma[d]!r}")

    def check_multiple(T):
        if trace and abs(T / delta - round(T / delta)) > 1e-9:
            res.threshold_violations.append(f"threshold {T!r} is not a multiple of {delta!r}")

    d, T, nxt, total = 0, 0.0, 0, 0
    children[0] = sorted(tree.branches(0), key=lambda lm: -lm[1])
    while True:
        label, metric = children[d][nxt]
        m_f = gamma[d] + metric
        if m_f >= T:
            if max_visits is not None and total >= max_visits:
                res.exhausted = True
                emit("EXHAUSTED", d, T)
                break
            took[d] = nxt
            path[d] = label
            tree.take(d, label)
            gamma[d + 1] = m_f
            visits[d] += 1
            total += 1
            res.min_metric = min(res.min_metric, m_f)
            d += 1
            emit("FWD", d, T)
            if trace:
                node = tuple(path[:d])
                res.node_visits[node] += 1
                res.node_metric[node] = m_f
                if m_f < T:
                    res.threshold_violations.append(f"entered depth {d} below threshold")
            if d == depth:
                res.success = True
                emit("END", d, T)
                break
            if gamma[d - 1] < T + delta:
                raised = False
                while gamma[d] >= T + delta:
                    T += delta
                    raised = True
                if raised:
                    check_multiple(T)
                    emit("TIGHT", d, T)
            children[d] = sorted(tree.branches(d), key=lambda lm: -lm[1])
            nxt = 0
        else:
            while True:
                if d > 0 and gamma[d - 1] >= T:
                    d -= 1
                    emit("BACK", d, T)
                    if took[d] + 1 < len(children[d]):
                        nxt = took[d] + 1
                        break
                else:
                    T -= delta
                    res.min_threshold = min(res.min_threshold, T)
                    check_multiple(T)
                    emit("LOWER", d, T)
                    nxt = 0
                    break
            if T < THRESHOLD_FLOOR:
                break
    res.path = path[:d]
    return res


class PacTree:
    """The PAC decoding tree seen through the SC demapper, for ``fano_search``."""

    def __init__(self, llrs, config: FanoConfig):
        self.spec = config.spec
        self.bias = config.bias
        self.depth = self.spec.N
        self.info = self.spec.info_mask()
        self.state = DemapState(np.clip(np.asarray(llrs, dtype=float), -LLR_CLIP, LLR_CLIP))
        self.v = np.zeros(self.depth, dtype=np.uint8)

    def _u(self, d: int, v_bit: int) -> int:
        self.v[d] = v_bit
        poly, v = self.spec.poly, self.v
        acc = self.spec.offset[d]
        for j, coeff in enumerate(poly):
            if coeff and d - j >= 0:
                acc ^= int(v[d - j])
        return acc

    def branches(self, d: int):
        self.state.rewind(d)
        llr = self.state.next_llr()
        b = self.bias[d]
        u0 = self._u(d, 0)
        if not self.info[d]:
            return [(0, branch_metric(llr, u0, b))]
        pair = [(0, branch_metric(llr, u0, b)), (1, branch_metric(llr, 1 - u0, b))]
        return pair if u0 == 0 else pair[::-1]

    def take(self, d: int, label: int) -> None:
        self.state.rewind(d)
        self.state.decide(self._u(d, label))


def fano_trace(llrs, config: FanoConfig) -> tuple[DecodeOutcome, SearchResult]:
    """Decode with the reference engine, recording the move log and per-node visits."""
    spec = config.spec
    tree = PacTree(_check_llrs(llrs, spec.N), config)
    res = fano_search(tree, config.delta, config.max_visits, trace=True)
    v = np.zeros(spec.N, dtype=np.uint8)
    v[: len(res.path)] = res.path
    outcome = DecodeOutcome(
        v_hat=v,
        d_hat=v[list(spec.profile)],
        success=res.success,
        visits_total=res.visits_total,
        visits_per_bit=res.visits_per_depth,
        min_metric=res.min_metric,
        budget_exhausted=res.exhausted,
        min_threshold=res.min_threshold,
    )
    return outcome, res
