"""SC and SCL decoding of PAC codes (identity precoder gives plain polar codes).

SCL path metrics accumulate the LLR-domain penalty ln(1 + exp(-(1 - 2u) L))
per decided bit; the surviving path with the smallest metric wins (no CRC).
Candidates are ranked by metric with ties broken by path order and then
u = 0 before u = 1, so list size 1 makes the same decisions as SC.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .fano import LLR_CLIP, _conv_bit
from .polar import f_llr, polar_transform, sc_leaf_llr
from .precoder import CodeSpec


@dataclass(frozen=True)
class ListConfig:
    spec: CodeSpec
    list_size: int = 32

    def __post_init__(self):
        if int(self.list_size) != self.list_size or self.list_size < 1:
            raise ValueError("list_size must be a positive integer")


@dataclass
class ListOutcome:
    d_hat: np.ndarray
    v_hat: np.ndarray
    path_metrics: np.ndarray
    visits: int


def _softplus(x):
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def _leaf_llrs(levels, u, i: int, n: int) -> np.ndarray:
    top = n - 1 if i == 0 else (i & -i).bit_length() - 1
    for t in range(top, -1, -1):
        half = 1 << t
        a = (i >> t) << t
        p = (i >> (t + 1)) << (t + 1)
        left = levels[:, t + 1, p : p + half]
        right = levels[:, t + 1, p + half : p + 2 * half]
        if a == p:
            levels[:, t, a : a + half] = f_llr(left, right)
        else:
            s = polar_transform(u[:, p : p + half])
            levels[:, t, a : a + half] = right + (1.0 - 2.0 * s) * left
    return levels[:, 0, i]


def scl_decode(llrs, config: ListConfig) -> ListOutcome:
    """Successive-cancellation list decoding over the PAC tree."""
    spec = config.spec
    N, n = spec.N, spec.n
    llrs = np.asarray(llrs, dtype=float)
    if llrs.shape != (N,):
        raise ValueError(f"expected {N} channel LLRs")
    info = spec.info_mask()
    poly = np.asarray(spec.poly, dtype=np.uint8)
    offset = np.asarray(spec.offset, dtype=np.uint8)
    levels = np.zeros((1, n + 1, N))
    levels[0, n] = np.clip(llrs, -LLR_CLIP, LLR_CLIP)
    u = np.zeros((1, N), dtype=np.uint8)
    v = np.zeros((1, N), dtype=np.uint8)
    pm = np.zeros(1)
    visits = 0
    for d in range(N):
        leaf = _leaf_llrs(levels, u, d, n)
        # u obtained with v_d = 0; v_d = 1 flips it
        u0 = _u_with_zero(v, d, poly, offset)
        if not info[d]:
            pm = pm + _softplus(-(1.0 - 2.0 * u0) * leaf)
            u[:, d] = u0
            visits += len(pm)
            continue
        cand_u = np.stack([u0, 1 - u0], axis=1)
        cand_v = np.stack([np.zeros_like(u0), np.ones_like(u0)], axis=1)
        order = np.argsort(cand_u, axis=1, kind="stable")  # u = 0 first within a path
        cand_u = np.take_along_axis(cand_u, order, axis=1)
        cand_v = np.take_along_axis(cand_v, order, axis=1)
        cand_pm = pm[:, None] + _softplus(-(1.0 - 2.0 * cand_u) * leaf[:, None])
        visits += cand_pm.size
        keep = np.argsort(cand_pm.ravel(), kind="stable")[: config.list_size]
        src = keep // 2
        levels = levels[src]
        u = u[src]
        v = v[src]
        u[:, d] = cand_u.ravel()[keep]
        v[:, d] = cand_v.ravel()[keep]
        pm = cand_pm.ravel()[keep]
    best = int(np.argmin(pm))
    return ListOutcome(v[best][list(spec.profile)], v[best].copy(), pm, visits)


def _u_with_zero(v, d, poly, offset):
    acc = np.full(v.shape[0], offset[d], dtype=np.uint8)
    for j in range(1, min(len(poly), d + 1)):
        if poly[j]:
            acc ^= v[:, d - j]
    return acc


@numba.njit(cache=True)
def _sc_batch(llrs, info, poly, offset, v_out):
    F, N = llrs.shape
    n = 0
    while (1 << n) < N:
        n += 1
    levels = np.zeros((n + 1, N))
    u = np.zeros(N, dtype=np.uint8)
    scratch = np.zeros(N, dtype=np.uint8)
    for f in range(F):
        for j in range(N):
            x = llrs[f, j]
            levels[n, j] = LLR_CLIP if x > LLR_CLIP else (-LLR_CLIP if x < -LLR_CLIP else x)
        v = v_out[f]
        for d in range(N):
            L = sc_leaf_llr(d, n, levels, u, scratch)
            v[d] = 0
            u0 = _conv_bit(v, d, poly, offset)
            if info[d]:
                ud = 0 if L >= 0.0 else 1
                v[d] = ud ^ u0
                u[d] = ud
            else:
                u[d] = u0


def sc_decode_batch(llrs, spec: CodeSpec) -> np.ndarray:
    """SC decisions for a (frames, N) LLR array; returns the v estimates."""
    llrs = np.ascontiguousarray(np.atleast_2d(llrs), dtype=np.float64)
    if llrs.shape[1] != spec.N:
        raise ValueError("LLR width does not match the code length")
    v = np.zeros(llrs.shape, dtype=np.uint8)
    _sc_batch(
        llrs,
        spec.info_mask(),
        np.asarray(spec.poly, dtype=np.uint8),
        np.asarray(spec.offset, dtype=np.uint8),
        v,
    )
    return v


def sc_decode(llrs, spec: CodeSpec) -> np.ndarray:
    """SC decoding (ties resolve to u = 0); returns the data estimate."""
    return sc_decode_batch(llrs, spec)[0][list(spec.profile)]


def scl_max_visits(N: int, K: int, list_size: int) -> int:
    """Worst-case SCL visits: sum_j min(2^j, 2L) over info bits plus L per frozen bit."""
    total = 0
    for j in range(1, K + 1):
        total += min(1 << min(j, 62), 2 * list_size)
    return total + (N - K) * list_size


def scl_visit_count(spec: CodeSpec, list_size: int) -> int:
    """Exact visits for this profile: candidates at info bits, live paths at frozen bits."""
    paths, total = 1, 0
    for is_info in spec.info_mask():
        if is_info:
            total += 2 * paths
            paths = min(2 * paths, list_size)
        else:
            total += paths
    return total
