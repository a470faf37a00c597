"""Rate-profile design: RM start, chunked cutoff-rate constraint, min-weight row freezing."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channels import ebn0_to_esn0
from .cutoff import BitChannelTable, ChunkRates, bit_channel_table, polarized_cutoff_rates
from .polar import log2_exact
from .precoder import DEFAULT_POLY, CodeSpec


class InfeasibleDesign(ValueError):
    """The cutoff constraint left fewer data bits than requested."""

    def __init__(self, achieved_k: int, target_k: int):
        super().__init__(
            f"constraint stage leaves {achieved_k} data bits, below the target {target_k}; "
            "raise the target Eb/N0 or lower K"
        )
        self.achieved_k = achieved_k
        self.target_k = target_k


def row_weight(i) -> np.ndarray:
    """Weight 2^popcount(i) of generator row i (0-based)."""
    i = np.asarray(i, dtype=np.int64)
    pop = np.zeros_like(i)
    x = i.copy()
    while np.any(x):
        pop += x & 1
        x >>= 1
    return 1 << pop


def rm_profile(N: int, K: int) -> list[int]:
    """The K positions of largest row weight; ties at the boundary go to larger indices."""
    log2_exact(N)
    if not 0 <= K <= N:
        raise ValueError(f"cannot select {K} rows out of {N}")
    w = row_weight(np.arange(N))
    order = sorted(range(N), key=lambda i: (w[i], i), reverse=True)
    return sorted(order[:K])


def min_row_weight(profile) -> int:
    return int(row_weight(np.asarray(list(profile))).min()) if len(profile) else 0


def freeze_min_weight_rows(profile, count: int, end: str = "last") -> tuple[list[int], list[int]]:
    """Drop ``count`` minimum-weight rows, largest indices (``last``) or smallest (``first``).

    Returns (new profile, removed indices in removal order).
    """
    if end not in ("last", "first"):
        raise ValueError("end must be 'last' or 'first'")
    prof = sorted(profile)
    if count == 0:
        return prof, []
    w = row_weight(np.asarray(prof))
    candidates = [i for i, wi in zip(prof, w) if wi == w.min()]
    if count > len(candidates):
        raise ValueError(f"only {len(candidates)} minimum-weight rows available, asked for {count}")
    removed = candidates[::-1][:count] if end == "last" else candidates[:count]
    kept = set(removed)
    return [i for i in prof if i not in kept], removed


def chunk_caps(chunk_rates: ChunkRates, margin: str = "stderr") -> np.ndarray:
    """Per-chunk usable rate: R0 minus one MC stderr (or the bare estimate), clipped to [0, 1]."""
    caps = chunk_rates.rates - (chunk_rates.stderr if margin == "stderr" else 0.0)
    return np.clip(caps, 0.0, 1.0)


def apply_cutoff_constraint(
    profile,
    chunk_rates: ChunkRates,
    chunk_len: int,
    bit_r0=None,
    margin: str = "stderr",
) -> tuple[list[int], list[int]]:
    """Freeze information positions until the polarized rate budget is met.

    The budget accumulates over the block in natural order: after position l
    it is B(l) = sum of cap(chunk(j)) over j <= l. The kept count through
    the end of each chunk must not exceed floor(B), and through any position
    inside a chunk must not exceed ceil(B). A violation freezes the kept
    position with the lowest bit-channel cutoff rate among those already
    scanned in the current chunk (lowest index when no per-bit rates are given).

    Returns (new profile, frozen positions in freezing order).
    """
    n_chunks = 1 << chunk_rates.k
    N = chunk_len * n_chunks
    if chunk_rates.N is not None and chunk_rates.N != N:
        raise ValueError("chunk_len inconsistent with the rate table")
    caps = chunk_caps(chunk_rates, margin)
    info = np.zeros(N, dtype=bool)
    info[list(profile)] = True
    reliability = np.asarray(bit_r0, dtype=float) if bit_r0 is not None else -np.arange(N, dtype=float)

    frozen: list[int] = []
    kept = 0
    budget = 0.0
    for c in range(n_chunks):
        start = c * chunk_len
        scanned: list[int] = []
        for pos in range(start, start + chunk_len):
            budget += caps[c]
            if info[pos]:
                scanned.append(pos)
                kept += 1
            last = pos == start + chunk_len - 1
            limit = math.floor(budget + 1e-9) if last else math.ceil(budget - 1e-9)
            while kept > limit:
                victim = min(scanned, key=lambda i: (reliability[i], i))
                scanned.remove(victim)
                info[victim] = False
                frozen.append(victim)
                kept -= 1
    return np.flatnonzero(info).tolist(), frozen


def constraint_report(profile, chunk_rates: ChunkRates, chunk_len: int, margin: str = "stderr") -> dict:
    """Per-chunk info counts next to their standalone and cumulative caps."""
    caps = chunk_caps(chunk_rates, margin)
    info = np.zeros(chunk_len << chunk_rates.k, dtype=int)
    info[list(profile)] = 1
    counts = info.reshape(-1, chunk_len).sum(axis=1)
    cum_budget = np.cumsum(caps * chunk_len)
    return {
        "info_per_chunk": counts.tolist(),
        "chunk_cap": np.floor(caps * chunk_len + 1e-9).astype(int).tolist(),
        "cumulative_ok": bool(np.all(np.cumsum(counts) <= np.floor(cum_budget + 1e-9))),
        "total_budget": float(cum_budget[-1]),
    }


@dataclass
class ProfileDesign:
    start_profile: list[int]
    target_ebn0_db: float
    k_steps: int
    chunk_rates: ChunkRates
    frozen_by_constraint: list[int]
    frozen_by_weight: list[int]
    spec: CodeSpec
    variant: str = "last"
    bit_rates: BitChannelTable | None = field(default=None, repr=False)

    @property
    def k_after_constraint(self) -> int:
        return len(self.start_profile) - len(self.frozen_by_constraint)

    def to_json_dict(self) -> dict:
        cl = self.spec.N >> self.k_steps
        return {
            "start_profile": [i + 1 for i in self.start_profile],
            "target_ebn0_db": self.target_ebn0_db,
            "k_steps": self.k_steps,
            "variant": self.variant,
            "chunk_rates": self.chunk_rates.to_json_dict(),
            "frozen_by_constraint": [i + 1 for i in self.frozen_by_constraint],
            "frozen_by_weight": [i + 1 for i in self.frozen_by_weight],
            "k_after_constraint": self.k_after_constraint,
            "constraint": constraint_report(self.spec.profile, self.chunk_rates, cl),
            "spec": self.spec.to_json_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)


def design_from_rates(
    N: int,
    K_target: int,
    rm_K: int,
    chunk_rates: ChunkRates,
    target_ebn0_db: float,
    poly=DEFAULT_POLY,
    bit_rates: BitChannelTable | None = None,
    variant: str = "last",
    margin: str = "stderr",
) -> ProfileDesign:
    """The design pipeline from precomputed rates (no randomness)."""
    if not K_target <= rm_K <= N:
        raise ValueError("need K_target <= rm_K <= N")
    start = rm_profile(N, rm_K)
    chunk_len = N >> chunk_rates.k
    bit_r0 = bit_rates.r0 if bit_rates is not None else None
    constrained, frozen_c = apply_cutoff_constraint(start, chunk_rates, chunk_len, bit_r0, margin)
    if len(constrained) < K_target:
        raise InfeasibleDesign(len(constrained), K_target)
    final, frozen_w = constrained, []
    excess = len(constrained) - K_target
    while excess:
        # the minimum weight rises whenever a weight class runs out
        w = row_weight(np.asarray(final))
        step = min(excess, int(np.sum(w == w.min())))
        final, removed = freeze_min_weight_rows(final, step, variant)
        frozen_w += removed
        excess -= step
    spec = CodeSpec(N=N, profile=tuple(final), poly=tuple(poly))
    return ProfileDesign(start, target_ebn0_db, chunk_rates.k, chunk_rates, frozen_c, frozen_w, spec, variant, bit_rates)


def design_pac_code(
    N: int,
    K_target: int,
    rm_K: int,
    k_steps: int,
    target_ebn0_db: float,
    poly=DEFAULT_POLY,
    trials: int = 1_000_000,
    bit_trials: int = 100_000,
    seed: int = 1,
    variant: str = "last",
) -> ProfileDesign:
    """RM profile -> polarized rates at the target Eb/N0 -> constraint -> weight freezing.

    Es/N0 is derived with R = K_target / N.
    """
    n = log2_exact(N)
    es_n0 = ebn0_to_esn0(target_ebn0_db, K_target / N)
    rates = polarized_cutoff_rates(n, k_steps, es_n0, trials, seed)
    bits = bit_channel_table(n, es_n0, bit_trials, seed + 1) if bit_trials else None
    return design_from_rates(N, K_target, rm_K, rates, target_ebn0_db, poly, bits, variant)
