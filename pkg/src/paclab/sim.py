"""Seeded, parallel Monte-Carlo runner: FER/BER sweeps, visit statistics, tail fits.

Frames are simulated in fixed-size blocks. Block b of SNR point p draws its
noise from SeedSequence([seed, p, b, 0]) and its data from [seed, p, b, 1], so
every decoder and every code of the same length sees the same noise (common
random numbers). A point stops after the first block at which the error
target is met; blocks are merged in index order, making the result
independent of the worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats

from .channels import ebn0_to_esn0
from .cutoff import bit_channel_table, pareto_ccdf_bound, polarized_cutoff_rates
from .fano import EXHAUSTED, SUCCESS, FanoConfig, fano_decode_batch, make_bias
from .listdec import ListConfig, scl_decode, sc_decode_batch
from .precoder import CodeSpec, pac_encode

CSV_HEADER = ["ebn0_db", "frames", "frame_errors", "fer", "fer_ci_lo", "fer_ci_hi", "ber", "anv", "exhausted_rate"]
SEED_ENV = "PACLAB_SEED"
WORKERS_ENV = "PACLAB_WORKERS"
DECODERS = ("fano", "scl", "sc")


@dataclass(frozen=True)
class ExperimentConfig:
    spec: CodeSpec
    ebn0_grid: tuple[float, ...]
    decoder: str = "fano"
    delta: float = 2.0
    max_visits: int | None = None
    bias_mode: str = "bit"
    bias_trials: int = 100_000
    bias_ebn0_db: float | None = None
    k_steps: int = 4
    list_size: int = 32
    min_errors: int = 100
    max_frames: int = 10_000_000
    block_frames: int = 256
    seed: int = 0
    workers: int = 1
    noiseless: bool = False

    def __post_init__(self):
        grid = tuple(float(e) for e in self.ebn0_grid)
        object.__setattr__(self, "ebn0_grid", grid)
        if not grid:
            raise ValueError("ebn0_grid must be nonempty")
        if self.decoder not in DECODERS:
            raise ValueError(f"decoder must be one of {DECODERS}")
        if self.min_errors < 1 or self.max_frames < 1 or self.block_frames < 1:
            raise ValueError("stop rule values must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not self.delta > 0:
            raise ValueError("delta must be positive")

    def to_json_dict(self) -> dict:
        doc = asdict(self)
        doc["spec"] = self.spec.to_json_dict()
        doc["ebn0_grid"] = list(self.ebn0_grid)
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict, spec: CodeSpec | None = None) -> "ExperimentConfig":
        doc = dict(doc)
        if spec is None:
            spec = CodeSpec.from_json_dict(doc["spec"])
        doc["spec"] = spec
        doc["ebn0_grid"] = tuple(doc["ebn0_grid"])
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)


@dataclass
class BlockStats:
    frames: int = 0
    frame_errors: int = 0
    bit_errors: int = 0
    visits_total: int = 0
    exhausted: int = 0
    visits_per_bit: np.ndarray | None = None
    bit_count_hist: Counter = field(default_factory=Counter)
    frame_count_hist: Counter = field(default_factory=Counter)

    def merge(self, other: "BlockStats") -> None:
        self.frames += other.frames
        self.frame_errors += other.frame_errors
        self.bit_errors += other.bit_errors
        self.visits_total += other.visits_total
        self.exhausted += other.exhausted
        if other.visits_per_bit is not None:
            if self.visits_per_bit is None:
                self.visits_per_bit = np.zeros_like(other.visits_per_bit)
            self.visits_per_bit = self.visits_per_bit + other.visits_per_bit
        self.bit_count_hist.update(other.bit_count_hist)
        self.frame_count_hist.update(other.frame_count_hist)


@dataclass
class PointSummary:
    ebn0_db: float
    stats: BlockStats
    N: int
    K: int

    @property
    def frames(self) -> int:
        return self.stats.frames

    @property
    def frame_errors(self) -> int:
        return self.stats.frame_errors

    @property
    def fer(self) -> float:
        return self.stats.frame_errors / self.stats.frames

    @property
    def fer_ci(self) -> tuple[float, float]:
        return clopper_pearson(self.stats.frame_errors, self.stats.frames)

    @property
    def ber(self) -> float:
        return self.stats.bit_errors / (self.stats.frames * max(self.K, 1))

    @property
    def anv(self) -> float:
        return self.stats.visits_total / (self.N * self.stats.frames)

    @property
    def anv_per_bit(self) -> np.ndarray:
        return self.stats.visits_per_bit / self.stats.frames

    @property
    def exhausted_rate(self) -> float:
        return self.stats.exhausted / self.stats.frames

    def csv_row(self) -> list[str]:
        lo, hi = self.fer_ci
        vals = [self.ebn0_db, self.frames, self.frame_errors, self.fer, lo, hi, self.ber, self.anv, self.exhausted_rate]
        return [repr(x) if isinstance(x, float) else str(x) for x in vals]


@dataclass
class SimSummary:
    config: ExperimentConfig
    points: list[PointSummary]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for p in self.points:
            w.writerow(p.csv_row())
        return buf.getvalue()

    def companion(self) -> dict:
        return {
            "config": self.config.to_json_dict(),
            "spec_hash": self.config.spec.content_hash(),
            "points": [
                {
                    "ebn0_db": p.ebn0_db,
                    "frames": p.frames,
                    "frame_errors": p.frame_errors,
                    "bit_errors": p.stats.bit_errors,
                    "visits_total": p.stats.visits_total,
                    "anv_per_bit": p.anv_per_bit.tolist() if p.stats.visits_per_bit is not None else None,
                    "bit_count_hist": _hist_json(p.stats.bit_count_hist),
                    "frame_count_hist": _hist_json(p.stats.frame_count_hist),
                }
                for p in self.points
            ],
        }

    def write(self, csv_path) -> str:
        """Write the CSV and its companion JSON (same stem, .json); returns the JSON path."""
        csv_path = os.fspath(csv_path)
        os.makedirs(os.path.dirname(csv_path) or ".", exist_ok=True)
        with open(csv_path, "w", newline="") as fh:
            fh.write(self.to_csv())
        json_path = os.path.splitext(csv_path)[0] + ".json"
        with open(json_path, "w") as fh:
            json.dump(self.companion(), fh, indent=1, sort_keys=True)
        return json_path


def _hist_json(hist: Counter) -> dict:
    return {str(k): int(hist[k]) for k in sorted(hist)}


def clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Exact binomial confidence interval."""
    a = 1.0 - level
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


@lru_cache(maxsize=32)
def _bit_r0(n: int, es_n0: float, trials: int, seed: int) -> np.ndarray:
    return bit_channel_table(n, es_n0, trials, seed).r0


def bias_for_point(cfg: ExperimentConfig, ebn0_db: float) -> np.ndarray:
    """Bias vector used by the Fano decoder at one grid point."""
    spec = cfg.spec
    bias_db = ebn0_db if cfg.bias_ebn0_db is None else cfg.bias_ebn0_db
    es_n0 = ebn0_to_esn0(bias_db, spec.rate)
    if cfg.bias_mode == "bit":
        return make_bias(spec, _bit_r0(spec.n, es_n0, cfg.bias_trials, cfg.seed))
    if cfg.bias_mode == "chunk":
        rates = polarized_cutoff_rates(spec.n, cfg.k_steps, es_n0, cfg.bias_trials, cfg.seed)
        return make_bias(spec, mode="chunk", chunk_rates=rates)
    return make_bias(spec, mode="zero")


def frame_block(spec: CodeSpec, ebn0_db: float, seed: int, point: int, block: int, frames: int, noiseless=False):
    """Data bits and channel LLRs of one block; noise depends only on (seed, point, block, N)."""
    noise_rng = np.random.default_rng(np.random.SeedSequence([seed, point, block, 0]))
    data_rng = np.random.default_rng(np.random.SeedSequence([seed, point, block, 1]))
    z = noise_rng.standard_normal((frames, spec.N))
    d = data_rng.integers(0, 2, (frames, spec.K), dtype=np.uint8)
    s = 1.0 - 2.0 * pac_encode(d, spec)
    if noiseless:
        return d, s * np.inf
    es_n0 = ebn0_to_esn0(ebn0_db, spec.rate)
    return d, 4.0 * es_n0 * (s + math.sqrt(1.0 / (2.0 * es_n0)) * z)


def run_block(cfg: ExperimentConfig, point: int, block: int, frames: int, bias) -> BlockStats:
    spec = cfg.spec
    d, llrs = frame_block(spec, cfg.ebn0_grid[point], cfg.seed, point, block, frames, cfg.noiseless)
    prof = list(spec.profile)
    out = BlockStats(frames=frames)
    if cfg.decoder == "fano":
        fano = FanoConfig(spec, bias, cfg.delta, cfg.max_visits)
        v, visits, status, _ = fano_decode_batch(llrs, fano)
        d_hat = v[:, prof]
        out.visits_per_bit = visits.sum(axis=0)
        out.visits_total = int(visits.sum())
        out.exhausted = int(np.sum(status == EXHAUSTED))
        vals, cnts = np.unique(visits, return_counts=True)
        out.bit_count_hist.update(dict(zip(vals.tolist(), cnts.tolist())))
        out.frame_count_hist.update(visits.sum(axis=1).tolist())
        failed = status != SUCCESS
    elif cfg.decoder == "sc":
        d_hat = sc_decode_batch(llrs, spec)[:, prof]
        out.visits_per_bit = np.full(spec.N, frames, dtype=np.int64)
        out.visits_total = frames * spec.N
        failed = np.zeros(frames, dtype=bool)
    else:
        lc = ListConfig(spec, cfg.list_size)
        results = [scl_decode(row, lc) for row in llrs]
        d_hat = np.array([r.d_hat for r in results], dtype=np.uint8).reshape(frames, spec.K)
        out.visits_total = sum(r.visits for r in results)
        failed = np.zeros(frames, dtype=bool)
    wrong = d_hat != d
    out.bit_errors = int(wrong.sum())
    out.frame_errors = int(np.sum(wrong.any(axis=1) | failed))
    return out


def _run_task(args):
    return run_block(*args)


def _point_blocks(cfg: ExperimentConfig):
    full, rest = divmod(cfg.max_frames, cfg.block_frames)
    sizes = [cfg.block_frames] * full + ([rest] if rest else [])
    return sizes


def run_point(cfg: ExperimentConfig, point: int, pool=None) -> PointSummary:
    bias = bias_for_point(cfg, cfg.ebn0_grid[point]) if cfg.decoder == "fano" else None
    sizes = _point_blocks(cfg)
    agg = BlockStats()
    if pool is None:
        for b, size in enumerate(sizes):
            agg.merge(run_block(cfg, point, b, size, bias))
            if agg.frame_errors >= cfg.min_errors:
                break
    else:
        window = 2 * cfg.workers
        pending = {}
        nxt = 0
        for b in range(len(sizes)):
            while nxt < len(sizes) and nxt < b + window:
                pending[nxt] = pool.submit(_run_task, (cfg, point, nxt, sizes[nxt], bias))
                nxt += 1
            agg.merge(pending.pop(b).result())
            if agg.frame_errors >= cfg.min_errors:
                break
        for fut in pending.values():
            fut.cancel()
    return PointSummary(cfg.ebn0_grid[point], agg, cfg.spec.N, cfg.spec.K)


def run_sweep(cfg: ExperimentConfig) -> SimSummary:
    """Simulate every grid point until its stop rule fires."""
    if cfg.workers == 1:
        return SimSummary(cfg, [run_point(cfg, p) for p in range(len(cfg.ebn0_grid))])
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return SimSummary(cfg, [run_point(cfg, p, pool) for p in range(len(cfg.ebn0_grid))])


# computation tail


@dataclass(frozen=True)
class TailFit:
    status: str
    l_min: float
    n_tail: int
    beta: float | None = None
    ci: tuple[float, float] | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _as_hist(samples) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(samples, (Counter, dict)):
        vals = np.array(sorted(samples), dtype=float)
        return vals, np.array([samples[k] for k in sorted(samples)], dtype=np.int64)
    vals, cnts = np.unique(np.asarray(samples, dtype=float), return_counts=True)
    return vals, cnts


def fit_pareto_tail(
    samples,
    l_min: float,
    discrete: bool | None = None,
    n_boot: int = 400,
    level: float = 0.95,
    seed: int = 0,
    min_tail: int = 100,
) -> TailFit:
    """Hill maximum-likelihood tail index over samples >= l_min, with a bootstrap CI.

    ``samples`` may be raw values or a {value: count} histogram. Integer data
    (auto-detected) use the continuity-corrected scale l_min - 1/2.
    """
    vals, cnts = _as_hist(samples)
    if discrete is None:
        discrete = bool(np.all(vals == np.round(vals)))
    tail = vals >= l_min
    x, w = vals[tail], cnts[tail]
    n = int(w.sum())
    scale = l_min - 0.5 if discrete else l_min
    if n < min_tail or len(x) < 2 or scale <= 0:
        return TailFit("insufficient tail", l_min, n)
    logs = np.log(x / scale)
    total = float(np.dot(w, logs))
    if total <= 0:
        return TailFit("insufficient tail", l_min, n)
    beta = n / total
    rng = np.random.default_rng(seed)
    boot = rng.multinomial(n, w / n, size=n_boot) @ logs
    boot_beta = n / boot[boot > 0]
    a = (1 - level) / 2
    ci = (float(np.quantile(boot_beta, a)), float(np.quantile(boot_beta, 1 - a)))
    return TailFit("ok", l_min, n, float(beta), ci)


def empirical_ccdf(hist) -> tuple[np.ndarray, np.ndarray]:
    """(L, P(C >= L)) at every observed value of a {value: count} histogram."""
    vals, cnts = _as_hist(hist)
    tail = np.cumsum(cnts[::-1])[::-1]
    return vals, tail / cnts.sum()


def ccdf_slope(hist, lo: float, hi: float) -> float:
    """Least-squares log-log slope of the CCDF over observed values in [lo, hi]."""
    L, P = empirical_ccdf(hist)
    sel = (L >= lo) & (L <= hi)
    if sel.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(L[sel]), np.log(P[sel]), 1)[0])


def ccdf_bound_overlay(hist, eps: float, beta: float) -> list[dict]:
    """Empirical CCDF against the Pareto bound at each observed L; violations flagged."""
    rows = []
    for L, p in zip(*empirical_ccdf(hist)):
        bound = pareto_ccdf_bound(float(L), eps, beta)
        rows.append({"L": float(L), "ccdf": float(p), "bound": bound, "violated": bool(p > bound)})
    return rows
