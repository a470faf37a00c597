"""Rate and complexity mathematics: Gallager E0, Bhattacharyya/cutoff-rate
estimation, polarized chunk rates, closed-form computation bounds, and exact
audits of the metric moment-generating-function bounds."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .channels import DiscreteChannel
from .polar import genie_bhattacharyya, genie_transform

LN2 = math.log(2.0)


# Gallager function and friends


def gallager_e0(ch: DiscreteChannel, rho: float) -> float:
    """E0(rho, W) = -log2 sum_y [sum_x q(x) W(y|x)^{1/(1+rho)}]^{1+rho}."""
    if rho < 0:
        raise ValueError("rho must be non-negative")
    if rho == 0:
        return 0.0
    w = ch.transition
    inner = ch.q @ np.power(w, 1.0 / (1.0 + rho))
    return float(-math.log2(np.sum(inner ** (1.0 + rho))))


def mutual_information(ch: DiscreteChannel) -> float:
    """I(X;Y) in bits under the channel's input distribution."""
    w = ch.transition
    py = ch.output_dist()
    joint = ch.q[:, None] * w
    mask = joint > 0
    ratio = np.where(mask, w, 1.0) / np.where(py[None, :] > 0, py[None, :], 1.0)
    return float(np.sum(joint[mask] * np.log2(ratio[mask])))


def bhattacharyya(ch: DiscreteChannel) -> float:
    return float(np.sum(np.sqrt(ch.transition[0] * ch.transition[1])))


def cutoff_rate_from_z(z):
    """R0 = 1 - log2(1 + Z) for symmetric binary-input channels."""
    return 1.0 - np.log2(1.0 + np.asarray(z, dtype=float))


def _r0_stderr(z, z_stderr):
    # delta method: dR0/dZ = -1 / ((1 + Z) ln 2)
    return np.asarray(z_stderr) / ((1.0 + np.asarray(z)) * LN2)


# Monte-Carlo reliability estimation


def bhattacharyya_from_llrs(samples, axis: int = 0):
    """Z = mean(exp(-L/2)) and its stderr (sample std / sqrt(n)) along ``axis``."""
    s = np.asarray(samples, dtype=float)
    if s.size == 0 or s.shape[axis] == 0:
        raise ValueError("no samples")
    z = np.exp(-0.5 * s)
    n = s.shape[axis]
    mean = z.mean(axis=axis)
    std = z.std(axis=axis, ddof=1) if n > 1 else np.zeros_like(mean)
    return mean, std / math.sqrt(n)


@dataclass(frozen=True)
class BitChannelStats:
    index: int
    Z: float
    n_samples: int
    stderr: float

    def __post_init__(self):
        if not 0.0 <= self.Z <= 1.0:
            raise ValueError("Z must lie in [0, 1]")

    @property
    def R0(self) -> float:
        return float(cutoff_rate_from_z(self.Z))


@dataclass(frozen=True)
class BitChannelTable:
    """Per-index reliability of all N bit channels of one polar transform."""

    z: np.ndarray
    z_stderr: np.ndarray
    n_samples: int
    es_n0: float

    @property
    def r0(self) -> np.ndarray:
        return cutoff_rate_from_z(self.z)

    @property
    def r0_stderr(self) -> np.ndarray:
        return _r0_stderr(self.z, self.z_stderr)

    def stats(self, i: int) -> BitChannelStats:
        return BitChannelStats(i, float(self.z[i]), self.n_samples, float(self.z_stderr[i]))


def bit_channel_table(n: int, es_n0: float, trials: int, seed: int = 0, source=None) -> BitChannelTable:
    """Genie-aided MC estimate of every bit channel's Bhattacharyya parameter."""
    z, se = genie_bhattacharyya(n, es_n0, trials, seed, source)
    return BitChannelTable(z, se, trials, es_n0)


@dataclass(frozen=True)
class ChunkRates:
    """Cutoff rates of the 2^k channels obtained by k polarization steps.

    Entry c corresponds to the sign pattern spelled by the k-bit binary form of
    c, most significant bit first (0 = minus); in natural order it governs the
    contiguous chunk c of length N / 2^k.
    """

    k: int
    es_n0: float
    rates: np.ndarray
    stderr: np.ndarray
    n_samples: int = 0
    N: int | None = None

    def __post_init__(self):
        rates = np.asarray(self.rates, dtype=float)
        if rates.shape != (1 << self.k,):
            raise ValueError("need one rate per sign pattern")
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "stderr", np.asarray(self.stderr, dtype=float))

    @property
    def chunk_len(self) -> int:
        if self.N is None:
            raise ValueError("block length unknown")
        return self.N >> self.k

    def pattern(self, c: int) -> str:
        return "".join("+" if (c >> (self.k - 1 - j)) & 1 else "-" for j in range(self.k))

    def ledger(self, profile, N: int | None = None) -> list[dict]:
        """Per-chunk partial-rate bookkeeping: lambda_l and R_l = lambda_l / l."""
        N = N or self.N
        cl = N >> self.k
        mask = np.zeros(N, dtype=int)
        mask[list(profile)] = 1
        rows = []
        for c in range(1 << self.k):
            lam = np.cumsum(mask[c * cl : (c + 1) * cl])
            rows.append(
                {
                    "chunk": c,
                    "pattern": self.pattern(c),
                    "r0": float(self.rates[c]),
                    "lambda": lam.tolist(),
                    "partial_rate": (lam / np.arange(1, cl + 1)).tolist(),
                }
            )
        return rows

    def to_json_dict(self) -> dict:
        doc = {
            "k": self.k,
            "es_n0": self.es_n0,
            "rates": self.rates.tolist(),
            "stderr": self.stderr.tolist(),
            "n_samples": self.n_samples,
        }
        if self.N is not None:
            doc["n"] = self.N
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ChunkRates":
        return cls(
            k=int(doc["k"]),
            es_n0=float(doc["es_n0"]),
            rates=np.asarray(doc["rates"], dtype=float),
            stderr=np.asarray(doc.get("stderr", np.zeros(len(doc["rates"]))), dtype=float),
            n_samples=int(doc.get("n_samples", 0)),
            N=doc.get("n"),
        )


def polarized_cutoff_rates(n: int, k: int, es_n0: float, trials: int, seed: int = 0, source=None) -> ChunkRates:
    """Cutoff rates of the k-step polarized channels via a length-2^k genie transform.

    ``source(rng, shape)`` draws all-zero-input channel LLRs; BI-AWGN at
    ``es_n0`` by default. k = 0 gives the raw channel cutoff rate.
    """
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    if k == 0:
        from .polar import _batch_rng, awgn_zero_source

        draw = source or awgn_zero_source(es_n0)
        llrs = draw(_batch_rng(seed, 0), (trials,))
        z, se = bhattacharyya_from_llrs(llrs)
        z, se = np.atleast_1d(z), np.atleast_1d(se)
    else:
        z, se = genie_bhattacharyya(k, es_n0, trials, seed, source)
    return ChunkRates(k, es_n0, cutoff_rate_from_z(z), _r0_stderr(z, se), trials, 1 << n)


def bec_polarize_exact(z0, k: int) -> list:
    """Exact BEC recursion Z- = 2Z - Z^2, Z+ = Z^2 in sign-pattern order.

    Works with floats or Fractions.
    """
    zs = [z0]
    for _ in range(k):
        zs = [w for z in zs for w in (2 * z - z * z, z * z)]
    return zs


def enumerate_polarized_z(values, probs, k: int) -> list:
    """Exact Z of every k-step polarized channel for a discrete all-zero-input LLR law.

    Every channel pattern over ``values`` is pushed through the genie
    demapper; pattern weights are grouped by their value counts so arbitrary
    precision ``probs`` (e.g. Fractions) survive exactly.
    """
    N = 1 << k
    values = list(values)
    n_vals = len(values)
    if n_vals**N > 1 << 20:
        raise ValueError("alphabet too large for exhaustive enumeration")
    idx = np.array(list(itertools.product(range(n_vals), repeat=N)), dtype=np.int64).reshape(-1, N)
    llrs = np.asarray(values, dtype=float)[idx]
    z = np.exp(-0.5 * genie_transform(llrs))
    counts = np.stack([(idx == v).sum(axis=1) for v in range(n_vals)], axis=1)
    classes, inverse = np.unique(counts, axis=0, return_inverse=True)
    sums = np.zeros((len(classes), N))
    np.add.at(sums, inverse.ravel(), z)
    out = []
    for c in range(N):
        total = 0
        for cls, s in zip(classes, sums[:, c]):
            weight = 1
            for p, m in zip(probs, cls):
                weight *= p ** int(m)
            s = float(s)
            total += weight * (int(s) if s.is_integer() and isinstance(weight, Fraction) else s)
        out.append(total)
    return out


# closed-form bound evaluators


@dataclass(frozen=True)
class BoundQuery:
    """Parameters of the computation bounds; ranges are enforced on construction."""

    r: float = 0.5
    r0: float = -0.5
    beta: float = 2.0
    eps: float = 0.1
    delta: float = 2.0
    bias: float = 0.0
    mu: float = -1.0
    alpha: float = 0.0
    L: float = 10.0

    def __post_init__(self):
        checks = {
            "r in (0,1)": 0 < self.r < 1,
            "r0 in (-1,0)": -1 < self.r0 < 0,
            "beta > 1": self.beta > 1,
            "eps > 0": self.eps > 0,
            "delta > 0": self.delta > 0,
            "L > 0": self.L > 0,
        }
        bad = [name for name, ok in checks.items() if not ok]
        if bad:
            raise ValueError("invalid bound parameters: " + ", ".join(bad))


def expected_computation_bound(eps: float) -> float:
    """Upper bound 4 / (1 - 2^-eps)^2 on the mean computation of a bit."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    return 4.0 / (1.0 - 2.0**-eps) ** 2


def pareto_ccdf_bound(L: float, eps: float, beta: float, clamp: bool = True) -> float:
    """Pareto bound (4 / (L (1 - 2^(-eps/beta))^2))^beta on P(C >= L)."""
    if not (L > 0 and eps > 0 and beta > 1):
        raise ValueError("need L > 0, eps > 0, beta > 1")
    val = (4.0 / (L * (1.0 - 2.0 ** (-eps / beta)) ** 2)) ** beta
    return min(val, 1.0) if clamp else val


def lemma4_barrier_bound(mu: float, r0: float) -> float:
    """P(min correct-path metric <= mu) <= 2^(-r0 mu)."""
    if not -1 < r0 < 0:
        raise ValueError("r0 must lie in (-1, 0)")
    return 2.0 ** (-r0 * mu)


def wrong_path_exponent(ch: DiscreteChannel, r: float, bias: float) -> float:
    """E0((1 - r)/r, W) + b, the per-step exponent of incorrect-path growth."""
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    return gallager_e0(ch, (1.0 - r) / r) + bias


def theorem1_bound(l: int, r: float, bias: float, ch: DiscreteChannel, alpha: float = 0.0) -> float:
    """(l+1) 2^(-r alpha) 2^(-r l [E0((1-r)/r, W) + b]): P(incorrect metric >= min correct + alpha)."""
    expo = wrong_path_exponent(ch, r, bias)
    return (l + 1) * 2.0 ** (-r * alpha) * 2.0 ** (-r * l * expo)


def partial_rate_cap(r: float, bias: float, ch: DiscreteChannel, eps: float, beta: float = 1.0) -> float:
    """Largest admissible partial rate (r/beta)(E0((1-r)/r, W) + b) - eps."""
    return r / beta * wrong_path_exponent(ch, r, bias) - eps


# exact MGF audits


@dataclass
class MgfAudit:
    """Exact-summation margins (bound minus value) of the three MGF bounds.

    ``lemma3_premise[j]`` records whether b <= ((1-r)/r) E0(r/(1-r), W) holds
    at r_grid[j], the condition the difference bound actually relies on.
    """

    bias: float
    r_grid: np.ndarray
    r0_grid: np.ndarray
    lemma1: np.ndarray
    lemma1_bound: np.ndarray
    lemma2: np.ndarray
    lemma2_bound: np.ndarray
    lemma3: np.ndarray
    lemma3_bound: np.ndarray
    lemma3_premise: np.ndarray
    bias_below_e0_1: bool
    slope_at_zero: float
    slope_expected: float
    notes: list = field(default_factory=list)

    @property
    def margins(self) -> dict:
        return {
            "lemma1": self.lemma1_bound - self.lemma1,
            "lemma2": self.lemma2_bound - self.lemma2,
            "lemma3": self.lemma3_bound - self.lemma3,
        }

    def violations(self, tol: float = 1e-12) -> dict:
        return {name: np.flatnonzero(m < -tol).tolist() for name, m in self.margins.items()}


def correct_path_mgf(ch: DiscreteChannel, bias: float, r0: float) -> float:
    """h(r0) = log2 E[2^(r0 gamma(S))] with gamma = log2(W/P_Y) - b, S ~ q, Y ~ W(.|S)."""
    w = ch.transition
    py = ch.output_dist()
    safe_py = np.where(py > 0, py, 1.0)
    terms = ch.q[:, None] * np.power(w, 1.0 + r0) * np.power(safe_py, -r0)[None, :]
    terms = np.where(w > 0, terms, 0.0)
    return float(math.log2(terms.sum()) - r0 * bias)


def wrong_path_mgf(ch: DiscreteChannel, bias: float, r: float) -> float:
    """h~(r) with the branch label drawn independently of the received word."""
    w = ch.transition
    py = ch.output_dist()
    terms = ch.q[:, None] * np.power(py, 1.0 - r)[None, :] * np.power(w, r)
    return float(math.log2(terms.sum()) - r * bias)


def difference_mgf(ch: DiscreteChannel, r: float) -> float:
    """log2 E[2^(r (gamma(S~) - gamma(S)))]; the bias cancels."""
    w = ch.transition
    a = ch.q @ np.power(w, 1.0 - r)
    b = ch.q @ np.power(w, r)
    return float(math.log2(np.sum(a * b)))


def mgf_bound_audit(
    ch: DiscreteChannel,
    bias: float,
    r_grid=tuple(np.round(np.arange(0.1, 0.95, 0.1), 10)),
    r0_grid=tuple(np.round(np.arange(-0.9, -0.05, 0.1), 10)),
    fd_step: float = 1e-5,
) -> MgfAudit:
    """Exact check of the three MGF bounds plus the h'(0) = I(W) - b slope identity.

    Violations are reported in the returned margins, never raised.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    r0_grid = np.asarray(r0_grid, dtype=float)
    e0 = lambda rho: gallager_e0(ch, rho)  # noqa: E731

    l1 = np.array([correct_path_mgf(ch, bias, r0) for r0 in r0_grid])
    l1b = np.array([-r0 * bias - (1 + r0) * e0(-r0 / (1 + r0)) for r0 in r0_grid])
    l2 = np.array([wrong_path_mgf(ch, bias, r) for r in r_grid])
    rhs = np.array([-r * bias - r * e0((1 - r) / r) for r in r_grid])
    l3 = np.array([difference_mgf(ch, r) for r in r_grid])
    premise = np.array([bias <= (1 - r) / r * e0(r / (1 - r)) + 1e-15 for r in r_grid])

    slope = (correct_path_mgf(ch, bias, fd_step) - correct_path_mgf(ch, bias, -fd_step)) / (2 * fd_step)
    audit = MgfAudit(
        bias=bias,
        r_grid=r_grid,
        r0_grid=r0_grid,
        lemma1=l1,
        lemma1_bound=l1b,
        lemma2=l2,
        lemma2_bound=rhs,
        lemma3=l3,
        lemma3_bound=rhs.copy(),
        lemma3_premise=premise,
        bias_below_e0_1=bias <= e0(1.0) + 1e-15,
        slope_at_zero=slope,
        slope_expected=mutual_information(ch) - bias,
    )
    bad3 = np.flatnonzero(audit.margins["lemma3"] < -1e-12)
    if bad3.size:
        outside = bool(np.all(~premise[bad3]))
        audit.notes.append(
            f"difference bound fails at r={r_grid[bad3].tolist()}"
            + ("; all failures lie where its premise does not hold" if outside else "")
        )
    return audit
