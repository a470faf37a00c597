"""Binary-input channels: BI-AWGN with BPSK for simulation, BSC/BEC as exact oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class DiscreteChannel:
    """Binary-input discrete memoryless channel.

    ``transition[x, j]`` is W(outputs[j] | x); ``input_dist`` is q(x).
    """

    transition: np.ndarray
    input_dist: tuple[float, float] = (0.5, 0.5)
    outputs: tuple = field(default=())

    def __post_init__(self):
        w = np.asarray(self.transition, dtype=float)
        if w.ndim != 2 or w.shape[0] != 2:
            raise ValueError("transition must have shape (2, n_outputs)")
        if np.any(w < 0) or np.any(w > 1):
            raise ValueError("transition entries must lie in [0, 1]")
        if np.any(np.abs(w.sum(axis=1) - 1) > 1e-12):
            raise ValueError("each transition row must sum to 1")
        q = tuple(float(p) for p in self.input_dist)
        if len(q) != 2 or min(q) < 0 or abs(sum(q) - 1) > 1e-12:
            raise ValueError("input_dist must be a probability pair")
        w.setflags(write=False)
        object.__setattr__(self, "transition", w)
        object.__setattr__(self, "input_dist", q)
        if not self.outputs:
            object.__setattr__(self, "outputs", tuple(range(w.shape[1])))
        elif len(self.outputs) != w.shape[1]:
            raise ValueError("outputs length must match transition columns")

    @property
    def q(self) -> np.ndarray:
        return np.asarray(self.input_dist)

    def output_dist(self) -> np.ndarray:
        """P(y) = sum_x q(x) W(y|x)."""
        return self.q @ self.transition


def analytic_channel(kind: str, p: float) -> DiscreteChannel:
    """BSC with crossover ``p`` or BEC with erasure probability ``p``, uniform input."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    kind = kind.upper()
    if kind == "BSC":
        w = np.array([[1 - p, p], [p, 1 - p]])
        return DiscreteChannel(w, outputs=(0, 1))
    if kind == "BEC":
        w = np.array([[1 - p, 0.0, p], [0.0, 1 - p, p]])
        return DiscreteChannel(w, outputs=(0, 1, "?"))
    raise ValueError(f"unknown channel kind {kind!r}")


def random_dmc(rng: np.random.Generator, max_outputs: int = 4) -> DiscreteChannel:
    """Random binary-input DMC with 2..max_outputs outputs and uniform input."""
    n_out = int(rng.integers(2, max_outputs + 1))
    w = rng.dirichlet(np.ones(n_out), size=2)
    w /= w.sum(axis=1, keepdims=True)
    return DiscreteChannel(w)


def ebn0_to_esn0(ebn0_db: float, rate: float) -> float:
    """Linear Es/N0 for a code of the given rate at Eb/N0 in dB."""
    return rate * 10.0 ** (ebn0_db / 10.0)


@dataclass(frozen=True)
class AwgnParams:
    es_n0: float
    seed: int = 0

    def __post_init__(self):
        if not self.es_n0 > 0:
            raise ValueError(f"es_n0 must be positive, got {self.es_n0}")

    @property
    def sigma(self) -> float:
        return math.sqrt(1.0 / (2.0 * self.es_n0))


def awgn_llrs(x: np.ndarray, es_n0: float, rng: np.random.Generator) -> np.ndarray:
    """BPSK (0 -> +1) over AWGN with noise variance 1/(2 es_n0); returns natural-log LLRs.

    Works on any array shape; ``es_n0 = inf`` yields +-inf LLRs.
    """
    x = np.asarray(x)
    s = 1.0 - 2.0 * x
    if math.isinf(es_n0):
        return s * np.inf
    y = s + math.sqrt(1.0 / (2.0 * es_n0)) * rng.standard_normal(x.shape)
    return 4.0 * es_n0 * y


def bpsk_awgn_transmit(x, params: AwgnParams) -> np.ndarray:
    """Deterministic-given-seed BPSK/AWGN transmission of a bit vector."""
    x = np.asarray(x, dtype=np.int8)
    if x.size == 0:
        raise ValueError("empty input")
    return awgn_llrs(x, params.es_n0, np.random.default_rng(params.seed))


def bpsk_ber(es_n0: float) -> float:
    """Hard-decision bit error probability Q(sqrt(2 es_n0))."""
    return 0.5 * math.erfc(math.sqrt(es_n0))
