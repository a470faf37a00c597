"""Rate-profile data insertion and rate-one convolutional precoding u = vT + c."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .polar import log2_exact, polar_transform

DEFAULT_POLY = (1, 0, 1, 1, 0, 1, 1)


@dataclass(frozen=True)
class CodeSpec:
    """A PAC code. ``profile`` holds 0-based information positions, sorted.

    The JSON form uses 1-based positions.
    """

    N: int
    profile: tuple[int, ...]
    poly: tuple[int, ...] = DEFAULT_POLY
    offset: tuple[int, ...] = field(default=())

    def __post_init__(self):
        log2_exact(self.N)
        if self.N < 2:
            raise ValueError("block length must be at least 2")
        prof = tuple(sorted(int(i) for i in self.profile))
        if len(set(prof)) != len(prof):
            raise ValueError("profile has duplicate positions")
        if prof and not (0 <= prof[0] and prof[-1] < self.N):
            raise ValueError("profile position out of range")
        poly = tuple(int(b) for b in self.poly)
        if not poly or poly[0] != 1 or any(b not in (0, 1) for b in poly):
            raise ValueError("poly must be binary with poly[0] = 1")
        offset = tuple(int(b) for b in self.offset) or (0,) * self.N
        if len(offset) != self.N or any(b not in (0, 1) for b in offset):
            raise ValueError("offset must be a binary vector of length N")
        object.__setattr__(self, "profile", prof)
        object.__setattr__(self, "poly", poly)
        object.__setattr__(self, "offset", offset)

    @property
    def K(self) -> int:
        return len(self.profile)

    @property
    def n(self) -> int:
        return log2_exact(self.N)

    @property
    def rate(self) -> float:
        return self.K / self.N

    def info_mask(self) -> np.ndarray:
        mask = np.zeros(self.N, dtype=bool)
        mask[list(self.profile)] = True
        return mask

    def to_json_dict(self) -> dict:
        return {
            "n": self.N,
            "k": self.K,
            "profile": [i + 1 for i in self.profile],
            "poly": list(self.poly),
            "offset": list(self.offset),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, doc: dict) -> "CodeSpec":
        profile = [int(i) - 1 for i in doc["profile"]]
        if "k" in doc and int(doc["k"]) != len(profile):
            raise ValueError("k does not match profile length")
        return cls(
            N=int(doc["n"]),
            profile=tuple(profile),
            poly=tuple(doc.get("poly", DEFAULT_POLY)),
            offset=tuple(doc.get("offset", ())),
        )

    @classmethod
    def from_json(cls, text: str) -> "CodeSpec":
        return cls.from_json_dict(json.loads(text))

    def content_hash(self) -> str:
        """Git-style blob SHA-1 of the canonical JSON form."""
        body = json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()


def insert_data(d, spec: CodeSpec) -> np.ndarray:
    """Place d on the profile positions; frozen positions are 0. Works on batches."""
    d = np.asarray(d, dtype=np.uint8)
    if d.shape[-1] != spec.K:
        raise ValueError(f"expected {spec.K} data bits, got {d.shape[-1]}")
    v = np.zeros(d.shape[:-1] + (spec.N,), dtype=np.uint8)
    v[..., list(spec.profile)] = d
    return v


def extract_data(v, spec: CodeSpec) -> np.ndarray:
    v = np.asarray(v, dtype=np.uint8)
    return v[..., list(spec.profile)]


def conv_encode(v, spec: CodeSpec) -> np.ndarray:
    """u_i = XOR_j poly[j] v_{i-j} XOR c_i along the last axis."""
    v = np.asarray(v, dtype=np.uint8)
    if v.shape[-1] != spec.N:
        raise ValueError(f"expected length {spec.N}, got {v.shape[-1]}")
    u = np.zeros_like(v)
    for j, coeff in enumerate(spec.poly):
        if coeff and j < spec.N:
            u[..., j:] ^= v[..., : spec.N - j]
    return u ^ np.asarray(spec.offset, dtype=np.uint8)


def conv_decode(u, spec: CodeSpec) -> np.ndarray:
    """Invert conv_encode by back-substitution (T is unit upper triangular)."""
    u = np.asarray(u, dtype=np.uint8) ^ np.asarray(spec.offset, dtype=np.uint8)
    v = np.zeros_like(u)
    for i in range(spec.N):
        acc = u[..., i].copy()
        for j in range(1, min(len(spec.poly), i + 1)):
            if spec.poly[j]:
                acc ^= v[..., i - j]
        v[..., i] = acc
    return v


def toeplitz_matrix(poly, N: int) -> np.ndarray:
    """Upper-triangular Toeplitz T with T[i, i+j] = poly[j]."""
    poly = [int(b) for b in poly]
    if not poly or poly[0] != 1:
        raise ValueError("poly[0] must be 1")
    T = np.zeros((N, N), dtype=np.uint8)
    for j, coeff in enumerate(poly[:N]):
        if coeff:
            T[np.arange(N - j), np.arange(j, N)] = 1
    return T


class ShiftRegister:
    """Bit-serial encoder holding the last m bits of v."""

    def __init__(self, poly):
        self.poly = tuple(int(b) for b in poly)
        self.state = [0] * (len(self.poly) - 1)

    def push(self, v_bit: int, offset_bit: int = 0) -> int:
        u = v_bit & self.poly[0]
        for coeff, past in zip(self.poly[1:], self.state):
            u ^= coeff & past
        if self.state:
            self.state = [v_bit] + self.state[:-1]
        return u ^ offset_bit


def pac_encode(d, spec: CodeSpec) -> np.ndarray:
    """Full PAC encoder d -> x (batched on leading axes)."""
    return polar_transform(conv_encode(insert_data(d, spec), spec))
