import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from paclab.polar import kron_power_matrix
from paclab.precoder import (
    DEFAULT_POLY,
    CodeSpec,
    ShiftRegister,
    conv_decode,
    conv_encode,
    extract_data,
    insert_data,
    pac_encode,
    toeplitz_matrix,
)


def specs(max_n=7):
    @st.composite
    def build(draw):
        n = draw(st.integers(1, max_n))
        N = 1 << n
        profile = draw(st.sets(st.integers(0, N - 1), max_size=N))
        poly = [1] + draw(st.lists(st.integers(0, 1), max_size=8))
        offset = draw(st.lists(st.integers(0, 1), min_size=N, max_size=N))
        return CodeSpec(N, tuple(profile), tuple(poly), tuple(offset))

    return build()


def test_insert_and_extract():
    spec = CodeSpec(8, (3, 5, 6, 7))
    v = insert_data([1, 0, 1, 1], spec)
    np.testing.assert_array_equal(v, [0, 0, 0, 1, 0, 0, 1, 1])
    np.testing.assert_array_equal(extract_data(v, spec), [1, 0, 1, 1])
    with pytest.raises(ValueError):
        insert_data([1, 0], spec)


def test_conv_examples():
    spec = CodeSpec(8, (), poly=(1, 1))
    np.testing.assert_array_equal(conv_encode([1, 0, 0, 0, 0, 0, 0, 0], spec), [1, 1, 0, 0, 0, 0, 0, 0])
    spec = CodeSpec(8, ())
    impulse = np.zeros(8, dtype=np.uint8)
    impulse[0] = 1
    np.testing.assert_array_equal(conv_encode(impulse, spec), [1, 0, 1, 1, 0, 1, 1, 0])


def test_identity_poly_is_plain_polar():
    spec = CodeSpec(16, tuple(range(8, 16)), poly=(1,))
    d = np.random.default_rng(0).integers(0, 2, 8)
    G = kron_power_matrix(4)
    np.testing.assert_array_equal(pac_encode(d, spec), insert_data(d, spec).astype(int) @ G % 2)


def test_toeplitz_agrees_with_convolution():
    rng = np.random.default_rng(1)
    for N in (8, 64, 256):
        spec = CodeSpec(N, ())
        T = toeplitz_matrix(DEFAULT_POLY, N).astype(int)
        v = rng.integers(0, 2, (1000, N)).astype(np.uint8)
        np.testing.assert_array_equal(conv_encode(v, spec), v.astype(int) @ T % 2)


def test_toeplitz_shape():
    T = toeplitz_matrix((1, 0, 1), 4)
    np.testing.assert_array_equal(T, [[1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 0], [0, 0, 0, 1]])
    with pytest.raises(ValueError):
        toeplitz_matrix((0, 1), 4)


@given(specs(), st.integers(0, 2**32 - 1))
def test_precoding_invertible(spec, seed):
    v = np.random.default_rng(seed).integers(0, 2, spec.N).astype(np.uint8)
    np.testing.assert_array_equal(conv_decode(conv_encode(v, spec), spec), v)


@given(specs(), st.integers(0, 2**32 - 1))
def test_shift_register_matches_block_encoder(spec, seed):
    v = np.random.default_rng(seed).integers(0, 2, spec.N).astype(np.uint8)
    reg = ShiftRegister(spec.poly)
    serial = [reg.push(int(b), c) for b, c in zip(v, spec.offset)]
    np.testing.assert_array_equal(serial, conv_encode(v, spec))


@given(specs(max_n=5), st.integers(0, 2**32 - 1))
def test_encoder_is_affine_bijection_on_data(spec, seed):
    rng = np.random.default_rng(seed)
    d = rng.integers(0, 2, (2, spec.K)).astype(np.uint8)
    x = pac_encode(d, spec)
    zero = pac_encode(np.zeros(spec.K, dtype=np.uint8), spec)
    np.testing.assert_array_equal(x[0] ^ x[1] ^ zero, pac_encode(d[0] ^ d[1], spec))


def test_batched_encoding_matches_rows(pac128):
    d = np.random.default_rng(4).integers(0, 2, (7, pac128.K)).astype(np.uint8)
    x = pac_encode(d, pac128)
    for row, ref in zip(d, x):
        np.testing.assert_array_equal(pac_encode(row, pac128), ref)


@given(specs())
def test_json_round_trip(spec):
    back = CodeSpec.from_json(spec.to_json())
    assert back == spec
    assert back.content_hash() == spec.content_hash()


def test_json_is_one_based():
    doc = json.loads(CodeSpec(4, (0, 3)).to_json())
    assert doc["profile"] == [1, 4]
    assert doc["k"] == 2 and doc["n"] == 4


@pytest.mark.parametrize(
    "kwargs",
    [
        {"N": 6, "profile": ()},
        {"N": 8, "profile": (1, 1)},
        {"N": 8, "profile": (8,)},
        {"N": 8, "profile": (), "poly": (0, 1)},
        {"N": 8, "profile": (), "offset": (0, 1)},
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(ValueError):
        CodeSpec(**kwargs)


def test_k_mismatch_rejected():
    with pytest.raises(ValueError):
        CodeSpec.from_json_dict({"n": 4, "k": 3, "profile": [1, 2]})


def test_hash_changes_with_profile():
    assert CodeSpec(8, (1, 2)).content_hash() != CodeSpec(8, (1, 3)).content_hash()
