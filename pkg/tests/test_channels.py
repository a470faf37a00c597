import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from paclab.channels import (
    AwgnParams,
    DiscreteChannel,
    analytic_channel,
    awgn_llrs,
    bpsk_awgn_transmit,
    bpsk_ber,
    ebn0_to_esn0,
    random_dmc,
)


def test_bsc_rows():
    ch = analytic_channel("BSC", 0.1)
    np.testing.assert_allclose(ch.transition, [[0.9, 0.1], [0.1, 0.9]])
    np.testing.assert_array_equal(analytic_channel("BSC", 0).transition, np.eye(2))


def test_bec_extremes():
    ch = analytic_channel("BEC", 1.0)
    np.testing.assert_array_equal(ch.transition[:, 2], [1.0, 1.0])
    assert ch.outputs[2] == "?"
    assert ch.input_dist == (0.5, 0.5)


@pytest.mark.parametrize("p", [-0.1, 1.5])
def test_probability_out_of_range(p):
    with pytest.raises(ValueError):
        analytic_channel("BSC", p)


def test_unknown_kind():
    with pytest.raises(ValueError):
        analytic_channel("Z", 0.1)


def test_rows_must_sum_to_one():
    with pytest.raises(ValueError):
        DiscreteChannel(np.array([[0.5, 0.4], [0.5, 0.5]]))


@given(st.integers(0, 2**32 - 1))
def test_random_dmc_is_valid(seed):
    ch = random_dmc(np.random.default_rng(seed))
    assert 2 <= ch.transition.shape[1] <= 4
    np.testing.assert_allclose(ch.transition.sum(axis=1), 1.0, atol=1e-12)


def test_llr_formula_and_noiseless_limit():
    x = np.zeros(16, dtype=np.uint8)
    llr = bpsk_awgn_transmit(x, AwgnParams(es_n0=math.inf, seed=0))
    assert np.all(np.isposinf(llr))
    rng = np.random.default_rng(0)
    es = 0.7
    y_llr = awgn_llrs(np.array([0, 1]), es, rng)
    rng = np.random.default_rng(0)
    z = rng.standard_normal(2)
    expected = 4 * es * (np.array([1.0, -1.0]) + math.sqrt(1 / (2 * es)) * z)
    np.testing.assert_allclose(y_llr, expected)


def test_transmit_deterministic():
    x = np.random.default_rng(3).integers(0, 2, 100)
    a = bpsk_awgn_transmit(x, AwgnParams(1.3, seed=42))
    b = bpsk_awgn_transmit(x, AwgnParams(1.3, seed=42))
    assert a.tobytes() == b.tobytes()


def test_invalid_snr():
    with pytest.raises(ValueError):
        AwgnParams(0.0)
    with pytest.raises(ValueError):
        bpsk_awgn_transmit([], AwgnParams(1.0))


def test_bhattacharyya_decreases_with_snr():
    rng = np.random.default_rng(5)
    zs = []
    for es in [0.25, 0.5, 1.0, 2.0, 4.0]:
        llr = awgn_llrs(np.zeros(200_000, dtype=np.uint8), es, rng)
        zs.append(np.exp(-llr / 2).mean())
    assert all(0 < z < 1 for z in zs)
    assert all(a > b for a, b in zip(zs, zs[1:]))
    # analytic Z of BI-AWGN is exp(-es_n0)
    np.testing.assert_allclose(zs, np.exp(-np.array([0.25, 0.5, 1.0, 2.0, 4.0])), rtol=0.05)


def test_uncoded_ber_matches_q_function():
    es = ebn0_to_esn0(9.6, 1.0)
    p = bpsk_ber(es)
    assert p == pytest.approx(1.0e-5, rel=0.1)
    rng = np.random.default_rng(9)
    n, errors = 0, 0
    for _ in range(10):
        llr = awgn_llrs(np.zeros(10_000_000, dtype=np.uint8), es, rng)
        errors += int(np.sum(llr < 0))
        n += llr.size
    sigma = math.sqrt(p * (1 - p) / n)
    assert abs(errors / n - p) < 3 * sigma
