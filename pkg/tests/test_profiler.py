import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from paclab.cutoff import ChunkRates, bec_polarize_exact, cutoff_rate_from_z
from paclab.profiler import (
    InfeasibleDesign,
    apply_cutoff_constraint,
    constraint_report,
    design_from_rates,
    freeze_min_weight_rows,
    min_row_weight,
    rm_profile,
    row_weight,
)


def bec_rates(erasure, k, N):
    rates = cutoff_rate_from_z(bec_polarize_exact(erasure, k))
    return ChunkRates(k, 0.0, rates, np.zeros(1 << k), N=N)


def flat_rates(value, k, N):
    return ChunkRates(k, 0.0, np.full(1 << k, value), np.zeros(1 << k), N=N)


def prefix_ok(profile, rates, chunk_len):
    """Independent check of the cumulative budget rule."""
    caps = np.clip(rates.rates - rates.stderr, 0, 1)
    N = chunk_len << rates.k
    info = np.zeros(N, dtype=int)
    info[list(profile)] = 1
    budget = np.cumsum(np.repeat(caps, chunk_len))
    kept = np.cumsum(info)
    ends = np.arange(chunk_len - 1, N, chunk_len)
    return bool(np.all(kept <= np.ceil(budget - 1e-9)) and np.all(kept[ends] <= np.floor(budget[ends] + 1e-9)))


def test_row_weights():
    np.testing.assert_array_equal(row_weight(np.arange(8)), [1, 2, 2, 4, 2, 4, 4, 8])


@pytest.mark.parametrize(
    "N, K, expected",
    [(8, 4, [3, 5, 6, 7]), (8, 1, [7]), (4, 3, [1, 2, 3]), (8, 0, []), (8, 8, list(range(8)))],
)
def test_rm_examples(N, K, expected):
    assert rm_profile(N, K) == expected


def test_rm_tie_break_prefers_large_indices():
    # weight-4 rows of N=16 are 3,5,6,9,10,12; five weight >= 8 rows come first
    assert rm_profile(16, 7) == [7, 10, 11, 12, 13, 14, 15]
    assert min_row_weight(rm_profile(1024, 968)) == 8


def test_rm_invalid():
    with pytest.raises(ValueError):
        rm_profile(8, 9)
    with pytest.raises(ValueError):
        rm_profile(12, 3)


def test_freeze_examples():
    prof = [3, 5, 6, 7]
    assert freeze_min_weight_rows(prof, 0) == (prof, [])
    assert freeze_min_weight_rows(prof, 2, "last") == ([3, 7], [6, 5])
    assert freeze_min_weight_rows(prof, 2, "first") == ([6, 7], [3, 5])
    with pytest.raises(ValueError):
        freeze_min_weight_rows(prof, 4)
    with pytest.raises(ValueError):
        freeze_min_weight_rows(prof, 1, "middle")


def test_half_rate_chunk_freezes_two():
    profile = list(range(2, 8))
    new, frozen = apply_cutoff_constraint(profile, flat_rates(0.5, 0, 8), 8)
    assert len(frozen) == 2
    assert len(new) == 4


def test_budget_accumulates_along_the_chunk():
    rates = flat_rates(0.5, 0, 8)
    # late bits spend budget accumulated earlier
    assert apply_cutoff_constraint([4, 5, 6, 7], rates, 8) == ([4, 5, 6, 7], [])
    # early bits break the prefix ceiling
    new, frozen = apply_cutoff_constraint([0, 1, 2, 3], rates, 8)
    assert len(frozen) == 2 and prefix_ok(new, rates, 8)


def test_full_rate_freezes_nothing():
    prof = list(range(64))
    new, frozen = apply_cutoff_constraint(prof, flat_rates(1.0, 3, 64), 8)
    assert frozen == [] and new == prof


def test_freezing_uses_per_bit_reliability():
    bit_r0 = np.array([0.9, 0.1, 0.8, 0.7, 0.95, 0.99, 0.2, 0.6])
    new, frozen = apply_cutoff_constraint(list(range(8)), flat_rates(0.5, 0, 8), 8, bit_r0)
    assert prefix_ok(new, flat_rates(0.5, 0, 8), 8)
    assert frozen[0] == 1


@given(st.integers(3, 8), st.integers(0, 3), st.floats(0.05, 0.95), st.data())
def test_constraint_always_satisfied(n, k, erasure, data):
    N = 1 << n
    k = min(k, n)
    rates = bec_rates(erasure, k, N)
    K = data.draw(st.integers(0, N))
    new, frozen = apply_cutoff_constraint(rm_profile(N, K), rates, N >> k)
    assert prefix_ok(new, rates, N >> k)
    assert sorted(new + frozen) == rm_profile(N, K)
    assert constraint_report(new, rates, N >> k)["cumulative_ok"]


def test_monotone_in_snr_with_exact_rates():
    N, k = 256, 4
    start = rm_profile(N, 200)
    counts = []
    for e in np.linspace(0.6, 0.05, 12):
        new, _ = apply_cutoff_constraint(start, bec_rates(e, k, N), N >> k)
        counts.append(len(new))
    assert all(b >= a for a, b in zip(counts, counts[1:]))
    assert counts[-1] > counts[0]


def test_deterministic_given_rates():
    rates = bec_rates(0.3, 3, 64)
    a = design_from_rates(64, 30, 42, rates, 0.0)
    b = design_from_rates(64, 30, 42, rates, 0.0)
    assert a.spec == b.spec and a.frozen_by_constraint == b.frozen_by_constraint


def test_design_invariants_and_variants():
    rates = bec_rates(0.25, 3, 64)
    last = design_from_rates(64, 36, 42, rates, 0.0, variant="last")
    first = design_from_rates(64, 36, 42, rates, 0.0, variant="first")
    for d in (last, first):
        assert d.spec.K == 36
        assert len(d.start_profile) - len(d.frozen_by_constraint) - len(d.frozen_by_weight) == 36
        assert prefix_ok(d.spec.profile, rates, 8)
    assert last.frozen_by_constraint == first.frozen_by_constraint
    if last.frozen_by_weight:
        assert max(last.frozen_by_weight) >= max(first.frozen_by_weight)
    doc = json.loads(last.to_json())
    assert doc["k_after_constraint"] == last.k_after_constraint


def test_weight_freezing_crosses_weight_classes():
    rates = flat_rates(1.0, 0, 16)
    d = design_from_rates(16, 4, 11, rates, 0.0)
    # the eleven RM rows have weights >= 4; dropping seven empties the weight-4 class
    assert d.spec.K == 4
    assert min_row_weight(d.spec.profile) == 8


def test_infeasible_design():
    with pytest.raises(InfeasibleDesign) as exc:
        design_from_rates(64, 40, 42, bec_rates(0.5, 3, 64), 0.0)
    assert exc.value.achieved_k < 40
    assert exc.value.target_k == 40


def test_design_argument_order():
    with pytest.raises(ValueError):
        design_from_rates(64, 50, 42, flat_rates(1.0, 3, 64), 0.0)
