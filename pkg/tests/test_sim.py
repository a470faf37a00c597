import csv
import io
import json
from collections import Counter

import numpy as np
import pytest
from oracles import hill_reference

from paclab.channels import bpsk_ber, ebn0_to_esn0
from paclab.precoder import CodeSpec, pac_encode
from paclab.sim import (
    CSV_HEADER,
    ExperimentConfig,
    ccdf_bound_overlay,
    ccdf_slope,
    clopper_pearson,
    empirical_ccdf,
    fit_pareto_tail,
    frame_block,
    run_sweep,
)


def small_fano(spec, **kw):
    base = dict(ebn0_grid=(2.5, 3.5), min_errors=15, max_frames=3000, bias_trials=5000, seed=5)
    base.update(kw)
    return ExperimentConfig(spec, **base)


def test_noiseless_sweep(pac128):
    summary = run_sweep(small_fano(pac128, noiseless=True, max_frames=512, ebn0_grid=(1.0,)))
    point = summary.points[0]
    assert point.frame_errors == 0 and point.fer == 0.0
    assert point.anv == 1.0
    assert point.stats.bit_count_hist == Counter({1: 512 * 128})


def test_uncoded_passthrough_matches_closed_form():
    # rate-one polar code: SC reduces to hard decisions mapped back through the
    # transform, so bit i is wrong iff an odd number of its 2^(n - popcount(i)) inputs flip
    n, N, ebn0 = 4, 16, 2.0
    spec = CodeSpec(N, tuple(range(N)), poly=(1,))
    cfg = ExperimentConfig(spec, (ebn0,), decoder="sc", min_errors=10**9, max_frames=40_000, seed=1)
    point = run_sweep(cfg).points[0]
    p = bpsk_ber(ebn0_to_esn0(ebn0, 1.0))
    fer = 1 - (1 - p) ** N
    lo, hi = point.fer_ci
    assert lo <= fer <= hi
    weights = np.array([2 ** (n - bin(i).count("1")) for i in range(N)])
    ber = np.mean((1 - (1 - 2 * p) ** weights) / 2)
    assert point.ber == pytest.approx(ber, rel=0.03)


def test_results_independent_of_worker_count(pac128):
    one = run_sweep(small_fano(pac128, workers=1)).to_csv()
    many = run_sweep(small_fano(pac128, workers=4)).to_csv()
    assert one == many


def test_scl_and_sc_sweeps_run(pac128):
    for decoder in ("sc", "scl"):
        cfg = small_fano(pac128, decoder=decoder, list_size=4, max_frames=300, min_errors=10**6, ebn0_grid=(3.0,))
        point = run_sweep(cfg).points[0]
        assert point.frames == 300
        assert 0 <= point.fer <= 1


def test_stop_rule_block_granularity(pac128):
    cfg = small_fano(pac128, ebn0_grid=(1.0,), min_errors=5, max_frames=10_000)
    point = run_sweep(cfg).points[0]
    assert point.frame_errors >= 5
    assert point.frames % cfg.block_frames == 0
    assert point.frames < cfg.max_frames


def test_common_noise_across_codes(pac128):
    other = CodeSpec(128, pac128.profile[1:])

    def noise(spec):
        d, llrs = frame_block(spec, 3.0, 7, 0, 2, 4)
        es = ebn0_to_esn0(3.0, spec.rate)
        s = 1.0 - 2.0 * pac_encode(d, spec)
        return (llrs / (4 * es) - s) * np.sqrt(2 * es)

    np.testing.assert_allclose(noise(pac128), noise(other), atol=1e-9)
    a, b = frame_block(pac128, 3.0, 7, 0, 2, 4), frame_block(pac128, 3.0, 7, 0, 2, 4)
    assert a[1].tobytes() == b[1].tobytes()


def test_csv_and_companion(tmp_path, pac128):
    summary = run_sweep(small_fano(pac128, max_frames=256, ebn0_grid=(3.0,)))
    path = tmp_path / "out.csv"
    json_path = summary.write(path)
    rows = list(csv.reader(io.StringIO(path.read_text())))
    assert rows[0] == CSV_HEADER
    assert len(rows) == 2 and float(rows[1][0]) == 3.0
    doc = json.loads(open(json_path).read())
    assert doc["spec_hash"] == pac128.content_hash()
    assert sum(doc["points"][0]["frame_count_hist"].values()) == 256
    back = ExperimentConfig.from_json_dict(doc["config"])
    assert back == summary.config


def test_config_validation(pac128):
    with pytest.raises(ValueError):
        ExperimentConfig(pac128, ())
    with pytest.raises(ValueError):
        ExperimentConfig(pac128, (1.0,), decoder="viterbi")
    with pytest.raises(ValueError):
        ExperimentConfig(pac128, (1.0,), workers=0)
    with pytest.raises(ValueError, match="unknown"):
        ExperimentConfig.from_json_dict({"ebn0_grid": [1.0], "colour": 1}, spec=pac128)


def test_clopper_pearson():
    lo, hi = clopper_pearson(0, 100)
    assert lo == 0.0 and hi == pytest.approx(1 - 0.025 ** (1 / 100))
    lo, hi = clopper_pearson(100, 100)
    assert hi == 1.0
    lo, hi = clopper_pearson(10, 1000)
    assert lo < 0.01 < hi


@pytest.mark.parametrize("beta", [1.0, 1.5])
def test_hill_on_synthetic_pareto(beta):
    rng = np.random.default_rng(int(beta * 10))
    x = 10.0 * rng.random(200_000) ** (-1 / beta)
    fit = fit_pareto_tail(x, 10.0, discrete=False)
    assert fit.ok
    assert fit.beta == pytest.approx(beta, abs=0.05)
    assert fit.beta == pytest.approx(hill_reference(x, 10.0), rel=1e-12)
    assert fit.ci[0] < fit.beta < fit.ci[1]


def test_hill_on_integer_pareto_uses_continuity_correction():
    rng = np.random.default_rng(3)
    x = np.floor(rng.random(1_000_000) ** (-1 / 1.5))
    hist = Counter(x.astype(int).tolist())
    fit = fit_pareto_tail(hist, 10)
    assert fit.beta == pytest.approx(1.5, abs=0.05)
    naive = fit_pareto_tail(hist, 10, discrete=False)
    assert abs(naive.beta - 1.5) > abs(fit.beta - 1.5)


def test_constant_input_has_no_tail():
    fit = fit_pareto_tail(np.ones(10_000), 1.0)
    assert fit.status == "insufficient tail" and fit.beta is None


def test_ccdf_helpers():
    hist = Counter({1: 50, 2: 30, 4: 20})
    L, P = empirical_ccdf(hist)
    np.testing.assert_allclose(P, [1.0, 0.5, 0.2])
    assert np.isnan(ccdf_slope(hist, 5, 6))
    rows = ccdf_bound_overlay(hist, eps=1.0, beta=1.5)
    assert [r["L"] for r in rows] == [1.0, 2.0, 4.0]
    assert not any(r["violated"] for r in rows)
