import csv
import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sa_ied.degrees import NodeDegreeDistribution
from sa_ied.ensembles import EnsembleSpec
from sa_ied.errors import UsageError
from sa_ied.harness import (CSV_COLUMNS, ChannelModel, ExperimentConfig, ExperimentResult,
                            fit_distribution, gen_pair, mc_collision_curve, mc_collision_prob,
                            mc_collision_prob_gallager, parse_config, run_experiment)
from sa_ied.protocol import SessionConfig

L3 = NodeDegreeDistribution.regular(3)


def test_gen_pair_bsc_statistics():
    x, y = gen_pair(ChannelModel.bsc(0.0), 1000, 1)
    assert np.array_equal(x, y)
    x, y = gen_pair(ChannelModel.bsc(0.1), 100_000, 2)
    assert 0.095 <= np.mean(x != y) <= 0.105
    assert 0.49 <= np.mean(y) <= 0.51


def test_gen_pair_asymmetric_statistics():
    ch = ChannelModel.asymmetric(0.05, 0.2, py0=0.7)
    x, y = gen_pair(ch, 200_000, 3)
    assert np.mean(y == 0) == pytest.approx(0.7, abs=0.005)
    assert np.mean(x[y == 0]) == pytest.approx(0.05, abs=0.003)
    assert np.mean(1 - x[y == 1]) == pytest.approx(0.2, abs=0.006)


def test_gen_pair_keys():
    ch = ChannelModel.bsc(0.2)
    a, b = gen_pair(ch, 64, (4, 1)), gen_pair(ch, 64, (4, 1))
    c = gen_pair(ch, 64, (4, 2))
    assert np.array_equal(a[0], b[0]) and not np.array_equal(a[0], c[0])


def test_channel_model():
    ch = ChannelModel.asymmetric(0.1, 0.3, 0.4)
    assert np.allclose(ch.transition.sum(axis=0), 1)
    assert ChannelModel.bsc(0.1).conditional_entropy == pytest.approx(0.4689955935892812)
    assert ChannelModel("bsc", p0=0.1, py0=0.9).py0 == 0.5
    for bad in (lambda: ChannelModel.bsc(0.5), lambda: ChannelModel.asymmetric(0, 0.1),
                lambda: ChannelModel.asymmetric(0.1, 0.1, 1.0)):
        with pytest.raises(UsageError):
            bad()


@pytest.fixture(scope="module")
def small_cfg():
    sess = SessionConfig(n=256, L=L3, epsilon=0.3, seed=2, threshold_mode="asymptotic")
    return ExperimentConfig(ChannelModel.bsc(0.03), sess, blocks=6, seed=11)


def test_experiment_csv_layout(small_cfg):
    res = run_experiment(small_cfg)
    rows = list(csv.reader(io.StringIO(res.to_csv())))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert [r[0] for r in rows[1:-1]] == [str(i) for i in range(6)]
    assert rows[-1][0] == "mean" and rows[-1][-1] == "blocks=6"
    assert float(rows[-1][2]) == pytest.approx(np.mean([r["r_f"] for r in res.rows]))


def test_experiment_order_independence(small_cfg, tmp_path):
    a = run_experiment(small_cfg)
    b = run_experiment(small_cfg, block_ids=[5, 2, 0, 4, 1, 3])
    assert a.rows == b.rows
    par = ExperimentConfig(small_cfg.channel, small_cfg.session, blocks=6, seed=11, workers=2,
                           out=str(tmp_path / "r.csv"))
    c = run_experiment(par)
    assert c.rows == a.rows
    assert (tmp_path / "r.csv").read_text() == a.to_csv()


def test_experiment_result_aggregates():
    rows = [dict(block_id=0, rounds=2, r_f=0.5, r_b=0.01, word_error=0, bit_errors=0, status="converged"),
            dict(block_id=1, rounds=3, r_f=0.6, r_b=0.02, word_error=1, bit_errors=4, status="converged"),
            dict(block_id=2, rounds=0, r_f=0.0, r_b=0.0, word_error=0, bit_errors=0, status="error:OSError")]
    res = ExperimentResult(rows, n=100)
    assert res.mean_rate == pytest.approx(0.565)
    assert res.word_errors == 1
    assert res.bit_error_rate == pytest.approx(4 / 200)
    assert ExperimentResult([], 10).footer()["status"] == "no_blocks"


def test_bad_experiment_config(small_cfg):
    with pytest.raises(UsageError):
        ExperimentConfig(small_cfg.channel, small_cfg.session, blocks=0)


def test_collision_of_zero_word_is_certain():
    spec = EnsembleSpec(64, L3, seed=1)
    assert mc_collision_prob(spec, np.zeros(64), 2, 8, 20) == 1.0
    assert mc_collision_prob_gallager(6, 12, np.zeros(12), 20) == 1.0


def test_collision_curve_is_monotone_in_t():
    spec = EnsembleSpec(64, L3, seed=5)
    x = np.zeros(64, dtype=np.uint8)
    x[:3] = 1
    curve = mc_collision_curve(spec, [x], [8, 16, 32, 64], 300)[0]
    # a zero accumulated syndrome at t implies one at every coarser t' < t
    assert all(a >= b for a, b in zip(curve, curve[1:]))


def test_parse_config():
    text = "n = 16\n# comment\ndelta=4  # trailing\n[bp]\nmax_iterations = 7\n[]\nseed = 3\n"
    assert parse_config(text) == {"n": "16", "delta": "4", "bp.max_iterations": "7", "seed": "3"}
    with pytest.raises(UsageError):
        parse_config("n 16\n")
    with pytest.raises(UsageError):
        parse_config("= 3\n")


@given(st.dictionaries(st.from_regex(r"[a-z][a-z0-9_.]{0,8}", fullmatch=True),
                       st.from_regex(r"[A-Za-z0-9_.:,-]{0,10}", fullmatch=True), max_size=8))
def test_parse_config_roundtrip(d):
    text = "\n".join(f"{k} = {v}" for k, v in d.items())
    assert parse_config(text) == d


def test_fit_distribution():
    L, rounded = fit_distribution(L3, 64)
    assert L is L3 and not rounded
    odd = NodeDegreeDistribution([2, 3], [1 / 3, 2 / 3])
    L2, rounded = fit_distribution(odd, 64)
    assert rounded and L2 != odd
