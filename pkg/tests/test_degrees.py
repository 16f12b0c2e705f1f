import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sa_ied.degrees import (EdgeDegreeDistribution, NodeDegreeDistribution, check_concentrated,
                            check_counts, edge_to_node, lift, load_node_distribution,
                            node_counts, node_to_edge, quantize, read_distribution,
                            reference_lambda, support_profile, write_distribution)
from sa_ied.errors import UsageError
from sa_ied.gf2 import SparseBinaryMatrix


@st.composite
def node_dists(draw, max_entries=6):
    degs = sorted(draw(st.sets(st.integers(2, 40), min_size=1, max_size=max_entries)))
    w = draw(st.lists(st.floats(0.01, 1.0), min_size=len(degs), max_size=len(degs)))
    return NodeDegreeDistribution.normalized(degs, w)


def test_check_concentrated_examples():
    p = check_concentrated(3.5)
    assert (p.r1, p.r2, p.R1, p.R2) == (3, 4, 0.5, 0.5)
    p = check_concentrated(3)
    assert (p.r1, p.r2, p.R1, p.R2) == (3, 3, 1.0, 0.0)
    with pytest.raises(UsageError):
        check_concentrated(1.0)


def test_check_concentrated_grid():
    for l_bar in np.round(np.arange(2.0, 8.0001, 0.1), 10):
        p = check_concentrated(float(l_bar))
        assert abs(p.R1 * p.r1 + p.R2 * p.r2 - l_bar) < 1e-12
        assert abs(p.R1 + p.R2 - 1) < 1e-12
        assert p.r2 in (p.r1, p.r1 + 1)


def test_reference_profile_balances():
    L = edge_to_node(reference_lambda())
    p = check_concentrated(L.average)
    assert abs(p.R1 * p.r1 + p.R2 * p.r2 - L.average) < 1e-12
    assert 4.9 < L.average < 5.1


def test_edge_to_node_examples():
    L = edge_to_node(EdgeDegreeDistribution((2,), (1.0,)))
    assert L.degrees == (2,) and L.average == 2
    L = edge_to_node(EdgeDegreeDistribution((2, 3), (0.5, 0.5)))
    assert L.fractions == pytest.approx((0.6, 0.4), abs=1e-15)
    assert L.average == pytest.approx(2.4, abs=1e-14)


@given(node_dists())
def test_node_edge_round_trip(L):
    back = edge_to_node(node_to_edge(L))
    assert back.degrees == L.degrees
    assert np.allclose(back.fractions, L.fractions, atol=1e-12, rtol=0)


@given(node_dists())
def test_edge_average_identity(L):
    # node average equals 1 / sum(lambda_i / l_i)
    lam = node_to_edge(L)
    assert L.average == pytest.approx(1 / math.fsum(f / d for d, f in lam.entries), rel=1e-12)


@given(node_dists(), st.sampled_from([2, 5, 9]))
def test_lift(L, k):
    M = lift(L, k)
    assert M.average == pytest.approx(k * L.average, rel=1e-14)
    assert M.fractions == L.fractions
    assert math.fsum(M.fractions) == math.fsum(L.fractions)


def test_lift_single_degree():
    assert lift(NodeDegreeDistribution.regular(2), 3).degrees == (6,)


def test_invalid_distributions():
    with pytest.raises(UsageError):
        NodeDegreeDistribution((3, 2), (0.5, 0.5))
    with pytest.raises(UsageError):
        NodeDegreeDistribution((2, 3), (0.5, 0.6))
    with pytest.raises(UsageError):
        NodeDegreeDistribution((2,), (0.0,))


def test_node_counts_rejects_non_integral():
    L = NodeDegreeDistribution((2, 3), (1 / 3, 2 / 3))
    with pytest.raises(UsageError):
        node_counts(L, 16)
    assert node_counts(L, 12).tolist() == [4, 8]
    with pytest.raises(UsageError):
        check_counts(check_concentrated(3.3), 16)


def test_quantize_reference_at_8000():
    L = edge_to_node(reference_lambda())
    Q = quantize(L, 8000)
    counts = node_counts(Q, 8000)
    assert counts.sum() == 8000
    assert np.all(np.abs(counts - np.array(L.fractions) * 8000) < 1)
    # the check profile is integral at this length as well
    check_counts(check_concentrated(Q.average), 8000)


def test_support_profile_examples(rng):
    D = (rng.random((16, 16)) < 0.25).astype(np.uint8)
    D[0, :] = 1  # no empty columns
    H = SparseBinaryMatrix.from_dense(D)
    empty = support_profile(H, [])
    assert empty.l_bar_support == 0 and empty.l_hat == 1 / 16
    full = support_profile(H, np.arange(16))
    assert full.l_bar_support == pytest.approx(H.nnz / 16)
    with pytest.raises(UsageError):
        support_profile(H, [16])


def test_support_profile_naive(rng):
    for _ in range(30):
        D = (rng.random((20, 20)) < 0.2).astype(np.uint8)
        H = SparseBinaryMatrix.from_dense(D)
        sup = rng.choice(20, size=rng.integers(0, 21), replace=False)
        sp = support_profile(H, sup)
        deg = D.sum(axis=0)
        for d, f in zip(sp.degrees, sp.fractions):
            assert f * 20 == sum(1 for c in sup if deg[c] == d)
            assert 0 <= f <= np.mean(deg == d)
        assert sp.l_bar_support == pytest.approx(sum(deg[c] for c in sup) / 20)
        lb = deg.sum() / 20
        assert 0 <= sp.l_bar_support <= lb + 1e-12
        assert sp.l_hat == pytest.approx(max(1 / 20, min(sp.l_bar_support, lb - sp.l_bar_support)))


def test_distribution_file_round_trip(tmp_path):
    L = NodeDegreeDistribution((2, 5), (0.25, 0.75))
    p = tmp_path / "d.txt"
    write_distribution(L, p)
    assert read_distribution(p) == L
    lam = node_to_edge(L)
    write_distribution(lam, p)
    again = load_node_distribution(p)
    assert np.allclose(again.fractions, L.fractions, atol=1e-15)


def test_distribution_file_errors(tmp_path):
    p = tmp_path / "d.txt"
    p.write_text("2 0.5\n3 0.5\n")
    with pytest.raises(UsageError):
        read_distribution(p)
    p.write_text("# comment\nperspective = node\n2 0.5 extra\n")
    with pytest.raises(UsageError):
        read_distribution(p)
    p.write_text("perspective = node\n2 0.1\n3 0.1\n")  # renormalized
    assert read_distribution(p).fractions == (0.5, 0.5)
