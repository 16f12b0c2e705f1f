import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import cells_by_recursion, dense_syndrome, naive_cell_xor
from sa_ied.accumulation import (Accumulator, augmenting_stream, cell_xor, derived_matrix,
                                 partition_cells, reconstruct)
from sa_ied.degrees import NodeDegreeDistribution, check_concentrated
from sa_ied.ensembles import EnsembleSpec, sample_ldpc
from sa_ied.errors import UsageError
from sa_ied.gf2 import SparseBinaryMatrix, syndrome

POW2 = [8, 16, 32, 64]


def test_partition_examples():
    assert [list(c) for c in partition_cells(8, 1).cells()] == [list(range(1, 9))]
    assert [list(c) for c in partition_cells(8, 3).cells()] == [[1, 2], [3, 4], [5, 6, 7, 8]]
    assert [list(c) for c in partition_cells(8, 8).cells()] == [[i] for i in range(1, 9)]
    with pytest.raises(UsageError):
        partition_cells(8, 9)


@pytest.mark.parametrize("n", POW2)
def test_partition_matches_split_index_recursion(n):
    for t in range(1, n + 1):
        got = [(c.start, c.stop - 1) for c in partition_cells(n, t).cells()]
        assert got == cells_by_recursion(n, t)


@pytest.mark.parametrize("n", POW2)
def test_partition_structure(n):
    prev = None
    for t in range(1, n + 1):
        v = partition_cells(n, t)
        cells = v.cells()
        assert len(cells) == t
        covered = [i for c in cells for i in c]
        assert covered == list(range(1, n + 1))  # disjoint, ordered, covering
        sizes = v.sizes.tolist()
        assert all(s & (s - 1) == 0 for s in sizes)
        assert len(set(sizes)) <= 2
        if len(set(sizes)) == 2:
            small = min(sizes)
            assert max(sizes) == 2 * small
            k = sizes.index(2 * small)  # all small cells precede the large ones
            assert all(s == small for s in sizes[:k]) and all(s == 2 * small for s in sizes[k:])
        if prev is not None:
            # one cell replaced by its two halves
            a, b = set(map(tuple, prev)), set(map(tuple, map(list, cells)))
            gone, new = a - b, b - a
            assert len(gone) == 1 and len(new) == 2
            (g,) = gone
            assert sorted(i for c in new for i in c) == list(g)
        prev = [list(c) for c in cells]


def test_general_length_partition():
    for n in (6, 12, 100):
        for t in range(1, n + 1):
            v = partition_cells(n, t)
            assert v.sizes.sum() == n and len(v.sizes) == t
            assert [i for c in v.cells() for i in c] == list(range(1, n + 1))


def test_derived_matrix_extremes(rng):
    D = rng.integers(0, 2, (16, 16)).astype(np.uint8)
    H = SparseBinaryMatrix.from_dense(D)
    assert derived_matrix(H, 16) == H
    top = derived_matrix(H, 1)
    assert np.array_equal(top.to_dense()[0], D.sum(axis=0) % 2)


@pytest.mark.parametrize("n", [8, 16, 32])
def test_derived_matrix_cellwise_xor(n, rng):
    D = rng.integers(0, 2, (n, n)).astype(np.uint8)
    H = SparseBinaryMatrix.from_dense(D)
    for t in range(1, n + 1):
        cells = cells_by_recursion(n, t)
        want = np.array([D[a - 1:b].sum(axis=0) % 2 for a, b in cells])
        assert np.array_equal(derived_matrix(H, t).to_dense(), want)


def test_derived_matrix_vs_accumulate_path(rng):
    n = 32
    H = sample_ldpc(EnsembleSpec(n, NodeDegreeDistribution.regular(3), seed=2))
    for _ in range(200):
        t = int(rng.integers(1, n + 1))
        x = rng.integers(0, 2, n).astype(np.uint8)
        a = augmenting_stream(syndrome(H, x))
        assert np.array_equal(syndrome(derived_matrix(H, t), x), reconstruct(a[:t], n))


def test_augmenting_examples():
    assert not augmenting_stream(np.zeros(8, dtype=np.uint8)).any()
    s = np.array([1, 0, 1, 1], dtype=np.uint8)
    a = augmenting_stream(s)
    assert a.tolist() == [1, 1, 1, 1]
    assert reconstruct(a[:1], 4).tolist() == [1]
    assert reconstruct(a, 4).tolist() == s.tolist()


@pytest.mark.parametrize("n", [8, 16, 32])
def test_reconstruct_equals_cell_xor(n, rng):
    for _ in range(20):
        s = rng.integers(0, 2, n).astype(np.uint8)
        a = augmenting_stream(s)
        for t in range(1, n + 1):
            want = naive_cell_xor(s, cells_by_recursion(n, t))
            assert np.array_equal(reconstruct(a[:t], n), want)
            assert np.array_equal(cell_xor(s, t), want)


@given(st.sampled_from(POW2), st.data())
def test_sibling_identity(n, data):
    s = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)), dtype=np.uint8)
    for t in range(1, n):
        fine = cell_xor(s, t + 1)
        coarse = cell_xor(s, t)
        cf = partition_cells(n, t + 1).cells()
        cc = partition_cells(n, t).cells()
        # the split cell equals the XOR of its two halves
        j = next(i for i, (a, b) in enumerate(zip(cc, cf)) if a != b)
        assert coarse[j] == fine[j] ^ fine[j + 1]
        assert list(cc[j]) == list(cf[j]) + list(cf[j + 1])


@pytest.mark.parametrize("n", POW2)
def test_end_to_end_exact(n, rng):
    for trial in range(5):
        L = NodeDegreeDistribution((3, 4), (0.5, 0.5))
        H = sample_ldpc(EnsembleSpec(n, L, seed=trial))
        x = rng.integers(0, 2, n).astype(np.uint8)
        a = augmenting_stream(syndrome(H, x))
        acc = Accumulator(n)
        for t in range(1, n + 1):
            acc.extend(a[t - 1:t])
            D = derived_matrix(H, t)
            assert np.array_equal(acc.s_tilde, syndrome(D, x))
            assert np.array_equal(acc.s_tilde, dense_syndrome(D.to_dense(), x))
        assert np.array_equal(acc.a_stream, a)


@pytest.mark.parametrize("n", POW2)
def test_constraint_nesting(n, rng):
    # the row space of H^(t) is contained in that of H^(t+1)
    H = sample_ldpc(EnsembleSpec(n, NodeDegreeDistribution.regular(3), seed=1))
    for t in range(1, n):
        coarse = derived_matrix(H, t).to_dense()
        fine = derived_matrix(H, t + 1).to_dense()
        cf = partition_cells(n, t + 1).cells()
        cc = partition_cells(n, t).cells()
        for i, cell in enumerate(cc):
            parts = [k for k, c in enumerate(cf) if set(c) <= set(cell)]
            assert np.array_equal(coarse[i], fine[parts].sum(axis=0) % 2)


def test_region_compatibility():
    # when R1 n is a multiple of the cell size no cell straddles the boundary
    for n in POW2:
        for l_bar in (3.25, 3.5, 3.75):
            cut = int(check_concentrated(l_bar).R1 * n)
            for t in range(1, n + 1):
                v = partition_cells(n, t)
                if cut % v.sizes.max() == 0:
                    assert not v.straddles(cut)


def test_accumulator_overflow():
    acc = Accumulator(4)
    acc.extend([0, 0, 0, 0])
    with pytest.raises(UsageError):
        acc.extend([1])
