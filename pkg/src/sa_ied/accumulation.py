"""Syndrome accumulation over a recursively halved partition of the rows.

The rows ``0..n-1`` sit at the leaves of a binary tree whose root is the
whole index range; an internal node of size ``s`` splits into a first half
of ``(s + 1) // 2`` rows and a second half of ``s // 2``. Internal nodes are
split in breadth-first order, so after ``t - 1`` splits the live nodes form
a partition ``P_t`` into ``t`` contiguous cells. For ``n = 2^T`` this is the
classical recursion where step ``i`` splits cell ``2(i - 2^floor(log2 i)) + 1``.

Accumulated syndromes are XORs of syndrome bits over cells. Each split
needs a single new bit (the first child's value) because the second child
equals parent XOR first child; those bits form the augmenting stream.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import UsageError
from .gf2 import SparseBinaryMatrix, as_bits


@dataclass(frozen=True)
class _Tree:
    start: np.ndarray   # per node
    size: np.ndarray
    birth: np.ndarray   # number of splits after which the node exists
    death: np.ndarray   # split number that removes it (n for leaves)
    parent: np.ndarray
    split_node: np.ndarray  # split_node[k-1] = node split at split k
    left: np.ndarray        # first child of that node


@lru_cache(maxsize=32)
def _tree(n: int) -> _Tree:
    if n < 1:
        raise UsageError("n must be positive")
    start, size, birth, parent = [0], [n], [0], [-1]
    death = [n]
    split_node, left = [], []
    queue = [0]
    head = 0
    while head < len(queue):
        v = queue[head]
        head += 1
        if size[v] == 1:
            continue
        k = len(split_node) + 1
        death[v] = k
        split_node.append(v)
        a = (size[v] + 1) // 2
        for s0, sz in ((start[v], a), (start[v] + a, size[v] - a)):
            start.append(s0)
            size.append(sz)
            birth.append(k)
            death.append(n)
            parent.append(v)
            queue.append(len(size) - 1)
        left.append(len(size) - 2)
    arr = lambda a: np.asarray(a, dtype=np.int64)
    return _Tree(arr(start), arr(size), arr(birth), arr(death), arr(parent),
                 arr(split_node), arr(left))


@dataclass(frozen=True)
class PartitionView:
    """The partition ``P_t``: ``t`` contiguous cells in index order.

    ``starts`` are 0-based; ``cells()`` returns 1-based index ranges.
    """

    n: int
    t: int
    starts: np.ndarray
    sizes: np.ndarray

    def cells(self, one_based: bool = True) -> list[range]:
        off = 1 if one_based else 0
        return [range(s + off, s + z + off) for s, z in zip(self.starts.tolist(), self.sizes.tolist())]

    def cell_of_row(self) -> np.ndarray:
        """Cell index of every row, shape ``(n,)``."""
        return np.repeat(np.arange(self.t), self.sizes)

    def straddles(self, boundary: int) -> bool:
        """Whether some cell contains both row ``boundary - 1`` and ``boundary``."""
        ends = self.starts + self.sizes
        return bool(np.any((self.starts < boundary) & (ends > boundary)))


def _alive(n: int, t: int) -> np.ndarray:
    tr = _tree(n)
    done = t - 1
    idx = np.flatnonzero((tr.birth <= done) & (tr.death > done))
    return idx[np.argsort(tr.start[idx], kind="stable")]


def partition_cells(n: int, t: int) -> PartitionView:
    """Partition ``P_t`` of ``{1..n}``.

    Examples
    --------
    >>> partition_cells(8, 3).cells()
    [range(1, 3), range(3, 5), range(5, 9)]
    """
    if not 1 <= t <= n:
        raise UsageError(f"step t={t} outside [1, {n}]")
    idx = _alive(n, t)
    tr = _tree(n)
    return PartitionView(n, t, tr.start[idx].copy(), tr.size[idx].copy())


def split_sizes(n: int) -> np.ndarray:
    """Size of the cell split at each step, in split order."""
    tr = _tree(n)
    return tr.size[tr.split_node]


def derived_matrix(H: SparseBinaryMatrix, t: int) -> SparseBinaryMatrix:
    """Rows of ``H`` XORed together over the cells of ``P_t``.

    Entries that occur an even number of times in a cell cancel.
    """
    n = H.rows
    cell = partition_cells(n, t).cell_of_row()
    keys = cell[H.row_of_entry()].astype(np.int64) * H.cols + H.indices
    uniq, counts = np.unique(keys, return_counts=True)
    odd = uniq[counts % 2 == 1]
    r, c = np.divmod(odd, H.cols)
    indptr = np.concatenate([[0], np.cumsum(np.bincount(r, minlength=t))])
    return SparseBinaryMatrix(t, H.cols, indptr, c.astype(np.int32))


def cell_xor(s, t: int) -> np.ndarray:
    """Accumulated syndrome ``s_tilde_t`` computed directly from ``s``."""
    s = np.asarray(s, dtype=np.int64)
    view = partition_cells(s.size, t)
    cs = np.concatenate([[0], np.cumsum(s)])
    return as_bits((cs[view.starts + view.sizes] - cs[view.starts]) & 1)


def augmenting_stream(s) -> np.ndarray:
    """Bits ``a_1..a_n``: total parity, then each split's first-child parity."""
    s = np.asarray(s, dtype=np.int64)
    n = s.size
    tr = _tree(n)
    cs = np.concatenate([[0], np.cumsum(s)])
    lft = tr.left
    first = (cs[tr.start[lft] + tr.size[lft]] - cs[tr.start[lft]]) & 1
    return as_bits(np.concatenate([[cs[-1] & 1], first]))


class Accumulator:
    """Decoder-side rebuild of accumulated syndromes from augmenting bits.

    Owned by a single session; ``extend`` appends received bits.
    """

    def __init__(self, n: int):
        self.n = n
        self._tree = _tree(n)
        self._value = np.zeros(self._tree.start.size, dtype=np.uint8)
        self._received = np.zeros(n, dtype=np.uint8)
        self.t = 0

    def extend(self, bits) -> None:
        tr = self._tree
        for a in np.asarray(bits, dtype=np.uint8).tolist():
            if self.t >= self.n:
                raise UsageError("more augmenting bits than rows")
            if self.t == 0:
                self._value[0] = a
            else:
                v = tr.split_node[self.t - 1]
                lc = tr.left[self.t - 1]
                self._value[lc] = a
                self._value[lc + 1] = self._value[v] ^ a
            self._received[self.t] = a
            self.t += 1

    @property
    def s_tilde(self) -> np.ndarray:
        if self.t == 0:
            raise UsageError("no bits received yet")
        return as_bits(self._value[_alive(self.n, self.t)])

    @property
    def a_stream(self) -> np.ndarray:
        return as_bits(self._received[:self.t])


def reconstruct(a, n: int) -> np.ndarray:
    """Accumulated syndrome ``s_tilde_t`` from the first ``t`` augmenting bits."""
    a = np.asarray(a)
    if not 1 <= a.size <= n:
        raise UsageError(f"prefix length {a.size} outside [1, {n}]")
    acc = Accumulator(n)
    acc.extend(a)
    return acc.s_tilde
