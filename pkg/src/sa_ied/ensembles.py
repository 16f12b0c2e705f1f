"""Random parity-check matrices.

``sample_ldpc`` draws from the fixed-profile LDPC ensemble with a
configuration model; ``sample_gallager`` draws i.i.d. fair bits.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .degrees import (CheckProfile, NodeDegreeDistribution, check_concentrated,
                      check_counts, node_counts)
from .errors import ConstructionError, UsageError
from .gf2 import SparseBinaryMatrix
from .rng import bit_generator, make_rng


@dataclass(frozen=True)
class EnsembleSpec:
    """Square ``n x n`` LDPC ensemble with column profile ``L``.

    The check profile defaults to the concentrated one for ``L``'s average.
    ``n`` need not be a power of two here; the protocol layer decides.

    With ``acyclic_degree2`` the degree-2 columns are laid out as a random
    path over the cells of the coarsest row partition that can hold them,
    so they form no cycles and never cancel in any accumulated matrix that
    is at least that fine. All other sockets are paired at random.
    """

    n: int
    L: NodeDegreeDistribution
    seed: int | tuple = 0
    check: CheckProfile | None = field(default=None)
    acyclic_degree2: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise UsageError("block length must be at least 2")
        if self.check is None:
            object.__setattr__(self, "check", check_concentrated(self.L.average))
        cols = node_counts(self.L, self.n)
        rows = check_counts(self.check, self.n)
        edges_c = int(np.dot(cols, self.L.degrees))
        edges_r = rows[0] * self.check.r1 + rows[1] * self.check.r2
        if edges_c != edges_r:
            raise UsageError(f"edge counts differ: {edges_c} column sockets, {edges_r} row sockets")

    def column_degrees(self) -> np.ndarray:
        return np.repeat(np.array(self.L.degrees), node_counts(self.L, self.n))

    def row_degrees(self) -> np.ndarray:
        c1, c2 = check_counts(self.check, self.n)
        return np.concatenate([np.full(c1, self.check.r1), np.full(c2, self.check.r2)]).astype(np.int64)


def _duplicate_mask(rows: np.ndarray, cols: np.ndarray, n: int) -> np.ndarray:
    keys = rows.astype(np.int64) * n + cols
    order = np.argsort(keys, kind="stable")
    sk = keys[order]
    dup = np.zeros(keys.size, dtype=bool)
    dup[order[1:][sk[1:] == sk[:-1]]] = True
    return dup


def _repair(rows, cols, n, rng, budget):
    """Remove repeated (row, col) pairs by swapping row endpoints.

    Each surplus copy of a repeated edge is swapped with a uniformly chosen
    edge whenever the swap creates no new repeat.
    """
    keys = rows.astype(np.int64) * n + cols
    count = Counter(keys.tolist())
    seen = set()
    surplus = []
    for e, key in enumerate(keys.tolist()):
        if key in seen:
            surplus.append(e)
        seen.add(key)
    E = rows.size
    for e in surplus:
        if count[int(rows[e]) * n + int(cols[e])] < 2:
            continue
        for _ in range(budget):
            f = int(rng.integers(E))
            r_e, c_e, r_f, c_f = int(rows[e]), int(cols[e]), int(rows[f]), int(cols[f])
            new_e, new_f = r_f * n + c_e, r_e * n + c_f
            if count[new_e] or count[new_f]:
                continue
            count[r_e * n + c_e] -= 1
            count[r_f * n + c_f] -= 1
            count[new_e] += 1
            count[new_f] += 1
            rows[e], rows[f] = r_f, r_e
            break
        else:
            raise ConstructionError("edge-swap repair exhausted its budget")
    return rows


def sample_ldpc(spec: EnsembleSpec, max_retries: int = 1000,
                repair_budget: int = 10000) -> SparseBinaryMatrix:
    """Draw ``H`` with exact row and column degree multisets.

    Rows and columns are indexed in nondecreasing degree order. Socket
    pairings with repeated entries are redrawn up to ``max_retries`` times,
    after which the last pairing is repaired by edge swaps.
    """
    n = spec.n
    cdeg = spec.column_degrees()
    rdeg = spec.row_degrees()
    col_sock = np.repeat(np.arange(n, dtype=np.int64), cdeg)
    row_sock = np.repeat(np.arange(n, dtype=np.int64), rdeg)
    rng = make_rng(*(spec.seed if isinstance(spec.seed, tuple) else (spec.seed,)))
    fixed_rows = np.zeros(0, dtype=np.int64)
    fixed_cols = np.zeros(0, dtype=np.int64)
    if spec.acyclic_degree2 and np.any(cdeg == 2):
        fixed_rows, fixed_cols, used = _degree2_path(n, cdeg, row_sock, rng)
        keep = np.ones(row_sock.size, dtype=bool)
        keep[used] = False
        row_sock = row_sock[keep]
        col_sock = col_sock[cdeg[col_sock] != 2]
    rows = None
    for _ in range(max(1, max_retries)):
        rows = row_sock[rng.permutation(row_sock.size)]
        if not _duplicate_mask(rows, col_sock, n).any():
            break
    else:
        rows = _repair(rows.copy(), col_sock, n, rng, repair_budget)
    return _assemble(n, np.concatenate([fixed_rows, rows]),
                     np.concatenate([fixed_cols, col_sock]))


def _degree2_path(n, cdeg, row_sock, rng):
    """Place degree-2 columns along a random path of row cells.

    Returns the rows and columns of the placed edges and the positions of
    the consumed entries of ``row_sock``.
    """
    from .accumulation import partition_cells

    cols2 = np.flatnonzero(cdeg == 2)
    k = cols2.size
    t = min(n, k + 1)
    view = partition_cells(n, t)
    if t < k + 1:
        raise ConstructionError("too many degree-2 columns for an acyclic layout")
    order = rng.permutation(t)
    ends = np.stack([order[:k], order[1:k + 1]], axis=1)  # cell pair per column
    cell_of_row = view.cell_of_row()
    sock_cell = cell_of_row[row_sock]
    # shuffle sockets, then hand each cell's sockets out in that order
    perm = rng.permutation(row_sock.size)
    perm = perm[np.argsort(sock_cell[perm], kind="stable")]
    first = np.searchsorted(sock_cell[perm], np.arange(t))
    taken = np.zeros(t, dtype=np.int64)
    picked = np.empty((k, 2), dtype=np.int64)
    for i in range(k):
        for side in (0, 1):
            c = ends[i, side]
            pos = first[c] + taken[c]
            if pos >= row_sock.size or sock_cell[perm[pos]] != c:
                raise ConstructionError("row cell ran out of sockets")
            picked[i, side] = perm[pos]
            taken[c] += 1
    rows = row_sock[picked.ravel()]
    cols = np.repeat(cols2, 2)
    return rows, cols, picked.ravel()


def _assemble(n, rows, cols) -> SparseBinaryMatrix:
    order = np.lexsort((cols, rows))
    r, c = rows[order], cols[order]
    indptr = np.concatenate([[0], np.cumsum(np.bincount(r, minlength=n))])
    return SparseBinaryMatrix(n, n, indptr, c.astype(np.int32))


def gallager_blocks(m: int, n: int, seed, block_rows: int = 512):
    """Yield ``(row_offset, packed)`` blocks of a Gallager matrix.

    ``packed`` is a ``(rows, ceil(n/64))`` uint64 array; bit ``j`` of a row
    (little-endian within words) is entry ``j``. The raw Philox stream is
    consumed in row order so any block size yields the same matrix.
    """
    if m < 1 or n < 1:
        raise UsageError("Gallager matrix needs m >= 1 and n >= 1")
    words = (n + 63) // 64
    keys = seed if isinstance(seed, tuple) else (seed,)
    bg = bit_generator(*keys)
    tail = n % 64
    mask = np.uint64((1 << tail) - 1) if tail else None
    for off in range(0, m, block_rows):
        k = min(block_rows, m - off)
        block = bg.random_raw(k * words).reshape(k, words)
        if mask is not None:
            block[:, -1] &= mask
        yield off, block


def _unpack(block: np.ndarray, n: int) -> np.ndarray:
    as_bytes = block.astype("<u8").view(np.uint8).reshape(block.shape[0], -1)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :n]


def sample_gallager(m: int, n: int, seed) -> SparseBinaryMatrix:
    """``m x n`` matrix with independent fair-coin entries."""
    dense = np.concatenate([_unpack(b, n) for _, b in gallager_blocks(m, n, seed)])
    return SparseBinaryMatrix.from_dense(dense)


def gallager_syndrome(m: int, n: int, seed, x) -> np.ndarray:
    """``H x`` for the Gallager matrix of ``(m, n, seed)`` without storing it."""
    x = np.asarray(x, dtype=np.uint8)
    if x.size != n:
        raise UsageError("vector length does not match n")
    words = (n + 63) // 64
    xb = np.zeros(words * 8, dtype=np.uint8)
    xb[:(n + 7) // 8] = np.packbits(x, bitorder="little")
    xw = xb.view("<u8")
    out = np.empty(m, dtype=np.uint8)
    for off, block in gallager_blocks(m, n, seed):
        ones = np.bitwise_count(block & xw).sum(axis=1)
        out[off:off + block.shape[0]] = ones & 1
    out.flags.writeable = False
    return out
