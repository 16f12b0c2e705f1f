"""GF(2) bit vectors and row-indexed sparse binary matrices.

Bit vectors are plain ``numpy.uint8`` arrays holding 0/1 values. Matrices are
stored in compressed-row form (``indptr``, ``indices``) with strictly sorted
row supports.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import UsageError


def as_bits(x, length: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a read-only uint8 0/1 vector.

    Parameters
    ----------
    x : array_like
        Sequence of 0/1 values (bools and ints accepted).
    length : int, optional
        Required length; a mismatch raises ``UsageError``.
    """
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise UsageError("bit vector must be one-dimensional")
    if arr.size and ((arr != 0) & (arr != 1)).any():
        raise UsageError("bit vector entries must be 0 or 1")
    arr = arr.astype(np.uint8, copy=True)
    if length is not None and arr.size != length:
        raise UsageError(f"expected {length} bits, got {arr.size}")
    arr.flags.writeable = False
    return arr


def weight_support(x) -> tuple[int, np.ndarray]:
    """Return the Hamming weight and the ascending support of ``x``."""
    support = np.flatnonzero(np.asarray(x))
    return int(support.size), support


def complement(x) -> np.ndarray:
    return as_bits(1 - np.asarray(x, dtype=np.uint8))


@dataclass(frozen=True, eq=False)
class SparseBinaryMatrix:
    """Sparse GF(2) matrix in compressed-row form.

    Attributes
    ----------
    rows, cols : int
        Shape of the matrix.
    indptr : ndarray of int64, shape (rows + 1,)
        Row ``j`` owns ``indices[indptr[j]:indptr[j + 1]]``.
    indices : ndarray of int32
        Column indices, strictly increasing within each row.
    """

    rows: int
    cols: int
    indptr: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.indices, dtype=np.int32)
        if self.rows < 0 or self.cols < 0:
            raise UsageError("matrix dimensions must be non-negative")
        if indptr.shape != (self.rows + 1,) or indptr[0] != 0 or indptr[-1] != indices.size:
            raise UsageError("malformed row pointer array")
        if np.any(np.diff(indptr) < 0):
            raise UsageError("row pointer array must be nondecreasing")
        if indices.size:
            if indices.min() < 0 or indices.max() >= self.cols:
                raise UsageError("column index out of range")
            # strictly increasing inside every row
            step = np.diff(indices.astype(np.int64))
            inner = np.ones(indices.size - 1, dtype=bool)
            starts = indptr[1:-1]
            starts = starts[(starts > 0) & (starts < indices.size)]
            inner[starts - 1] = False
            if np.any(step[inner] <= 0):
                raise UsageError("row supports must be strictly sorted without duplicates")
        indptr.flags.writeable = False
        indices.flags.writeable = False
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)

    @classmethod
    def from_row_supports(cls, rows: int, cols: int,
                          supports: Sequence[Iterable[int]]) -> "SparseBinaryMatrix":
        if len(supports) != rows:
            raise UsageError(f"expected {rows} row supports, got {len(supports)}")
        lists = [np.asarray(sorted(s), dtype=np.int64) for s in supports]
        lengths = np.array([a.size for a in lists], dtype=np.int64)
        indptr = np.concatenate([[0], np.cumsum(lengths)])
        indices = np.concatenate(lists) if lists else np.zeros(0, dtype=np.int64)
        return cls(rows, cols, indptr, indices.astype(np.int32))

    @classmethod
    def from_dense(cls, dense) -> "SparseBinaryMatrix":
        d = np.asarray(dense) & 1
        rows, cols = d.shape
        r, c = np.nonzero(d)
        indptr = np.concatenate([[0], np.cumsum(np.bincount(r, minlength=rows))])
        return cls(rows, cols, indptr, c.astype(np.int32))

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def row(self, j: int) -> np.ndarray:
        return self.indices[self.indptr[j]:self.indptr[j + 1]]

    @property
    def row_supports(self) -> list[np.ndarray]:
        return [self.row(j) for j in range(self.rows)]

    def row_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def col_degrees(self) -> np.ndarray:
        return np.bincount(self.indices, minlength=self.cols).astype(np.int64)

    def row_of_entry(self) -> np.ndarray:
        """Row index of every stored entry, aligned with ``indices``."""
        return np.repeat(np.arange(self.rows, dtype=np.int32), self.row_degrees())

    def transpose(self) -> "SparseBinaryMatrix":
        rows_of = self.row_of_entry()
        order = np.argsort(self.indices, kind="stable")
        indptr = np.concatenate([[0], np.cumsum(self.col_degrees())])
        return SparseBinaryMatrix(self.cols, self.rows, indptr, rows_of[order])

    def to_dense(self) -> np.ndarray:
        d = np.zeros((self.rows, self.cols), dtype=np.uint8)
        d[self.row_of_entry(), self.indices] = 1
        return d

    def vstack(self, other: "SparseBinaryMatrix") -> "SparseBinaryMatrix":
        if other.cols != self.cols:
            raise UsageError("column counts differ")
        indptr = np.concatenate([self.indptr, other.indptr[1:] + self.indptr[-1]])
        return SparseBinaryMatrix(self.rows + other.rows, self.cols, indptr,
                                  np.concatenate([self.indices, other.indices]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseBinaryMatrix):
            return NotImplemented
        return (self.shape == other.shape and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def __repr__(self) -> str:
        return f"SparseBinaryMatrix(rows={self.rows}, cols={self.cols}, nnz={self.nnz})"


def syndrome(H: SparseBinaryMatrix, x) -> np.ndarray:
    """Compute ``H x`` over GF(2).

    Each syndrome bit is the parity of ``x`` over one row support, obtained
    from a running sum so that empty rows need no special case.
    """
    x = np.asarray(x)
    if x.ndim != 1 or x.size != H.cols:
        raise UsageError(f"vector length {x.size} does not match {H.cols} columns")
    csum = np.zeros(H.nnz + 1, dtype=np.int64)
    np.cumsum(x[H.indices], out=csum[1:])
    s = (csum[H.indptr[1:]] - csum[H.indptr[:-1]]) & 1
    return as_bits(s)


# -- alist text format ------------------------------------------------------

def write_alist(H: SparseBinaryMatrix, path) -> None:
    """Write ``H`` in alist format (1-based, columns listed before rows)."""
    Ht = H.transpose()
    cdeg, rdeg = H.col_degrees(), H.row_degrees()
    lines = [f"{H.cols} {H.rows}",
             f"{int(cdeg.max(initial=0))} {int(rdeg.max(initial=0))}",
             " ".join(map(str, cdeg)),
             " ".join(map(str, rdeg))]
    lines += [" ".join(str(int(i) + 1) for i in Ht.row(c)) for c in range(H.cols)]
    lines += [" ".join(str(int(i) + 1) for i in H.row(r)) for r in range(H.rows)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_alist(path) -> SparseBinaryMatrix:
    """Read an alist file. Zero padding entries are ignored."""
    tokens = Path(path).read_text().split()
    try:
        vals = [int(t) for t in tokens]
    except ValueError as exc:
        raise UsageError(f"non-integer token in alist file {path}") from exc
    pos = 0

    def take(k):
        nonlocal pos
        if pos + k > len(vals):
            raise UsageError(f"truncated alist file {path}")
        out = vals[pos:pos + k]
        pos += k
        return out

    cols, rows = take(2)
    take(2)
    cdeg = take(cols)
    rdeg = take(rows)
    # padded files fill short lines with zeros; valid indices are >= 1
    body = [v for v in vals[pos:] if v]
    if len(body) != sum(cdeg) + sum(rdeg):
        raise UsageError(f"alist body length mismatch in {path}")
    col_lists, p = [], 0
    for d in cdeg:
        col_lists.append(body[p:p + d])
        p += d
    supports = []
    for d in rdeg:
        supports.append([v - 1 for v in body[p:p + d]])
        p += d
    M = SparseBinaryMatrix.from_row_supports(rows, cols, supports)
    # cross-check against the column view
    Mt = M.transpose()
    for c, lst in enumerate(col_lists):
        if sorted(v - 1 for v in lst) != Mt.row(c).tolist():
            raise UsageError(f"alist column {c + 1} disagrees with the row view")
    return M
