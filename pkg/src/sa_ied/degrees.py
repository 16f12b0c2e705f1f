"""Variable and check degree distributions.

A node-perspective distribution ``L`` lists the fraction of variable nodes
with each degree; an edge-perspective distribution ``lam`` lists the fraction
of edges attached to variable nodes of each degree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import UsageError
from .gf2 import SparseBinaryMatrix

SUM_TOL = 1e-12
INTEGRAL_TOL = 1e-9


def _check_entries(degrees, fractions, what):
    if len(degrees) == 0 or len(degrees) != len(fractions):
        raise UsageError(f"{what}: need matching non-empty degree and fraction lists")
    if any(int(d) != d or d < 1 for d in degrees):
        raise UsageError(f"{what}: degrees must be positive integers")
    if any(b <= a for a, b in zip(degrees, degrees[1:])):
        raise UsageError(f"{what}: degrees must be strictly increasing")
    if any(not (0.0 < f <= 1.0) for f in fractions):
        raise UsageError(f"{what}: fractions must lie in (0, 1]")
    if abs(math.fsum(fractions) - 1.0) > SUM_TOL:
        raise UsageError(f"{what}: fractions sum to {math.fsum(fractions)!r}, not 1")


def _normalize(degrees, fractions):
    pairs = sorted((int(d), float(f)) for d, f in zip(degrees, fractions) if f > 0)
    merged: dict[int, float] = {}
    for d, f in pairs:
        merged[d] = merged.get(d, 0.0) + f
    total = math.fsum(merged.values())
    if total <= 0:
        raise UsageError("distribution has no positive mass")
    degs = tuple(merged)
    return degs, tuple(merged[d] / total for d in degs)


@dataclass(frozen=True)
class NodeDegreeDistribution:
    """Variable-node degree distribution ``L(z) = sum_i L_i z^{l_i}``."""

    degrees: tuple[int, ...]
    fractions: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        object.__setattr__(self, "fractions", tuple(float(f) for f in self.fractions))
        _check_entries(self.degrees, self.fractions, "node distribution")

    @classmethod
    def normalized(cls, degrees, fractions) -> "NodeDegreeDistribution":
        """Build from unnormalized weights (merges repeats, drops zeros)."""
        return cls(*_normalize(degrees, fractions))

    @classmethod
    def regular(cls, degree: int) -> "NodeDegreeDistribution":
        return cls((degree,), (1.0,))

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.degrees, self.fractions))

    @property
    def average(self) -> float:
        """Average degree ``L'(1)``."""
        return math.fsum(d * f for d, f in self.entries)

    @property
    def min_degree(self) -> int:
        return self.degrees[0]


@dataclass(frozen=True)
class EdgeDegreeDistribution:
    """Edge-perspective distribution ``lambda(x) = sum_i lam_i x^{l_i - 1}``."""

    degrees: tuple[int, ...]
    fractions: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        object.__setattr__(self, "fractions", tuple(float(f) for f in self.fractions))
        _check_entries(self.degrees, self.fractions, "edge distribution")

    @classmethod
    def normalized(cls, degrees, fractions) -> "EdgeDegreeDistribution":
        return cls(*_normalize(degrees, fractions))

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.degrees, self.fractions))


@dataclass(frozen=True)
class CheckProfile:
    """Two-degree check distribution ``R(z) = R1 z^{r1} + R2 z^{r2}``."""

    r1: int
    r2: int
    R1: float
    R2: float

    def __post_init__(self):
        if self.r1 < 1 or self.r2 not in (self.r1, self.r1 + 1):
            raise UsageError("check degrees must satisfy r2 in {r1, r1 + 1}")
        if not (0 <= self.R1 <= 1 and 0 <= self.R2 <= 1) or abs(self.R1 + self.R2 - 1) > SUM_TOL:
            raise UsageError("check fractions must be in [0, 1] and sum to 1")

    @property
    def average(self) -> float:
        return self.R1 * self.r1 + self.R2 * self.r2


def check_concentrated(l_bar: float) -> CheckProfile:
    """Check profile with degrees confined to floor and ceil of ``l_bar``.

    Examples
    --------
    >>> check_concentrated(3.5)
    CheckProfile(r1=3, r2=4, R1=0.5, R2=0.5)
    """
    if not l_bar > 1:
        raise UsageError(f"average degree must exceed 1, got {l_bar}")
    r1 = math.floor(l_bar)
    if l_bar == r1:
        return CheckProfile(r1, r1, 1.0, 0.0)
    R1 = 1.0 + r1 - l_bar
    return CheckProfile(r1, r1 + 1, R1, 1.0 - R1)


def edge_to_node(lam: EdgeDegreeDistribution) -> NodeDegreeDistribution:
    w = [f / d for d, f in lam.entries]
    total = math.fsum(w)
    return NodeDegreeDistribution(lam.degrees, tuple(x / total for x in w))


def node_to_edge(L: NodeDegreeDistribution) -> EdgeDegreeDistribution:
    w = [f * d for d, f in L.entries]
    total = math.fsum(w)
    return EdgeDegreeDistribution(L.degrees, tuple(x / total for x in w))


def lift(L: NodeDegreeDistribution, k: int) -> NodeDegreeDistribution:
    """Distribution of ``L(z^k)``: every degree multiplied by ``k``."""
    if k < 1 or int(k) != k:
        raise UsageError("lift factor must be a positive integer")
    return NodeDegreeDistribution(tuple(k * d for d in L.degrees), L.fractions)


# -- integer node counts ----------------------------------------------------

def node_counts(L: NodeDegreeDistribution, n: int) -> np.ndarray:
    """Exact number of columns of each degree for block length ``n``.

    Raises ``UsageError`` if some ``L_i * n`` is not an integer.
    """
    raw = np.array(L.fractions) * n
    counts = np.rint(raw)
    if np.any(np.abs(raw - counts) > INTEGRAL_TOL * max(1, n)):
        raise UsageError(f"L_i * n is not integral for n={n}: {raw.tolist()}")
    return counts.astype(np.int64)


def check_counts(profile: CheckProfile, n: int) -> tuple[int, int]:
    raw = profile.R1 * n
    c1 = round(raw)
    if abs(raw - c1) > INTEGRAL_TOL * max(1, n):
        raise UsageError(f"R1 * n = {raw} is not integral for n={n}")
    return int(c1), n - int(c1)


def quantize(L: NodeDegreeDistribution, n: int) -> NodeDegreeDistribution:
    """Round ``L`` to the nearest distribution with integral counts at ``n``.

    Largest-remainder rounding: floor every ``L_i n`` and hand the missing
    columns to the largest fractional parts. Degrees whose count rounds to
    zero are dropped. This is an explicit step; ``node_counts`` itself never
    rounds.
    """
    raw = np.array(L.fractions) * n
    base = np.floor(raw + INTEGRAL_TOL).astype(np.int64)
    short = n - int(base.sum())
    order = np.argsort(-(raw - base), kind="stable")
    base[order[:short]] += 1
    keep = base > 0
    degs = tuple(d for d, k in zip(L.degrees, keep) if k)
    return NodeDegreeDistribution(degs, tuple(int(c) / n for c in base[keep]))


# -- support statistics -----------------------------------------------------

@dataclass(frozen=True)
class SupportProfile:
    """Degree statistics of a set of columns.

    Attributes
    ----------
    degrees : tuple of int
        Column degrees present in the matrix.
    fractions : tuple of float
        ``L_i^kappa``: share of all ``n`` columns that are in the support
        and have degree ``degrees[i]``.
    l_bar_support : float
        ``sum_i L_i^kappa l_i``.
    l_hat : float
        ``max{1/n, min{l_bar_support, l_bar - l_bar_support}}``.
    """

    degrees: tuple[int, ...]
    fractions: tuple[float, ...]
    l_bar_support: float
    l_hat: float


def support_profile(H: SparseBinaryMatrix, support) -> SupportProfile:
    support = np.asarray(support, dtype=np.int64)
    n = H.cols
    if support.size and (support.min() < 0 or support.max() >= n):
        raise UsageError("support index out of range")
    if np.unique(support).size != support.size:
        raise UsageError("support contains repeated indices")
    cdeg = H.col_degrees()
    degs = np.unique(cdeg)
    in_support = np.bincount(cdeg[support], minlength=int(degs.max(initial=0)) + 1)
    fractions = tuple(float(in_support[d]) / n for d in degs)
    l_sup = float(cdeg[support].sum()) / n
    l_bar = float(cdeg.sum()) / n
    l_hat = max(1.0 / n, min(l_sup, l_bar - l_sup))
    return SupportProfile(tuple(int(d) for d in degs), fractions, l_sup, l_hat)


# -- text files -------------------------------------------------------------

def read_distribution(path) -> NodeDegreeDistribution | EdgeDegreeDistribution:
    """Parse a degree-distribution file.

    The first non-comment line is ``perspective = node`` or
    ``perspective = edge``; each following line is ``degree fraction``.
    Fractions are renormalized so rounding in published tables is tolerated.
    """
    kind = None
    degs, fracs = [], []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if kind is None:
            key, _, val = line.partition("=")
            if key.strip() != "perspective" or val.strip() not in ("node", "edge"):
                raise UsageError(f"{path}:{lineno}: expected 'perspective = node|edge'")
            kind = val.strip()
            continue
        parts = line.split()
        if len(parts) != 2:
            raise UsageError(f"{path}:{lineno}: expected 'degree fraction'")
        try:
            degs.append(int(parts[0]))
            fracs.append(float(parts[1]))
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: {exc}") from exc
    if kind is None:
        raise UsageError(f"{path}: missing perspective header")
    cls = NodeDegreeDistribution if kind == "node" else EdgeDegreeDistribution
    return cls.normalized(degs, fracs)


def write_distribution(dist, path) -> None:
    kind = "edge" if isinstance(dist, EdgeDegreeDistribution) else "node"
    lines = [f"perspective = {kind}"] + [f"{d} {f!r}" for d, f in dist.entries]
    Path(path).write_text("\n".join(lines) + "\n")


def load_node_distribution(path) -> NodeDegreeDistribution:
    dist = read_distribution(path)
    return edge_to_node(dist) if isinstance(dist, EdgeDegreeDistribution) else dist


def reference_lambda() -> EdgeDegreeDistribution:
    """The rate-1/2 edge-perspective distribution shipped with the package."""
    ref = resources.files("sa_ied") / "data" / "lambda_rate_half.txt"
    with resources.as_file(ref) as p:
        dist = read_distribution(p)
    assert isinstance(dist, EdgeDegreeDistribution)
    return dist
