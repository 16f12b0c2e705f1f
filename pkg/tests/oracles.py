"""Independent reference computations used by the tests.

Nothing here calls into the package's numerical code paths: the exponent is
rebuilt from explicit partition cell counts with mpmath, syndromes from dense
matrix products, and decoders from brute-force enumeration.
"""
from __future__ import annotations

import itertools
import math

import mpmath as mp
import numpy as np

mp.mp.dps = 40


# -- GF(2) ------------------------------------------------------------------

def dense_syndrome(dense: np.ndarray, x: np.ndarray) -> np.ndarray:
    return (dense.astype(np.int64) @ x.astype(np.int64)) % 2


def cells_by_recursion(n: int, t: int) -> list[tuple[int, int]]:
    """1-based (start, end) cells of P_t for n = 2^T via the split-index rule.

    At step i (going from i cells to i+1) the cell at 1-based position
    ``j_i = 2 (i - 2^floor(log2 i)) + 1`` is halved.
    """
    cells = [(1, n)]
    for i in range(1, t):
        j = 2 * (i - 2 ** int(math.floor(math.log2(i)))) + 1
        a, b = cells[j - 1]
        mid = a + (b - a + 1) // 2 - 1
        cells[j - 1:j] = [(a, mid), (mid + 1, b)]
    return cells


def naive_cell_xor(s: np.ndarray, cells) -> np.ndarray:
    return np.array([int(np.bitwise_xor.reduce(s[a - 1:b])) for a, b in cells], dtype=np.uint8)


# -- exponent ---------------------------------------------------------------

def cell_fractions(n: int, t: int, R1: float, r1: int, r2: int) -> dict[int, mp.mpf]:
    """Map accumulated-row degree -> (#cells with that degree)/n.

    Cells of P_t for n = 2^T: the first ``2 (t - 2^(e-1))`` have size
    ``n / 2^e`` and the rest twice that, with ``e = ceil(log2 t)``. Rows
    ``1..R1 n`` have degree r1, the others r2.
    """
    e = max(0, math.ceil(math.log2(t)))
    small = n // 2 ** e
    n_small = 2 * (t - 2 ** (e - 1)) if e > 0 else 1
    sizes = [small] * n_small + [2 * small] * (t - n_small)
    cut = round(R1 * n)
    out: dict[int, mp.mpf] = {}
    start = 0
    for sz in sizes:
        if start + sz <= cut:
            k = sz * r1
        elif start >= cut:
            k = sz * r2
        else:
            raise ValueError("cell straddles the degree boundary")
        out[k] = out.get(k, mp.mpf(0)) + mp.mpf(1) / n
        start += sz
    return out


def _profile(l_bar):
    lb = mp.mpf(l_bar)
    r1 = int(mp.floor(lb))
    r2 = int(mp.ceil(lb))
    R1 = 1 + r1 - lb
    return r1, r2, R1


def _g(tau, k):
    return (1 + tau) ** k + (1 - tau) ** k


def _objective(u, fr, lb, xi):
    tau = mp.e ** u
    he = -(xi / lb) * mp.log(xi / lb) - (1 - xi / lb) * mp.log(1 - xi / lb)
    return -lb * he - xi * u + sum(f * mp.log(_g(tau, k) / 2) for k, f in fr.items())


def oracle_p(R: float, l_bar: float, xi: float, n: int = 1024) -> float:
    """Exponent by golden-section minimization of the tau-objective.

    Only valid strictly inside the parity boundary (finite minimizer).
    """
    r1, r2, R1 = _profile(l_bar)
    t = round(R * n)
    fr = cell_fractions(n, t, float(R1), r1, r2)
    lb, x = mp.mpf(l_bar), mp.mpf(xi)
    lo, hi = mp.mpf(-40), mp.mpf(40)
    gr = (mp.sqrt(5) - 1) / 2
    a, b = hi - gr * (hi - lo), lo + gr * (hi - lo)
    fa, fb = _objective(a, fr, lb, x), _objective(b, fr, lb, x)
    for _ in range(220):
        if fa < fb:
            hi, b, fb = b, a, fa
            a = hi - gr * (hi - lo)
            fa = _objective(a, fr, lb, x)
        else:
            lo, a, fa = a, b, fb
            b = lo + gr * (hi - lo)
            fb = _objective(b, fr, lb, x)
    return float(_objective((lo + hi) / 2, fr, lb, x))


def oracle_l_tilde(R, l_bar, tau, n=1024):
    r1, r2, R1 = _profile(l_bar)
    fr = cell_fractions(n, round(R * n), float(R1), r1, r2)
    tau = mp.mpf(tau)
    return mp.mpf(l_bar) - sum(f * k * _g(tau, k - 1) / _g(tau, k) for k, f in fr.items())


def oracle_tau(R, l_bar, xi, n=1024) -> float:
    """Secant iteration on log tau for l_tilde = xi."""
    f = lambda u: oracle_l_tilde(R, l_bar, mp.e ** u, n) - xi  # noqa: E731
    u = mp.findroot(f, (mp.mpf(-0.5), mp.mpf(0.5)), solver="secant", tol=mp.mpf(10) ** -30)
    return float(mp.e ** u)


def hp_p(R, l_bar, xi, n=1024, dps=80):
    """High-precision exponent, for differences below double resolution."""
    with mp.workdps(dps):
        r1, r2, R1 = _profile(l_bar)
        fr = cell_fractions(n, round(R * n), float(R1), r1, r2)
        lb, x = mp.mpf(l_bar), mp.mpf(xi)
        g = lambda u: oracle_l_tilde(R, l_bar, mp.e ** u, n) - x  # noqa: E731
        u = mp.findroot(g, (mp.mpf(-0.5), mp.mpf(0.5)), solver="secant",
                        tol=mp.mpf(10) ** -(dps - 10))
        return _objective(u, fr, lb, x)


# -- decoders ---------------------------------------------------------------

def brute_force_min_gamma(dense_list, s_list, y):
    """Smallest-gamma solution by plain itertools enumeration.

    The code length is the disagreement-set description length
    ``(ln n + 1)/n + H(w/n)`` for ``w <= n/2`` and ``1 + 1/n`` beyond;
    ties go to the lexicographically smallest word.
    """
    n = len(y)
    best, best_val = None, math.inf
    for z in itertools.product((0, 1), repeat=n):
        z = np.array(z, dtype=np.uint8)
        if all(np.array_equal(dense_syndrome(D, z), np.asarray(s)) for D, s in zip(dense_list, s_list)):
            w = int(np.sum(z != y))
            p = w / n
            if p <= 0.5:
                h = 0.0 if p in (0.0, 1.0) else -(p * math.log2(p) + (1 - p) * math.log2(1 - p))
                val = (math.log(n) + 1) / n + h
            else:
                val = 1 + 1 / n
            if val < best_val - 1e-15:
                best, best_val = z, val
    return best, best_val


def exact_posterior_llr(dense: np.ndarray, s: np.ndarray, prior_llr: np.ndarray) -> np.ndarray:
    """``log Pr(x_i = 0 | H x = s) / Pr(x_i = 1 | H x = s)`` by enumeration."""
    n = dense.shape[1]
    prior_llr = np.asarray(prior_llr, dtype=float)
    # log weight of a bit value: x_i = 1 contributes -llr_i relative to 0
    w0 = np.zeros(n)
    w1 = np.zeros(n)
    logs = []
    configs = []
    for z in itertools.product((0, 1), repeat=n):
        z = np.array(z)
        if np.array_equal(dense_syndrome(dense, z), s):
            configs.append(z)
            logs.append(-float(np.dot(z, prior_llr)))
    logs = np.array(logs)
    configs = np.array(configs)
    m = logs.max()
    wts = np.exp(logs - m)
    for i in range(n):
        w0[i] = wts[configs[:, i] == 0].sum()
        w1[i] = wts[configs[:, i] == 1].sum()
    return np.log(w0) - np.log(w1)


def random_forest_matrix(rng, n: int, m: int, max_deg: int = 4) -> np.ndarray:
    """Dense m x n matrix whose Tanner graph has no cycles.

    Each new check joins variables from distinct components (union-find),
    which can never close a cycle.
    """
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    rows = []
    for _ in range(m):
        order = rng.permutation(n)
        picked, roots = [], set()
        want = int(rng.integers(2, max_deg + 1))
        for v in order:
            r = find(int(v))
            if r not in roots:
                picked.append(int(v))
                roots.add(r)
            if len(picked) == want:
                break
        if len(picked) < 2:
            break
        for v in picked[1:]:
            parent[find(v)] = find(picked[0])
        row = np.zeros(n, dtype=np.uint8)
        row[picked] = 1
        rows.append(row)
    return np.array(rows, dtype=np.uint8).reshape(len(rows), n)
