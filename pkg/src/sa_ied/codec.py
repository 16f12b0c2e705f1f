"""Code-length functions and decoders.

Three decoders are provided: exhaustive minimum code length (small ``n``
only), syndrome belief propagation with failure detection, and the final
verification step that checks a candidate and its complement against an
extra set of random syndromes.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from . import _bp_kernel as K
from .bounds import h2, h2_inverse
from .errors import ResourceError, UsageError
from .gf2 import SparseBinaryMatrix, as_bits, syndrome

EXHAUSTIVE_MAX_N = 24


class Status(enum.Enum):
    CONVERGED = "converged"
    FAILURE_DETECTED = "failure_detected"
    AMBIGUOUS = "ambiguous"
    NO_SOLUTION = "no_solution"


@dataclass(frozen=True)
class DecodeOutcome:
    status: Status
    estimate: np.ndarray | None = None
    iterations: int = 0
    gamma_value: float | None = None
    posterior: np.ndarray | None = field(default=None, repr=False, compare=False)
    q1: float | None = None

    def __post_init__(self):
        if (self.estimate is not None) != (self.status is Status.CONVERGED):
            raise ValueError("estimate must be present exactly when converged")


# -- code length ------------------------------------------------------------

class CodeLengthFn(Protocol):
    def __call__(self, x, y) -> float: ...


class GammaBSC:
    """Length in bits per symbol of describing ``x`` given ``y`` by the
    position set of their disagreements.

    ``(ln n + 1)/n + H(w/n)`` when the disagreement weight ``w`` is at most
    ``n/2``, otherwise ``1 + 1/n`` (send ``x`` verbatim plus a flag bit).
    """

    def __call__(self, x, y) -> float:
        x, y = np.asarray(x), np.asarray(y)
        if x.shape != y.shape:
            raise UsageError("x and y must have equal length")
        return float(self.of_weight(int(np.count_nonzero(x != y)), x.size))

    @staticmethod
    def of_weight(w, n: int):
        """Vectorized over ``w``."""
        w = np.asarray(w, dtype=np.float64)
        p = w / n
        with np.errstate(divide="ignore", invalid="ignore"):
            h = -(p * np.log2(p) + (1 - p) * np.log2(1 - p))
        h = np.where((p == 0) | (p == 1), 0.0, h)
        out = np.where(p <= 0.5, (math.log(n) + 1) / n + h, 1 + 1 / n)
        return out if out.ndim else float(out)

    def kraft_sum(self, n: int) -> float:
        """``sum_x 2^{-n gamma(x, y)}`` for any fixed ``y``."""
        logs = []
        for w in range(n + 1):
            lc = math.lgamma(n + 1) - math.lgamma(w + 1) - math.lgamma(n - w + 1)
            logs.append(lc / math.log(2) - n * self.of_weight(w, n))
        top = max(logs)
        return 2 ** top * math.fsum(2 ** (v - top) for v in logs)


gamma_bsc = GammaBSC()


# -- exhaustive decoder -----------------------------------------------------

def _row_masks(H: SparseBinaryMatrix) -> list[int]:
    n = H.cols
    return [sum(1 << (n - 1 - int(c)) for c in H.row(j)) for j in range(H.rows)]


def _parity(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a) & 1


def exhaustive_min_gamma(constraints: Sequence[tuple[SparseBinaryMatrix, np.ndarray]],
                         y, gamma: CodeLengthFn = gamma_bsc) -> DecodeOutcome:
    """Minimize ``gamma(z, y)`` over all ``z`` meeting every ``H_i z = s_i``.

    Candidates are integers whose most significant bit is ``z_0``, so ties
    go to the lexicographically smallest word.
    """
    y = np.asarray(y, dtype=np.uint8)
    n = y.size
    if n > EXHAUSTIVE_MAX_N:
        raise ResourceError(f"exhaustive decoding limited to n <= {EXHAUSTIVE_MAX_N}")
    z = np.arange(1 << n, dtype=np.uint32)
    keep = np.ones(z.size, dtype=bool)
    for H, s in constraints:
        if H.cols != n or H.rows != len(s):
            raise UsageError("constraint dimensions do not match")
        for mask, bit in zip(_row_masks(H), np.asarray(s).tolist()):
            keep &= _parity(z & np.uint32(mask)) == bit
    cand = z[keep]
    if cand.size == 0:
        return DecodeOutcome(Status.NO_SOLUTION)
    ymask = np.uint32(sum(int(b) << (n - 1 - i) for i, b in enumerate(y.tolist())))
    if isinstance(gamma, GammaBSC):
        vals = GammaBSC.of_weight(np.bitwise_count(cand ^ ymask), n)
    else:
        vals = np.array([gamma(_bits_of(int(c), n), y) for c in cand])
    best = int(np.argmin(vals))  # first minimum = smallest integer
    est = _bits_of(int(cand[best]), n)
    return DecodeOutcome(Status.CONVERGED, est, 0, float(vals[best]))


def _bits_of(v: int, n: int) -> np.ndarray:
    return as_bits([(v >> (n - 1 - i)) & 1 for i in range(n)])


# -- belief propagation -----------------------------------------------------

@dataclass(frozen=True)
class BpConfig:
    """Iteration limits and failure-detection constants.

    The failure rule fires when, at iteration ``warmup_iterations``, fewer
    than ``significant_fraction * n`` bits have ``|LLR| >
    significance_threshold``, or when the number of satisfied checks has not
    improved for ``stall_window`` consecutive iterations.
    """

    max_iterations: int = 100
    llr_clamp: float = 30.0
    significance_threshold: float = 1.0
    warmup_iterations: int = 10
    stall_window: int = 5
    significant_fraction: float = 0.5
    use_heuristics: bool = True

    def __post_init__(self):
        for name in ("max_iterations", "llr_clamp", "significance_threshold",
                     "warmup_iterations", "stall_window", "significant_fraction"):
            if not getattr(self, name) > 0:
                raise UsageError(f"BpConfig.{name} must be positive")


class BpGraph:
    """Edge arrays of a parity-check matrix, reusable across decodes."""

    def __init__(self, H: SparseBinaryMatrix):
        self.H = H
        self.indptr = H.indptr
        self.indices = H.indices
        order = np.argsort(H.indices, kind="stable")
        self.var_edges = order.astype(np.int64)
        self.var_ptr = np.concatenate([[0], np.cumsum(H.col_degrees())]).astype(np.int64)


def _graph(H) -> BpGraph:
    return H if isinstance(H, BpGraph) else BpGraph(H)


def bp_decode(H_sub, s, prior_llr, cfg: BpConfig = BpConfig(),
              stop_on_converged: bool = True) -> DecodeOutcome:
    """Syndrome BP with a flooding schedule.

    Parameters
    ----------
    H_sub : SparseBinaryMatrix or BpGraph
    s : array_like
        Target syndrome, one bit per row.
    prior_llr : array_like
        ``log Pr(x_i = 0) / Pr(x_i = 1)`` per bit.
    stop_on_converged : bool
        Stop as soon as the hard decision meets every check (default).
        With ``False`` all ``max_iterations`` run (useful for marginals).
    """
    g = _graph(H_sub)
    H = g.H
    s = np.ascontiguousarray(s, dtype=np.uint8)
    if s.size != H.rows:
        raise UsageError("syndrome length does not match the matrix")
    prior = np.ascontiguousarray(prior_llr, dtype=np.float64)
    if prior.size != H.cols:
        raise UsageError("prior length does not match the matrix")
    prior = np.clip(prior, -cfg.llr_clamp, cfg.llr_clamp)
    post = np.empty(H.cols)
    hard = np.empty(H.cols, dtype=np.uint8)
    status, it = K.bp_flood(g.indptr, g.indices, g.var_ptr, g.var_edges, s, prior,
                            cfg.max_iterations, cfg.llr_clamp, cfg.significance_threshold,
                            cfg.significant_fraction * H.cols, cfg.warmup_iterations,
                            cfg.stall_window, cfg.use_heuristics and stop_on_converged,
                            stop_on_converged, post, hard)
    if status == K.STATUS_CONVERGED:
        est = as_bits(hard)
        assert np.array_equal(syndrome(H, est), s), "converged with an unsatisfied check"
        return DecodeOutcome(Status.CONVERGED, est, it, posterior=post)
    return DecodeOutcome(Status.FAILURE_DETECTED, None, it, posterior=post)


def bsc_prior(y, p: float, clamp: float = 30.0) -> np.ndarray:
    """Per-bit LLRs for ``x = y xor Bernoulli(p)``."""
    y = np.asarray(y)
    mag = _llr_mag(p, clamp)
    return np.where(y == 0, mag, -mag)


def _llr_mag(q: float, clamp: float) -> float:
    if q <= 0:
        return clamp
    if q >= 1:
        return -clamp
    return min(clamp, math.log((1 - q) / q))


def asymmetric_pairs(p_target: float, py0: float, q1_grid) -> list[tuple[float, float]]:
    """Feasible ``(q1, q2)`` with ``py0 H(q1) + (1 - py0) H(q2) = H(p_target)``.

    ``q1`` values are taken in ascending order; points whose ``q2`` would
    fall outside ``[0, 1/2]`` are skipped.
    """
    if not 0 <= p_target <= 0.5 or not 0 < py0 < 1:
        raise UsageError("need p_target in [0, 0.5] and py0 in (0, 1)")
    ht = h2(p_target)
    out = []
    for q1 in sorted(q1_grid):
        if not 0 <= q1 <= 0.5:
            continue
        rest = (ht - py0 * h2(q1)) / (1 - py0)
        if rest < -1e-12 or rest > 1 + 1e-12:
            continue
        out.append((q1, h2_inverse(min(1.0, max(0.0, rest)))))
    return out


def bp_decode_asymmetric(H_sub, s, y, p_target: float, py0: float,
                         cfg: BpConfig = BpConfig(), q1_grid=None) -> DecodeOutcome:
    """Try BP over quantized crossover pairs; the smallest converging ``q1`` wins."""
    g = _graph(H_sub)
    y = np.asarray(y, dtype=np.uint8)
    if q1_grid is None:
        q1_grid = default_q1_grid()
    total_it = 0
    for q1, q2 in asymmetric_pairs(p_target, py0, q1_grid):
        m0, m1 = _llr_mag(q1, cfg.llr_clamp), _llr_mag(q2, cfg.llr_clamp)
        prior = np.where(y == 0, m0, -m1)
        out = bp_decode(g, s, prior, cfg)
        total_it += out.iterations
        if out.status is Status.CONVERGED:
            return DecodeOutcome(Status.CONVERGED, out.estimate, total_it,
                                 posterior=out.posterior, q1=q1)
    return DecodeOutcome(Status.FAILURE_DETECTED, None, total_it)


def default_q1_grid(step: float = 0.025) -> tuple[float, ...]:
    k = int(round(0.5 / step))
    return tuple(round(step * i, 12) for i in range(1, k + 1))


# -- final verification -----------------------------------------------------

def _column_masks(H: SparseBinaryMatrix) -> list[int]:
    masks = [0] * H.cols
    for j in range(H.rows):
        for c in H.row(j).tolist():
            masks[c] |= 1 << j
    return masks


def ball_size(n: int, radius: int) -> int:
    return sum(math.comb(n, w) for w in range(radius + 1))


def final_verify(H2: SparseBinaryMatrix, s2, x_hat, epsilon: float,
                 budget: int = 2_000_000) -> DecodeOutcome:
    """Find the words within normalized distance ``epsilon`` of ``x_hat`` or
    of its complement that satisfy ``H2 z = s2``.

    Returns the unique survivor, ``AMBIGUOUS`` for several, ``NO_SOLUTION``
    for none.
    """
    if not 0 < epsilon < 0.5:
        raise UsageError("epsilon must lie in (0, 0.5)")
    x_hat = np.asarray(x_hat, dtype=np.uint8)
    n = x_hat.size
    radius = int(math.floor(epsilon * n + 1e-9))
    if 2 * ball_size(n, radius) > budget:
        raise ResourceError(f"verification ball of radius {radius} at n={n} exceeds budget")
    cols = _column_masks(H2)
    target = sum(int(b) << j for j, b in enumerate(np.asarray(s2).tolist()))
    base = sum(int(b) << j for j, b in enumerate(syndrome(H2, x_hat).tolist()))
    ones = 0
    for m in cols:
        ones ^= m
    survivors = set()
    for centre, syn0 in ((0, base), (1, base ^ ones)):
        for w in range(radius + 1):
            for flips in itertools.combinations(range(n), w):
                acc = syn0
                for i in flips:
                    acc ^= cols[i]
                if acc == target:
                    z = x_hat ^ centre
                    z = z.copy()
                    z[list(flips)] ^= 1
                    survivors.add(z.tobytes())
    if not survivors:
        return DecodeOutcome(Status.NO_SOLUTION)
    if len(survivors) > 1:
        return DecodeOutcome(Status.AMBIGUOUS)
    est = as_bits(np.frombuffer(survivors.pop(), dtype=np.uint8))
    return DecodeOutcome(Status.CONVERGED, est)
