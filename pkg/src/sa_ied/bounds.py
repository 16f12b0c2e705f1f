"""Rate and threshold bounds for syndrome-accumulated LDPC codes.

The central quantity is the exponent ``P(R, l_bar, xi)``: roughly, the
normalized log-probability that a word whose support carries ``xi`` edges
per column lands in the kernel of the accumulated matrix that keeps a
fraction ``R`` of the rows. Everything else (rate thresholds, the rate
solution, redundancy bounds, the BP prior) is a functional of it.

All root finding is bisection; the functions involved are strictly monotone.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

from .degrees import CheckProfile, NodeDegreeDistribution, check_concentrated
from .errors import DomainError, UsageError

LN2 = math.log(2.0)
TAU_LO = 1e-12
TAU_HI = 1e12
ABS_TOL = 1e-12
LIMIT_CHECK_TAU = 1e8


class _NegInf:
    """Sentinel for an exponent of minus infinity.

    Arithmetic with it is deliberately unsupported so it cannot leak into a
    float computation; compare with ``is NEG_INF``.
    """

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "NEG_INF"

    def __float__(self):
        return -math.inf


NEG_INF = _NegInf()


# -- elementary functions ---------------------------------------------------

def parity_indicator(x: int) -> int:
    """0 for even ``x``, 1 for odd."""
    return int(x) & 1


def g_fn(tau: float, k: float) -> float:
    """``(1 + tau)^k + (1 - tau)^k``."""
    if tau < 0:
        raise DomainError("tau must be non-negative")
    return (1.0 + tau) ** k + (1.0 - tau) ** k


def _one_plus_wk(tau: float, k: int) -> float:
    """``1 + w^k`` with ``w = (1 - tau)/(1 + tau)``, accurate near w = -1."""
    if k == 0:
        return 2.0
    if tau <= 1.0:
        w = (1.0 - tau) / (1.0 + tau)
        return 1.0 + w ** k
    # |w| = 1 - 2/(1 + tau); work with log|w| to avoid cancellation
    em1 = math.expm1(k * math.log1p(-2.0 / (1.0 + tau)))  # |w|^k - 1
    return 2.0 + em1 if k % 2 == 0 else -em1


def log_half_g(tau: float, k: int) -> float:
    """``ln(g(tau, k) / 2)`` without overflow for large ``k`` or ``tau``."""
    return k * math.log1p(tau) + math.log(_one_plus_wk(tau, k)) - LN2


def g_ratio(tau: float, k: int) -> float:
    """``g(tau, k - 1) / g(tau, k)``."""
    return _one_plus_wk(tau, k - 1) / ((1.0 + tau) * _one_plus_wk(tau, k))


def h2(p: float) -> float:
    """Binary entropy in bits."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability {p} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def h2e(p: float) -> float:
    """Binary entropy in nats."""
    return h2(p) * LN2


def h2_inverse(h: float) -> float:
    """Inverse of ``h2`` on ``[0, 1/2]`` by bisection."""
    if not 0.0 <= h <= 1.0:
        raise DomainError(f"entropy {h} outside [0, 1]")
    if h == 0.0:
        return 0.0
    if h == 1.0:
        return 0.5
    lo, hi = 0.0, 0.5
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if h2(mid) < h:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- region fractions -------------------------------------------------------

@dataclass(frozen=True)
class RegionFractions:
    """Row shares of the four cell groups of an accumulated matrix.

    The accumulated matrix keeping a fraction ``R`` of the rows has cells of
    ``c`` and ``2c`` original rows (``c = 2^-ceil(log2 R)``), drawn from the
    degree-``r1`` or degree-``r2`` row region. ``f1..f4`` are the row shares
    of (small, r1), (large, r1), (small, r2), (large, r2) and ``k`` holds
    the corresponding accumulated row degrees.
    """

    f1: float
    f2: float
    f3: float
    f4: float
    c: float
    k: tuple[int, int, int, int]

    @property
    def f(self) -> tuple[float, float, float, float]:
        return self.f1, self.f2, self.f3, self.f4


def _ceil_log2(R: float) -> int:
    m, e = math.frexp(R)  # R = m 2^e, m in [0.5, 1)
    return e - 1 if m == 0.5 else e


def region_fractions(R: float, profile: CheckProfile) -> RegionFractions:
    if not 0.0 < R <= 1.0:
        raise DomainError(f"R must lie in (0, 1], got {R}")
    e = _ceil_log2(R)
    M = math.ldexp(1.0, e)  # 1/c
    c = math.ldexp(1.0, -e)
    R1, R2 = profile.R1, profile.R2
    f1 = min(2 * R - M, R1 * M)
    f2 = max(R1 * M / 2 - (R - M / 2), 0.0)
    f3 = max(R2 * M - 2 * (M - R), 0.0)
    f4 = min(M - R, R2 * M / 2)
    ci = int(c)
    k = (ci * profile.r1, 2 * ci * profile.r1, ci * profile.r2, 2 * ci * profile.r2)
    return RegionFractions(max(f1, 0.0), f2, f3, max(f4, 0.0), c, k)


# -- exponent ---------------------------------------------------------------

@dataclass(frozen=True)
class PValue:
    """Exponent value and the ``tau`` that attains it.

    ``value`` is ``NEG_INF`` past the parity boundary; ``tau`` is
    ``math.inf`` on and past the boundary.
    """

    value: float | _NegInf
    tau: float

    @property
    def is_neg_inf(self) -> bool:
        return self.value is NEG_INF

    def __float__(self):
        return float(self.value)


def _profile_for(l_bar: float, profile: CheckProfile | None) -> CheckProfile:
    if profile is None:
        return check_concentrated(l_bar)
    if abs(profile.average - l_bar) > 1e-9:
        raise UsageError("check profile average does not match l_bar")
    return profile


def l_tilde(R: float, l_bar: float, tau: float, profile: CheckProfile | None = None) -> float:
    """Edge weight per column selected by ``tau``; strictly increasing in tau."""
    if tau < 0:
        raise DomainError("tau must be non-negative")
    rf = region_fractions(R, _profile_for(l_bar, profile))
    if math.isinf(tau):
        return parity_boundary(R, l_bar, profile)
    acc = sum(k * f * g_ratio(tau, k) for f, k in zip(rf.f, rf.k) if f > 0)
    return l_bar - acc


def parity_boundary(R: float, l_bar: float, profile: CheckProfile | None = None) -> float:
    """Supremum of ``l_tilde`` over tau: ``l_bar - f1 pi(c r1) - f3 pi(c r2)``."""
    rf = region_fractions(R, _profile_for(l_bar, profile))
    return l_bar - rf.f1 * parity_indicator(rf.k[0]) - rf.f3 * parity_indicator(rf.k[2])


def solve_tau(R: float, l_bar: float, xi: float, profile: CheckProfile | None = None) -> float:
    """Unique ``tau`` with ``l_tilde(R, l_bar, tau) = xi``.

    Bisection on ``log tau`` over ``[1e-12, 1e12]``. Returns ``0`` at
    ``xi = 0`` and ``inf`` at the parity boundary (or when the residual at
    the upper bracket is already below tolerance).
    """
    prof = _profile_for(l_bar, profile)
    top = parity_boundary(R, l_bar, prof)
    if xi < 0 or xi > top + ABS_TOL:
        raise DomainError(f"xi={xi} outside [0, {top}]")
    if xi == 0:
        return 0.0
    if xi >= top:
        return math.inf
    if l_tilde(R, l_bar, TAU_HI, prof) <= xi:
        return math.inf
    if l_tilde(R, l_bar, TAU_LO, prof) >= xi:
        return TAU_LO
    lo, hi = math.log(TAU_LO), math.log(TAU_HI)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = l_tilde(R, l_bar, math.exp(mid), prof)
        if abs(val - xi) <= ABS_TOL * 1e-3 or hi - lo < 1e-15:
            return math.exp(mid)
        if val < xi:
            lo = mid
        else:
            hi = mid
    return math.exp(0.5 * (lo + hi))


def p_at_tau(R: float, l_bar: float, xi: float, tau: float,
             profile: CheckProfile | None = None) -> float:
    """Expression minimized over tau; equals ``P`` at the solving tau."""
    rf = region_fractions(R, _profile_for(l_bar, profile))
    acc = sum(f * log_half_g(tau, k) for f, k in zip(rf.f, rf.k) if f > 0)
    return -l_bar * h2e(xi / l_bar) - xi * math.log(tau) + acc


def _p_boundary(R, l_bar, xi, prof):
    rf = region_fractions(R, prof)
    val = -l_bar * h2e(min(xi / l_bar, 1.0))
    for f, k in ((rf.f1, rf.k[0]), (rf.f3, rf.k[2])):
        if f > 0 and k % 2:
            val += f * math.log(k)
    return val


def big_p(R: float, l_bar: float, xi: float, profile: CheckProfile | None = None) -> PValue:
    """Exponent ``P(R, l_bar, xi)``.

    Three regimes: below the parity boundary the tau-root is found and the
    closed expression evaluated; at the boundary the tau -> inf limit is
    used; past it the value is ``NEG_INF``.
    """
    if not 0 < xi <= l_bar:
        raise DomainError(f"xi={xi} outside (0, {l_bar}]")
    prof = _profile_for(l_bar, profile)
    top = parity_boundary(R, l_bar, prof)
    if xi > top + ABS_TOL:
        return PValue(NEG_INF, math.inf)
    tau = solve_tau(R, l_bar, min(xi, top), prof)
    if math.isinf(tau):
        return PValue(_p_boundary(R, l_bar, xi, prof), math.inf)
    return PValue(p_at_tau(R, l_bar, xi, tau, prof), tau)


def boundary_limit_gap(R: float, l_bar: float, profile: CheckProfile | None = None) -> float:
    """Difference between the boundary closed form and its value at tau=1e8.

    A warning is issued when the two disagree by more than 1e-4.
    """
    prof = _profile_for(l_bar, profile)
    top = parity_boundary(R, l_bar, prof)
    gap = abs(_p_boundary(R, l_bar, top, prof) - p_at_tau(R, l_bar, top, LIMIT_CHECK_TAU, prof))
    if gap > 1e-4:
        warnings.warn(f"boundary limit form differs from tau=1e8 value by {gap:.3g}")
    return gap


def p_float(R: float, l_bar: float, xi: float, profile: CheckProfile | None = None) -> float:
    """``big_p`` as a float (``-inf`` past the boundary), for plotting/CSV."""
    return float(big_p(R, l_bar, xi, profile))


# -- closed-form bounds ---------------------------------------------------

def lemma5_bound(R: float, l_bar: float, xi: float) -> float:
    """Upper bound ``-R ln2 + 2 xi e^{-(2xi/l)(c r1 - 1)} + R e^{-(2xi/l) r1 c}``.

    Valid for ``l_bar / floor(l_bar) <= xi <= l_bar / 2``.
    """
    r1 = math.floor(l_bar)
    if not (l_bar / r1 - 1e-12 <= xi <= l_bar / 2 + 1e-12):
        raise DomainError(f"xi={xi} outside [{l_bar / r1}, {l_bar / 2}]")
    c = region_fractions(R, check_concentrated(l_bar)).c
    a = 2 * xi / l_bar
    return -R * LN2 + 2 * xi * math.exp(-a * (c * r1 - 1)) + R * math.exp(-a * r1 * c)


def rate_slope_factor(R2: float, l_bar: float, xi: float) -> float:
    """Slope factor ``Q`` bounding how fast ``-P`` grows between rates."""
    r1 = math.floor(l_bar)
    c = region_fractions(R2, check_concentrated(l_bar)).c
    u = 1 - 2 * xi / l_bar
    e = r1 * c
    return LN2 - math.log1p(2 * u ** e / (1 + u ** (2 * e)))


# -- thresholds and rate solution -------------------------------------------

def default_delta(n: int) -> int:
    """Interaction size: ``2^ceil(T/2)`` for ``n = 2^T``, else the divisor
    of ``n`` nearest ``sqrt(n)`` (ties to the smaller)."""
    if n < 1:
        raise UsageError("n must be positive")
    if n & (n - 1) == 0:
        T = n.bit_length() - 1
        return 1 << ((T + 1) // 2)
    root = math.sqrt(n)
    divs = [d for d in range(1, n + 1) if n % d == 0]
    return min(divs, key=lambda d: (abs(d - root), d))


@dataclass(frozen=True)
class BoundContext:
    """Parameters shared by the threshold and rate formulas.

    ``mode`` selects ``"finite"`` (every correction term as written) or
    ``"asymptotic"`` (the terms that vanish as ``n`` grows are dropped).
    """

    L: NodeDegreeDistribution
    epsilon: float
    n: int
    delta: int
    mode: str = "finite"

    def __post_init__(self):
        if not 0 < self.epsilon < 0.5:
            raise UsageError("epsilon must lie in (0, 0.5)")
        if self.delta < 1 or self.n % self.delta:
            raise UsageError("delta must divide n")
        if self.mode not in ("finite", "asymptotic"):
            raise UsageError("mode must be 'finite' or 'asymptotic'")

    @property
    def l_bar(self) -> float:
        return self.L.average

    @property
    def l1(self) -> int:
        return self.L.min_degree

    @property
    def check(self) -> CheckProfile:
        return check_concentrated(self.l_bar)

    @property
    def xi(self) -> float:
        return self.l1 * self.epsilon

    @property
    def rounds(self) -> int:
        return self.n // self.delta

    def _corr(self) -> tuple[float, float, float]:
        """(ceil-term scale, 1/2n term, delta/n) correction pieces."""
        if self.mode == "asymptotic":
            return 0.0, 0.0, 0.0
        n, lb = self.n, self.l_bar
        return (3 * math.ceil(lb) * math.log(n * lb / 2),
                math.log(n * lb / 4) / (2 * n),
                self.delta / n)

    def p(self, R: float) -> float:
        return _cached_p(self.L, R, self.xi)


@lru_cache(maxsize=65536)
def _cached_p(L: NodeDegreeDistribution, R: float, xi: float) -> float:
    lb = L.average
    if xi > lb / 2:
        warnings.warn("l1*epsilon exceeds l_bar/2; outside the main regime")
    return float(big_p(R, lb, xi))


@dataclass(frozen=True)
class Thresholds:
    eta_n: float
    gamma: tuple[float, ...]  # gamma[b - 1] = Gamma_b

    def gamma_b(self, b: int) -> float:
        return self.gamma[b - 1]


def thresholds(ctx: BoundContext) -> Thresholds:
    ceil_scale, half_term, d_over_n = ctx._corr()
    eta = 1 + (ctx.p(1.0) + ceil_scale / ctx.n + half_term) / LN2 + d_over_n
    gam = []
    for b in range(1, ctx.rounds + 1):
        R = b * ctx.delta / ctx.n
        gam.append((-ctx.p(R) - ceil_scale / ctx.delta - half_term) / LN2 - d_over_n)
    return Thresholds(eta, tuple(gam))


def p_b(ctx: BoundContext, b: int, th: Thresholds | None = None) -> float:
    """Largest BSC crossover treated as decodable at round ``b``."""
    th = th or thresholds(ctx)
    return h2_inverse(min(1.0, max(0.0, th.gamma_b(b) - (math.log(ctx.n) + 1) / ctx.n)))


def _solve_r(target: float, pfun) -> float:
    """Bisection for ``-P(R) = target`` on (0, 1]; -P is increasing in R."""
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= 0:
            break
        if -pfun(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    return 0.5 * (lo + hi)


def rate_solution(ctx: BoundContext, h: float) -> float:
    """Finite-length rate ``R^(Delta)(epsilon, h)``."""
    if h < 0:
        raise DomainError("h must be non-negative")
    th = thresholds(ctx)
    ceil_scale, half_term, d_over_n = ctx._corr()
    if h <= th.gamma[-1]:
        target = (h + d_over_n) * LN2 + ceil_scale / ctx.delta + half_term
        return _solve_r(target, ctx.p)
    return 2 + (ctx.p(1.0) + ceil_scale / ctx.n + half_term) / LN2


def asymptotic_rate(L: NodeDegreeDistribution, epsilon: float, h: float) -> float:
    """Limit rate ``R_L(epsilon, h)`` as ``n`` grows."""
    xi = L.min_degree * epsilon
    p1 = _cached_p(L, 1.0, xi)
    if h * LN2 < -p1:
        return _solve_r(h * LN2, lambda R: _cached_p(L, R, xi))
    return 2 + p1 / LN2


def redundancy(L: NodeDegreeDistribution, epsilon: float, h: float) -> float:
    """``R_L(epsilon, h) + H(epsilon) - h``."""
    return asymptotic_rate(L, epsilon, h) + h2(epsilon) - h


def redundancy_upper_bound(L: NodeDegreeDistribution, epsilon: float, h: float) -> float:
    """Closed-form upper bound on ``redundancy``.

    Requires ``l_bar / (l1 ceil(l_bar)) <= epsilon < 1/2``.
    """
    lb, l1 = L.average, L.min_degree
    cl = math.ceil(lb)
    if not lb / (l1 * cl) - 1e-12 <= epsilon < 0.5:
        raise DomainError("epsilon below l_bar / (l1 ceil(l_bar))")
    p1 = _cached_p(L, 1.0, l1 * epsilon)
    mult = 2.0 if h * LN2 >= -p1 else 1.0
    a = 2 * l1 * epsilon / lb
    tail = (2 * l1 * epsilon / LN2) * math.exp(-a * (cl - 1)) + math.exp(-a * cl) / LN2
    return h2(epsilon) + mult * tail


def lemma1_log_bound(ctx: BoundContext, b: int, l_bar_support: float) -> float:
    """Log upper bound on ``Pr{H^(b delta) x = 0}`` minus its unknown O(1).

    ``l_bar_support`` is the edge weight per column of the support of
    ``x``. The half-log term uses ``max{1/n, l(1 - l/l_bar)}`` inside the
    logarithm so a full-weight support stays finite. Returns ``-inf`` past
    the parity boundary.
    """
    n, lb = ctx.n, ctx.l_bar
    if not 0 < l_bar_support <= lb + 1e-12:
        raise DomainError("support edge weight must lie in (0, l_bar]")
    R = b * ctx.delta / n
    pv = big_p(R, lb, min(l_bar_support, lb))
    if pv.is_neg_inf:
        return -math.inf
    l_hat = max(1.0 / n, min(l_bar_support, lb - l_bar_support))
    inner = max(1.0 / n, l_bar_support * (1 - l_bar_support / lb))
    return (n * pv.value + (3 * n * math.ceil(lb) / (b * ctx.delta)) * math.log(n * l_hat)
            + 0.5 * math.log(n * inner))
