"""Interactive encoder/decoder sessions with exact bit accounting.

The encoder releases ``delta`` augmenting syndrome bits per round; the
decoder rebuilds the accumulated syndrome, decodes, and answers with one
acknowledgement bit. After ``n/delta`` unanswered rounds the encoder sends
``ceil(eta_n n)`` Gallager syndrome bits and the decoder must stop. Variant
``ALG1`` then runs a verification exchange of ``ceil(n H(eps)) + delta``
extra Gallager syndromes; ``ALG3`` outputs the estimate directly.

The two parties only share what passes through ``_Channel``.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import rng as R
from .accumulation import Accumulator, augmenting_stream, derived_matrix
from .bounds import BoundContext, Thresholds, h2, p_b, thresholds
from .codec import (BpConfig, BpGraph, DecodeOutcome, Status, bp_decode,
                    bp_decode_asymmetric, bsc_prior, default_q1_grid,
                    exhaustive_min_gamma, final_verify, gamma_bsc)
from .degrees import NodeDegreeDistribution
from .ensembles import EnsembleSpec, gallager_syndrome, sample_gallager, sample_ldpc
from .errors import ResourceError, UsageError
from .gf2 import SparseBinaryMatrix, as_bits, syndrome


class Variant(enum.Enum):
    ALG1 = "alg1"
    ALG3 = "alg3"


class DecoderKind(enum.Enum):
    EXHAUSTIVE = "exhaustive"
    BP = "bp"
    BP_ASYMMETRIC = "bp_asymmetric"


class Outcome(enum.Enum):
    WORD_OK = "word_ok"
    WORD_ERROR = "word_error"
    DECLARED_FAILURE = "declared_failure"


@dataclass(frozen=True)
class SessionConfig:
    """Parameters of one interactive session.

    ``delta`` defaults to ``2^ceil(T/2)`` for ``n = 2^T`` (see
    ``bounds.default_delta`` for other ``n``). ``threshold_mode`` picks the
    finite-length or the asymptotic acceptance thresholds. ``py0`` is the
    decoder's value of ``Pr{Y = 0}`` for the asymmetric BP search; ``None``
    means the empirical fraction of zeros in ``y``.
    """

    n: int
    L: NodeDegreeDistribution
    epsilon: float = 0.1
    seed: int = 0
    variant: Variant = Variant.ALG3
    decoder: DecoderKind = DecoderKind.BP
    delta: int | None = None
    bp_cfg: BpConfig = field(default_factory=BpConfig)
    threshold_mode: str = "finite"
    acyclic_degree2: bool = False
    py0: float | None = None
    q1_step: float = 0.025
    max_fallback_rows: int | None = None

    def __post_init__(self):
        from .bounds import default_delta

        if self.delta is None:
            object.__setattr__(self, "delta", default_delta(self.n))
        if self.n % self.delta:
            raise UsageError(f"delta={self.delta} does not divide n={self.n}")
        if isinstance(self.variant, str):
            object.__setattr__(self, "variant", Variant(self.variant))
        if isinstance(self.decoder, str):
            object.__setattr__(self, "decoder", DecoderKind(self.decoder))
        if self.decoder is DecoderKind.EXHAUSTIVE and self.n > 24:
            raise UsageError("the exhaustive decoder needs n <= 24")
        if not 0 < self.epsilon < 0.5:
            raise UsageError("epsilon must lie in (0, 0.5)")

    @property
    def rounds(self) -> int:
        return self.n // self.delta

    def bound_context(self) -> BoundContext:
        return BoundContext(self.L, self.epsilon, self.n, self.delta, self.threshold_mode)


@dataclass(frozen=True)
class RoundRecord:
    round: int
    forward_bits: int
    ack: int
    status: str
    gamma: float | None = None
    threshold: float | None = None


@dataclass
class SessionTranscript:
    rounds: int = 0
    forward_bits: int = 0
    backward_bits: int = 0
    records: list[RoundRecord] = field(default_factory=list)
    fallback: bool = False
    fallback_bits: int = 0
    verify_bits: int = 0
    outcome: Outcome | None = None
    estimate: np.ndarray | None = None
    best_guess: np.ndarray | None = field(default=None, repr=False)
    final_status: str = ""

    def log_lines(self) -> list[str]:
        """Line-oriented audit log: ``round,direction,bits,status``."""
        out = []
        for r in self.records:
            out.append(f"{r.round},forward,{r.forward_bits},")
            out.append(f"{r.round},backward,1,{r.status}")
        if self.verify_bits:
            out.append(f"verify,forward,{self.verify_bits},{self.final_status}")
        out.append(f"end,,{self.forward_bits + self.backward_bits},"
                   f"{self.outcome.value if self.outcome else ''}")
        return out


# -- shared code material ---------------------------------------------------

class CodeSetup:
    """Everything both parties derive from the public configuration."""

    def __init__(self, cfg: SessionConfig):
        self.cfg = cfg
        spec = EnsembleSpec(cfg.n, cfg.L, seed=cfg.seed, acyclic_degree2=cfg.acyclic_degree2)
        self.H = sample_ldpc(spec)
        self.ctx = cfg.bound_context()
        self.th: Thresholds = thresholds(self.ctx)
        self._graphs: dict[int, BpGraph] = {}
        self._derived: dict[int, SparseBinaryMatrix] = {}
        eta_rows = math.ceil(self.th.eta_n * cfg.n - 1e-9)
        cap = cfg.max_fallback_rows if cfg.max_fallback_rows is not None else cfg.n
        if eta_rows > cap or eta_rows < 0:
            warnings.warn(f"eta_n * n = {self.th.eta_n * cfg.n:.1f} clamped to [0, {cap}] rows")
        self.fallback_rows = int(min(max(eta_rows, 0), cap))
        self.verify_rows = math.ceil(cfg.n * h2(cfg.epsilon) - 1e-9) + cfg.delta
        self._p_b = [p_b(self.ctx, b, self.th) for b in range(1, cfg.rounds + 1)]

    def derived(self, t: int) -> SparseBinaryMatrix:
        if t not in self._derived:
            self._derived[t] = derived_matrix(self.H, t)
        return self._derived[t]

    def graph(self, t: int) -> BpGraph:
        if t not in self._graphs:
            self._graphs[t] = BpGraph(self.derived(t))
        return self._graphs[t]

    def p_b(self, b: int) -> float:
        return self._p_b[min(b, self.cfg.rounds) - 1]

    @property
    def fallback_seed(self):
        return (self.cfg.seed, R.GALLAGER_FALLBACK)

    @property
    def verify_seed(self):
        return (self.cfg.seed, R.GALLAGER_VERIFY)


@lru_cache(maxsize=8)
def code_setup(cfg: SessionConfig) -> CodeSetup:
    return CodeSetup(cfg)


# -- parties ----------------------------------------------------------------

class _Channel:
    """Two-way noiseless link; records every message."""

    def __init__(self):
        self.log: list[tuple[str, np.ndarray]] = []

    def send(self, direction: str, bits) -> np.ndarray:
        bits = as_bits(bits)
        self.log.append((direction, bits))
        return bits


class Encoder:
    def __init__(self, setup: CodeSetup, x):
        self._setup = setup
        self._x = as_bits(x, setup.cfg.n)
        self._a = augmenting_stream(syndrome(setup.H, self._x))
        self.done = False

    def round(self, b: int) -> np.ndarray:
        cfg = self._setup.cfg
        if b <= cfg.rounds:
            return self._a[(b - 1) * cfg.delta: b * cfg.delta]
        m = self._setup.fallback_rows
        if m == 0:
            return np.zeros(0, dtype=np.uint8)
        return gallager_syndrome(m, cfg.n, self._setup.fallback_seed, self._x)

    def acknowledge(self, bit: int) -> None:
        self.done = bool(bit)

    def verification(self) -> np.ndarray:
        s = self._setup
        return gallager_syndrome(s.verify_rows, s.cfg.n, s.verify_seed, self._x)


class Decoder:
    def __init__(self, setup: CodeSetup, y):
        self._setup = setup
        cfg = setup.cfg
        self._y = as_bits(y, cfg.n)
        self._acc = Accumulator(cfg.n)
        self.estimate: np.ndarray | None = None
        self.last: DecodeOutcome | None = None
        zeros = float(np.count_nonzero(self._y == 0)) / cfg.n
        self._py0 = cfg.py0 if cfg.py0 is not None else min(max(zeros, 1e-6), 1 - 1e-6)
        self._grid = default_q1_grid(cfg.q1_step)

    def _bp(self, graph, s, b):
        cfg = self._setup.cfg
        pb = self._setup.p_b(b)
        if cfg.decoder is DecoderKind.BP_ASYMMETRIC:
            return bp_decode_asymmetric(graph, s, self._y, pb, self._py0, cfg.bp_cfg, self._grid)
        return bp_decode(graph, s, bsc_prior(self._y, pb, cfg.bp_cfg.llr_clamp), cfg.bp_cfg)

    def receive_round(self, b: int, bits) -> tuple[int, RoundRecord]:
        setup, cfg = self._setup, self._setup.cfg
        if b <= cfg.rounds:
            self._acc.extend(bits)
            t = self._acc.t
            s_t = self._acc.s_tilde
            if cfg.decoder is DecoderKind.EXHAUSTIVE:
                out = exhaustive_min_gamma([(setup.derived(t), s_t)], self._y)
                thr = setup.th.gamma_b(b)
                ok = out.status is Status.CONVERGED and out.gamma_value <= thr
                self.last = out
                self.estimate = out.estimate if ok else None
                return int(ok), RoundRecord(b, len(bits), int(ok), out.status.value,
                                            out.gamma_value, thr)
            out = self._bp(setup.graph(t), s_t, b)
            ok = out.status is Status.CONVERGED
            self.last = out
            self.estimate = out.estimate if ok else None
            return int(ok), RoundRecord(b, len(bits), int(ok), out.status.value)
        # fallback: full syndrome plus Gallager rows; always acknowledge
        s_full = self._acc.s_tilde
        if cfg.decoder is DecoderKind.EXHAUSTIVE:
            cons = [(setup.H, s_full)]
            if len(bits):
                cons.append((sample_gallager(len(bits), cfg.n, setup.fallback_seed), bits))
            out = exhaustive_min_gamma(cons, self._y)
        else:
            # the Gallager rows are dense and carry no BP messages usefully;
            # decode with the complete sparse syndrome
            out = self._bp(setup.graph(cfg.n), s_full, cfg.rounds)
        self.last = out
        self.estimate = out.estimate
        return 1, RoundRecord(b, len(bits), 1, out.status.value, out.gamma_value)

    def verify(self, bits) -> DecodeOutcome:
        setup = self._setup
        if self.estimate is None:
            return DecodeOutcome(Status.NO_SOLUTION)
        H2 = sample_gallager(setup.verify_rows, setup.cfg.n, setup.verify_seed)
        out = final_verify(H2, bits, self.estimate, setup.cfg.epsilon)
        self.estimate = out.estimate
        return out


def run_session(cfg: SessionConfig, x, y, setup: CodeSetup | None = None) -> SessionTranscript:
    """Simulate one complete session and return its transcript."""
    setup = setup or code_setup(cfg)
    x = as_bits(x, cfg.n)
    y = as_bits(y, cfg.n)
    enc, dec, link = Encoder(setup, x), Decoder(setup, y), _Channel()
    tr = SessionTranscript()
    for b in range(1, cfg.rounds + 2):
        fwd = link.send("forward", enc.round(b))
        tr.forward_bits += fwd.size
        if b > cfg.rounds:
            tr.fallback = True
            tr.fallback_bits = fwd.size
        ack, rec = dec.receive_round(b, fwd)
        back = link.send("backward", [ack])
        tr.backward_bits += back.size
        enc.acknowledge(int(back[0]))
        tr.rounds = b
        tr.records.append(rec)
        if ack:
            break
    tr.final_status = tr.records[-1].status
    if cfg.variant is Variant.ALG1:
        v = link.send("forward", enc.verification())
        tr.forward_bits += v.size
        tr.verify_bits = v.size
        try:
            out = dec.verify(v)
            tr.final_status = out.status.value
        except ResourceError as exc:
            warnings.warn(str(exc))
            dec.estimate = None
            tr.final_status = "resource_error"
    tr.estimate = dec.estimate
    tr.best_guess = _best_guess(dec, y)
    if dec.estimate is None:
        tr.outcome = Outcome.DECLARED_FAILURE
    elif np.array_equal(dec.estimate, x):
        tr.outcome = Outcome.WORD_OK
    else:
        tr.outcome = Outcome.WORD_ERROR
    return tr


def _best_guess(dec: Decoder, y) -> np.ndarray:
    if dec.estimate is not None:
        return dec.estimate
    last = dec.last
    if last is not None and last.posterior is not None:
        return as_bits((last.posterior < 0).astype(np.uint8))
    return as_bits(y)


@dataclass(frozen=True)
class RateReport:
    r_f: float
    r_b: float
    r_f_formula: float

    @property
    def total(self) -> float:
        return self.r_f + self.r_b


def rate_report(t: SessionTranscript, cfg: SessionConfig,
                setup: CodeSetup | None = None) -> RateReport:
    """Forward/backward rates from counted bits, plus the formula value."""
    setup = setup or code_setup(cfg)
    n = cfg.n
    if t.fallback:
        formula = (n + setup.fallback_rows) / n
    else:
        formula = t.rounds * cfg.delta / n
    if cfg.variant is Variant.ALG1:
        formula += (math.ceil(n * h2(cfg.epsilon) - 1e-9) + cfg.delta) / n
    return RateReport(t.forward_bits / n, t.rounds / n, formula)


def error_metrics(truth, t: SessionTranscript) -> tuple[int, int]:
    """(word error indicator, bit errors) of a session's output."""
    truth = np.asarray(truth, dtype=np.uint8)
    if t.outcome is Outcome.DECLARED_FAILURE or t.estimate is None:
        if t.best_guess is None:
            raise UsageError("transcript has no estimate to compare")
        return 1, int(np.count_nonzero(t.best_guess != truth))
    bits = int(np.count_nonzero(t.estimate != truth))
    return int(bits > 0), bits
