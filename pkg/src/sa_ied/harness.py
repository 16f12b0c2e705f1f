"""Pair generation, batch experiments, collision Monte-Carlo and config files.

Every block's pair is drawn from its own stream keyed by
``(base_seed, block_id)``, so rows do not depend on execution order or on
the number of worker processes.
"""
from __future__ import annotations

import csv
import enum
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng as R
from .accumulation import cell_xor
from .degrees import NodeDegreeDistribution, node_counts, quantize
from .ensembles import EnsembleSpec, gallager_syndrome, sample_ldpc
from .errors import UsageError
from .gf2 import as_bits, syndrome
from .protocol import SessionConfig, code_setup, error_metrics, rate_report, run_session

log = logging.getLogger(__name__)

CSV_COLUMNS = ("block_id", "rounds", "r_f", "r_b", "word_error", "bit_errors", "status")


class ChannelKind(enum.Enum):
    BSC = "bsc"
    ASYMMETRIC = "asymmetric"


@dataclass(frozen=True)
class ChannelModel:
    """Law of ``X`` given ``Y``.

    ``BSC(p0)`` flips each bit of a uniform ``y`` with probability ``p0``.
    ``ASYMMETRIC(p1, p2, py0)`` draws ``y = 0`` with probability ``py0``;
    a zero of ``y`` becomes a one of ``x`` with probability ``p1`` and a one
    of ``y`` becomes a zero with probability ``p2``.
    """

    kind: ChannelKind
    p0: float = 0.0
    p1: float = 0.0
    p2: float = 0.0
    py0: float = 0.5

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", ChannelKind(self.kind))
        if self.kind is ChannelKind.BSC:
            if not 0 <= self.p0 < 0.5:
                raise UsageError("BSC crossover must lie in [0, 0.5)")
            object.__setattr__(self, "py0", 0.5)
        else:
            if not (0 < self.p1 <= 0.5 and 0 < self.p2 <= 0.5):
                raise UsageError("asymmetric crossovers must lie in (0, 0.5]")
            if not 0 < self.py0 < 1:
                raise UsageError("py0 must lie in (0, 1)")

    @classmethod
    def bsc(cls, p0: float) -> "ChannelModel":
        return cls(ChannelKind.BSC, p0=p0)

    @classmethod
    def asymmetric(cls, p1: float, p2: float, py0: float = 0.5) -> "ChannelModel":
        return cls(ChannelKind.ASYMMETRIC, p1=p1, p2=p2, py0=py0)

    @property
    def transition(self) -> np.ndarray:
        """``T[x, y] = Pr{X = x | Y = y}``; columns sum to one."""
        a, b = (self.p0, self.p0) if self.kind is ChannelKind.BSC else (self.p1, self.p2)
        return np.array([[1 - a, b], [a, 1 - b]])

    @property
    def conditional_entropy(self) -> float:
        """``H(X | Y)`` in bits."""
        from .bounds import h2
        if self.kind is ChannelKind.BSC:
            return h2(self.p0)
        return self.py0 * h2(self.p1) + (1 - self.py0) * h2(self.p2)


def gen_pair(ch: ChannelModel, n: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Draw an i.i.d. ``(x, y)`` pair of length ``n``.

    ``seed`` is an integer or a tuple of integers.
    """
    keys = seed if isinstance(seed, tuple) else (seed,)
    g = R.make_rng(*keys, R.PAIR)
    y = (g.random(n) >= ch.py0).astype(np.uint8)
    u = g.random(n)
    if ch.kind is ChannelKind.BSC:
        flip = u < ch.p0
    else:
        flip = np.where(y == 0, u < ch.p1, u < ch.p2)
    x = y ^ flip.astype(np.uint8)
    return as_bits(x), as_bits(y)


# -- experiments ------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    channel: ChannelModel
    session: SessionConfig
    blocks: int = 1
    seed: int = 0
    out: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.blocks < 1:
            raise UsageError("blocks must be at least 1")
        if self.workers < 1:
            raise UsageError("workers must be at least 1")


@dataclass
class ExperimentResult:
    rows: list[dict] = field(default_factory=list)
    n: int = 1

    @property
    def ok_rows(self) -> list[dict]:
        return [r for r in self.rows if not str(r["status"]).startswith("error")]

    @property
    def mean_rate(self) -> float:
        rows = self.ok_rows
        return float(np.mean([r["r_f"] + r["r_b"] for r in rows])) if rows else math.nan

    @property
    def word_errors(self) -> int:
        return sum(r["word_error"] for r in self.ok_rows)

    @property
    def bit_error_rate(self) -> float:
        rows = self.ok_rows
        return sum(r["bit_errors"] for r in rows) / (len(rows) * self.n) if rows else math.nan

    def footer(self) -> dict:
        rows = self.ok_rows
        if not rows:
            return {c: "" for c in CSV_COLUMNS} | {"block_id": "mean", "status": "no_blocks"}
        avg = {c: float(np.mean([r[c] for r in rows]))
               for c in ("rounds", "r_f", "r_b", "word_error", "bit_errors")}
        return {"block_id": "mean", **avg, "status": f"blocks={len(rows)}"}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow(_fmt_row(r))
        w.writerow(_fmt_row(self.footer()))
        return buf.getvalue()


def _fmt_row(r: dict) -> dict:
    return {k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()}


def run_block(cfg: ExperimentConfig, block_id: int) -> dict:
    """One session on the pair of ``block_id``; failures become an error row."""
    try:
        x, y = gen_pair(cfg.channel, cfg.session.n, (cfg.seed, block_id))
        tr = run_session(cfg.session, x, y)
        rr = rate_report(tr, cfg.session)
        we, be = error_metrics(x, tr)
        return {"block_id": block_id, "rounds": tr.rounds, "r_f": rr.r_f, "r_b": rr.r_b,
                "word_error": we, "bit_errors": be, "status": tr.final_status}
    except (OSError, RuntimeError, ValueError) as exc:
        log.error("block %d failed: %s", block_id, exc)
        return {"block_id": block_id, "rounds": 0, "r_f": 0.0, "r_b": 0.0,
                "word_error": 0, "bit_errors": 0,
                "status": f"error:{type(exc).__name__}"}


def _run_chunk(args):
    cfg, ids = args
    return [run_block(cfg, i) for i in ids]


def run_experiment(cfg: ExperimentConfig, block_ids=None, progress=None) -> ExperimentResult:
    """Run every block and return rows sorted by ``block_id``.

    ``block_ids`` overrides the default ``range(cfg.blocks)`` (any order),
    ``progress`` is called with each finished row in the serial path. The
    CSV is written to ``cfg.out`` when set.
    """
    ids = list(range(cfg.blocks)) if block_ids is None else list(block_ids)
    rows: list[dict] = []
    if cfg.workers == 1:
        code_setup(cfg.session)
        for i in ids:
            row = run_block(cfg, i)
            rows.append(row)
            if progress:
                progress(row)
    else:
        chunks = [(cfg, ids[k::cfg.workers]) for k in range(cfg.workers)]
        with ProcessPoolExecutor(cfg.workers) as pool:
            for part in pool.map(_run_chunk, chunks):
                rows.extend(part)
    rows.sort(key=lambda r: r["block_id"])
    res = ExperimentResult(rows, cfg.session.n)
    if cfg.out:
        Path(cfg.out).write_text(res.to_csv(), encoding="utf-8")
    return res


# -- collision Monte-Carlo --------------------------------------------------

def mc_collision_curve(spec: EnsembleSpec, xs, ts, samples: int) -> np.ndarray:
    """Estimate ``Pr{H^(t) x = 0}`` for every ``x`` in ``xs`` and ``t`` in ``ts``.

    Each sample draws a fresh matrix from ``spec``'s ensemble (keyed by
    ``(spec.seed, sample)``) and reuses it for every ``x`` and ``t``: the
    accumulated syndrome of ``x`` is the cell-wise XOR of ``H x``. Returns
    an array of shape ``(len(xs), len(ts))``.
    """
    xs = [as_bits(x, spec.n) for x in xs]
    ts = [int(t) for t in ts]
    hits = np.zeros((len(xs), len(ts)), dtype=np.int64)
    base = spec.seed if isinstance(spec.seed, tuple) else (spec.seed,)
    for k in range(samples):
        H = sample_ldpc(EnsembleSpec(spec.n, spec.L, seed=base + (k,), check=spec.check,
                                     acyclic_degree2=spec.acyclic_degree2))
        for i, x in enumerate(xs):
            s = syndrome(H, x)
            for j, t in enumerate(ts):
                if not cell_xor(s, t).any():
                    hits[i, j] += 1
    return hits / samples


def mc_collision_prob(spec: EnsembleSpec, x, b: int, delta: int, samples: int) -> float:
    """Fraction of ensemble draws with ``H^(b delta) x = 0``."""
    return float(mc_collision_curve(spec, [x], [b * delta], samples)[0, 0])


def mc_collision_prob_gallager(m: int, n: int, x, samples: int, seed: int = 0) -> float:
    """Same estimate for ``m x n`` Gallager matrices."""
    x = as_bits(x, n)
    hits = 0
    for k in range(samples):
        if not gallager_syndrome(m, n, (seed, k), x).any():
            hits += 1
    return hits / samples


# -- config files -----------------------------------------------------------

def parse_config(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` lines.

    ``#`` starts a comment; keys may be dotted (``bp.max_iterations``); a
    ``[section]`` line prefixes the following keys with ``section.``.
    """
    out: dict[str, str] = {}
    prefix = ""
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            prefix = line[1:-1].strip()
            prefix = prefix + "." if prefix else ""
            continue
        key, sep, val = line.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"config line {lineno}: expected key = value")
        out[prefix + key.strip()] = val.strip()
    return out


def load_config(path) -> dict[str, str]:
    try:
        return parse_config(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc


def fit_distribution(L: NodeDegreeDistribution, n: int) -> tuple[NodeDegreeDistribution, bool]:
    """``L`` itself when its counts at ``n`` are integral, else ``quantize(L, n)``.

    The flag tells whether rounding happened, so callers can report it.
    """
    try:
        node_counts(L, n)
        return L, False
    except UsageError:
        return quantize(L, n), True
