"""Command-line entry point ``sa-ied``.

Subcommands ``bounds``, ``simulate``, ``sample`` and ``mc`` read a flat
``key = value`` config file; command-line flags override its keys. Exit
status is 0 on success, 1 for usage errors and 2 for runtime failures.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .bounds import (BoundContext, default_delta, h2, p_b, rate_solution, redundancy,
                     thresholds)
from .codec import BpConfig
from .degrees import NodeDegreeDistribution, edge_to_node, lift, load_node_distribution, reference_lambda
from .ensembles import EnsembleSpec, sample_ldpc
from .errors import DomainError, UsageError
from .gf2 import write_alist
from .harness import (ChannelModel, ExperimentConfig, fit_distribution, load_config,
                      mc_collision_curve, mc_collision_prob_gallager, run_experiment)
from .protocol import SessionConfig

log = logging.getLogger("sa_ied")

# flag name -> config key
FLAG_KEYS = {
    "n": "n", "delta": "delta", "epsilon": "epsilon", "k": "k",
    "channel": "channel.kind", "p0": "channel.p0", "p1": "channel.p1",
    "p2": "channel.p2", "py0": "channel.py0", "blocks": "blocks", "seed": "seed",
    "out": "out", "decoder": "decoder", "dist_file": "distribution.file",
}

BP_KEYS = {
    "bp.max_iterations": int, "bp.llr_clamp": float, "bp.significance_threshold": float,
    "bp.warmup_iterations": int, "bp.stall_window": int,
    "bp.significant_fraction": float, "bp.use_heuristics": None,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {s!r}")


class Settings:
    """Typed view of the merged config dictionary."""

    def __init__(self, raw: dict[str, str]):
        self.raw = raw

    def get(self, key, cast=str, default=None, required=False):
        if key not in self.raw or self.raw[key] == "":
            if required:
                raise UsageError(f"missing setting '{key}'")
            return default
        val = self.raw[key]
        try:
            return _bool(val) if cast is bool else cast(val)
        except ValueError as exc:
            raise UsageError(f"bad value for '{key}': {val!r}") from exc


def _int_list(spec: str, lo: int, hi: int) -> list[int]:
    """``"a:b"`` (inclusive), ``"a:b:step"`` or ``"a,b,c"``."""
    try:
        if ":" in spec:
            parts = [int(p) for p in spec.split(":")]
            step = parts[2] if len(parts) > 2 else 1
            vals = list(range(parts[0], parts[1] + 1, step))
        else:
            vals = [int(p) for p in spec.split(",") if p.strip()]
    except (ValueError, IndexError) as exc:
        raise UsageError(f"bad integer list {spec!r}") from exc
    if not vals or min(vals) < lo or max(vals) > hi:
        raise UsageError(f"list {spec!r} must lie in [{lo}, {hi}]")
    return vals


def _distribution(st: Settings) -> NodeDegreeDistribution:
    path = st.get("distribution.file")
    regular = st.get("distribution.regular", int)
    if path and regular:
        raise UsageError("give distribution.file or distribution.regular, not both")
    if regular:
        L = NodeDegreeDistribution.regular(regular)
    elif path:
        L = load_node_distribution(path)
    else:
        L = edge_to_node(reference_lambda())
    k = st.get("k", int, 1)
    if k < 1:
        raise UsageError("k must be positive")
    return lift(L, k) if k > 1 else L


def _n_delta(st: Settings) -> tuple[int, int]:
    n = st.get("n", int, required=True)
    if n < 2:
        raise UsageError("n must be at least 2")
    delta = st.get("delta", int) or default_delta(n)
    if delta < 1 or n % delta:
        raise UsageError(f"delta={delta} must divide n={n}")
    return n, delta


def _fitted(L, n):
    L2, rounded = fit_distribution(L, n)
    if rounded:
        print(f"notice: degree fractions rounded to integral counts at n={n} "
              f"(average degree {L.average:.6g} -> {L2.average:.6g})", file=sys.stderr)
    return L2


def _bp_config(st: Settings) -> BpConfig:
    kw = {}
    for key, cast in BP_KEYS.items():
        v = st.get(key, cast or bool)
        if v is not None:
            kw[key.split(".", 1)[1]] = v
    return BpConfig(**kw)


def _channel(st: Settings) -> ChannelModel:
    kind = st.get("channel.kind", str, "bsc").lower()
    if kind == "bsc":
        return ChannelModel.bsc(st.get("channel.p0", float, 0.0))
    if kind in ("asymmetric", "asym"):
        return ChannelModel.asymmetric(st.get("channel.p1", float, required=True),
                                       st.get("channel.p2", float, required=True),
                                       st.get("channel.py0", float, 0.5))
    raise UsageError(f"unknown channel {kind!r}")


def _session(st: Settings, ch: ChannelModel | None = None) -> SessionConfig:
    n, delta = _n_delta(st)
    L = _fitted(_distribution(st), n)
    py0 = st.get("session.py0", float)
    if py0 is None and ch is not None and ch.kind.value == "asymmetric":
        py0 = ch.py0
    try:
        return SessionConfig(
            n=n, L=L, epsilon=st.get("epsilon", float, 0.1), seed=st.get("seed", int, 0),
            variant=st.get("variant", str, "alg3").lower(),
            decoder=st.get("decoder", str, "bp").lower(), delta=delta,
            bp_cfg=_bp_config(st), threshold_mode=st.get("threshold_mode", str, "finite"),
            acyclic_degree2=st.get("acyclic_degree2", bool, False), py0=py0,
            q1_step=st.get("q1_step", float, 0.025),
            max_fallback_rows=st.get("max_fallback_rows", int))
    except ValueError as exc:  # enum lookups
        if isinstance(exc, (UsageError, DomainError)):
            raise
        raise UsageError(str(exc)) from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _num(v: float) -> str:
    return "-inf" if v == -math.inf else repr(float(v))


# -- subcommands ------------------------------------------------------------

def cmd_bounds(st: Settings) -> None:
    n, delta = _n_delta(st)
    L = _distribution(st)
    eps = st.get("epsilon", float, 0.1)
    ctx = BoundContext(L, eps, n, delta, st.get("threshold_mode", str, "finite"))
    th = thresholds(ctx)
    bs = _int_list(st.get("grid.b", str, f"1:{ctx.rounds}"), 1, ctx.rounds)
    h_fixed = st.get("h", float)
    p0 = st.get("channel.p0", float)
    if h_fixed is None and p0 is not None:
        h_fixed = h2(p0)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["R_or_b", "P", "Gamma_b", "eta_n", "p_b", "rate_solution", "redundancy"])
    for b in bs:
        R = b * delta / n
        gam = th.gamma_b(b)
        h = h_fixed if h_fixed is not None else max(gam, 0.0)
        w.writerow([b, _num(ctx.p(R)), _num(gam), _num(th.eta_n), _num(p_b(ctx, b, th)),
                    _num(rate_solution(ctx, h)), _num(redundancy(L, eps, h))])
    _emit(buf.getvalue(), st.get("out"))


def cmd_simulate(st: Settings) -> None:
    ch = _channel(st)
    sess = _session(st, ch)
    cfg = ExperimentConfig(ch, sess, blocks=st.get("blocks", int, 1), seed=st.get("seed", int, 0),
                           out=None, workers=st.get("workers", int, 1))
    res = run_experiment(cfg)
    _emit(res.to_csv(), st.get("out"))
    print(f"blocks={len(res.ok_rows)} mean_rate={res.mean_rate:.6f} "
          f"word_errors={res.word_errors} ber={res.bit_error_rate:.3g}", file=sys.stderr)
    if len(res.ok_rows) < len(res.rows):
        print(f"{len(res.rows) - len(res.ok_rows)} blocks failed", file=sys.stderr)


def cmd_sample(st: Settings) -> None:
    n, _ = _n_delta(st)
    L = _fitted(_distribution(st), n)
    out = st.get("out", required=True)
    spec = EnsembleSpec(n, L, seed=st.get("seed", int, 0),
                        acyclic_degree2=st.get("acyclic_degree2", bool, False))
    write_alist(sample_ldpc(spec), out)


def _mc_vector(st: Settings, n: int) -> np.ndarray:
    bits = st.get("mc.x")
    if bits:
        if len(bits) != n or set(bits) - {"0", "1"}:
            raise UsageError(f"mc.x must be a 0/1 string of length {n}")
        return np.array([int(c) for c in bits], dtype=np.uint8)
    w = st.get("mc.weight", int, max(1, n // 4))
    if not 0 <= w <= n:
        raise UsageError("mc.weight out of range")
    x = np.zeros(n, dtype=np.uint8)
    x[:w] = 1
    return x


def cmd_mc(st: Settings) -> None:
    from .bounds import lemma1_log_bound
    from .degrees import support_profile

    n, delta = _n_delta(st)
    samples = st.get("mc.samples", int, 1000)
    if samples < 1:
        raise UsageError("mc.samples must be positive")
    x = _mc_vector(st, n)
    seed = st.get("seed", int, 0)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if st.get("mc.ensemble", str, "ldpc").lower() == "gallager":
        m = st.get("mc.m", int, delta)
        est = mc_collision_prob_gallager(m, n, x, samples, seed)
        w.writerow(["m", "estimate", "log_estimate", "reference_log"])
        w.writerow([m, _num(est), _num(math.log(est)) if est > 0 else "-inf",
                    _num(-m * math.log(2))])
    else:
        L = _fitted(_distribution(st), n)
        spec = EnsembleSpec(n, L, seed=seed)
        rounds = n // delta
        bs = _int_list(st.get("mc.b", str, f"1:{rounds}"), 1, rounds)
        est = mc_collision_curve(spec, [x], [b * delta for b in bs], samples)[0]
        ctx = BoundContext(L, st.get("epsilon", float, 0.1), n, delta)
        l_sup = support_profile(sample_ldpc(spec), np.flatnonzero(x)).l_bar_support
        w.writerow(["b", "estimate", "log_estimate", "log_bound"])
        for b, e in zip(bs, est):
            bound = lemma1_log_bound(ctx, b, l_sup) if l_sup > 0 else 0.0
            w.writerow([b, _num(e), _num(math.log(e)) if e > 0 else "-inf", _num(bound)])
    _emit(buf.getvalue(), st.get("out"))


COMMANDS = {"bounds": cmd_bounds, "simulate": cmd_simulate, "sample": cmd_sample, "mc": cmd_mc}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sa-ied", description="Interactive syndrome-accumulation coding tools")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="key = value settings file")
        for flag in ("n", "delta", "k", "blocks", "seed"):
            sp.add_argument(f"--{flag}", type=int)
        for flag in ("epsilon", "p0", "p1", "p2", "py0"):
            sp.add_argument(f"--{flag}", type=float)
        sp.add_argument("--channel", choices=["bsc", "asymmetric"])
        sp.add_argument("--decoder", choices=["exhaustive", "bp", "bp_asymmetric"])
        sp.add_argument("--out")
        sp.add_argument("--dist-file", dest="dist_file")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        raw = load_config(args.config)
        for attr, key in FLAG_KEYS.items():
            v = getattr(args, attr)
            if v is not None:
                raw[key] = str(v)
        COMMANDS[args.command](Settings(raw))
        return 0
    except (UsageError, DomainError) as exc:
        print(f"sa-ied: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001 - report anything else as a runtime failure
        print(f"sa-ied: runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
