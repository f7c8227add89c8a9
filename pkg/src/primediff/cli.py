"""Command line entry point: ``primediff <subcommand> ...``.

Exit codes: 0 ok, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from . import analysis, diffcount, hlmodel, sieve, singular
from .checkpoint import load_tracer, save_tracer
from .errors import CapabilityError, ConfigurationError, DomainError, RangeError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("primediff")

OUT_DIR_ENV = "PRIMEDIFF_OUT_DIR"
#: Largest x for shared-grid model profiles (FFT of ~2x doubles).
HL_MAX_X = 2**25


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    x_max: int = 10**5
    quad_rel_tol: float = 1e-10
    c2_prime_bound: int = 10**6
    envelope_slack: float = 2.0
    lemma4_C: float = 4.0
    lemma4_slack: float = 0.2
    lemma5_slack: float = 0.1
    out_dir: str = "."
    checkpoint: str | None = None
    threads: int = 1

    def validate(self) -> "RunConfig":
        if self.x_max < 3:
            raise UsageError("x_max must be >= 3")
        for name in ("quad_rel_tol", "envelope_slack", "lemma4_C", "lemma4_slack", "lemma5_slack"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        if self.c2_prime_bound < 1000:
            raise UsageError("c2_prime_bound must be >= 1000")
        if self.threads < 1:
            raise UsageError("threads must be >= 1")
        return self

    def c2(self) -> singular.TwinPrimeConstant:
        return singular.twin_prime_constant(self.c2_prime_bound)

    def path(self, name: str) -> Path:
        p = Path(name)
        if not p.is_absolute():
            p = Path(self.out_dir) / p
        p.parent.mkdir(parents=True, exist_ok=True)
        return p


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return data


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(**load_config(args.config))
    if os.environ.get(OUT_DIR_ENV):
        cfg.out_dir = os.environ[OUT_DIR_ENV]
    overrides = {
        "out_dir": args.out_dir,
        "threads": args.threads,
        "checkpoint": args.checkpoint,
        "quad_rel_tol": getattr(args, "tol", None),
    }
    if getattr(args, "max", None) is not None:
        overrides["x_max"] = args.max
    elif args.command in ("diffs", "hl"):
        overrides["x_max"] = args.x
    return replace(cfg, **{k: v for k, v in overrides.items() if v is not None}).validate()


def _number(text: str) -> int:
    """Integers in plain or float notation (``1e5``)."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if value != int(value):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def _join(ds) -> str:
    return ";".join(str(d) for d in ds)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    log.info("wrote %s", path)


def _fmt(v: float) -> str:
    return repr(float(v))


def _table(bound: int) -> sieve.PrimeTable:
    return sieve.build_table(max(bound, 1000))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_sieve(args, cfg):
    table = sieve.build_table(args.bound, allow_large=args.allow_large)
    if args.out:
        sieve.write_binary(table, cfg.path(args.out))
    if args.text:
        sieve.write_text(table, cfg.path(args.text))
    print(json.dumps({"bound": table.bound, "count": table.count}))
    return 0


def cmd_diffs(args, cfg):
    table = _table(args.x)
    hist = diffcount.count_differences(table, args.x, workers=cfg.threads)
    _write_csv(cfg.path(args.out), ["d", "G"], hist.nonzero(even_only=args.even_only))
    return 0


def cmd_gaps(args, cfg):
    table = _table(cfg.x_max)
    rows = diffcount.gap_trace(table, cfg.x_max)
    _write_csv(cfg.path(args.out), ["x", "max_count", "champions"],
               ((r.x, r.max_count, _join(r.champions)) for r in rows))
    return 0


def run_champions(table, x_max: int, out: Path, checkpoint: Path | None,
                  every: int = 20000, stop_at: int | None = None) -> int:
    """Stream the champion trace to ``out``, resuming from ``checkpoint`` if present.

    Returns the number of rows in the file.
    """
    if checkpoint is not None and checkpoint.exists():
        tracer, rows_written, offset = load_tracer(checkpoint, table)
        if tracer.x_max != x_max:
            raise UsageError(f"checkpoint is for x_max={tracer.x_max}, not {x_max}")
        fh = open(out, "r+b")
        fh.truncate(offset)
        fh.seek(offset)
        log.info("resuming at x=%d (%d rows)", tracer.x, rows_written)
    else:
        tracer, rows_written = diffcount.ChampionTracer(table, x_max), 0
        fh = open(out, "wb")
        fh.write(b"x,max_count,champions\n")
    since = 0
    stop = x_max if stop_at is None else min(stop_at, x_max)
    with fh:
        for batch in tracer.iter_batches(stop, batch=2048):
            fh.write("".join(f"{r.x},{r.max_count},{_join(r.champions)}\n" for r in batch).encode())
            rows_written += len(batch)
            since += len(batch)
            if checkpoint is not None and since >= every:
                fh.flush()
                save_tracer(tracer, checkpoint, rows_written, fh.tell())
                since = 0
        fh.flush()
        if checkpoint is not None:
            save_tracer(tracer, checkpoint, rows_written, fh.tell())
    return rows_written


def cmd_champions(args, cfg):
    table = _table(cfg.x_max)
    ck = Path(cfg.checkpoint) if cfg.checkpoint else None
    n = run_champions(table, cfg.x_max, cfg.path(args.out), ck, args.checkpoint_every, args.stop_at)
    log.info("%d trace rows", n)
    return 0


def cmd_transitions(args, cfg):
    table = _table(cfg.x_max)
    rows = analysis.transition_table(diffcount.champion_trace(table, cfg.x_max))
    _write_csv(cfg.path(args.out), ["primorial", "first_x", "last_x", "open_ended"],
               ((r.primorial, r.first_x, r.last_x, int(r.open_ended)) for r in rows))
    return 0


def cmd_singular(args, cfg):
    s = singular.singular_series(args.d, cfg.c2())
    print(json.dumps({"d": s.d, "value": s.value, "c2": s.c2_used,
                      "c2_tail_bound": s.c2_tail_bound,
                      "exact_ratio_num": s.ratio.numerator,
                      "exact_ratio_den": s.ratio.denominator}))
    return 0


def cmd_primorials(args, cfg):
    print(json.dumps([asdict(p) for p in singular.primorials(args.max_k)]))
    return 0


def cmd_mertens(args, cfg):
    y = args.y
    value = singular.mertens_product(y, _table(math.floor(y)))
    print(json.dumps({"y": y, "product": value, "log_y": math.log(y),
                      "ratio": value / math.log(y), "e_gamma": math.exp(singular.EULER_GAMMA)}))
    return 0


def cmd_hl(args, cfg):
    x = cfg.x_max
    table = _table(x)
    c2 = cfg.c2()
    header = ["d", "G", "G_model", "E", "H"]
    if args.d is not None:
        r = hlmodel.error_term(x, args.d, table, c2, cfg.quad_rel_tol)
        rows = [r]
    else:
        if x > HL_MAX_X:
            raise CapabilityError(f"model profiles are limited to x <= {HL_MAX_X}")
        rows = hlmodel.model_profile(x, table, c2, cfg.quad_rel_tol, even_only=not args.all)
    _write_csv(cfg.path(args.out), header,
               ((r.d, r.g_exact, _fmt(r.g_model), _fmt(r.error), _fmt(r.h_factor)) for r in rows))
    return 0


def stats_rows(x_list, c2, rel_tol):
    """(x, pi, mu, nu, nu/pi^2) with each x moved down to the nearest prime."""
    table = _table(max(x_list))
    out = []
    for x in x_list:
        if x > HL_MAX_X:
            raise CapabilityError(f"statistics are limited to x <= {HL_MAX_X}")
        p = table.nth(table.pi(x))
        s = hlmodel.mu_statistic(p, table, c2, rel_tol)
        out.append((p, s.pi_x, s.mu, s.nu, s.nu_normalized))
    return out


def cmd_hl_stats(args, cfg):
    rows = stats_rows(args.x_list, cfg.c2(), cfg.quad_rel_tol)
    _write_csv(cfg.path(args.out), ["x", "pi", "mu", "nu", "nu_over_pi2"],
               ((x, n, _fmt(mu), _fmt(nu), _fmt(r)) for x, n, mu, nu, r in rows))
    return 0


def cmd_verify(args, cfg):
    table = _table(cfg.x_max)
    trace = diffcount.champion_trace(table, cfg.x_max)
    results = analysis.run_checks(
        trace, table, args.checks, envelope_slack=cfg.envelope_slack, lemma4_C=cfg.lemma4_C,
        lemma4_slack=cfg.lemma4_slack, lemma5_slack=cfg.lemma5_slack, c2=cfg.c2(),
    )
    report = [r.to_json() for r in results]
    text = json.dumps(report, indent=2, default=str)
    if args.report:
        cfg.path(args.report).write_text(text + "\n")
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}")
    return 0 if all(r.passed for r in results) else 1


def cmd_figures(args, cfg):
    for which in args.which:
        path = cfg.path(f"fig{which}.csv")
        header, rows = figure_data(which, cfg, args)
        _write_csv(path, header, rows)
    return 0


def figure_data(which: int, cfg: RunConfig, args) -> tuple[list[str], list]:
    """Header and rows of plot data for figure ``which`` (1..9)."""
    x = args.x
    if which in (1, 2, 3, 6, 7) and x > HL_MAX_X:
        raise CapabilityError(f"figure {which} is limited to x <= {HL_MAX_X}")
    if which == 1:
        h = diffcount.gap_histogram(_table(x), x)
        return ["d", "N"], sorted(h.gap_counts.items())
    if which in (2, 3):
        hist = diffcount.count_differences(_table(x), x, workers=cfg.threads)
        rows = hist.nonzero(even_only=True)
        if which == 2:
            return ["d", "G"], rows
        top = 2 * max(hist.champions)
        return ["d", "G", "is_champion"], [(d, g, int(d in hist.champions)) for d, g in rows if d <= top]
    if which in (4, 5):
        trace = diffcount.champion_trace(_table(cfg.x_max), cfg.x_max)
        if which == 4:
            rows = []
            for r in trace:
                lo, hi = analysis.envelope(r.x)
                rows.append((r.x, _join(r.champions), _fmt(lo), _fmt(hi)))
            return ["x", "champions", "lower_env", "upper_env"], rows
        try:
            rep = analysis.transition_oscillation(trace, tuple(args.pair))
        except RangeError as exc:
            raise CapabilityError(f"figure 5 needs a longer sweep: {exc}") from exc
        lo, hi = rep.window
        return ["x", "champions"], [(r.x, _join(r.champions)) for r in trace if lo <= r.x <= hi]
    if which in (6, 7):
        rows = hlmodel.model_profile(x, _table(x), cfg.c2(), cfg.quad_rel_tol)
        if which == 6:
            L2 = math.log(x) ** 2
            return ["d", "G_model", "I"], [(r.d, _fmt(r.g_model), _fmt(r.h_factor * (x - r.d) / L2))
                                           for r in rows]
        return ["d", "E"], [(r.d, _fmt(r.error)) for r in rows]
    if which in (8, 9):
        stats = stats_rows(args.x_list, cfg.c2(), cfg.quad_rel_tol)
        if which == 8:
            return ["x", "mu", "guide"], [(s[0], _fmt(s[2]), _fmt(1 / math.sqrt(s[1]))) for s in stats]
        return ["x", "nu_over_pi2"], [(s[0], _fmt(s[4])) for s in stats]
    raise UsageError(f"unknown figure {which}")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _x_list(text: str) -> list[int]:
    return [_number(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file (TOML)")
    common.add_argument("--out-dir", help=f"output directory (env {OUT_DIR_ENV})")
    common.add_argument("--threads", type=int, help="worker threads for fixed-x counting")
    common.add_argument("--checkpoint", help="checkpoint file for resumable sweeps")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="primediff", description=__doc__.splitlines()[0],
                                     parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sieve", parents=[common], help="sieve primes up to a bound")
    p.add_argument("--bound", type=_number, required=True)
    p.add_argument("--out", help="binary output (u64 count + u64 primes)")
    p.add_argument("--text", help="text output, one prime per line")
    p.add_argument("--allow-large", action="store_true")
    p.set_defaults(func=cmd_sieve)

    p = sub.add_parser("diffs", parents=[common], help="G(x, d) for all d")
    p.add_argument("--x", type=_number, required=True)
    p.add_argument("--even-only", action="store_true")
    p.add_argument("--out", default="diffs.csv")
    p.set_defaults(func=cmd_diffs)

    p = sub.add_parser("gaps", parents=[common], help="jumping champion trace")
    p.add_argument("--max", type=_number)
    p.add_argument("--out", default="gaps.csv")
    p.set_defaults(func=cmd_gaps)

    p = sub.add_parser("champions", parents=[common], help="difference champion trace")
    p.add_argument("--max", type=_number)
    p.add_argument("--out", default="trace.csv")
    p.add_argument("--checkpoint-every", type=int, default=20000, help="rows between checkpoints")
    p.add_argument("--stop-at", type=_number, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_champions)

    p = sub.add_parser("transitions", parents=[common], help="primorial transition table")
    p.add_argument("--max", type=_number)
    p.add_argument("--out", default="table.csv")
    p.set_defaults(func=cmd_transitions)

    p = sub.add_parser("singular", parents=[common], help="singular series at d")
    p.add_argument("--d", type=_number, required=True)
    p.set_defaults(func=cmd_singular)

    p = sub.add_parser("primorials", parents=[common], help="list primorials")
    p.add_argument("--max-k", type=int, default=8)
    p.set_defaults(func=cmd_primorials)

    p = sub.add_parser("mertens", parents=[common], help="Mertens product up to y")
    p.add_argument("--y", type=float, required=True)
    p.set_defaults(func=cmd_mertens)

    p = sub.add_parser("hl", parents=[common], help="model vs exact counts at x")
    p.add_argument("--x", type=_number, required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--d", type=_number)
    group.add_argument("--all-even", action="store_true", help="every even d (default)")
    group.add_argument("--all", action="store_true", help="every d, odd included")
    p.add_argument("--tol", type=float)
    p.add_argument("--out", default="model.csv")
    p.set_defaults(func=cmd_hl)

    p = sub.add_parser("hl-stats", parents=[common], help="mu and nu statistics")
    p.add_argument("--x-list", type=_x_list, default=_x_list("1e4,3e4,1e5,3e5,1e6"))
    p.add_argument("--tol", type=float)
    p.add_argument("--out", default="stats.csv")
    p.set_defaults(func=cmd_hl_stats)

    p = sub.add_parser("verify", parents=[common], help="run consistency checks")
    p.add_argument("--max", type=_number)
    p.add_argument("--checks", type=lambda s: s.split(","),
                   default=["primorial", "envelope", "lemma4", "lemma5", "factors"])
    p.add_argument("--report", default="report.json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("figures", parents=[common], help="plot data for figures 1-9")
    p.add_argument("--which", type=lambda s: [int(t) for t in s.split(",")], default=list(range(1, 10)))
    p.add_argument("--max", type=_number, help="sweep end for figures 4 and 5")
    p.add_argument("--x", type=_number, default=10**5, help="threshold for figures 1-3, 6, 7")
    p.add_argument("--x-list", type=_x_list, default=_x_list("1e4,3e4,1e5,3e5,1e6"))
    p.add_argument("--pair", type=lambda s: [int(t) for t in s.split(",")], default=[210, 2310])
    p.set_defaults(func=cmd_figures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = build_config(args)
        return args.func(args, cfg)
    except (UsageError, DomainError, RangeError, ConfigurationError, CapabilityError) as exc:
        print(f"primediff {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
