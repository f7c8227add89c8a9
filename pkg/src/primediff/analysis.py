"""Consistency checks of champion traces against primorial structure and bounds."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .diffcount import ChampionTraceRow, DiffHistogram, count_differences
from .errors import DomainError, RangeError
from .sieve import PrimeTable
from .singular import (
    _c2_pair,
    _table,
    euler_phi,
    factorize,
    is_primorial,
    mertens_divisor_sum,
    mertens_max,
    primorial,
    primorial_floor,
    prime_reciprocal_sum,
    singular_ratios,
)

#: Non-primorial champions that occur at tiny x.
SMALL_X_EXCEPTIONS = frozenset({1, 3, 4})
#: Asymptotic bound on the deficiency sum, log(2C) with C = 4.
DEFICIENCY_BOUND = 2.08
#: Every large champion has an odd prime factor <= this.
SMALL_FACTOR_LIMIT = 25583


@dataclass(frozen=True)
class TransitionRow:
    primorial: int
    first_x: int
    last_x: int
    open_ended: bool = False


@dataclass(frozen=True)
class BoundReport:
    x: int
    pdc_set: tuple[int, ...]
    lower_env: float
    upper_env: float
    slack: float
    within: tuple[bool, ...]

    @property
    def ok(self) -> bool:
        return all(self.within)


@dataclass(frozen=True)
class OscillationReport:
    pair: tuple[int, int]
    window: tuple[int, int]
    rows_checked: int
    violations: tuple[tuple[int, tuple[int, ...]], ...]
    tie_xs: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class Lemma4Report:
    x: int
    C: float
    slack: float
    max_ratio: float
    argmax_d: int
    ratio_d2: float
    passed: bool


@dataclass(frozen=True)
class Lemma5Report:
    x: int
    q: int
    phi_q: int
    slack: float
    g_star: int
    champion_bound: float
    averaged_sum: int
    averaged_bound: float
    vacuous: bool
    passed: bool


@dataclass(frozen=True)
class FactorProfile:
    x: int
    d_star: int
    factors: tuple[int, ...]
    omega: int
    m_value: float
    m_star: float
    deficiency: float
    deficiency_ok: bool
    deficiency_flag: bool
    corollary3: bool


def transition_table(trace: Sequence[ChampionTraceRow]) -> list[TransitionRow]:
    """First and last prime x at which each primorial is a champion.

    Rows whose last occurrence is the final traced x are open-ended: the sweep
    ended there, so no transition is implied.
    """
    if not trace:
        raise DomainError("empty trace")
    first: dict[int, int] = {}
    last: dict[int, int] = {}
    for row in trace:
        for d in row.champions:
            if is_primorial(d):
                first.setdefault(d, row.x)
                last[d] = row.x
    end = trace[-1].x
    return [TransitionRow(p, first[p], last[p], last[p] == end) for p in sorted(first)]


def primoriality_check(
    trace: Iterable[ChampionTraceRow],
    allowed: Iterable[int] = SMALL_X_EXCEPTIONS,
) -> list[tuple[int, int]]:
    """Every (x, d) with d a champion that is neither a primorial nor allowed."""
    allowed = frozenset(allowed)
    return [
        (row.x, d)
        for row in trace
        for d in row.champions
        if d not in allowed and not is_primorial(d)
    ]


def transition_oscillation(
    trace: Sequence[ChampionTraceRow], primorial_pair: tuple[int, int]
) -> OscillationReport:
    """Check that champions stay inside the pair across its transition window.

    The window runs from the first occurrence of the larger primorial to the
    last occurrence of the smaller one; x where both tie are collected.
    """
    small, large = sorted(primorial_pair)
    xs_large = [r.x for r in trace if large in r.champions]
    xs_small = [r.x for r in trace if small in r.champions]
    if not xs_large or not xs_small:
        raise RangeError(f"trace does not reach the {small}->{large} transition")
    start, stop = xs_large[0], xs_small[-1]
    if stop == trace[-1].x:
        raise RangeError(f"{small} is still a champion at the end of the trace")
    pair = {small, large}
    violations, ties, checked = [], [], 0
    for row in trace:
        if start <= row.x <= stop:
            checked += 1
            s = set(row.champions)
            if not s or not s <= pair:
                violations.append((row.x, row.champions))
            elif s == pair:
                ties.append(row.x)
    return OscillationReport((small, large), (start, stop), checked, tuple(violations), tuple(ties))


def envelope(x: float) -> tuple[float, float]:
    L = math.log(x)
    return x / L**2, x / L


def theorem1_envelope(
    trace: Iterable[ChampionTraceRow], slack: float = 2.0, x_min: int = 100
) -> list[BoundReport]:
    """Champions against the band [x/(slack (log x)^2), slack x/log x]."""
    if slack < 1:
        raise DomainError("slack must be >= 1")
    reports = []
    for row in trace:
        if row.x < x_min:
            continue
        lo, hi = envelope(row.x)
        within = tuple(lo / slack <= d <= slack * hi for d in row.champions)
        reports.append(BoundReport(row.x, row.champions, lo, hi, slack, within))
    return reports


def sieve_bound_check(
    x: int,
    table: PrimeTable,
    c2=None,
    C: float = 4.0,
    slack: float = 0.2,
    hist: DiffHistogram | None = None,
) -> Lemma4Report:
    """max over even d <= x of G(x, d) / (S(d) x/(log x)^2) against C (1 + slack)."""
    hist = hist or count_differences(table, x)
    c2_value, _ = _c2_pair(c2)
    scale = x / math.log(x) ** 2
    ratio_s = singular_ratios(x)[2::2] * c2_value
    g = hist.counts[2 : x + 1 : 2].astype(np.float64)
    ratios = g / (ratio_s * scale)
    i = int(np.argmax(ratios))
    return Lemma4Report(
        x=int(x), C=C, slack=slack, max_ratio=float(ratios[i]), argmax_d=2 * (i + 1),
        ratio_d2=float(ratios[0]), passed=bool(ratios[i] <= C * (1 + slack)),
    )


def lemma5_lower_bound(
    x: int,
    table: PrimeTable,
    slack: float = 0.1,
    hist: DiffHistogram | None = None,
) -> Lemma5Report:
    """Averaged pair count over multiples of q and the champion lower bound.

    q is the primorial floor of x/(log x)^2. Checked:
      sum_{m <= x/q} G(x, mq) >= (1/2)(x^2/(phi(q)(log x)^2) - x/log x)(1 - slack)
      G*(x) >= (1/2)(q/phi(q))(x/(log x)^2 - q/log x)(1 - slack)
    """
    if x < 1000:
        raise DomainError("lemma5_lower_bound needs x >= 1000")
    hist = hist or count_differences(table, x)
    L = math.log(x)
    q = primorial_floor(x / L**2).value
    phi_q = euler_phi(q, table)
    averaged = int(hist.counts[q : x + 1 : q].sum(dtype=np.int64))
    averaged_bound = 0.5 * (x * x / (phi_q * L**2) - x / L) * (1 - slack)
    champion_bound = 0.5 * (q / phi_q) * (x / L**2 - q / L) * (1 - slack)
    vacuous = champion_bound <= 0 and averaged_bound <= 0
    passed = hist.max_count >= champion_bound and averaged >= averaged_bound
    return Lemma5Report(int(x), q, phi_q, slack, hist.max_count, champion_bound,
                        averaged, averaged_bound, vacuous, passed)


def factor_profile(x: int, trace_row: ChampionTraceRow, table: PrimeTable | None = None,
                   d_star: int | None = None) -> FactorProfile:
    """Prime-factor statistics of a champion at threshold x."""
    d = trace_row.champions[0] if d_star is None else d_star
    if d not in trace_row.champions:
        raise DomainError(f"{d} is not a champion at x={trace_row.x}")
    fac = factorize(d, table)
    divisors = set(fac.primes)
    cutoff = 2 * math.log(x)
    small = [p for p in _table(1000).upto(cutoff).tolist() if p not in divisors]
    deficiency = math.fsum(1.0 / p for p in small)
    odd_small = [p for p in divisors if 2 < p <= SMALL_FACTOR_LIMIT]
    return FactorProfile(
        x=int(x), d_star=d, factors=fac.primes, omega=fac.omega,
        m_value=mertens_divisor_sum(d, table), m_star=mertens_max(x),
        deficiency=deficiency,
        deficiency_ok=deficiency <= DEFICIENCY_BOUND,
        deficiency_flag=deficiency > 1.5 * DEFICIENCY_BOUND,
        corollary3=d % 2 == 0 and bool(odd_small),
    )


def corollary3_constant() -> dict:
    """sum_{3 <= p <= 25583} 1/p against log 8."""
    s = prime_reciprocal_sum(3, SMALL_FACTOR_LIMIT)
    return {"sum": s, "log8": math.log(8), "exceeds": s > math.log(8)}


def primorial_log_ratios(max_k: int = 15) -> list[tuple[int, int, float]]:
    """(k, p_k, log(p_k#)/p_k); the ratio tends to 1."""
    out = []
    for k in range(1, max_k + 1):
        pr = primorial(k)
        out.append((k, pr.largest_prime, math.log(pr.value) / pr.largest_prime))
    return out


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    worst_case: object = None

    def to_json(self) -> dict:
        return {"name": self.name, "pass": self.passed, "details": self.details,
                "worst_case": self.worst_case}


def run_checks(
    trace: Sequence[ChampionTraceRow],
    table: PrimeTable,
    checks: Sequence[str] = ("primorial", "envelope", "lemma4", "lemma5", "factors"),
    *,
    envelope_slack: float = 2.0,
    lemma4_C: float = 4.0,
    lemma4_slack: float = 0.2,
    lemma5_slack: float = 0.1,
    c2=None,
) -> list[CheckResult]:
    """Run named checks over a trace ending at x_max; used by ``verify``."""
    x_max = trace[-1].x
    results = []
    for name in checks:
        if name == "primorial":
            late = [r for r in trace if r.x >= 19]
            early = [r for r in trace if r.x < 19]
            bad = primoriality_check(late, allowed=()) + primoriality_check(early, {1, 2, 3, 4, 6})
            results.append(CheckResult(name, not bad, {"rows": len(trace), "violations": len(bad)},
                                       bad[0] if bad else None))
        elif name == "envelope":
            reps = theorem1_envelope(trace, envelope_slack)
            bad = [r for r in reps if not r.ok]
            results.append(CheckResult(name, not bad,
                                       {"rows": len(reps), "slack": envelope_slack, "violations": len(bad)},
                                       asdict(bad[0]) if bad else None))
        elif name in ("lemma4", "lemma5"):
            xs = [x for x in (10**4, 10**5) if x <= x_max] or [x_max]
            reps = []
            for x in xs:
                if name == "lemma4":
                    reps.append(sieve_bound_check(x, table, c2, lemma4_C, lemma4_slack))
                elif x >= 1000:
                    reps.append(lemma5_lower_bound(x, table, lemma5_slack))
            bad = [r for r in reps if not r.passed]
            worst = asdict(bad[0]) if bad else (asdict(reps[-1]) if reps else None)
            results.append(CheckResult(name, not bad, {"x": [r.x for r in reps]}, worst))
        elif name == "factors":
            last = trace[-1]
            profiles = [factor_profile(last.x, last, table, d) for d in last.champions if d >= 2]
            bad = [p for p in profiles if p.deficiency_flag]
            results.append(CheckResult(name, not bad,
                                       {"x": last.x, "profiles": [asdict(p) for p in profiles]},
                                       asdict(bad[0]) if bad else None))
        else:
            raise DomainError(f"unknown check {name!r}")
    return results
