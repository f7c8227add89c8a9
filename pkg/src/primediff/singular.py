"""Singular series, twin prime constant, primorials, Mertens sums and totients.

The singular series is carried as an exact rational multiple of C2 so that
comparisons such as S(p_k#)/S(p_{k-1}#) = 1 + 1/(p_k - 2) are decided without
float drift; floats appear only in the final conversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError, DomainError, OverflowGuardError, RangeError
from .sieve import PrimeTable, build_table

#: Euler's constant to 20 significant digits.
EULER_GAMMA = 0.57721566490153286061
#: Primes whose product is the largest primorial handled (p_15# < 2**63).
MAX_PRIMORIAL_INDEX = 15
_FIRST_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53)


class TwinPrimeConstant(NamedTuple):
    """Truncated C2 product; the true constant lies in [value*(1-tail_bound), value]."""

    value: float
    tail_bound: float


@dataclass(frozen=True)
class Factorization:
    d: int
    factors: tuple[tuple[int, int], ...]

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    @property
    def omega(self) -> int:
        return len(self.factors)

    def product(self) -> int:
        return math.prod(p**m for p, m in self.factors)


@dataclass(frozen=True)
class SingularValue:
    d: int
    value: float
    c2_used: float
    c2_tail_bound: float
    ratio: Fraction = field(repr=False)
    """Exact S(d)/C2."""


@dataclass(frozen=True)
class Primorial:
    k: int
    value: int
    largest_prime: int


@lru_cache(maxsize=8)
def _table(bound: int) -> PrimeTable:
    return build_table(bound)


def _table_for_factoring(d: int, table: PrimeTable | None) -> PrimeTable:
    if table is None:
        return _table(max(1000, 1 << math.isqrt(d).bit_length()))
    if table.bound * table.bound < d:
        raise ConfigurationError(
            f"table bound {table.bound} too small to factor {d} by trial division"
        )
    return table


def factorize(d: int, table: PrimeTable | None = None) -> Factorization:
    """Trial division by table primes up to sqrt(d)."""
    d = int(d)
    if d < 1:
        raise DomainError(f"cannot factor {d}")
    table = _table_for_factoring(d, table)
    factors = []
    rest = d
    for p in table.primes.tolist():
        if p * p > rest:
            break
        if rest % p == 0:
            m = 0
            while rest % p == 0:
                rest //= p
                m += 1
            factors.append((p, m))
    if rest > 1:
        factors.append((rest, 1))
    return Factorization(d, tuple(factors))


def twin_prime_constant(p_bound: int = 10**6, table: PrimeTable | None = None) -> TwinPrimeConstant:
    """Product of (1 - (p-1)^-2) over primes 2 < p <= p_bound, with its tail bound.

    The omitted factors satisfy prod(1 - a_p) >= 1 - sum a_p and
    sum_{p > P} (p-1)^-2 <= sum_{m >= P} m^-2 <= 1/(P-1) <= 1/(P-2).
    """
    p_bound = int(p_bound)
    if p_bound < 1000:
        raise DomainError("p_bound must be >= 1000")
    if table is None or table.bound < p_bound:
        table = _table(p_bound)
    p = table.upto(p_bound)[1:].astype(np.float64)
    log_value = math.fsum(np.log1p(-1.0 / (p - 1.0) ** 2).tolist())
    return TwinPrimeConstant(math.exp(log_value), 1.0 / (p_bound - 2))


@lru_cache(maxsize=1)
def default_c2() -> TwinPrimeConstant:
    return twin_prime_constant(10**6)


def _c2_pair(c2) -> tuple[float, float]:
    if c2 is None:
        c2 = default_c2()
    if isinstance(c2, tuple):
        return float(c2[0]), float(c2[1])
    return float(c2), float("nan")


def singular_ratio(d: int, table: PrimeTable | None = None) -> Fraction:
    """S(d)/C2 as an exact fraction: 0 for odd d, else 2 prod_{p|d, p>2} (p-1)/(p-2)."""
    d = int(d)
    if d == 0:
        raise DomainError("singular series is undefined at d = 0")
    d = abs(d)
    if d % 2:
        return Fraction(0)
    num, den = 2, 1
    for p in factorize(d, table).primes:
        if p > 2:
            num *= p - 1
            den *= p - 2
    return Fraction(num, den)


def singular_series(d: int, c2=None, table: PrimeTable | None = None) -> SingularValue:
    """S(d) = 2 C2 prod_{p | d, p > 2} (p-1)/(p-2) for even d, 0 for odd d.

    ``c2`` may be a float or a :class:`TwinPrimeConstant`; by default the
    truncation at 10**6 is used.
    """
    c2_value, tail = _c2_pair(c2)
    ratio = singular_ratio(d, table)
    value = float(ratio * Fraction(c2_value)) if ratio else 0.0
    return SingularValue(int(d), value, c2_value, tail, ratio)


def singular_ratios(d_max: int) -> np.ndarray:
    """S(d)/C2 for every d in 0..d_max as floats (entry 0 is 0).

    Built multiplicatively over odd primes, one pass per prime; used for bulk
    model profiles where per-d factorization would dominate.
    """
    ratio = np.zeros(d_max + 1, dtype=np.float64)
    ratio[2::2] = 2.0
    for p in _table(max(1000, d_max)).upto(d_max)[1:].tolist():
        ratio[2 * p :: 2 * p] *= (p - 1) / (p - 2)
    return ratio


def _primorial_values() -> list[int]:
    out, acc = [], 1
    for p in _FIRST_PRIMES:
        acc *= p
        out.append(acc)
    return out


_PRIMORIALS = _primorial_values()  # p_1# .. p_16#; the last is only a guard


def primorial(k: int) -> Primorial:
    k = int(k)
    if k < 1:
        raise DomainError("primorial index starts at 1")
    if k > MAX_PRIMORIAL_INDEX:
        raise OverflowGuardError(f"p_{k}# exceeds the 64-bit guard (k <= {MAX_PRIMORIAL_INDEX})")
    return Primorial(k, _PRIMORIALS[k - 1], _FIRST_PRIMES[k - 1])


def primorials(max_k: int = MAX_PRIMORIAL_INDEX) -> list[Primorial]:
    return [primorial(k) for k in range(1, max_k + 1)]


def is_primorial(n: int) -> bool:
    return n in _PRIMORIALS[:MAX_PRIMORIAL_INDEX]


def primorial_floor(x: float) -> Primorial:
    """The p_k# with p_k# <= x < p_{k+1}#."""
    if x < 2:
        raise DomainError(f"primorial floor needs x >= 2, got {x}")
    if x >= _PRIMORIALS[MAX_PRIMORIAL_INDEX]:
        raise OverflowGuardError(f"x={x} is beyond p_{MAX_PRIMORIAL_INDEX + 1}#")
    k = sum(1 for v in _PRIMORIALS if v <= x)
    return primorial(k)


def primorial_ceiling(x: float) -> Primorial:
    """The p_k# with p_{k-1}# < x <= p_k#; any x <= 2 maps to 2."""
    if x > _PRIMORIALS[MAX_PRIMORIAL_INDEX - 1]:
        raise OverflowGuardError(f"x={x} is beyond p_{MAX_PRIMORIAL_INDEX}#")
    k = next(i for i, v in enumerate(_PRIMORIALS, start=1) if x <= v)
    return primorial(k)


def mertens_divisor_sum(d: int, table: PrimeTable | None = None) -> float:
    """M(d): sum of 1/p over the distinct primes p dividing d."""
    return math.fsum(1.0 / p for p in factorize(d, table).primes)


def mertens_max(x: float) -> float:
    """M*(x) = max_{d <= x} M(d), attained at the primorial floor of x."""
    if x < 2:
        return 0.0
    k = primorial_floor(x).k
    return math.fsum(1.0 / p for p in _FIRST_PRIMES[:k])


def mertens_product(y: float, table: PrimeTable | None = None) -> float:
    """prod_{p <= y} (1 - 1/p)^-1."""
    if y < 3:
        raise DomainError("mertens_product needs y >= 3")
    if table is None:
        table = _table(max(1000, math.floor(y)))
    if y > table.bound:
        raise RangeError(f"y={y} exceeds table bound {table.bound}")
    p = table.upto(y).astype(np.float64)
    return math.exp(-math.fsum(np.log1p(-1.0 / p).tolist()))


def euler_phi(q: int, table: PrimeTable | None = None) -> int:
    result = int(q)
    for p in factorize(q, table).primes:
        result = result // p * (p - 1)
    return result


def harmonic_gamma_estimate(n: int, chunk: int = 1 << 22) -> float:
    """H_n - log n - 1/(2n), an independent estimate of Euler's constant.

    The neglected terms are O(n^-2).
    """
    partial = []
    for lo in range(1, n + 1, chunk):
        hi = min(n, lo + chunk - 1)
        partial.append(float(np.sum(1.0 / np.arange(lo, hi + 1, dtype=np.float64))))
    return math.fsum(partial) - math.log(n) - 0.5 / n


def prime_reciprocal_sum(lo: int, hi: int, table: PrimeTable | None = None) -> float:
    """sum of 1/p over primes lo <= p <= hi."""
    if table is None or table.bound < hi:
        table = _table(max(1000, hi))
    p = table.upto(hi)
    p = p[p >= lo]
    return math.fsum((1.0 / p.astype(np.float64)).tolist())
