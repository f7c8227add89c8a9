"""Segmented, odd-only sieve of Eratosthenes and the prime table built from it."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError, RangeError

#: Largest bound accepted without ``allow_large=True``.
MAX_BOUND = 2**31
#: Default segment size, in odd-number flags (one byte each).
SEGMENT_BYTES = 2**18


@dataclass(frozen=True, eq=False)
class PrimeTable:
    """All primes ``<= bound`` in increasing order.

    The ``primes`` array is made read-only on construction so the table can
    be shared freely between readers.
    """

    bound: int
    primes: np.ndarray

    def __post_init__(self):
        self.primes.setflags(write=False)

    @property
    def count(self) -> int:
        return int(self.primes.size)

    def __len__(self) -> int:
        return self.count

    def nth(self, n: int) -> int:
        """The n-th prime, 1-indexed."""
        if n < 1 or n > self.count:
            raise IndexError(f"prime index {n} outside 1..{self.count}")
        return int(self.primes[n - 1])

    def pi(self, x: float) -> int:
        """Number of primes ``<= x``."""
        if x > self.bound:
            raise RangeError(f"x={x} exceeds table bound {self.bound}")
        return int(np.searchsorted(self.primes, math.floor(x), side="right"))

    def is_prime(self, n: int) -> bool:
        if n > self.bound:
            raise RangeError(f"n={n} exceeds table bound {self.bound}")
        i = int(np.searchsorted(self.primes, n))
        return i < self.count and int(self.primes[i]) == n

    def upto(self, x: float) -> np.ndarray:
        """View of the primes ``<= x``."""
        return self.primes[: self.pi(x)]


def _small_odd_primes(limit: int) -> np.ndarray:
    """Odd primes ``<= limit`` by a plain sieve; only used for base primes."""
    if limit < 3:
        return np.empty(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags)[1:].astype(np.int64)


def build_table(
    bound: int, *, segment_bytes: int = SEGMENT_BYTES, allow_large: bool = False
) -> PrimeTable:
    """Sieve all primes up to ``bound``.

    Only odd numbers are stored; flag ``i`` of the global odd array stands for
    ``2*i + 1``. Segments of ``segment_bytes`` flags keep the working set in
    cache for large bounds.
    """
    bound = int(bound)
    if bound < 2:
        raise DomainError(f"bound must be >= 2, got {bound}")
    if bound > MAX_BOUND and not allow_large:
        raise ConfigurationError(
            f"bound {bound} exceeds {MAX_BOUND}; pass allow_large=True to opt in"
        )
    if segment_bytes < 1:
        raise ConfigurationError("segment_bytes must be positive")

    base = _small_odd_primes(math.isqrt(bound)).tolist()
    n_odd = (bound + 1) // 2  # odd numbers 1, 3, ..., <= bound
    pieces = [np.array([2], dtype=np.int64)]
    for lo in range(0, n_odd, segment_bytes):
        hi = min(lo + segment_bytes, n_odd)
        flags = np.ones(hi - lo, dtype=bool)
        if lo == 0:
            flags[0] = False  # 1 is not prime
        low_value = 2 * lo + 1
        high_value = 2 * hi - 1
        for p in base:
            start = p * p
            if start > high_value:
                break
            if start < low_value:
                start = -(-low_value // p) * p
                if start % 2 == 0:
                    start += p
            flags[(start - 1) // 2 - lo :: p] = False
        pieces.append(2 * (np.flatnonzero(flags).astype(np.int64) + lo) + 1)
    return PrimeTable(bound, np.concatenate(pieces))


def nth_prime(table: PrimeTable, n: int) -> int:
    return table.nth(n)


def prime_count(table: PrimeTable, x: float) -> int:
    return table.pi(x)


def write_binary(table: PrimeTable, path) -> None:
    """Little-endian u64 count followed by the primes as u64."""
    with open(path, "wb") as fh:
        np.array([table.count], dtype="<u8").tofile(fh)
        table.primes.astype("<u8").tofile(fh)


def read_binary(path, bound: int | None = None) -> PrimeTable:
    with open(path, "rb") as fh:
        (count,) = np.fromfile(fh, dtype="<u8", count=1)
        primes = np.fromfile(fh, dtype="<u8", count=int(count)).astype(np.int64)
    if primes.size != count:
        raise ConfigurationError(f"{path}: truncated prime file")
    if bound is None:
        bound = int(primes[-1]) if primes.size else 2
    return PrimeTable(int(bound), primes)


def write_text(table: PrimeTable, path) -> None:
    Path(path).write_text("".join(f"{p}\n" for p in table.primes.tolist()))
