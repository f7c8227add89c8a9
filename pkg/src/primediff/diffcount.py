"""Exact prime-difference counts G(x, d), gap counts N(x, d) and champion traces.

G(x, d) counts pairs of primes p < p' <= x with p' - p = d (all d, including
the odd differences p' - 2). N(x, d) counts consecutive-prime gaps of size d
among primes <= x. The champion sets are the argmax sets of these counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numba
import numpy as np

from .errors import ConfigurationError, DomainError, RangeError
from .sieve import PrimeTable

COUNT_DTYPE = np.int32
#: Largest x for which the FFT autocorrelation path is used by ``method="auto"``.
FFT_MAX_X = 2**24


@dataclass(eq=False)
class DiffHistogram:
    """G(x, d) for every d in 0..x, stored densely (``counts[0]`` is always 0)."""

    x: int
    n: int
    counts: np.ndarray
    max_count: int
    champions: tuple[int, ...]

    @classmethod
    def from_counts(cls, x: int, n: int, counts: np.ndarray) -> "DiffHistogram":
        max_count, champions = _argmax_set(counts)
        return cls(int(x), int(n), counts, max_count, champions)

    def __getitem__(self, d: int) -> int:
        if d < 0:
            raise DomainError("difference must be non-negative")
        return int(self.counts[d]) if d < self.counts.size else 0

    def total(self) -> int:
        return int(self.counts.sum(dtype=np.int64))

    def nonzero(self, even_only: bool = False) -> list[tuple[int, int]]:
        """(d, G) pairs with G > 0 in increasing d."""
        ds = np.flatnonzero(self.counts)
        if even_only:
            ds = ds[ds % 2 == 0]
        return list(zip(ds.tolist(), self.counts[ds].tolist()))


@dataclass(frozen=True, slots=True)
class ChampionTraceRow:
    x: int
    champions: tuple[int, ...]
    max_count: int


@dataclass(frozen=True, slots=True)
class GapTraceRow:
    x: int
    champions: tuple[int, ...]
    max_count: int


@dataclass(eq=False)
class GapHistogram:
    x: int
    gap_counts: dict[int, int]
    jump_champions: tuple[int, ...]
    max_gap_count: int

    def total(self) -> int:
        return sum(self.gap_counts.values())


def _argmax_set(counts: np.ndarray) -> tuple[int, tuple[int, ...]]:
    if counts.size == 0:
        return 0, ()
    m = int(counts.max())
    if m == 0:
        return 0, ()
    return m, tuple(np.flatnonzero(counts == m).tolist())


def _check_x(table: PrimeTable, x: int) -> int:
    x = int(x)
    if x < 2:
        raise DomainError(f"x must be >= 2, got {x}")
    if x > table.bound:
        raise RangeError(f"x={x} exceeds table bound {table.bound}")
    return x


# ---------------------------------------------------------------------------
# fixed-x counting
# ---------------------------------------------------------------------------


@numba.njit(cache=True, nogil=True)
def _diff_block(primes, i0, i1, counts):
    for i in range(i0, i1):
        p = primes[i]
        for j in range(i):
            counts[p - primes[j]] += 1


def _block_bounds(n: int, parts: int) -> list[int]:
    # row i costs i increments, so equal work means bounds at n*sqrt(k/parts)
    bounds = [0]
    for k in range(1, parts):
        bounds.append(max(bounds[-1], min(n, int(round(n * math.sqrt(k / parts))))))
    bounds.append(n)
    return bounds


def _count_direct(primes: np.ndarray, x: int, workers: int, parts: int) -> np.ndarray:
    bounds = _block_bounds(primes.size, parts)
    blocks = list(zip(bounds[:-1], bounds[1:]))

    def run(block):
        local = np.zeros(x + 1, dtype=COUNT_DTYPE)
        _diff_block(primes, block[0], block[1], local)
        return local

    if workers > 1 and parts > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(run, blocks))
    else:
        partials = [run(b) for b in blocks]
    # merge in fixed block order
    total = partials[0]
    for part in partials[1:]:
        total += part
    return total


def _count_fft(primes: np.ndarray, x: int) -> np.ndarray:
    indicator = np.zeros(x + 1, dtype=np.float64)
    indicator[primes] = 1.0
    size = 1 << (2 * x + 1).bit_length()
    spectrum = np.fft.rfft(indicator, size)
    corr = np.fft.irfft(spectrum * np.conj(spectrum), size)[: x + 1]
    rounded = np.rint(corr)
    if primes.size and float(np.max(np.abs(corr - rounded))) > 0.25:
        raise ConfigurationError("FFT round-off too large for exact counting")
    rounded[0] = 0.0  # the p = p' diagonal
    return rounded.astype(COUNT_DTYPE)


def count_differences(
    table: PrimeTable,
    x: int,
    *,
    method: str = "auto",
    workers: int = 1,
    parts: int | None = None,
) -> DiffHistogram:
    """Exact histogram of all positive prime differences among primes <= x.

    ``method="direct"`` walks every pair, split into ``parts`` row blocks with
    private histograms that are summed in block order, so the result does not
    depend on ``workers``. ``method="fft"`` autocorrelates the prime indicator
    and rounds; it is exact while round-off stays below 1/4, which is checked.
    """
    x = _check_x(table, x)
    primes = table.upto(x)
    if method == "auto":
        method = "fft" if x <= FFT_MAX_X else "direct"
    if method == "direct":
        counts = _count_direct(primes, x, workers, parts or max(1, workers))
    elif method == "fft":
        counts = _count_fft(primes, x)
    else:
        raise ValueError(f"unknown method {method!r}")
    return DiffHistogram.from_counts(x, primes.size, counts)


def pair_count(table: PrimeTable, x: int, d: int) -> int:
    """G(x, d) for a single difference."""
    x = _check_x(table, x)
    if d < 1:
        raise DomainError("difference must be positive")
    lower = table.upto(x - d) if x - d >= 2 else table.primes[:0]
    shifted = lower + d
    idx = np.searchsorted(table.primes, shifted)
    idx = np.minimum(idx, table.count - 1)
    return int(np.count_nonzero(table.primes[idx] == shifted))


def sum_identity_check(hist: DiffHistogram) -> bool:
    """True iff the histogram holds exactly n(n-1)/2 pairs."""
    return hist.total() == hist.n * (hist.n - 1) // 2


# ---------------------------------------------------------------------------
# incremental champion trace
# ---------------------------------------------------------------------------


@numba.njit(cache=True, nogil=True)
def _trace_kernel(primes, counts, k0, k1, max_count, cur, n_cur, row_max, row_off, flat):
    # Consumes primes[k0:k1]. Returns early, before touching prime k, when the
    # champion buffer could overflow (a prime adds at most k champions). When
    # a row does not fit in ``flat`` the prime is still consumed and reported
    # as pending; the caller reads that row from ``cur``.
    flat_pos = 0
    k = k0
    while k < k1:
        if n_cur + k > cur.size:
            return k, max_count, n_cur, flat_pos, False
        p = primes[k]
        for j in range(k):
            d = p - primes[j]
            c = counts[d] + 1
            counts[d] = c
            if c > max_count:
                max_count = c
                cur[0] = d
                n_cur = 1
            elif c == max_count:
                cur[n_cur] = d
                n_cur += 1
        k += 1
        if flat_pos + n_cur > flat.size:
            return k, max_count, n_cur, flat_pos, True
        r = k - 1 - k0
        row_max[r] = max_count
        row_off[r] = flat_pos
        flat[flat_pos : flat_pos + n_cur] = np.sort(cur[:n_cur])
        flat_pos += n_cur
    return k, max_count, n_cur, flat_pos, False


class ChampionTracer:
    """Running G(x, .) state that consumes primes one at a time.

    Consuming p_k performs k increments ``counts[p_k - p_j] += 1``. A single
    increment raises a count by one, so it can only equal or exceed the
    current maximum by one; the champion set is updated in O(1) per increment.
    """

    def __init__(self, table: PrimeTable, x_max: int):
        x_max = _check_x(table, x_max)
        self.table = table
        self.x_max = x_max
        self.primes = table.upto(x_max)
        self.counts = np.zeros(x_max + 1, dtype=COUNT_DTYPE)
        self.n = 0
        self.max_count = 0
        self._cur = np.zeros(max(64, self.primes.size + 1), dtype=np.int64)
        self._n_cur = 0

    @property
    def x(self) -> int:
        """Largest prime consumed so far (0 before the first)."""
        return int(self.primes[self.n - 1]) if self.n else 0

    @property
    def champions(self) -> tuple[int, ...]:
        return tuple(sorted(self._cur[: self._n_cur].tolist()))

    def histogram(self) -> DiffHistogram:
        counts = self.counts.copy()
        return DiffHistogram(self.x, self.n, counts, int(self.max_count), self.champions)

    def iter_batches(self, x_stop: int | None = None, batch: int = 4096) -> Iterator[list[ChampionTraceRow]]:
        """Consume primes up to ``x_stop``, yielding rows in batches.

        One row is emitted per consumed prime x >= 3. State is consistent
        between batches, so a checkpoint may be taken after any yield.
        """
        x_stop = self.x_max if x_stop is None else min(int(x_stop), self.x_max)
        k_end = int(np.searchsorted(self.primes, x_stop, side="right"))
        flat = np.empty(4 * batch, dtype=np.int64)
        row_max = np.empty(batch, dtype=np.int64)
        row_off = np.empty(batch, dtype=np.int64)
        while self.n < k_end:
            k0 = self.n
            k1 = min(k_end, k0 + batch)
            k, mc, n_cur, pos, pending = _trace_kernel(
                self.primes, self.counts, k0, k1, self.max_count,
                self._cur, self._n_cur, row_max, row_off, flat,
            )
            self.n, self.max_count, self._n_cur = int(k), int(mc), int(n_cur)
            done = self.n - int(pending)
            rows = _rows_from_buffers(self.primes, k0, done, row_max, row_off, flat, pos)
            if pending:
                rows.append(ChampionTraceRow(self.x, self.champions, self.max_count))
            elif self.n == k0:
                self._cur = np.concatenate([self._cur, np.zeros_like(self._cur)])
            if rows:
                yield rows

    def advance(self, x_stop: int | None = None) -> list[ChampionTraceRow]:
        rows: list[ChampionTraceRow] = []
        for chunk in self.iter_batches(x_stop):
            rows.extend(chunk)
        return rows


def _rows_from_buffers(primes, k0, k1, row_max, row_off, flat, pos) -> list[ChampionTraceRow]:
    m = k1 - k0
    offs = row_off[:m].tolist() + [pos]
    vals = flat[:pos].tolist()
    maxes = row_max[:m].tolist()
    xs = primes[k0:k1].tolist()
    rows = []
    for r in range(m):
        if xs[r] < 3:
            continue
        rows.append(ChampionTraceRow(xs[r], tuple(vals[offs[r] : offs[r + 1]]), maxes[r]))
    return rows


def champion_trace(table: PrimeTable, x_max: int) -> list[ChampionTraceRow]:
    """(x, D*(x), G*(x)) at every prime 3 <= x <= x_max."""
    return ChampionTracer(table, x_max).advance()


# ---------------------------------------------------------------------------
# consecutive gaps
# ---------------------------------------------------------------------------


def gap_histogram(table: PrimeTable, x: int) -> GapHistogram:
    x = _check_x(table, x)
    gaps = np.diff(table.upto(x))
    values, freq = np.unique(gaps, return_counts=True)
    gap_counts = dict(zip(values.tolist(), freq.tolist()))
    if not gap_counts:
        return GapHistogram(x, {}, (), 0)
    m = max(gap_counts.values())
    champs = tuple(sorted(d for d, c in gap_counts.items() if c == m))
    return GapHistogram(x, gap_counts, champs, m)


def gap_trace(table: PrimeTable, x_max: int) -> list[GapTraceRow]:
    """(x, J*(x), N*(x)) at every prime 3 <= x <= x_max."""
    x_max = _check_x(table, x_max)
    primes = table.upto(x_max).tolist()
    counts: dict[int, int] = {}
    best = 0
    champs: set[int] = set()
    rows = []
    for prev, p in zip(primes, primes[1:]):
        g = p - prev
        c = counts.get(g, 0) + 1
        counts[g] = c
        if c > best:
            best = c
            champs = {g}
        elif c == best:
            champs.add(g)
        rows.append(GapTraceRow(p, tuple(sorted(champs)), best))
    return rows


def histogram_at(rows: Sequence[ChampionTraceRow], x: int) -> ChampionTraceRow:
    """The trace row in force at threshold x (the last prime <= x)."""
    xs = [r.x for r in rows]
    i = np.searchsorted(xs, x, side="right") - 1
    if i < 0:
        raise RangeError(f"x={x} precedes the trace")
    return rows[int(i)]
