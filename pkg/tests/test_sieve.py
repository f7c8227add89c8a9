from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from primediff import sieve
from primediff.errors import ConfigurationError, DomainError, RangeError


def trial_division_primes(n):
    out = []
    for k in range(2, n + 1):
        if all(k % p for p in out if p * p <= k):
            out.append(k)
    return out


@pytest.mark.parametrize("bound", [2, 3, 4, 10, 97, 100, 1000, 7919])
def test_matches_trial_division(bound):
    t = sieve.build_table(bound)
    assert t.primes.tolist() == trial_division_primes(bound)


@pytest.mark.parametrize("seg", [1, 3, 64, 1000])
def test_segment_size_does_not_matter(seg):
    ref = sieve.build_table(20000).primes
    assert np.array_equal(sieve.build_table(20000, segment_bytes=seg).primes, ref)


def test_known_counts(small_table):
    assert small_table.count == 9592
    assert small_table.pi(10**4) == 1229
    assert small_table.pi(10**4 + 0.5) == 1229
    assert small_table.nth(1) == 2 and small_table.nth(1229) == 9973


def test_million(table):
    assert table.count == 78498
    assert table.nth(2817) == 25583


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5000), st.integers(0, 5000))
def test_prefix_property(a, extra):
    small = sieve.build_table(a).primes
    big = sieve.build_table(a + extra).primes
    assert np.array_equal(big[: small.size], small)
    assert big.size == small.size or big[small.size] > a


def test_table_read_only(small_table):
    with pytest.raises(ValueError):
        small_table.primes[0] = 4


def test_lookup_errors(small_table):
    with pytest.raises(IndexError):
        small_table.nth(0)
    with pytest.raises(IndexError):
        small_table.nth(9593)
    with pytest.raises(RangeError):
        small_table.pi(10**5 + 1)
    assert small_table.is_prime(99991) and not small_table.is_prime(99993)


def test_bound_errors():
    with pytest.raises(DomainError):
        sieve.build_table(1)
    with pytest.raises(ConfigurationError):
        sieve.build_table(2**31 + 1)


def test_binary_roundtrip(tmp_path):
    t = sieve.build_table(1000)
    path = tmp_path / "p.bin"
    sieve.write_binary(t, path)
    raw = path.read_bytes()
    assert len(raw) == 8 * (1 + 168)
    assert int.from_bytes(raw[:8], "little") == 168
    assert int.from_bytes(raw[8:16], "little") == 2
    back = sieve.read_binary(path, 1000)
    assert np.array_equal(back.primes, t.primes) and back.bound == 1000


def test_truncated_binary(tmp_path):
    path = tmp_path / "p.bin"
    sieve.write_binary(sieve.build_table(1000), path)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ConfigurationError):
        sieve.read_binary(path)


def test_text_output(tmp_path):
    path = tmp_path / "p.txt"
    sieve.write_text(sieve.build_table(30), path)
    assert path.read_text().split() == ["2", "3", "5", "7", "11", "13", "17", "19", "23", "29"]


def test_prime_number_theorem_band(table):
    x = 10**6
    assert x / math.log(x) < table.count < 1.1 * x / (math.log(x) - 1)
