"""Binary checkpoints of a running champion trace.

Layout (little-endian): magic ``PDCK``, one format-version byte, six u64
header fields (x_max, primes consumed, max count, number of champions, rows
written, output byte offset), the champions as u64 and the counts as i32.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from .diffcount import COUNT_DTYPE, ChampionTracer
from .errors import ConfigurationError
from .sieve import PrimeTable

MAGIC = b"PDCK"
VERSION = 1
_HEADER = struct.Struct("<6Q")


def save_tracer(tracer: ChampionTracer, path, rows_written: int = 0, offset: int = 0) -> None:
    """Write atomically (temp file then rename) so an interrupted save keeps the old one."""
    path = Path(path)
    champs = np.asarray(tracer.champions, dtype="<u8")
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC + bytes([VERSION]))
        fh.write(_HEADER.pack(tracer.x_max, tracer.n, tracer.max_count, champs.size,
                              rows_written, offset))
        champs.tofile(fh)
        tracer.counts.astype("<i4").tofile(fh)
    os.replace(tmp, path)


def load_tracer(path, table: PrimeTable) -> tuple[ChampionTracer, int, int]:
    """Restore a tracer; returns (tracer, rows_written, offset)."""
    with open(path, "rb") as fh:
        head = fh.read(5)
        if head[:4] != MAGIC:
            raise ConfigurationError(f"{path}: not a checkpoint file")
        if head[4] != VERSION:
            raise ConfigurationError(f"{path}: unsupported checkpoint version {head[4]}")
        x_max, n, max_count, n_champs, rows, offset = _HEADER.unpack(fh.read(_HEADER.size))
        champs = np.fromfile(fh, dtype="<u8", count=n_champs).astype(np.int64)
        counts = np.fromfile(fh, dtype="<i4", count=x_max + 1)
    if counts.size != x_max + 1:
        raise ConfigurationError(f"{path}: truncated checkpoint")
    tracer = ChampionTracer(table, x_max)
    if tracer.primes.size < n:
        raise ConfigurationError(f"{path}: table too small for checkpoint")
    tracer.counts[:] = counts.astype(COUNT_DTYPE)
    tracer.n = int(n)
    tracer.max_count = int(max_count)
    tracer._cur[: champs.size] = champs
    tracer._n_cur = int(champs.size)
    return tracer, int(rows), int(offset)
