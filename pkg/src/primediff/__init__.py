"""Prime difference statistics, champion traces and the Hardy-Littlewood pair model."""

from .diffcount import (
    ChampionTraceRow,
    ChampionTracer,
    DiffHistogram,
    GapHistogram,
    GapTraceRow,
    champion_trace,
    count_differences,
    gap_histogram,
    gap_trace,
    pair_count,
    sum_identity_check,
)
from .errors import (
    CapabilityError,
    ConfigurationError,
    DomainError,
    OverflowGuardError,
    RangeError,
)
from .sieve import PrimeTable, build_table, nth_prime, prime_count

__version__ = "0.1.0"
