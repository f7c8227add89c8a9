"""Hardy-Littlewood pair-count model and its comparison with exact counts.

The model count is G~(x, d) = S(d) I(x, d) with

    I(x, d) = integral_2^{x-d} dt / (log t log(t + d)),

the error term is E = G - G~ and H(x, d) = I(x, d) (log x)^2 / (x - d).

Single integrals use adaptive Gauss-Kronrod. Profiles over every d share one
unit-step grid of 1/log t values: the trapezoid sums for all d at once are an
autocorrelation (computed by FFT), corrected by Euler-Maclaurin end terms,
while the stretch [2, T0] nearest the singularity of 1/log t at t = 1 is done
by composite Gauss-Legendre for all d together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np

from .diffcount import DiffHistogram, count_differences, pair_count
from .errors import DomainError
from .quadrature import adaptive_gk
from .sieve import PrimeTable
from .singular import _c2_pair, singular_ratios, singular_series

DEFAULT_REL_TOL = 1e-10

# Bulk-grid layout: Gauss-Legendre on [2, T0], unit trapezoid with
# Euler-Maclaurin corrections on [T0, x - d].
_T0 = 34
_HEAD_PANELS = ((2, 3), (3, 4), (4, 6), (6, 10), (10, 18), (18, 34))
_HEAD_ORDER = 20
_EM_TERMS = 4
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30)


@dataclass(frozen=True)
class ModelRow:
    x: int
    d: int
    g_exact: int
    g_model: float
    error: float
    h_factor: float
    quad_tol: float


@dataclass(frozen=True)
class AggregateStats:
    x: int
    mu: float
    nu: float
    pi_x: int
    nu_normalized: float
    numerator: float
    denominator: int


def _check_range(x: float, d: float) -> None:
    if not x - d > 2:
        raise DomainError(f"I(x, d) needs x - d > 2, got x={x}, d={d}")


def _check_tol(rel_tol: float) -> None:
    if not 1e-14 <= rel_tol <= 1e-4:
        raise DomainError(f"rel_tol must lie in [1e-14, 1e-4], got {rel_tol}")


def integral_I(x: float, d: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """I(x, d) by adaptive quadrature to relative tolerance ``rel_tol``."""
    _check_range(x, d)
    _check_tol(rel_tol)

    def integrand(t):
        return 1.0 / (np.log(t) * np.log(t + d))

    return adaptive_gk(integrand, 2.0, float(x - d), rel_tol=rel_tol).value


def h_factor(x: float, d: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """H(x, d) = I(x, d) (log x)^2 / (x - d)."""
    return integral_I(x, d, rel_tol) * math.log(x) ** 2 / (x - d)


def h_expansion(x: float) -> float:
    """Leading terms 1 + 2/log x + 6/(log x)^2 of H(x, d) for d << x."""
    L = math.log(x)
    return 1.0 + 2.0 / L + 6.0 / L**2


def g_model(x: float, d: int, c2=None, table: PrimeTable | None = None,
            rel_tol: float = DEFAULT_REL_TOL) -> float:
    """G~(x, d) = S(d) I(x, d); exactly 0 for odd d."""
    if d < 1:
        raise DomainError("difference must be positive")
    s = singular_series(d, c2, table)
    if s.value == 0.0:
        return 0.0
    return s.value * integral_I(x, d, rel_tol)


def error_term(x: int, d: int, table: PrimeTable, c2=None,
               rel_tol: float = DEFAULT_REL_TOL) -> ModelRow:
    """Exact count, model count, E and H for one (x, d)."""
    if d > x:
        raise DomainError("d must not exceed x")
    g = pair_count(table, x, d)
    model = g_model(x, d, c2, table, rel_tol) if x - d > 2 else 0.0
    h = h_factor(x, d, rel_tol) if x - d > 2 else float("nan")
    return ModelRow(int(x), int(d), g, model, g - model, h, rel_tol)


# ---------------------------------------------------------------------------
# shared-grid evaluation of I(x, d) for every d
# ---------------------------------------------------------------------------


def _inv_log_derivatives(s: np.ndarray, order: int) -> list[np.ndarray]:
    """[u, u', ..., u^(order)] at s for u(s) = 1/log s.

    u^(k)(s) = s^-k sum_j c[k][j] (log s)^-j, with the coefficients obtained
    from d/ds s^-k L^-j = -k s^-(k+1) L^-j - j s^-(k+1) L^-(j+1).
    """
    coeffs = [{1: 1.0}]
    for k in range(order):
        nxt: dict[int, float] = {}
        for j, c in coeffs[-1].items():
            nxt[j] = nxt.get(j, 0.0) - k * c
            nxt[j + 1] = nxt.get(j + 1, 0.0) - j * c
        coeffs.append(nxt)
    inv_L = 1.0 / np.log(s)
    inv_s = 1.0 / s
    out = []
    for k, cs in enumerate(coeffs):
        acc = np.zeros_like(inv_L)
        for j, c in cs.items():
            if c:
                acc = acc + c * inv_L**j
        out.append(acc * inv_s**k)
    return out


def _pair_derivative(ua: list[np.ndarray], ub: list[np.ndarray], n: int) -> np.ndarray:
    """n-th derivative of u(t) u(t + d) by Leibniz, given both derivative lists."""
    return sum(comb(n, r) * ua[r] * ub[n - r] for r in range(n + 1))


def _head_integrals(ds: np.ndarray, chunk: int = 8192) -> np.ndarray:
    nodes, weights = np.polynomial.legendre.leggauss(_HEAD_ORDER)
    ts, ws = [], []
    for a, b in _HEAD_PANELS:
        ts.append(0.5 * (a + b) + 0.5 * (b - a) * nodes)
        ws.append(0.5 * (b - a) * weights)
    t = np.concatenate(ts)
    w = np.concatenate(ws) / np.log(t)
    out = np.empty(ds.size)
    for lo in range(0, ds.size, chunk):
        block = ds[lo : lo + chunk].astype(np.float64)
        out[lo : lo + chunk] = (1.0 / np.log(t[None, :] + block[:, None])) @ w
    return out


def bulk_integral_I(x: int, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """I(x, d) for every integer d in 0..x; NaN where x - d <= 2.

    Differences too close to x for the grid (x - d < T0 + 1) fall back to
    :func:`integral_I`.
    """
    x = int(x)
    out = np.full(x + 1, np.nan)
    if x <= 2:
        return out
    d_grid_max = x - _T0 - 1
    if d_grid_max >= 0:
        n_steps = x - _T0
        g = 1.0 / np.log(np.arange(_T0, x + 1, dtype=np.float64))
        size = 1 << (2 * n_steps + 2).bit_length()
        spec = np.fft.rfft(g, size)
        corr = np.fft.irfft(spec * np.conj(spec), size)[: d_grid_max + 1]

        ds = np.arange(0, d_grid_max + 1)
        last = n_steps - ds
        trap = corr - 0.5 * (g[0] * g[ds] + g[last] * g[n_steps])

        order = 2 * _EM_TERMS - 1
        df = ds.astype(np.float64)
        upper = (x - df).astype(np.float64)
        u_T0 = _inv_log_derivatives(np.array([float(_T0)]), order)
        u_T0d = _inv_log_derivatives(_T0 + df, order)
        u_b = _inv_log_derivatives(upper, order)
        u_x = _inv_log_derivatives(np.array([float(x)]), order)
        correction = np.zeros_like(df)
        for j in range(1, _EM_TERMS + 1):
            n = 2 * j - 1
            fb = _pair_derivative(u_b, u_x, n)
            fa = _pair_derivative(u_T0, u_T0d, n)
            correction += _BERNOULLI[j - 1] / math.factorial(2 * j) * (fb - fa)
        out[: d_grid_max + 1] = trap - correction + _head_integrals(ds)
    for d in range(max(0, d_grid_max + 1), x - 2):
        out[d] = integral_I(x, d, rel_tol)
    return out


def model_counts(x: int, c2=None, rel_tol: float = DEFAULT_REL_TOL) -> tuple[np.ndarray, np.ndarray]:
    """(I(x, .), G~(x, .)) for d in 0..x; G~ is 0 where undefined or d odd."""
    c2_value, _ = _c2_pair(c2)
    integrals = bulk_integral_I(x, rel_tol)
    model = singular_ratios(int(x)) * c2_value * np.nan_to_num(integrals, nan=0.0)
    return integrals, model


def model_profile(x: int, table: PrimeTable, c2=None, rel_tol: float = DEFAULT_REL_TOL,
                  hist: DiffHistogram | None = None, even_only: bool = True) -> list[ModelRow]:
    """One ModelRow per d in [1, x - 3] (even d only by default)."""
    x = int(x)
    hist = hist or count_differences(table, x)
    integrals, model = model_counts(x, c2, rel_tol)
    L2 = math.log(x) ** 2
    rows = []
    for d in range(2 if even_only else 1, x - 2, 2 if even_only else 1):
        g = hist[d]
        rows.append(ModelRow(x, d, g, float(model[d]), g - float(model[d]),
                             float(integrals[d]) * L2 / (x - d), rel_tol))
    return rows


def _aggregate(x: int, table: PrimeTable, c2, rel_tol: float,
               hist: DiffHistogram | None) -> AggregateStats:
    x = int(x)
    if x < 1000:
        raise DomainError("aggregate statistics need x >= 1000")
    _check_tol(rel_tol)
    hist = hist or count_differences(table, x)
    _, model = model_counts(x, c2, rel_tol)
    counts = hist.counts.astype(np.float64)
    even = slice(2, x - 2, 2)  # even d in [2, x - 3]
    dev = model[even] - counts[even]
    numerator = math.fsum(dev.tolist())
    odd_counts = counts[1::2]
    nu = math.fsum((dev * dev).tolist()) + math.fsum((odd_counts * odd_counts).tolist())
    n = hist.n
    denominator = n * (n - 1) // 2
    return AggregateStats(x, numerator / denominator, nu, n, nu / n**2, numerator, denominator)


def mu_statistic(x: int, table: PrimeTable, c2=None, rel_tol: float = DEFAULT_REL_TOL,
                 hist: DiffHistogram | None = None) -> AggregateStats:
    """Relative error of sum_d G~ against the exact n(n-1)/2 pairs."""
    return _aggregate(x, table, c2, rel_tol, hist)


def nu_statistic(x: int, table: PrimeTable, c2=None, rel_tol: float = DEFAULT_REL_TOL,
                 hist: DiffHistogram | None = None) -> AggregateStats:
    """Sum of squared deviations G~ - G; odd d enter as G^2 since G~ = 0 there."""
    return _aggregate(x, table, c2, rel_tol, hist)
