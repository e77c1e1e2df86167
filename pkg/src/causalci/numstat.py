"""Numerical building blocks: special functions, the Dirichlet-multinomial
(Polya) log-likelihood, and MAP estimation of a symmetric Dirichlet
concentration.

Everything here is a pure function of its arguments; probabilities are kept
in natural-log space throughout because the combinatorial factors overflow
linear space almost immediately.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special as _sp

ALPHA_MIN = 1e-4
ALPHA_MAX = 1e4

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class DegenerateCountsError(ValueError):
    """Raised when a count vector carries no information about alpha
    (fewer than two states, or zero total observations)."""


def ln_gamma(x: float) -> float:
    """Natural log of the gamma function for x > 0."""
    if not (isinstance(x, (int, float, np.floating, np.integer)) and math.isfinite(x)):
        raise ValueError(f"ln_gamma requires a finite positive real, got {x!r}")
    if x <= 0:
        raise ValueError(f"ln_gamma domain error: x={x} <= 0")
    return float(_sp.gammaln(x))


def digamma(x: float) -> float:
    """Digamma function psi(x) = d/dx ln Gamma(x) for x > 0."""
    if not math.isfinite(x):
        raise ValueError(f"digamma requires a finite positive real, got {x!r}")
    if x <= 0:
        raise ValueError(f"digamma domain error: x={x} <= 0")
    return float(_sp.digamma(x))


def chi2_sf(x: float, df: int) -> float:
    """Survival function P(X >= x) of a chi-squared variable with df degrees
    of freedom."""
    if df < 1 or int(df) != df:
        raise ValueError(f"chi2_sf requires an integer df >= 1, got {df!r}")
    if not math.isfinite(x) or x < 0:
        raise ValueError(f"chi2_sf domain error: x={x!r}")
    # Regularized upper incomplete gamma: Q(df/2, x/2).
    return float(_sp.gammaincc(df / 2.0, x / 2.0))


def _as_counts(counts: Sequence[int]) -> np.ndarray:
    arr = np.asarray(counts)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("counts must be a non-empty 1-D sequence")
    if not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(arr)
        if not np.allclose(arr, rounded):
            raise ValueError("counts must be integers")
        arr = rounded.astype(np.int64)
    if np.any(arr < 0):
        raise ValueError("counts must be non-negative")
    return arr.astype(np.int64)


def log_polya(counts: Sequence[int], alpha: float) -> float:
    """Log-probability of an observed count vector under a multinomial whose
    parameter was integrated against a symmetric Dirichlet(alpha) prior.

    ln p = ln N! - sum ln n_k! + ln G(K a) - ln G(K a + N)
           + sum [ln G(a + n_k) - ln G(a)]

    Includes the multinomial coefficient, so exp(log_polya) sums to one over
    all count vectors with a fixed total.
    """
    if not (math.isfinite(alpha) and alpha > 0):
        raise ValueError(f"log_polya domain error: alpha={alpha!r}")
    n = _as_counts(counts)
    k = n.size
    total = int(n.sum())
    gl = _sp.gammaln
    value = (
        gl(total + 1.0)
        - float(gl(n + 1.0).sum())
        + gl(k * alpha)
        - gl(k * alpha + total)
        + float(gl(n + alpha).sum())
        - k * gl(alpha)
    )
    return float(value)


def _log_polya_terms(n: np.ndarray):
    """Precompute the alpha-independent parts of log_polya for repeated
    evaluation during optimization."""
    k = n.size
    total = int(n.sum())
    const = float(_sp.gammaln(total + 1.0) - _sp.gammaln(n + 1.0).sum())

    def loglik(alpha: float) -> float:
        gl = _sp.gammaln
        return (
            const
            + gl(k * alpha)
            - gl(k * alpha + total)
            + float(gl(n + alpha).sum())
            - k * gl(alpha)
        )

    return loglik


@dataclass(frozen=True)
class AlphaEstimate:
    """Result of the symmetric-concentration MAP fit."""

    alpha: float
    converged: bool
    iterations: int
    clamped: bool


def _fixed_point_alpha(n: np.ndarray, alpha_min: float, alpha_max: float,
                       tol: float, max_iterations: int):
    """Fixed-point update for the concentration, iterated from alpha = 1.

    Update used:  a' = a * (sum_k psi(a + n_k) - K psi(a))
                        / (K psi(a K + N) - psi(K a))
    The denominator form is kept verbatim; the caller cross-checks the result
    against a direct likelihood search, which wins on disagreement.
    """
    k = n.size
    total = int(n.sum())
    alpha = 1.0
    psi = _sp.digamma
    for it in range(1, max_iterations + 1):
        num = float(psi(alpha + n).sum()) - k * psi(alpha)
        den = k * psi(alpha * k + total) - psi(k * alpha)
        if not math.isfinite(num) or not math.isfinite(den) or den == 0.0:
            return alpha, False, it
        new = alpha * num / den
        if not math.isfinite(new) or new <= 0.0:
            return alpha, False, it
        new = min(max(new, alpha_min), alpha_max)
        if abs(new - alpha) < tol:
            return new, True, it
        alpha = new
    return alpha, False, max_iterations


def _golden_section_alpha(loglik, alpha_min: float, alpha_max: float,
                          grid_size: int = 64, tol: float = 1e-8) -> float:
    """Maximize the Polya log-likelihood over log-spaced alpha.

    A coarse grid brackets the maximum (the profile can be monotone, in which
    case the bracket collapses onto a bound), then golden-section search over
    ln(alpha) refines it.
    """
    lo, hi = math.log(alpha_min), math.log(alpha_max)
    grid = np.linspace(lo, hi, grid_size)
    values = [loglik(math.exp(g)) for g in grid]
    best = int(np.argmax(values))
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, grid_size - 1)]

    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = loglik(math.exp(c))
    fd = loglik(math.exp(d))
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = loglik(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = loglik(math.exp(d))
    return math.exp(0.5 * (a + b))


@functools.lru_cache(maxsize=200_000)
def _estimate_alpha_cached(counts: tuple, alpha_min: float, alpha_max: float,
                           tol: float, max_iterations: int) -> AlphaEstimate:
    n = np.asarray(counts, dtype=np.int64)
    loglik = _log_polya_terms(n)

    fp_alpha, fp_converged, iterations = _fixed_point_alpha(
        n, alpha_min, alpha_max, tol, max_iterations)
    gs_alpha = _golden_section_alpha(loglik, alpha_min, alpha_max)

    if abs(fp_alpha - gs_alpha) > 1e-4 * gs_alpha:
        alpha = gs_alpha
        converged = True
    else:
        alpha = fp_alpha
        converged = fp_converged

    clamped = False
    # Snap to a bound when the search ran into it.
    if alpha <= alpha_min * (1.0 + 1e-6):
        alpha, clamped = alpha_min, True
    elif alpha >= alpha_max * (1.0 - 1e-6):
        alpha, clamped = alpha_max, True
    return AlphaEstimate(alpha=alpha, converged=converged,
                         iterations=iterations, clamped=clamped)


def estimate_alpha_map(counts: Sequence[int], *,
                       alpha_min: float = ALPHA_MIN,
                       alpha_max: float = ALPHA_MAX,
                       tol: float = 1e-8,
                       max_iterations: int = 1000) -> AlphaEstimate:
    """MAP estimate of the symmetric Dirichlet concentration given counts.

    Under a prior uniform on [alpha_min, alpha_max] the MAP coincides with
    the maximizer of the Polya likelihood. The fixed-point iteration is run
    first and always verified against a golden-section search on ln(alpha);
    the search result is authoritative when they disagree.

    Raises DegenerateCountsError when K < 2 or the total count is zero;
    callers fall back to their configured default concentration.
    """
    n = _as_counts(counts)
    if n.size < 2 or int(n.sum()) == 0:
        raise DegenerateCountsError(
            f"cannot fit alpha for K={n.size}, N={int(n.sum())}")
    return _estimate_alpha_cached(tuple(int(v) for v in n),
                                  float(alpha_min), float(alpha_max),
                                  float(tol), int(max_iterations))


def dirichlet_sample(alphas: Sequence[float],
                     seed: int | np.random.Generator) -> np.ndarray:
    """One draw from Dirichlet(alphas), deterministic given the seed."""
    arr = np.asarray(alphas, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("alphas must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError("alphas must all be positive and finite")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return rng.dirichlet(arr)
