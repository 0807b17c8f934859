"""Localized Rademacher complexity of linear classes.

For ``F = {<t, .>}`` and a covariance ``Sigma`` the supremum

    sup_{t : t' Sigma t <= r^2}  sum_i s_i <t, X_i>

equals ``r * || Sigma^{+1/2} sum_i s_i X_i ||`` whenever every ``X_i`` lies in
the range of ``Sigma`` (``Sigma^{+1/2}`` is the pseudo-inverse square root),
so its expectation over Rademacher signs ``s`` is ``r * c`` for a scalar ``c``
estimated by Monte Carlo. The fixed-point radius, the smallest ``r`` with
``r * c <= r^2 |J| gamma``, is then ``c / (|J| gamma)`` in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._seeding import make_rng
from .exceptions import DomainError

RANK_TOL = 1e-10
PSD_TOL = 1e-8
RANGE_TOL = 1e-8


@dataclass(frozen=True)
class ComplexityEstimate:
    r_fixed: float
    gamma: float
    n_monte_carlo: int
    std_error: float
    lemma1_bound: float
    subset_size: int = 0


def _spectrum(sigma_cov):
    s = np.asarray(sigma_cov, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DomainError("covariance must be a square matrix")
    if not np.allclose(s, s.T, rtol=1e-10, atol=1e-12):
        raise DomainError("covariance must be symmetric")
    w, q = np.linalg.eigh(0.5 * (s + s.T))
    top = max(float(w.max(initial=0.0)), 0.0)
    if w.size and w.min() < -PSD_TOL * max(top, np.finfo(float).tiny):
        raise DomainError("covariance is not positive semi-definite")
    keep = w > RANK_TOL * top if top > 0 else np.zeros_like(w, dtype=bool)
    return w, q, keep


def covariance_rank(sigma_cov) -> int:
    """Number of eigenvalues above ``1e-10`` times the largest."""
    _, _, keep = _spectrum(sigma_cov)
    return int(keep.sum())


def _whitened(x_rows, sigma_cov):
    x = np.asarray(x_rows, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    w, q, keep = _spectrum(sigma_cov)
    if x.shape[1] != w.size:
        raise DomainError("rows and covariance dimensions differ")
    coords = x @ q
    outside = coords[:, ~keep]
    scale = max(float(np.linalg.norm(x, axis=1).max(initial=0.0)), 1.0)
    if outside.size and np.abs(outside).max() > RANGE_TOL * scale:
        raise DomainError("design rows leave the range of the covariance; the supremum is infinite")
    return coords[:, keep] / np.sqrt(w[keep])


def _sup_draws(z, n_mc, seed):
    """Per-draw values of ``|| sum_i s_i z_i ||`` for Rademacher ``s``."""
    rng = make_rng(seed)
    out = np.empty(n_mc)
    chunk = max(1, min(n_mc, 2_000_000 // max(z.shape[0], 1)))
    for start in range(0, n_mc, chunk):
        stop = min(n_mc, start + chunk)
        signs = rng.integers(0, 2, size=(stop - start, z.shape[0])) * 2.0 - 1.0
        out[start:stop] = np.linalg.norm(signs @ z, axis=1)
    return out


def rademacher_sup_linear(x_rows, sigma_cov, r: float, n_mc: int = 2000, seed: int = 0) -> float:
    """Monte Carlo mean of ``sup_{t' Sigma t <= r^2} sum_i s_i <t, X_i>``."""
    if r < 0:
        raise DomainError("radius must be nonnegative")
    if n_mc < 1:
        raise DomainError("n_mc must be >= 1")
    z = _whitened(x_rows, sigma_cov)
    if r == 0 or z.shape[1] == 0:
        return 0.0
    return float(r * _sup_draws(z, n_mc, seed).mean())


def lemma1_bound(sigma_cov, gamma: float, n: int) -> float:
    """``sqrt(rank(Sigma) / (2 gamma^2 n))``.

    >>> round(lemma1_bound(np.eye(10), 0.1, 1000), 5)
    0.70711
    """
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    if n < 1:
        raise DomainError("n must be >= 1")
    return math.sqrt(covariance_rank(sigma_cov) / (2.0 * gamma * gamma * n))


def fixed_point_linear(x_rows, sigma_cov, gamma: float, n_mc: int = 2000, seed: int = 0,
                       subset_size: Optional[int] = None) -> ComplexityEstimate:
    """Fixed-point radius ``c / (|J| gamma)`` of the localized complexity.

    ``J`` is the first ``subset_size`` rows (all rows by default). The
    standard error is that of the Monte Carlo mean of ``c`` carried through
    the same scaling.
    """
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    if n_mc < 2:
        raise DomainError("n_mc must be >= 2 to report a standard error")
    x = np.asarray(x_rows, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    n = x.shape[0]
    size = n if subset_size is None else int(subset_size)
    if not 1 <= size <= n:
        raise DomainError(f"subset_size must lie in [1, {n}]")
    z = _whitened(x[:size], sigma_cov)
    bound = lemma1_bound(sigma_cov, gamma, n)
    if z.shape[1] == 0:
        return ComplexityEstimate(0.0, gamma, n_mc, 0.0, bound, size)
    draws = _sup_draws(z, n_mc, seed)
    scale = 1.0 / (size * gamma)
    return ComplexityEstimate(
        r_fixed=float(draws.mean() * scale),
        gamma=gamma,
        n_monte_carlo=n_mc,
        std_error=float(draws.std(ddof=1) / math.sqrt(n_mc) * scale),
        lemma1_bound=bound,
        subset_size=size,
    )


def default_gamma(a: float, lipschitz: float = 1.0) -> float:
    """``1 / (575 A L)``, the scale paired with Bernstein constant ``A``."""
    if not (a > 0 and lipschitz > 0):
        raise DomainError("A and L must be positive")
    return 1.0 / (575.0 * a * lipschitz)
