"""Descent-ascent solver for minmax median-of-means linear estimators.

The estimator minimises over ``t`` the supremum over ``t2`` of
``MOM_K(l_t - l_t2)``. Each iteration

1. draws (or reuses) a partition of the data into ``k`` blocks,
2. finds the block realising the median of the block incremental risks
   ``P_B(l_t - l_t2)`` (or of the plain risks ``P_B l_t``),
3. sets ``eta = ||X_B^T X_B||_op / (4 * denom)`` on that block,
4. moves both players with the block gradient:
   ``t -= grad_B(t) / eta`` and ``t2 -= grad_B(t2) / eta``.

The loop stops once ``||t - t2|| < eps``. With ``k = 1`` the single block is
the whole sample and the ``t`` iterates are plain gradient descent on the
empirical risk, which is how :func:`erm_fit` is implemented.
"""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.linalg.blas import dsyrk

from ._seeding import make_rng
from .exceptions import DomainError, SolverError
from .losses import LossSpec, check_labels
from .mom import partition, select_median


class BlockStrategy(str, Enum):
    FIXED = "fixed"
    RESAMPLE = "resample"


class StepRule(str, Enum):
    MEDIAN_BLOCK = "median_block"
    FULL_DATA = "full_data"
    CONSTANT = "constant"


class StepDenominator(str, Enum):
    BLOCK = "block"
    TOTAL = "total"


class MedianCriterion(str, Enum):
    INCREMENTAL = "incremental"
    PLAIN = "plain"


@dataclass(frozen=True)
class SolverConfig:
    """Settings for :func:`mom_fit` and :func:`erm_fit`.

    ``step_size`` is the multiplier ``1/eta`` applied to the gradient and is
    only read when ``step_rule="constant"``. ``op_norm_method`` selects how
    the per-iteration operator norm is computed (``"exact"`` symmetric
    eigensolver or ``"power"`` iteration). ``record_timing`` stores the
    wall-clock duration of every iteration in ``FitResult.iteration_times``.
    With ``stop_early=False`` the stopping test is skipped and exactly
    ``max_iter`` iterations are run. ``curvature`` replaces the factor
    ``1/4`` in ``eta`` (``eta = curvature * ||X_B^T X_B||_op / denom``); the
    default ``1/4`` bounds the second derivative of the logistic loss, while
    the Huber loss needs ``1``.
    """

    k: int = 1
    block_strategy: BlockStrategy = BlockStrategy.RESAMPLE
    eps: float = 1e-4
    max_iter: int = 10_000
    step_rule: StepRule = StepRule.MEDIAN_BLOCK
    step_size: Optional[float] = None
    step_denominator: StepDenominator = StepDenominator.BLOCK
    median_criterion: MedianCriterion = MedianCriterion.INCREMENTAL
    seed: int = 0
    record_trace: bool = False
    op_norm_method: str = "exact"
    record_timing: bool = False
    stop_early: bool = True
    curvature: float = 0.25

    def __post_init__(self):
        for name, enum in (
            ("block_strategy", BlockStrategy),
            ("step_rule", StepRule),
            ("step_denominator", StepDenominator),
            ("median_criterion", MedianCriterion),
        ):
            try:
                object.__setattr__(self, name, enum(getattr(self, name)))
            except ValueError:
                raise DomainError(f"invalid {name}: {getattr(self, name)!r}") from None
        if int(self.k) < 1:
            raise DomainError(f"k must be >= 1, got {self.k}")
        if not self.eps > 0:
            raise DomainError(f"eps must be > 0, got {self.eps}")
        if int(self.max_iter) < 1:
            raise DomainError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.step_rule is StepRule.CONSTANT and not (self.step_size and self.step_size > 0):
            raise DomainError("constant step rule requires step_size > 0")
        if not self.curvature > 0:
            raise DomainError(f"curvature must be > 0, got {self.curvature}")
        if self.op_norm_method not in ("exact", "power"):
            raise DomainError(f"invalid op_norm_method: {self.op_norm_method!r}")

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True, eq=False)
class FitResult:
    t_hat: np.ndarray
    t_tilde: np.ndarray
    iterations: int
    converged: bool
    median_block_history: List[Tuple[int, np.ndarray]] = field(default_factory=list)
    objective_history: Optional[List[float]] = None
    t_history: Optional[np.ndarray] = None
    n: Optional[int] = None
    iteration_times: Optional[np.ndarray] = None


def operator_norm(m, seed: int = 0, tol: float = 1e-8, max_iter: int = 1000,
                  method: str = "power") -> float:
    """Largest eigenvalue of ``m.T @ m`` (the squared spectral norm of ``m``).

    ``method="power"`` runs power iteration on ``m.T @ m`` from a seeded
    Gaussian start vector until the Rayleigh quotient changes by less than
    ``tol`` relatively. ``method="exact"`` calls LAPACK on the smaller Gram
    matrix.

    >>> operator_norm(np.diag([3.0, 4.0]))
    16.0
    """
    m = np.asarray(m, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    if m.size == 0 or not np.all(np.isfinite(m)):
        raise DomainError("operator_norm needs a finite nonempty matrix")
    if method == "exact":
        return _exact_op_norm(m)
    if method != "power":
        raise DomainError(f"unknown method {method!r}")
    if not np.any(m):
        return 0.0
    v = make_rng(seed).standard_normal(m.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = m @ v
        new = float(w @ w)
        z = m.T @ w
        nz = np.linalg.norm(z)
        if nz == 0.0:
            break
        v = z / nz
        if abs(new - lam) <= tol * new:
            lam = new
            break
        lam = new
    # one extra Rayleigh evaluation at the final vector
    w = m @ v
    return max(lam, float(w @ w))


def _exact_op_norm(m: np.ndarray) -> float:
    rows, cols = m.shape
    if cols == 1:
        return float(m[:, 0] @ m[:, 0])
    # upper triangle of the smaller Gram matrix; m.T is a Fortran view, no copy
    gram = dsyrk(1.0, m.T, trans=0 if cols <= rows else 1)
    size = gram.shape[0]
    top = scipy.linalg.eigh(gram, lower=False, eigvals_only=True, driver="evr",
                            subset_by_index=[size - 1, size - 1], check_finite=False)
    return max(float(top[0]), 0.0)


def block_gradient(data, block, loss: LossSpec, t) -> np.ndarray:
    """Average of ``l'(<x_i, t>, y_i) x_i`` over ``i`` in ``block``."""
    block = np.asarray(block, dtype=np.intp)
    if block.size == 0:
        raise DomainError("block_gradient needs a nonempty block")
    if block.min() < 0 or block.max() >= data.n:
        raise DomainError("block index out of range")
    t = np.asarray(t, dtype=float)
    if t.shape != (data.d,):
        raise DomainError(f"parameter must have shape ({data.d},), got {t.shape}")
    xb = data.x[block]
    g = loss.subgrad(xb @ t, data.y[block])
    return xb.T @ g / block.size


def empirical_risk(data, loss: LossSpec, t) -> float:
    return float(np.mean(loss.value(data.x @ np.asarray(t, dtype=float), data.y)))


def _norm(v) -> float:
    return math.sqrt(float(v @ v))


def _initial_points(rng, d):
    t = rng.standard_normal(d)
    t2 = rng.standard_normal(d)
    while np.array_equal(t, t2):
        t2 = rng.standard_normal(d)
    return t, t2


def _run(data, loss: LossSpec, cfg: SolverConfig, stop_on_gradient: bool) -> FitResult:
    x, y = data.x, data.y
    n, d = x.shape
    k = int(cfg.k)
    if d < 1:
        raise DomainError("design must have at least one column")
    if k > n:
        raise DomainError(f"k={k} exceeds the number of observations n={n}")
    check_labels(loss, y)
    if not np.all(np.isfinite(x)):
        raise DomainError("design contains non-finite values")

    rng = make_rng(cfg.seed)
    t, t2 = _initial_points(rng, d)
    block_rng = make_rng(cfg.seed, 1)
    m = n // k
    ids = np.arange(k * m, dtype=np.intp) // m
    resample = cfg.block_strategy is BlockStrategy.RESAMPLE and k > 1
    if resample:
        labels = np.empty(n, dtype=np.intp)
        perm = None
    else:
        fixed = partition(n, k, seed=int(block_rng.integers(2**63)), strategy="shuffled")
        labels = fixed.labels
        fixed_blocks = fixed.blocks if k > 1 else None

    incremental = cfg.median_criterion is MedianCriterion.INCREMENTAL
    denom = m if cfg.step_denominator is StepDenominator.BLOCK else n
    eta_cache = {}
    if cfg.step_rule is StepRule.FULL_DATA:
        full_eta = cfg.curvature * operator_norm(x, seed=cfg.seed, method=cfg.op_norm_method) / n
    trace = cfg.record_trace
    history, objective, t_hist = [], ([] if trace else None), ([t.copy()] if trace else None)
    converged = False
    it = 0
    need_values = k > 1 or trace
    timing = [] if cfg.record_timing else None
    clock = time.perf_counter
    # overflow in an update is caught by the finiteness check below
    with np.errstate(over="ignore", invalid="ignore"):
        while it < cfg.max_iter:
            if timing is not None:
                started = clock()
            if cfg.stop_early and not stop_on_gradient and _norm(t - t2) < cfg.eps:
                converged = True
                break
            if resample:
                perm = block_rng.permutation(n)
                labels.fill(-1)
                labels[perm[: k * m]] = ids
            full_block = k == 1 and m == n
            u = x @ t
            u2 = x @ t2 if (full_block or (incremental and need_values)) else None
            if need_values:
                vals = loss.value(u, y, check=False)
                if incremental:
                    vals = vals - loss.value(u2, y, check=False)
                sums = np.bincount(labels + 1, weights=vals, minlength=k + 1)[1:]
                med = select_median(sums / m)
                kstar = med.median_block
            else:
                kstar = 0

            if full_block:
                block, xb, ub, yb = None, x, u, y
                ub2 = u2
            else:
                block = fixed_blocks[kstar] if not resample else perm[kstar * m:(kstar + 1) * m]
                xb, ub, yb = x[block], u[block], y[block]
                ub2 = u2[block] if u2 is not None else xb @ t2

            if cfg.step_rule is StepRule.CONSTANT:
                step = float(cfg.step_size)
            else:
                if cfg.step_rule is StepRule.FULL_DATA:
                    eta = full_eta
                else:
                    key = kstar if not resample else None
                    eta = eta_cache.get(key) if key is not None else None
                    if eta is None:
                        eta = cfg.curvature * operator_norm(xb, seed=cfg.seed, method=cfg.op_norm_method) / denom
                        if key is not None:
                            eta_cache[key] = eta
                if not eta > 0:
                    raise SolverError("step size undefined: median block design is zero", it)
                step = 1.0 / eta

            g = xb.T @ loss.subgrad(ub, yb, check=False) / m
            if cfg.stop_early and stop_on_gradient and _norm(g) < cfg.eps:
                converged = True
                break
            g2 = xb.T @ loss.subgrad(ub2, yb, check=False) / m
            if trace:
                members = np.arange(n) if block is None else np.sort(block)
                history.append((it, members))
                objective.append(med.value)
            t = t - step * g
            t2 = t2 - step * g2
            it += 1
            if not (np.isfinite(t).all() and np.isfinite(t2).all()):
                raise SolverError(f"non-finite iterate at iteration {it}", it)
            if trace:
                t_hist.append(t.copy())
            if timing is not None:
                timing.append(clock() - started)

    return FitResult(
        t_hat=t,
        t_tilde=t2,
        iterations=it,
        converged=converged,
        median_block_history=history,
        objective_history=objective,
        t_history=None if t_hist is None else np.array(t_hist),
        n=n,
        iteration_times=None if timing is None else np.array(timing),
    )


def mom_fit(data, loss: LossSpec, cfg: SolverConfig) -> FitResult:
    """Minmax MOM estimate by block descent-ascent.

    Stops when the two players are closer than ``cfg.eps`` or after
    ``cfg.max_iter`` updates. ``t_hat`` is the minimising player.
    """
    return _run(data, loss, cfg, stop_on_gradient=False)


def erm_fit(data, loss: LossSpec, cfg: SolverConfig) -> FitResult:
    """Empirical risk minimiser by full-batch (sub)gradient descent.

    This is the ``k = 1`` path of :func:`mom_fit`; it stops when the gradient
    norm drops below ``cfg.eps``. With the default step rule the step is
    ``4 n / ||X^T X||_op``.
    """
    return _run(data, loss, cfg.replace(k=1), stop_on_gradient=True)
