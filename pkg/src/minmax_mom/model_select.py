"""Choosing the number of blocks ``K``.

Two procedures are provided:

* robust cross-validation: every candidate ``K`` is fitted on the training
  folds and scored by a median-of-means of held-out losses, so a few
  outliers in a validation fold cannot dominate the score;
* a Lepski-type rule over finite sets: with ``T_K(g) = max_{g'} MOM_K(l_g - l_g')``
  over a candidate list and caller supplied thresholds, ``R_K`` collects the
  candidates with ``T_K(g) <= threshold[K]`` and the selected ``K`` is the
  smallest grid value whose tail intersection ``R_K & R_K' & ...`` is nonempty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ._seeding import make_rng
from .exceptions import DomainError, SelectionError
from .losses import LossSpec
from .mom import BlockPartition, median_rank, mom, mom_increment, partition
from .solver import SolverConfig, mom_fit

_CV_STREAM = 0xC5


def geometric_grid(n: int) -> List[int]:
    """``[1, 2, 4, ...]`` up to ``n``.

    >>> geometric_grid(10)
    [1, 2, 4, 8]
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    return [2**j for j in range(int(math.log2(n)) + 1)]


def _clean_grid(k_grid) -> List[int]:
    grid = sorted({int(k) for k in k_grid})
    if not grid:
        raise DomainError("k_grid must not be empty")
    if grid[0] < 1:
        raise DomainError(f"block counts must be >= 1, got {grid[0]}")
    return grid


def cv_folds(n: int, v_folds: int, seed: int) -> List[np.ndarray]:
    """Seeded split of ``range(n)`` into ``v_folds`` nearly equal folds."""
    if v_folds < 2:
        raise DomainError(f"v_folds must be >= 2, got {v_folds}")
    if v_folds > n:
        raise DomainError(f"v_folds={v_folds} exceeds n={n}")
    perm = make_rng(seed, _CV_STREAM).permutation(n)
    return [np.sort(f) for f in np.array_split(perm, v_folds)]


def robust_cv_scores(data, loss: LossSpec, k_grid, v_folds: int = 5,
                     cfg: Optional[SolverConfig] = None,
                     val_blocks: Optional[int] = None) -> Dict[int, float]:
    """Median over folds of the held-out MOM loss for every ``K``.

    The validation MOM uses ``max(1, floor(K |val| / |train|))`` contiguous
    blocks of the (already shuffled) validation fold, or ``val_blocks``
    blocks for every ``K`` when given. A common block count compares all
    candidates with the same estimator; the scaled count favours large ``K``
    when the losses are skewed, because the lower median of many small blocks
    sits lower.
    """
    cfg = cfg or SolverConfig()
    grid = _clean_grid(k_grid)
    folds = cv_folds(data.n, v_folds, cfg.seed)
    all_idx = np.arange(data.n)
    scores = {}
    for k in grid:
        fold_scores = []
        for val in folds:
            train = np.setdiff1d(all_idx, val, assume_unique=True)
            if k > train.size:
                raise DomainError(f"K={k} exceeds the training fold size {train.size}")
            k_val = max(1, (k * val.size) // train.size) if val_blocks is None else int(val_blocks)
            if val.size < k_val:
                raise DomainError(f"validation fold of size {val.size} is smaller than K_val={k_val}")
            fit = mom_fit(data.subset(train), loss, cfg.replace(k=k))
            held = data.subset(val)
            losses = loss.value(held.x @ fit.t_hat, held.y)
            fold_scores.append(mom(losses, partition(val.size, k_val)).value)
        scores[k] = float(np.median(fold_scores))
    return scores


def robust_cv_select_k(data, loss: LossSpec, k_grid, v_folds: int = 5,
                       cfg: Optional[SolverConfig] = None,
                       val_blocks: Optional[int] = None) -> int:
    """``K`` with the smallest robust CV score (smallest ``K`` on ties)."""
    scores = robust_cv_scores(data, loss, k_grid, v_folds, cfg, val_blocks)
    best = min(scores.values())
    return min(k for k, s in scores.items() if s == best)


# ---------------------------------------------------------------- Lepski

@dataclass(frozen=True)
class LepskiConfig:
    k_grid: Sequence[int]
    thresholds: Dict[int, float]
    candidates: Sequence = field(default_factory=list)
    seed: int = 0
    strategy: str = "shuffled"

    def __post_init__(self):
        grid = _clean_grid(self.k_grid)
        object.__setattr__(self, "k_grid", tuple(grid))
        missing = [k for k in grid if k not in self.thresholds]
        if missing:
            raise DomainError(f"no threshold given for K in {missing}")
        if any(math.isnan(float(self.thresholds[k])) for k in grid):
            raise DomainError("thresholds must not be NaN")
        cands = np.atleast_2d(np.asarray(self.candidates, dtype=float))
        if cands.size == 0:
            raise DomainError("candidate list must not be empty")
        object.__setattr__(self, "candidates", cands)


def lepski_tk(g, data, loss: LossSpec, p: BlockPartition, candidates) -> float:
    """``max_{g'}`` of ``MOM_K(l_g - l_g')`` over ``candidates``."""
    cands = np.atleast_2d(np.asarray(candidates, dtype=float))
    if cands.size == 0:
        raise DomainError("candidate list must not be empty")
    return max(mom_increment(data, g, c, loss, p).value for c in cands)


def _tk_all(values: np.ndarray, p: BlockPartition) -> np.ndarray:
    """``T_K`` for every candidate from the per-point loss matrix ``values``.

    Row sums are accumulated per block in index order exactly as
    :func:`minmax_mom.mom.block_means` does, so the result matches
    :func:`lepski_tk` bit for bit.
    """
    c, n = values.shape
    k, m = p.k, p.block_size
    r = median_rank(k)
    offsets = (np.arange(c)[:, None] * (k + 1) + (p.labels + 1)[None, :]).ravel()
    out = np.empty(c)
    for i in range(c):
        diff = (values[i][None, :] - values).ravel()
        sums = np.bincount(offsets, weights=diff, minlength=c * (k + 1)).reshape(c, k + 1)[:, 1:]
        means = sums / m
        out[i] = np.partition(means, r, axis=1)[:, r].max()
    return out


def lepski_select(data, loss: LossSpec, cfg: LepskiConfig) -> Tuple[int, np.ndarray]:
    """Smallest grid ``K`` whose tail intersection of ``R_J`` is nonempty.

    Returns that ``K`` and the lowest-index candidate in the intersection.
    Raises :class:`SelectionError` when every tail intersection is empty.
    """
    cands = cfg.candidates
    if cands.shape[1] != data.d:
        raise DomainError(f"candidates have dimension {cands.shape[1]}, data has {data.d}")
    if cfg.k_grid[-1] > data.n:
        raise DomainError(f"K={cfg.k_grid[-1]} exceeds n={data.n}")
    values = loss.value(data.x @ cands.T, data.y[:, None]).T
    admissible = {}
    for k in cfg.k_grid:
        p = partition(data.n, k, seed=cfg.seed, strategy=cfg.strategy)
        admissible[k] = _tk_all(values, p) <= float(cfg.thresholds[k])
    tail = np.ones(len(cands), dtype=bool)
    chosen = None
    for k in reversed(cfg.k_grid):
        tail = tail & admissible[k]
        if not tail.any():
            break
        chosen = (k, int(np.argmax(tail)))
    if chosen is None:
        raise SelectionError("no K has a nonempty tail intersection; thresholds are too tight")
    return chosen[0], cands[chosen[1]].copy()
