"""Block partitions and median-of-means estimates.

A partition of ``{0, ..., n-1}`` into ``k`` blocks of ``n // k`` indices is
stored as a label vector: ``labels[i]`` is the block of index ``i`` or ``-1``
when ``i`` belongs to the ``n mod k`` dropped remainder. Block means are
accumulated left to right in increasing index order, so the mean reported for
the median block is bit-for-bit the mean of ``values[blocks[j]]`` computed by
:func:`block_mean`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from ._seeding import make_rng
from .exceptions import DomainError


class PartitionStrategy(str, Enum):
    CONTIGUOUS = "contiguous"
    SHUFFLED = "shuffled"


@dataclass(frozen=True, eq=False)
class BlockPartition:
    """``k`` disjoint blocks of equal size over ``n`` indices."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.intp)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        if self.k < 1 or self.k > labels.size:
            raise DomainError(f"block count k={self.k} must satisfy 1 <= k <= n={labels.size}")

    @classmethod
    def from_blocks(cls, blocks, n: int) -> "BlockPartition":
        blocks = [np.asarray(b, dtype=np.intp) for b in blocks]
        sizes = {b.size for b in blocks}
        if len(sizes) != 1 or 0 in sizes:
            raise DomainError("blocks must be nonempty and of equal size")
        labels = np.full(n, -1, dtype=np.intp)
        for j, b in enumerate(blocks):
            if b.size and (b.min() < 0 or b.max() >= n):
                raise DomainError("block index out of range")
            if np.any(labels[b] != -1) or np.unique(b).size != b.size:
                raise DomainError("blocks must be disjoint")
            labels[b] = j
        return cls(labels, len(blocks))

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def block_size(self) -> int:
        return self.n // self.k

    @cached_property
    def blocks(self) -> np.ndarray:
        """``(k, block_size)`` array; row ``j`` lists block ``j`` in ascending order."""
        order = np.argsort(self.labels, kind="stable")
        kept = order[self.n - self.k * self.block_size:]
        out = kept.reshape(self.k, self.block_size)
        out.setflags(write=False)
        return out

    def block(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.labels == j)


@dataclass(frozen=True)
class MomValue:
    value: float
    median_block: int


def _labels_for(n: int, k: int, perm=None) -> np.ndarray:
    m = n // k
    labels = np.full(n, -1, dtype=np.intp)
    ids = np.arange(k * m, dtype=np.intp) // m
    if perm is None:
        labels[: k * m] = ids
    else:
        labels[perm[: k * m]] = ids
    return labels


def partition(n: int, k: int, seed: int = 0, strategy="contiguous") -> BlockPartition:
    """Split ``range(n)`` into ``k`` blocks of ``n // k`` indices.

    ``contiguous`` fills blocks in index order; ``shuffled`` first applies a
    uniform permutation drawn from ``seed``. The last ``n mod k`` positions of
    the (possibly permuted) order are dropped.

    >>> partition(4, 2).blocks.tolist()
    [[0, 1], [2, 3]]
    """
    n, k = int(n), int(k)
    if k < 1 or k > n:
        raise DomainError(f"block count k={k} must satisfy 1 <= k <= n={n}")
    strategy = PartitionStrategy(strategy)
    if strategy is PartitionStrategy.CONTIGUOUS:
        return BlockPartition(_labels_for(n, k), k)
    perm = make_rng(seed).permutation(n)
    return BlockPartition(_labels_for(n, k, perm), k)


def random_partition(rng: np.random.Generator, n: int, k: int) -> BlockPartition:
    """Uniformly random equipartition drawn from an existing generator."""
    return BlockPartition(_labels_for(n, k, rng.permutation(n)), k)


def block_mean(values) -> float:
    """Left-to-right mean, the summation used for every block mean."""
    values = np.asarray(values, dtype=float)
    total = np.bincount(np.zeros(values.size, dtype=np.intp), weights=values, minlength=1)[0]
    return float(total / values.size)


def block_means(values, p: BlockPartition) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != (p.n,):
        raise DomainError(f"expected {p.n} values, got shape {values.shape}")
    sums = np.bincount(p.labels + 1, weights=values, minlength=p.k + 1)[1:]
    return sums / p.block_size


def median_rank(k: int, upper: bool = False) -> int:
    """Zero-based position of the median among ``k`` sorted block means."""
    return k // 2 if upper else (k + 1) // 2 - 1


def select_median(means, upper: bool = False) -> MomValue:
    """Median of ``means`` and the lowest block index attaining it."""
    means = np.asarray(means, dtype=float)
    r = median_rank(means.size, upper)
    v = np.partition(means, r)[r]
    return MomValue(float(v), int(np.argmax(means == v)))


def mom(values, p: BlockPartition, upper: bool = False) -> MomValue:
    """Median of the ``k`` block means of ``values``.

    The lower median (rank ``ceil(k/2)``) is used unless ``upper`` is set, so
    the result is always the mean of an actual block.

    >>> p = partition(4, 2)
    >>> mom([1.0, 2.0, 3.0, 100.0], p)
    MomValue(value=1.5, median_block=0)
    """
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise DomainError("MOM input contains non-finite values")
    return select_median(block_means(values, p), upper)


def increments(data, t, t2, loss, check: bool = True) -> np.ndarray:
    """Per-point ``l(<x_i, t>, y_i) - l(<x_i, t2>, y_i)``."""
    x = data.x
    t = np.asarray(t, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    if t.shape != (x.shape[1],) or t2.shape != (x.shape[1],):
        raise DomainError(
            f"parameter dimension mismatch: expected ({x.shape[1]},), got {t.shape} and {t2.shape}"
        )
    return loss.value(x @ t, data.y, check=check) - loss.value(x @ t2, data.y, check=False)


def mom_increment(data, t, t2, loss, p: BlockPartition, upper: bool = False) -> MomValue:
    """MOM estimate of the incremental risk ``P(l_t - l_t2)``."""
    if p.n != data.n:
        raise DomainError(f"partition covers {p.n} points, dataset has {data.n}")
    return mom(increments(data, t, t2, loss), p, upper)
